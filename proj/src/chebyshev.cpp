#include "horseshoe/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hs {

namespace {

// Chebyshev coefficients of the degree-n interpolant at Lobatto nodes.
std::vector<double> lobatto_transform(const std::vector<double>& f) {
    int n = static_cast<int>(f.size()) - 1;
    std::vector<double> c(f.size(), 0.0);
    if (n == 0) {
        c[0] = f[0];
        return c;
    }
    for (int j = 0; j <= n; ++j) {
        double s = 0.0;
        for (int k = 0; k <= n; ++k) {
            double w = (k == 0 || k == n) ? 0.5 : 1.0;
            s += w * f[k] * std::cos(std::numbers::pi * j * k / n);
        }
        c[j] = 2.0 * s / n;
    }
    c[0] *= 0.5;
    c[n] *= 0.5;
    return c;
}

void cheb_basis(double s, int n, std::vector<double>& t, std::vector<double>& dt, std::vector<double>& ddt) {
    t.assign(n + 1, 0.0);
    dt.assign(n + 1, 0.0);
    ddt.assign(n + 1, 0.0);
    t[0] = 1.0;
    if (n >= 1) {
        t[1] = s;
        dt[1] = 1.0;
    }
    for (int k = 1; k < n; ++k) {
        t[k + 1] = 2.0 * s * t[k] - t[k - 1];
        dt[k + 1] = 2.0 * t[k] + 2.0 * s * dt[k] - dt[k - 1];
        ddt[k + 1] = 4.0 * dt[k] + 2.0 * s * ddt[k] - ddt[k - 1];
    }
}

std::vector<double> derivative_coeffs(const std::vector<double>& c) {
    int n = static_cast<int>(c.size()) - 1;
    if (n == 0) return {0.0};
    std::vector<double> d(n + 1, 0.0);
    for (int k = n; k >= 1; --k) {
        double next = (k + 1 <= n) ? d[k + 1] : 0.0;
        d[k - 1] = next + 2.0 * k * c[k];
    }
    d[0] *= 0.5;
    d.resize(n);
    return d;
}

}  // namespace

std::vector<double> lobatto_nodes(int n) {
    std::vector<double> s(n + 1);
    if (n == 0) {
        s[0] = 0.0;
        return s;
    }
    for (int k = 0; k <= n; ++k) s[k] = std::cos(std::numbers::pi * k / n);
    // Exact endpoints and centre keep affine data exact.
    s[0] = 1.0;
    s[n] = -1.0;
    if (n % 2 == 0) s[n / 2] = 0.0;
    return s;
}

double to_unit(const Interval& dom, double v) { return (2.0 * v - dom.lo - dom.hi) / (dom.hi - dom.lo); }

double from_unit(const Interval& dom, double s) { return dom.mid() + 0.5 * dom.length() * s; }

// ---------------------------------------------------------------- Cheb1

Cheb1::Cheb1(Interval dom, std::vector<double> coeffs) : dom_(dom), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.push_back(0.0);
}

Cheb1 Cheb1::constant(Interval dom, double c) { return Cheb1(dom, {c}); }

Cheb1 Cheb1::fit(Interval dom, int degree, const std::function<double(double)>& f) {
    auto s = lobatto_nodes(degree);
    std::vector<double> vals(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) vals[k] = f(from_unit(dom, s[k]));
    return Cheb1(dom, lobatto_transform(vals));
}

double Cheb1::operator()(double v) const {
    double s = to_unit(dom_, v);
    double b1 = 0.0, b2 = 0.0;
    for (int k = degree(); k >= 1; --k) {
        double b0 = 2.0 * s * b1 - b2 + coeffs_[k];
        b2 = b1;
        b1 = b0;
    }
    return s * b1 - b2 + coeffs_[0];
}

Jet1 Cheb1::jet(double v) const {
    int n = degree();
    std::vector<double> t, dt, ddt;
    cheb_basis(to_unit(dom_, v), n, t, dt, ddt);
    double sc = 2.0 / dom_.length();
    Jet1 j;
    for (int k = 0; k <= n; ++k) {
        j.v += coeffs_[k] * t[k];
        j.d += coeffs_[k] * dt[k];
        j.dd += coeffs_[k] * ddt[k];
    }
    j.d *= sc;
    j.dd *= sc * sc;
    return j;
}

Cheb1 Cheb1::derivative() const {
    auto d = derivative_coeffs(coeffs_);
    double sc = 2.0 / dom_.length();
    for (auto& v : d) v *= sc;
    return Cheb1(dom_, d);
}

// ---------------------------------------------------------- ScalarField2

ScalarField2::ScalarField2(Rect dom, int degree_y, int degree_x, std::vector<double> coeffs)
    : dom_(dom), ny_(degree_y), nx_(degree_x), c_(std::move(coeffs)) {
    if (c_.size() != static_cast<std::size_t>(ny_ + 1) * (nx_ + 1))
        throw std::invalid_argument("ScalarField2: coefficient count does not match degrees");
}

ScalarField2 ScalarField2::constant(const Rect& dom, double c) { return ScalarField2(dom, 0, 0, {c}); }

ScalarField2 ScalarField2::affine(const Rect& dom, double c, double cy, double cx) {
    double yh = 0.5 * dom.y.length(), xh = 0.5 * dom.x.length();
    std::vector<double> k(4, 0.0);
    k[0] = c + cy * dom.y.mid() + cx * dom.x.mid();
    k[1] = cx * xh;
    k[2] = cy * yh;
    k[3] = 0.0;
    return ScalarField2(dom, 1, 1, k);
}

ScalarField2 ScalarField2::from_node_values(const Rect& dom, int degree_y, int degree_x,
                                            const std::vector<double>& values) {
    int ny = degree_y, nx = degree_x;
    std::vector<double> tmp(static_cast<std::size_t>(ny + 1) * (nx + 1));
    std::vector<double> row(nx + 1);
    for (int i = 0; i <= ny; ++i) {
        for (int j = 0; j <= nx; ++j) row[j] = values[static_cast<std::size_t>(i) * (nx + 1) + j];
        auto c = lobatto_transform(row);
        for (int j = 0; j <= nx; ++j) tmp[static_cast<std::size_t>(i) * (nx + 1) + j] = c[j];
    }
    std::vector<double> out(tmp.size());
    std::vector<double> col(ny + 1);
    for (int j = 0; j <= nx; ++j) {
        for (int i = 0; i <= ny; ++i) col[i] = tmp[static_cast<std::size_t>(i) * (nx + 1) + j];
        auto c = lobatto_transform(col);
        for (int i = 0; i <= ny; ++i) out[static_cast<std::size_t>(i) * (nx + 1) + j] = c[i];
    }
    return ScalarField2(dom, ny, nx, out);
}

ScalarField2 ScalarField2::fit(const Rect& dom, int degree_y, int degree_x,
                               const std::function<double(double, double)>& f) {
    auto sy = lobatto_nodes(degree_y), sx = lobatto_nodes(degree_x);
    std::vector<double> vals(sy.size() * sx.size());
    for (std::size_t i = 0; i < sy.size(); ++i)
        for (std::size_t j = 0; j < sx.size(); ++j)
            vals[i * sx.size() + j] = f(from_unit(dom.y, sy[i]), from_unit(dom.x, sx[j]));
    ScalarField2 out = from_node_values(dom, degree_y, degree_x, vals);
    out.closed_form = f;
    return out;
}

void ScalarField2::refresh() {
    if (!closed_form) return;
    auto cf = closed_form;
    *this = fit(dom_, ny_, nx_, cf);
}

double ScalarField2::operator()(double y, double x) const {
    double sy = to_unit(dom_.y, y), sx = to_unit(dom_.x, x);
    // Clenshaw in x for each y-row, then in y.
    auto clenshaw = [](const double* c, int n, double s, std::size_t stride) {
        double b1 = 0.0, b2 = 0.0;
        for (int k = n; k >= 1; --k) {
            double b0 = 2.0 * s * b1 - b2 + c[k * stride];
            b2 = b1;
            b1 = b0;
        }
        return s * b1 - b2 + c[0];
    };
    if (ny_ == 0) return clenshaw(c_.data(), nx_, sx, 1);
    std::vector<double> rows(ny_ + 1);
    for (int i = 0; i <= ny_; ++i) rows[i] = clenshaw(c_.data() + static_cast<std::size_t>(i) * (nx_ + 1), nx_, sx, 1);
    return clenshaw(rows.data(), ny_, sy, 1);
}

Jet2 ScalarField2::jet(double y, double x) const {
    std::vector<double> ty, dty, ddty, tx, dtx, ddtx;
    cheb_basis(to_unit(dom_.y, y), ny_, ty, dty, ddty);
    cheb_basis(to_unit(dom_.x, x), nx_, tx, dtx, ddtx);
    double v = 0, gy = 0, gx = 0, hyy = 0, hxy = 0, hxx = 0;
    for (int i = 0; i <= ny_; ++i) {
        double r0 = 0, r1 = 0, r2 = 0;
        const double* row = c_.data() + static_cast<std::size_t>(i) * (nx_ + 1);
        for (int j = 0; j <= nx_; ++j) {
            r0 += row[j] * tx[j];
            r1 += row[j] * dtx[j];
            r2 += row[j] * ddtx[j];
        }
        v += ty[i] * r0;
        gx += ty[i] * r1;
        hxx += ty[i] * r2;
        gy += dty[i] * r0;
        hxy += dty[i] * r1;
        hyy += ddty[i] * r0;
    }
    double ky = 2.0 / dom_.y.length(), kx = 2.0 / dom_.x.length();
    Jet2 j;
    j.v = v;
    j.y = gy * ky;
    j.x = gx * kx;
    j.yy = hyy * ky * ky;
    j.xy = hxy * ky * kx;
    j.xx = hxx * kx * kx;
    return j;
}

ScalarField2 ScalarField2::dx() const {
    int nd = std::max(nx_ - 1, 0);
    std::vector<double> out(static_cast<std::size_t>(ny_ + 1) * (nd + 1), 0.0);
    double k = 2.0 / dom_.x.length();
    for (int i = 0; i <= ny_; ++i) {
        std::vector<double> row(c_.begin() + static_cast<std::ptrdiff_t>(i) * (nx_ + 1),
                                c_.begin() + static_cast<std::ptrdiff_t>(i + 1) * (nx_ + 1));
        auto d = derivative_coeffs(row);
        for (int j = 0; j <= nd; ++j) out[static_cast<std::size_t>(i) * (nd + 1) + j] = d[j] * k;
    }
    return ScalarField2(dom_, ny_, nd, out);
}

ScalarField2 ScalarField2::dy() const {
    int nd = std::max(ny_ - 1, 0);
    std::vector<double> out(static_cast<std::size_t>(nd + 1) * (nx_ + 1), 0.0);
    double k = 2.0 / dom_.y.length();
    for (int j = 0; j <= nx_; ++j) {
        std::vector<double> col(ny_ + 1);
        for (int i = 0; i <= ny_; ++i) col[i] = coeff(i, j);
        auto d = derivative_coeffs(col);
        for (int i = 0; i <= nd; ++i) out[static_cast<std::size_t>(i) * (nx_ + 1) + j] = d[i] * k;
    }
    return ScalarField2(dom_, nd, nx_, out);
}

std::vector<double> ScalarField2::eval_grid(const std::vector<double>& ys, const std::vector<double>& xs) const {
    std::size_t my = ys.size(), mx = xs.size();
    std::vector<double> Ty(static_cast<std::size_t>(ny_ + 1) * my), Tx(static_cast<std::size_t>(nx_ + 1) * mx);
    std::vector<double> t, dt, ddt;
    for (std::size_t a = 0; a < my; ++a) {
        cheb_basis(to_unit(dom_.y, ys[a]), ny_, t, dt, ddt);
        for (int i = 0; i <= ny_; ++i) Ty[i * my + a] = t[i];
    }
    for (std::size_t b = 0; b < mx; ++b) {
        cheb_basis(to_unit(dom_.x, xs[b]), nx_, t, dt, ddt);
        for (int j = 0; j <= nx_; ++j) Tx[j * mx + b] = t[j];
    }
    std::vector<double> tmp(static_cast<std::size_t>(ny_ + 1) * mx, 0.0);
    for (int i = 0; i <= ny_; ++i)
        for (int j = 0; j <= nx_; ++j) {
            double c = coeff(i, j);
            if (c == 0.0) continue;
            for (std::size_t b = 0; b < mx; ++b) tmp[i * mx + b] += c * Tx[j * mx + b];
        }
    std::vector<double> out(my * mx, 0.0);
    for (std::size_t a = 0; a < my; ++a)
        for (int i = 0; i <= ny_; ++i) {
            double w = Ty[i * my + a];
            for (std::size_t b = 0; b < mx; ++b) out[a * mx + b] += w * tmp[i * mx + b];
        }
    return out;
}

ScalarField2 ScalarField2::trimmed(double tol) const {
    double scale = 0.0;
    for (double v : c_) scale = std::max(scale, std::abs(v));
    double cut = tol * scale;
    int ky = ny_, kx = nx_;
    auto row_small = [&](int i) {
        for (int j = 0; j <= kx; ++j)
            if (std::abs(coeff(i, j)) > cut) return false;
        return true;
    };
    auto col_small = [&](int j) {
        for (int i = 0; i <= ky; ++i)
            if (std::abs(coeff(i, j)) > cut) return false;
        return true;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        if (ky > 0 && row_small(ky)) {
            --ky;
            changed = true;
        }
        if (kx > 0 && col_small(kx)) {
            --kx;
            changed = true;
        }
    }
    if (ky == ny_ && kx == nx_) return *this;
    std::vector<double> out(static_cast<std::size_t>(ky + 1) * (kx + 1));
    for (int i = 0; i <= ky; ++i)
        for (int j = 0; j <= kx; ++j) out[static_cast<std::size_t>(i) * (kx + 1) + j] = coeff(i, j);
    ScalarField2 f(dom_, ky, kx, out);
    f.closed_form = closed_form;
    return f;
}

bool ScalarField2::is_affine() const {
    if (ny_ > 1 || nx_ > 1) return false;
    if (ny_ == 1 && nx_ == 1 && coeff(1, 1) != 0.0) return false;
    return true;
}

void ScalarField2::affine_coeffs(double& c, double& cy, double& cx) const {
    double k00 = coeff(0, 0);
    double k01 = nx_ >= 1 ? coeff(0, 1) : 0.0;
    double k10 = ny_ >= 1 ? coeff(1, 0) : 0.0;
    cx = k01 / (0.5 * dom_.x.length());
    cy = k10 / (0.5 * dom_.y.length());
    c = k00 - cy * dom_.y.mid() - cx * dom_.x.mid();
}

// ------------------------------------------------------------- fitting

FitReport fit_field(const Rect& dom, const std::vector<std::vector<double>>& samples, int degree_y,
                    int degree_x) {
    if (degree_y < 1 || degree_x < 1) throw std::invalid_argument("fit_field: degrees must be >= 1");
    int my = static_cast<int>(samples.size()) - 1;
    if (my < 0 || samples[0].empty()) throw std::invalid_argument("fit_field: empty sample grid");
    int mx = static_cast<int>(samples[0].size()) - 1;
    if (my < degree_y || mx < degree_x)
        throw std::invalid_argument("fit_field: sample grid smaller than requested degrees");
    std::vector<double> vals(static_cast<std::size_t>(my + 1) * (mx + 1));
    for (int i = 0; i <= my; ++i) {
        if (static_cast<int>(samples[i].size()) != mx + 1)
            throw std::invalid_argument("fit_field: ragged sample grid");
        for (int j = 0; j <= mx; ++j) vals[static_cast<std::size_t>(i) * (mx + 1) + j] = samples[i][j];
    }
    ScalarField2 full = ScalarField2::from_node_values(dom, my, mx, vals);
    double kept = 0.0, dropped = 0.0;
    std::vector<double> out(static_cast<std::size_t>(degree_y + 1) * (degree_x + 1));
    for (int i = 0; i <= my; ++i)
        for (int j = 0; j <= mx; ++j) {
            double c = full.coeff(i, j);
            if (i <= degree_y && j <= degree_x) {
                out[static_cast<std::size_t>(i) * (degree_x + 1) + j] = c;
                kept = std::max(kept, std::abs(c));
            } else {
                dropped = std::max(dropped, std::abs(c));
            }
        }
    FitReport r;
    r.field = ScalarField2(dom, degree_y, degree_x, out);
    r.tail = kept > 0.0 ? dropped / kept : dropped;
    r.degree_too_low = r.tail > kFitTolerance;
    return r;
}

AdaptiveFit fit_adaptive(const Rect& dom, const BatchEval& eval, double tol, int max_degree) {
    AdaptiveFit best;
    std::vector<double> prev_vals;
    int prev_n = 0;
    for (int n = 4; n <= max_degree; n *= 2) {
        auto s = lobatto_nodes(n);
        std::vector<double> vals(static_cast<std::size_t>(n + 1) * (n + 1));
        PointBatch pts;
        std::vector<std::size_t> slots;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                // Nested grids: even indices were evaluated at the previous degree.
                if (prev_n > 0 && i % 2 == 0 && j % 2 == 0) {
                    vals[static_cast<std::size_t>(i) * (n + 1) + j] =
                        prev_vals[static_cast<std::size_t>(i / 2) * (prev_n + 1) + j / 2];
                    continue;
                }
                pts.emplace_back(from_unit(dom.y, s[i]), from_unit(dom.x, s[j]));
                slots.push_back(static_cast<std::size_t>(i) * (n + 1) + j);
            }
        auto got = eval(pts);
        for (std::size_t k = 0; k < slots.size(); ++k) vals[slots[k]] = got[k];
        ScalarField2 f = ScalarField2::from_node_values(dom, n, n, vals);
        double scale = 0.0, tail = 0.0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                double c = std::abs(f.coeff(i, j));
                scale = std::max(scale, c);
                if (i >= n - 1 || j >= n - 1) tail = std::max(tail, c);
            }
        double rel = scale > 0.0 ? tail / scale : 0.0;
        best.field = f;
        best.tail = rel;
        best.converged = rel <= tol;
        prev_vals = std::move(vals);
        prev_n = n;
        if (best.converged) break;
    }
    best.field = best.field.trimmed(1e-15);
    return best;
}

// -------------------------------------------------------------- sup norm

namespace {

std::vector<double> uniform(const Interval& iv, int m) {
    std::vector<double> v(m);
    for (int k = 0; k < m; ++k) v[k] = iv.lo + iv.length() * k / (m - 1);
    v[m - 1] = iv.hi;
    return v;
}

double golden_max(const std::function<double(double)>& g, double a, double b, double& arg) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = g(c), fd = g(d);
    for (int it = 0; it < 60 && (b - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    double fa = g(a), fb = g(b);
    double best = std::max({fa, fb, fc, fd});
    if (best == fa) arg = a;
    else if (best == fb) arg = b;
    else if (best == fc) arg = c;
    else arg = d;
    return best;
}

double polish(const Rect& dom, const std::function<double(double, double)>& f, double y, double x, double hy,
              double hx) {
    Interval by{std::max(dom.y.lo, y - hy), std::min(dom.y.hi, y + hy)};
    Interval bx{std::max(dom.x.lo, x - hx), std::min(dom.x.hi, x + hx)};
    double best = std::abs(f(y, x));
    for (int sweep = 0; sweep < 4; ++sweep) {
        double ny = y, nx = x;
        golden_max([&](double v) { return std::abs(f(v, x)); }, by.lo, by.hi, ny);
        if (std::abs(f(ny, x)) >= best) {
            y = ny;
            best = std::abs(f(y, x));
        }
        golden_max([&](double v) { return std::abs(f(y, v)); }, bx.lo, bx.hi, nx);
        if (std::abs(f(y, nx)) >= best) {
            x = nx;
            best = std::abs(f(y, x));
        }
    }
    return best;
}

double sup_on_grid(const Rect& dom, const std::function<double(double, double)>& f, const GridEval& grid,
                   int start) {
    double prev = -1.0;
    for (int m = start; m <= 1025; m = 2 * m - 1) {
        auto ys = uniform(dom.y, m), xs = uniform(dom.x, m);
        auto vals = grid(ys, xs);
        // Polish the three largest grid values.
        std::vector<std::size_t> idx(vals.size());
        for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
        std::size_t top = std::min<std::size_t>(3, idx.size());
        std::partial_sort(idx.begin(), idx.begin() + top, idx.end(),
                          [&](std::size_t a, std::size_t b) { return std::abs(vals[a]) > std::abs(vals[b]); });
        double best = std::abs(vals[idx[0]]);
        double hy = dom.y.length() / (m - 1), hx = dom.x.length() / (m - 1);
        for (std::size_t k = 0; k < top; ++k) {
            std::size_t a = idx[k] / static_cast<std::size_t>(m), b = idx[k] % static_cast<std::size_t>(m);
            best = std::max(best, polish(dom, f, ys[a], xs[b], hy, hx));
        }
        if (prev >= 0.0 && std::abs(best - prev) <= 1e-10 * std::max(best, 1e-300)) return std::max(best, prev);
        prev = std::max(prev, best);
    }
    return prev;
}

}  // namespace

double sup_abs(const ScalarField2& f) {
    const Rect& d = f.domain();
    if (f.is_affine() || (f.degree_y() <= 1 && f.degree_x() <= 1)) {
        // Bilinear functions attain extrema at corners.
        return std::max({std::abs(f(d.y.lo, d.x.lo)), std::abs(f(d.y.lo, d.x.hi)), std::abs(f(d.y.hi, d.x.lo)),
                         std::abs(f(d.y.hi, d.x.hi))});
    }
    return sup_on_grid(
        d, [&](double y, double x) { return f(y, x); },
        [&](const std::vector<double>& ys, const std::vector<double>& xs) { return f.eval_grid(ys, xs); }, 65);
}

double sup_abs_fn(const Rect& dom, const std::function<double(double, double)>& f, int start_grid) {
    return sup_on_grid(
        dom, f,
        [&](const std::vector<double>& ys, const std::vector<double>& xs) {
            std::vector<double> out(ys.size() * xs.size());
            for (std::size_t a = 0; a < ys.size(); ++a)
                for (std::size_t b = 0; b < xs.size(); ++b) out[a * xs.size() + b] = f(ys[a], xs[b]);
            return out;
        },
        start_grid);
}

double sup_abs_grid(const Rect& dom, const std::function<double(double, double)>& f, const GridEval& grid,
                    int start_grid) {
    return sup_on_grid(dom, f, grid, start_grid);
}

}  // namespace hs
