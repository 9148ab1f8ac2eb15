#include "horseshoe/affine_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "horseshoe/errors.hpp"
#include "horseshoe/fitting.hpp"
#include "horseshoe/parallel.hpp"

namespace hs {

// ---------------------------------------------------------------- Strip

namespace {

std::vector<double> sample_points(const Interval& iv, int m) {
    std::vector<double> v(m);
    for (int k = 0; k < m; ++k) v[k] = iv.lo + iv.length() * k / (m - 1);
    return v;
}

}  // namespace

double Strip::max_width() const {
    double w = 0.0;
    for (double s : sample_points(over, 65)) w = std::max(w, width_at(s));
    return w;
}

double Strip::min_width() const {
    double w = width_at(over.lo);
    for (double s : sample_points(over, 65)) w = std::min(w, width_at(s));
    return w;
}

bool Strip::valid(double slope_bound) const {
    Cheb1 dl = lower.derivative(), du = upper.derivative();
    for (double s : sample_points(over, 65)) {
        if (!(lower(s) < upper(s))) return false;
        if (std::abs(dl(s)) > slope_bound || std::abs(du(s)) > slope_bound) return false;
    }
    return true;
}

bool Strip::contains(const Strip& other, double tol) const {
    if (other.chart != chart || other.orientation != orientation) return false;
    Interval ov{std::max(over.lo, other.over.lo), std::min(over.hi, other.over.hi)};
    if (ov.hi < ov.lo) return false;
    for (double s : sample_points(ov, 33)) {
        if (other.lower(s) < lower(s) - tol) return false;
        if (other.upper(s) > upper(s) + tol) return false;
    }
    return true;
}

bool Strip::disjoint(const Strip& other) const {
    if (other.chart != chart || other.orientation != orientation) return true;
    Interval ov{std::max(over.lo, other.over.lo), std::min(over.hi, other.over.hi)};
    if (ov.hi < ov.lo) return true;
    for (double s : sample_points(ov, 33)) {
        bool apart = other.upper(s) < lower(s) || other.lower(s) > upper(s);
        if (!apart) return false;
    }
    return true;
}

// ----------------------------------------------------------- ImplicitMap

Jet2 ImplicitMap::jetA(double y, double x) const {
    Jet2 jx = Ax.jet(y, x), jy = Ay.jet(y, x);
    Jet2 j;
    j.v = A(y, x);
    j.x = jx.v;
    j.y = jy.v;
    j.xx = jx.x;
    j.xy = jx.y;
    j.yy = jy.y;
    return j;
}

Jet2 ImplicitMap::jetB(double y, double x) const {
    Jet2 jx = Bx.jet(y, x), jy = By.jet(y, x);
    Jet2 j;
    j.v = B(y, x);
    j.x = jx.v;
    j.y = jy.v;
    j.xx = jx.x;
    j.xy = jy.x;
    j.yy = jy.y;
    return j;
}

bool ImplicitMap::is_affine() const { return A.is_affine() && B.is_affine(); }

void rebuild_strips(ImplicitMap& F) {
    const Rect& r = F.rect;
    auto edge_fit = [](const Interval& iv, bool affine, const std::function<double(double)>& g) {
        return Cheb1::fit(iv, affine ? 1 : 16, g);
    };
    bool aff_a = F.A.is_affine(), aff_b = F.B.is_affine();
    double sa = F.Ax(r.y.mid(), r.x.mid());
    double xl = sa >= 0 ? r.x.lo : r.x.hi, xh = sa >= 0 ? r.x.hi : r.x.lo;
    F.domain.orientation = Strip::Orientation::Vertical;
    F.domain.chart = F.src;
    F.domain.over = r.y;
    F.domain.lower = edge_fit(r.y, aff_a, [&](double y) { return F.A(y, xl); });
    F.domain.upper = edge_fit(r.y, aff_a, [&](double y) { return F.A(y, xh); });
    double sb = F.By(r.y.mid(), r.x.mid());
    double yl = sb >= 0 ? r.y.lo : r.y.hi, yh = sb >= 0 ? r.y.hi : r.y.lo;
    F.image.orientation = Strip::Orientation::Horizontal;
    F.image.chart = F.dst;
    F.image.over = r.x;
    F.image.lower = edge_fit(r.x, aff_b, [&](double x) { return F.B(yl, x); });
    F.image.upper = edge_fit(r.x, aff_b, [&](double x) { return F.B(yh, x); });
}

ImplicitMap make_map(const Rect& rect, int src, int dst, ScalarField2 A, ScalarField2 B, ScalarField2 Ax,
                     ScalarField2 Ay, ScalarField2 Bx, ScalarField2 By) {
    ImplicitMap F;
    F.rect = rect;
    F.src = src;
    F.dst = dst;
    F.A = std::move(A);
    F.B = std::move(B);
    F.Ax = std::move(Ax);
    F.Ay = std::move(Ay);
    F.Bx = std::move(Bx);
    F.By = std::move(By);
    rebuild_strips(F);
    return F;
}

ImplicitMap make_map(const Rect& rect, int src, int dst, ScalarField2 A, ScalarField2 B) {
    ScalarField2 Ax = A.dx().trimmed(0.0), Ay = A.dy().trimmed(0.0);
    ScalarField2 Bx = B.dx().trimmed(0.0), By = B.dy().trimmed(0.0);
    return make_map(rect, src, dst, std::move(A), std::move(B), std::move(Ax), std::move(Ay), std::move(Bx),
                    std::move(By));
}

ImplicitMap make_affine_map(const Rect& rect, int src, int dst, double a0, double ay, double ax, double b0,
                            double by, double bx) {
    return make_map(rect, src, dst, ScalarField2::affine(rect, a0, ay, ax), ScalarField2::affine(rect, b0, by, bx),
                    ScalarField2::constant(rect, ax), ScalarField2::constant(rect, ay),
                    ScalarField2::constant(rect, bx), ScalarField2::constant(rect, by));
}

ImplicitMap identity_map(const Rect& rect, int chart) { return make_affine_map(rect, chart, chart, 0, 0, 1, 0, 1, 0); }

// ------------------------------------------------------------ diagnostics

Widths widths(const ImplicitMap& F) { return {sup_abs(F.Ax), sup_abs(F.By)}; }

ConeReport check_cone(const ImplicitMap& F, const ConeParams& c) {
    auto ys = sample_points(F.rect.y, 65), xs = sample_points(F.rect.x, 65);
    auto ax = F.Ax.eval_grid(ys, xs), ay = F.Ay.eval_grid(ys, xs);
    auto bx = F.Bx.eval_grid(ys, xs), by = F.By.eval_grid(ys, xs);
    ConeReport r;
    double worst = -1e300;
    for (std::size_t a = 0; a < ys.size(); ++a)
        for (std::size_t b = 0; b < xs.size(); ++b) {
            std::size_t k = a * xs.size() + b;
            double l1 = c.lambda * std::abs(ax[k]) + c.u * std::abs(ay[k]);
            double l2 = c.lambda * std::abs(by[k]) + c.v * std::abs(bx[k]);
            double l = std::max(l1, l2);
            if (l > worst) {
                worst = l;
                r.worst_y = ys[a];
                r.worst_x = xs[b];
            }
        }
    r.margin = 1.0 - worst;
    r.ok = worst <= 1.0;
    return r;
}

namespace {

double inf_abs_grid(const ScalarField2& f) {
    auto ys = sample_points(f.domain().y, 65), xs = sample_points(f.domain().x, 65);
    auto v = f.eval_grid(ys, xs);
    double m = 1e300;
    for (double e : v) m = std::min(m, std::abs(e));
    return m;
}

double sup_ratio(const Rect& dom, const ScalarField2& num, const ScalarField2* den) {
    auto point = [&](double y, double x) { return den ? num(y, x) / (*den)(y, x) : num(y, x); };
    auto grid = [&](const std::vector<double>& ys, const std::vector<double>& xs) {
        auto n = num.eval_grid(ys, xs);
        if (den) {
            auto d = den->eval_grid(ys, xs);
            for (std::size_t k = 0; k < n.size(); ++k) n[k] /= d[k];
        }
        return n;
    };
    return sup_abs_grid(dom, point, grid);
}

}  // namespace

double distortion(const ImplicitMap& F) {
    if (inf_abs_grid(F.Ax) < kDerivativeFloor || inf_abs_grid(F.By) < kDerivativeFloor)
        throw Error(ErrorCode::VanishingDerivative, "|A_x| or |B_y| below the derivative floor");
    if (F.is_affine()) return 0.0;
    ScalarField2 Axx = F.Ax.dx(), Axy = F.Ax.dy(), Ayy = F.Ay.dy();
    ScalarField2 Byy = F.By.dy(), Bxy = F.By.dx(), Bxx = F.Bx.dx();
    double d = 0.0;
    d = std::max(d, sup_ratio(F.rect, Axx, &F.Ax));
    d = std::max(d, sup_ratio(F.rect, Axy, &F.Ax));
    d = std::max(d, sup_ratio(F.rect, Ayy, nullptr));
    d = std::max(d, sup_ratio(F.rect, Byy, &F.By));
    d = std::max(d, sup_ratio(F.rect, Bxy, &F.By));
    d = std::max(d, sup_ratio(F.rect, Bxx, nullptr));
    return d;
}

// --------------------------------------------------------------- Newton

Newton1Result newton1(const std::function<void(double, double&, double&)>& fdf, double x0, double tol, int max_iter) {
    Newton1Result r;
    r.x = x0;
    for (int it = 0; it < max_iter; ++it) {
        double f = 0, df = 0;
        fdf(r.x, f, df);
        r.deriv = df;
        r.iters = it + 1;
        if (!std::isfinite(f) || !std::isfinite(df) || df == 0.0) return r;
        double step = f / df;
        r.x -= step;
        if (std::abs(step) <= tol * std::max(1.0, std::abs(r.x))) {
            fdf(r.x, f, df);
            r.deriv = df;
            r.converged = std::isfinite(r.x);
            return r;
        }
    }
    return r;
}

// ----------------------------------------------------------- from_diffeo

ImplicitMap from_diffeo(const PlanarDiffeo& phi, const Strip& P, const Rect& target, int src, int dst) {
    Rect rect{P.over, target.x};
    double width_tol = 1e-9 * std::max(1.0, P.max_width());
    auto node = [&](double y0, double x1, double* out) {
        double guess = 0.5 * (P.lower(y0) + P.upper(y0));
        double jac[4];
        double img[2];
        auto res = newton1(
            [&](double x0, double& f, double& df) {
                phi.eval(x0, y0, img, jac);
                f = img[0] - x1;
                df = jac[0];
            },
            guess);
        if (!res.converged || std::abs(res.deriv) < kDerivativeFloor)
            throw Error(ErrorCode::ProjectionNotInvertible, "Newton failed to invert the horizontal projection");
        double x0 = res.x;
        if (x0 < P.lower(y0) - width_tol || x0 > P.upper(y0) + width_tol)
            throw Error(ErrorCode::ProjectionNotInvertible, "preimage leaves the vertical strip");
        phi.eval(x0, y0, img, jac);
        double ax = 1.0 / jac[0];
        double ay = -jac[1] / jac[0];
        out[0] = x0;
        out[1] = img[1];
        out[2] = ax;
        out[3] = ay;
        out[4] = jac[2] * ax;
        out[5] = jac[3] + jac[2] * ay;
    };
    auto fit = fit_bundle(rect, 6, node, kMapFitTol);
    ImplicitMap F = make_map(rect, src, dst, fit.fields[0], fit.fields[1], fit.fields[2], fit.fields[3],
                             fit.fields[4], fit.fields[5]);
    F.fit_tail = fit.tail;
    return F;
}

// -------------------------------------------------------- simple_compose

ImplicitMap simple_compose(const ImplicitMap& F, const ImplicitMap& Fp) {
    if (F.dst != Fp.src) throw Error(ErrorCode::EmptyIntersection, "image chart differs from the next domain chart");
    Rect rect{F.rect.y, Fp.rect.x};
    double tol_x = 1e-9 * F.rect.x.length(), tol_y = 1e-9 * Fp.rect.y.length();
    if (F.is_affine() && Fp.is_affine()) {
        double a0, ay, ax, b0, by, bx, p0, py, px, q0, qy, qx;
        F.A.affine_coeffs(a0, ay, ax);
        F.B.affine_coeffs(b0, by, bx);
        Fp.A.affine_coeffs(p0, py, px);
        Fp.B.affine_coeffs(q0, qy, qx);
        double delta = 1.0 - py * bx;
        if (std::abs(delta) < kDeltaFloor) throw Error(ErrorCode::DeltaDegenerate, "|Delta| below floor");
        double k0 = (p0 + py * b0) / delta, ky = py * by / delta, kx = px / delta;
        double A0 = a0 + ax * k0, Ay = ay + ax * ky, Ax = ax * kx;
        double y0c = b0 + bx * k0, y0y = by + bx * ky, y0x = bx * kx;
        double B0 = q0 + qy * y0c, By = qy * y0y, Bx = qy * y0x + qx;
        for (double y : {rect.y.lo, rect.y.hi})
            for (double x : {rect.x.lo, rect.x.hi}) {
                double x1 = k0 + ky * y + kx * x;
                double y1 = y0c + y0y * y + y0x * x;
                if (!F.rect.x.contains(x1, tol_x) || !Fp.rect.y.contains(y1, tol_y))
                    throw Error(ErrorCode::EmptyIntersection, "strips do not meet");
            }
        ImplicitMap out = make_affine_map(rect, F.src, Fp.dst, A0, Ay, Ax, B0, By, Bx);
        out.cone = F.cone;
        out.cone.lambda = F.cone.lambda * Fp.cone.lambda;
        return out;
    }
    auto node = [&](double y0, double x2, double* out) {
        double x1 = Fp.A(F.B(y0, F.rect.x.mid()), x2);
        x1 = std::clamp(x1, F.rect.x.lo, F.rect.x.hi);
        double delta = 1.0;
        bool ok = false;
        for (int it = 0; it < kMaxNewtonIters; ++it) {
            double y1 = F.B(y0, x1);
            double r = x1 - Fp.A(y1, x2);
            delta = 1.0 - Fp.Ay(y1, x2) * F.Bx(y0, x1);
            if (std::abs(delta) < kDeltaFloor) throw Error(ErrorCode::DeltaDegenerate, "|Delta| below floor");
            double step = r / delta;
            x1 -= step;
            if (std::abs(step) <= kNewtonTol * std::max(1.0, std::abs(x1))) {
                ok = true;
                break;
            }
        }
        if (!ok) throw Error(ErrorCode::NewtonFailure, "simple composition elimination did not converge");
        double y1 = F.B(y0, x1);
        if (!F.rect.x.contains(x1, tol_x) || !Fp.rect.y.contains(y1, tol_y))
            throw Error(ErrorCode::EmptyIntersection, "strips do not meet");
        double ax = F.Ax(y0, x1), ay = F.Ay(y0, x1), bx = F.Bx(y0, x1), by = F.By(y0, x1);
        double pax = Fp.Ax(y1, x2), pay = Fp.Ay(y1, x2), pbx = Fp.Bx(y1, x2), pby = Fp.By(y1, x2);
        delta = 1.0 - pay * bx;
        if (std::abs(delta) < kDeltaFloor) throw Error(ErrorCode::DeltaDegenerate, "|Delta| below floor");
        out[0] = F.A(y0, x1);
        out[1] = Fp.B(y1, x2);
        out[2] = ax * pax / delta;
        out[3] = ay + ax * pay * by / delta;
        out[4] = pbx + pby * bx * pax / delta;
        out[5] = pby * by / delta;
    };
    auto fit = fit_bundle(rect, 6, node, kMapFitTol);
    ImplicitMap out = make_map(rect, F.src, Fp.dst, fit.fields[0], fit.fields[1], fit.fields[2], fit.fields[3],
                               fit.fields[4], fit.fields[5]);
    out.fit_tail = fit.tail;
    out.cone = F.cone;
    out.cone.lambda = F.cone.lambda * Fp.cone.lambda;
    return out;
}

// ----------------------------------------------------------- time_reverse

namespace {

ScalarField2 transpose(const ScalarField2& f) {
    int ny = f.degree_y(), nx = f.degree_x();
    std::vector<double> c(static_cast<std::size_t>(ny + 1) * (nx + 1));
    for (int i = 0; i <= ny; ++i)
        for (int j = 0; j <= nx; ++j) c[static_cast<std::size_t>(j) * (ny + 1) + i] = f.coeff(i, j);
    return ScalarField2(Rect{f.domain().x, f.domain().y}, nx, ny, c);
}

}  // namespace

ImplicitMap time_reverse(const ImplicitMap& F) {
    Rect r{F.rect.x, F.rect.y};
    ImplicitMap G = make_map(r, F.dst, F.src, transpose(F.B), transpose(F.A), transpose(F.By), transpose(F.Bx),
                             transpose(F.Ay), transpose(F.Ax));
    G.cone = ConeParams{F.cone.lambda, F.cone.v, F.cone.u};
    return G;
}

// -------------------------------------------------------------- formulas

std::map<std::string, double> simple_formulas(const Jet3& A, const Jet3& B, const Jet3& Ap, const Jet3& Bp) {
    std::map<std::string, double> f;
    double D = 1.0 - Ap.y * B.x;
    double Xx = Ap.x / D, Xy = Ap.y * B.y / D, Xt = (Ap.t + Ap.y * B.t) / D;
    double Yx = Ap.x * B.x / D, Yy = B.y / D, Yt = (B.t + Ap.t * B.x) / D;
    f["X_x"] = Xx;
    f["X_y"] = Xy;
    f["X_t"] = Xt;
    f["Y_x"] = Yx;
    f["Y_y"] = Yy;
    f["Y_t"] = Yt;
    f["A''_x"] = A.x * Ap.x / D;
    f["B''_y"] = Bp.y * B.y / D;
    f["A''_y"] = A.y + A.x * Xy;
    f["B''_x"] = Bp.x + Bp.y * Yx;
    f["A''_t"] = A.t + A.x * Xt;
    f["B''_t"] = Bp.t + Bp.y * Yt;
    double mDx = B.xx * Xx * Ap.y + B.x * Ap.xy + B.x * Ap.yy * Yx;
    double mDy = Ap.yy * Yy * B.x + Ap.y * B.xy + Ap.y * B.xx * Xy;
    double mDt = B.xt * Ap.y + B.xx * Xt * Ap.y + B.x * Ap.yt + B.x * Ap.yy * Yt;
    double Dx = -mDx, Dy = -mDy, Dt = -mDt;
    f["Delta_x"] = Dx;
    f["Delta_y"] = Dy;
    f["Delta_t"] = Dt;
    double lAx_x = A.xx / A.x, lAx_y = A.xy / A.x, lAx_t = A.xt / A.x;
    double lApx_x = Ap.xx / Ap.x, lApx_y = Ap.xy / Ap.x, lApx_t = Ap.xt / Ap.x;
    double lBy_y = B.yy / B.y, lBy_x = B.xy / B.y, lBy_t = B.yt / B.y;
    double lBpy_y = Bp.yy / Bp.y, lBpy_x = Bp.xy / Bp.y, lBpy_t = Bp.yt / Bp.y;
    f["dx log|A''_x|"] = lApx_x + Yx * lApx_y + Xx * lAx_x - Dx / D;
    f["dy log|A''_x|"] = lAx_y + Xy * lAx_x + Yy * lApx_y - Dy / D;
    f["dt log|A''_x|"] = lAx_t + lApx_t + Xt * lAx_x + Yt * lApx_y - Dt / D;
    f["dy log|B''_y|"] = lBy_y + Xy * lBy_x + Yy * lBpy_y - Dy / D;
    f["dx log|B''_y|"] = lBpy_x + Yx * lBpy_y + Xx * lBy_x - Dx / D;
    f["dt log|B''_y|"] = lBpy_t + lBy_t + Yt * lBpy_y + Xt * lBy_x - Dt / D;
    double Xyy = B.y / D * (Ap.yy * Yy + Ap.y * lBy_y + Ap.y * Xy * lBy_x - Ap.y * Dy / D);
    double Yxx = Ap.x / D * (B.xx * Xx + B.x * lApx_x + B.x * Yx * lApx_y - B.x * Dx / D);
    double Xyt = B.y / D * (Ap.yy * Yt + Ap.yt + Ap.y * lBy_t + Ap.y * Xt * lBy_x - Ap.y * Dt / D);
    double Yxt = Ap.x / D * (B.xx * Xt + B.xt + B.x * lApx_t + B.x * Yt * lApx_y - B.x * Dt / D);
    f["X_yy"] = Xyy;
    f["Y_xx"] = Yxx;
    f["X_yt"] = Xyt;
    f["Y_xt"] = Yxt;
    f["A''_yy"] = A.yy + 2.0 * A.xy * Xy + A.xx * Xy * Xy + A.x * Xyy;
    f["B''_xx"] = Bp.xx + 2.0 * Bp.xy * Yx + Bp.yy * Yx * Yx + Bp.y * Yxx;
    f["A''_yt"] = A.yt + Xt * A.xy + Xy * A.xt + Xt * Xy * A.xx + A.x * Xyt;
    f["B''_xt"] = Bp.xt + Yt * Bp.xy + Yx * Bp.yt + Yt * Yx * Bp.yy + Bp.y * Yxt;
    return f;
}

// ------------------------------------------------------ finite differences

double fd1(const std::function<double(double)>& f, double x, double h) {
    return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h);
}

double fd2(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2 * h)) / (12.0 * h * h);
}

double fd11(const std::function<double(double, double)>& f, double a, double b, double ha, double hb) {
    return fd1([&](double s) { return fd1([&](double r) { return f(s, r); }, b, hb); }, a, ha);
}

std::vector<std::string> CalculusReport::flagged() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
        if (c.flagged) out.push_back(c.name);
    return out;
}

// --------------------------------------------------------- param maps

ImplicitMap param_map_at(const ParamMap& F, double t) {
    auto node = [&](double y, double x, double* out) {
        Jet3 a = F.A(y, x, t), b = F.B(y, x, t);
        out[0] = a.v;
        out[1] = b.v;
        out[2] = a.x;
        out[3] = a.y;
        out[4] = b.x;
        out[5] = b.y;
    };
    auto fit = fit_bundle(F.rect, 6, node, kMapFitTol);
    ImplicitMap M = make_map(F.rect, F.src, F.dst, fit.fields[0], fit.fields[1], fit.fields[2], fit.fields[3],
                             fit.fields[4], fit.fields[5]);
    M.fit_tail = fit.tail;
    return M;
}

namespace {

struct SimpleJets {
    std::function<Jet3(double, double)> A, B, Ap, Bp;
    Rect rectF, rectFp;
};

// Solves x1 = A'(B(y0, x1), x2) pointwise from the supplied jets.
bool solve_simple(const SimpleJets& J, double y0, double x2, double& x1, double& y1) {
    x1 = J.Ap(J.B(y0, J.rectF.x.mid()).v, x2).v;
    for (int it = 0; it < 100; ++it) {
        Jet3 b = J.B(y0, x1);
        Jet3 ap = J.Ap(b.v, x2);
        double r = x1 - ap.v;
        double d = 1.0 - ap.y * b.x;
        double step = r / d;
        x1 -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x1))) break;
    }
    y1 = J.B(y0, x1).v;
    return std::isfinite(x1);
}

void accumulate(std::map<std::string, FormulaCheck>& acc, const std::string& name, double analytic, double numeric,
                const VerifyOptions& opt) {
    if (name == opt.corrupt) analytic *= 1.0 + 1e-3;
    double rel = std::abs(analytic - numeric) / std::max(std::abs(numeric), opt.rel_floor);
    auto& c = acc[name];
    c.name = name;
    c.max_abs = std::max(c.max_abs, std::abs(analytic - numeric));
    if (!std::isfinite(rel)) rel = 1e300;
    if (rel >= c.max_rel) {
        c.max_rel = rel;
        c.worst_analytic = analytic;
        c.worst_numeric = numeric;
    }
}

CalculusReport finish(std::map<std::string, FormulaCheck>& acc, const VerifyOptions& opt) {
    CalculusReport r;
    for (auto& [name, c] : acc) {
        c.flagged = c.max_rel > opt.threshold;
        r.max_rel = std::max(r.max_rel, c.max_rel);
        r.max_abs = std::max(r.max_abs, c.max_abs);
        if (c.flagged) r.ok = false;
        r.checks.push_back(c);
    }
    return r;
}

double fd_t(const std::vector<double>& v, double h) {
    // v holds samples at offsets -2h, -h, +h, +2h.
    return (8.0 * (v[2] - v[1]) - (v[3] - v[0])) / (12.0 * h);
}

CalculusReport verify_simple_core(const std::function<SimpleJets(double)>& jets_at,
                                  const std::function<ImplicitMap(double)>& composite_at, double t,
                                  const VerifyOptions& opt) {
    SimpleJets J = jets_at(t);
    ImplicitMap C0 = composite_at(t);
    std::vector<ImplicitMap> Ct;
    std::vector<SimpleJets> Jt;
    const double ht = opt.fd_step;
    if (opt.include_t)
        for (double k : {-2.0, -1.0, 1.0, 2.0}) {
            Ct.push_back(composite_at(t + k * ht));
            Jt.push_back(jets_at(t + k * ht));
        }
    Rect r = C0.rect;
    double hy = opt.fd_step * r.y.length() / 2.0, hx = opt.fd_step * r.x.length() / 2.0;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uy(r.y.lo + 3 * hy, r.y.hi - 3 * hy), ux(r.x.lo + 3 * hx, r.x.hi - 3 * hx);
    std::map<std::string, FormulaCheck> acc;

    auto pointwise = [](const SimpleJets& S, double y0, double x2, int which) {
        double x1, y1;
        solve_simple(S, y0, x2, x1, y1);
        if (which == 0) return x1;
        if (which == 1) return y1;
        Jet3 b = S.B(y0, x1), ap = S.Ap(y1, x2);
        return 1.0 - ap.y * b.x;
    };

    for (int p = 0; p < opt.points; ++p) {
        double y0 = uy(rng), x2 = ux(rng);
        double x1, y1;
        solve_simple(J, y0, x2, x1, y1);
        auto f = simple_formulas(J.A(y0, x1), J.B(y0, x1), J.Ap(y1, x2), J.Bp(y1, x2));

        auto A0 = [&](double y, double x) { return C0.A(y, x); };
        auto B0 = [&](double y, double x) { return C0.B(y, x); };
        double Apx = fd1([&](double x) { return A0(y0, x); }, x2, hx);
        double Bpy = fd1([&](double y) { return B0(y, x2); }, y0, hy);
        accumulate(acc, "A''_x", f["A''_x"], Apx, opt);
        accumulate(acc, "B''_y", f["B''_y"], Bpy, opt);
        accumulate(acc, "A''_y", f["A''_y"], fd1([&](double y) { return A0(y, x2); }, y0, hy), opt);
        accumulate(acc, "B''_x", f["B''_x"], fd1([&](double x) { return B0(y0, x); }, x2, hx), opt);
        double Axx = fd2([&](double x) { return A0(y0, x); }, x2, hx);
        double Axy = fd11(A0, y0, x2, hy, hx);
        double Byy = fd2([&](double y) { return B0(y, x2); }, y0, hy);
        double Bxy = fd11(B0, y0, x2, hy, hx);
        accumulate(acc, "dx log|A''_x|", f["dx log|A''_x|"], Axx / Apx, opt);
        accumulate(acc, "dy log|A''_x|", f["dy log|A''_x|"], Axy / Apx, opt);
        accumulate(acc, "dy log|B''_y|", f["dy log|B''_y|"], Byy / Bpy, opt);
        accumulate(acc, "dx log|B''_y|", f["dx log|B''_y|"], Bxy / Bpy, opt);
        accumulate(acc, "A''_yy", f["A''_yy"], fd2([&](double y) { return A0(y, x2); }, y0, hy), opt);
        accumulate(acc, "B''_xx", f["B''_xx"], fd2([&](double x) { return B0(y0, x); }, x2, hx), opt);

        auto X = [&](double y, double x) { return pointwise(J, y, x, 0); };
        auto Y = [&](double y, double x) { return pointwise(J, y, x, 1); };
        auto D = [&](double y, double x) { return pointwise(J, y, x, 2); };
        accumulate(acc, "X_x", f["X_x"], fd1([&](double x) { return X(y0, x); }, x2, hx), opt);
        accumulate(acc, "X_y", f["X_y"], fd1([&](double y) { return X(y, x2); }, y0, hy), opt);
        accumulate(acc, "Y_x", f["Y_x"], fd1([&](double x) { return Y(y0, x); }, x2, hx), opt);
        accumulate(acc, "Y_y", f["Y_y"], fd1([&](double y) { return Y(y, x2); }, y0, hy), opt);
        accumulate(acc, "Delta_x", f["Delta_x"], fd1([&](double x) { return D(y0, x); }, x2, hx), opt);
        accumulate(acc, "Delta_y", f["Delta_y"], fd1([&](double y) { return D(y, x2); }, y0, hy), opt);
        accumulate(acc, "X_yy", f["X_yy"], fd2([&](double y) { return X(y, x2); }, y0, hy), opt);
        accumulate(acc, "Y_xx", f["Y_xx"], fd2([&](double x) { return Y(y0, x); }, x2, hx), opt);

        if (!opt.include_t) continue;
        std::vector<double> a(4), b(4), ax(4), by(4), ay(4), bx(4), xs(4), ys(4), ds(4), xy(4), yx(4);
        for (int k = 0; k < 4; ++k) {
            const ImplicitMap& Ck = Ct[k];
            a[k] = Ck.A(y0, x2);
            b[k] = Ck.B(y0, x2);
            ax[k] = fd1([&](double x) { return Ck.A(y0, x); }, x2, hx);
            by[k] = fd1([&](double y) { return Ck.B(y, x2); }, y0, hy);
            ay[k] = fd1([&](double y) { return Ck.A(y, x2); }, y0, hy);
            bx[k] = fd1([&](double x) { return Ck.B(y0, x); }, x2, hx);
            xs[k] = pointwise(Jt[k], y0, x2, 0);
            ys[k] = pointwise(Jt[k], y0, x2, 1);
            ds[k] = pointwise(Jt[k], y0, x2, 2);
            xy[k] = fd1([&](double y) { return pointwise(Jt[k], y, x2, 0); }, y0, hy);
            yx[k] = fd1([&](double x) { return pointwise(Jt[k], y0, x, 1); }, x2, hx);
        }
        accumulate(acc, "A''_t", f["A''_t"], fd_t(a, ht), opt);
        accumulate(acc, "B''_t", f["B''_t"], fd_t(b, ht), opt);
        accumulate(acc, "X_t", f["X_t"], fd_t(xs, ht), opt);
        accumulate(acc, "Y_t", f["Y_t"], fd_t(ys, ht), opt);
        accumulate(acc, "Delta_t", f["Delta_t"], fd_t(ds, ht), opt);
        accumulate(acc, "dt log|A''_x|", f["dt log|A''_x|"], fd_t(ax, ht) / Apx, opt);
        accumulate(acc, "dt log|B''_y|", f["dt log|B''_y|"], fd_t(by, ht) / Bpy, opt);
        accumulate(acc, "A''_yt", f["A''_yt"], fd_t(ay, ht), opt);
        accumulate(acc, "B''_xt", f["B''_xt"], fd_t(bx, ht), opt);
        accumulate(acc, "X_yt", f["X_yt"], fd_t(xy, ht), opt);
        accumulate(acc, "Y_xt", f["Y_xt"], fd_t(yx, ht), opt);
    }
    return finish(acc, opt);
}

Jet3 lift(const ImplicitMap& M, bool isA, double y, double x) {
    Jet2 j = isA ? M.jetA(y, x) : M.jetB(y, x);
    Jet3 o;
    o.v = j.v;
    o.y = j.y;
    o.x = j.x;
    o.yy = j.yy;
    o.xy = j.xy;
    o.xx = j.xx;
    return o;
}

}  // namespace

CalculusReport verify_simple_calculus(const ParamMap& F, const ParamMap& Fp, double t, const VerifyOptions& opt) {
    auto jets_at = [&](double tt) {
        SimpleJets J;
        J.A = [&, tt](double y, double x) { return F.A(y, x, tt); };
        J.B = [&, tt](double y, double x) { return F.B(y, x, tt); };
        J.Ap = [&, tt](double y, double x) { return Fp.A(y, x, tt); };
        J.Bp = [&, tt](double y, double x) { return Fp.B(y, x, tt); };
        J.rectF = F.rect;
        J.rectFp = Fp.rect;
        return J;
    };
    auto composite_at = [&](double tt) { return simple_compose(param_map_at(F, tt), param_map_at(Fp, tt)); };
    return verify_simple_core(jets_at, composite_at, t, opt);
}

CalculusReport verify_composition_calculus(const ImplicitMap& F, const ImplicitMap& Fp, const ImplicitMap& Fpp,
                                           const VerifyOptions& opt_in) {
    VerifyOptions opt = opt_in;
    opt.include_t = false;
    auto jets_at = [&](double) {
        SimpleJets J;
        J.A = [&](double y, double x) { return lift(F, true, y, x); };
        J.B = [&](double y, double x) { return lift(F, false, y, x); };
        J.Ap = [&](double y, double x) { return lift(Fp, true, y, x); };
        J.Bp = [&](double y, double x) { return lift(Fp, false, y, x); };
        J.rectF = F.rect;
        J.rectFp = Fp.rect;
        return J;
    };
    auto composite_at = [&](double) { return Fpp; };
    return verify_simple_core(jets_at, composite_at, 0.0, opt);
}

}  // namespace hs
