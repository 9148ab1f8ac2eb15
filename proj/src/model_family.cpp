#include "horseshoe/model_family.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "horseshoe/errors.hpp"
#include "horseshoe/param_space.hpp"
#include "horseshoe/serialize.hpp"

namespace hs {

namespace {

const Rect kUnit{{0.0, 1.0}, {0.0, 1.0}};

double get_or(const nlohmann::json& j, const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_number()) throw Error(ErrorCode::ConfigError, std::string(key) + " must be a number");
    return j.at(key).get<double>();
}

double nu(const ModelFamily& fam, int a, int b) { return fam.branch_perturbed(a, b) ? fam.cfg.nonlinearity : 0.0; }

// Branch functions: x0 = fA(x1), y1 = fB(y0).
double branch_A(const ModelFamily& fam, int a, int b, double x, double& d) {
    double v = nu(fam, a, b);
    d = fam.alpha() + v * (1.0 - 2.0 * x);
    return fam.c_offset(b) + fam.alpha() * x + v * x * (1.0 - x);
}

double branch_B(const ModelFamily& fam, int a, int b, double y, double& d) {
    double v = nu(fam, a, b);
    d = fam.cfg.lambda_s + v * (1.0 - 2.0 * y);
    return fam.d_offset(a) + fam.cfg.lambda_s * y + v * y * (1.0 - y);
}

// x0 as a function of x_n along the itinerary, with derivative.
double word_A(const ModelFamily& fam, const std::string& w, double x, double& d) {
    d = 1.0;
    for (std::size_t i = w.size() - 1; i >= 1; --i) {
        double di;
        x = branch_A(fam, w[i - 1] - '0', w[i] - '0', x, di);
        d *= di;
    }
    return x;
}

double word_B(const ModelFamily& fam, const std::string& w, double y, double& d) {
    d = 1.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        double di;
        y = branch_B(fam, w[i] - '0', w[i + 1] - '0', y, di);
        d *= di;
    }
    return y;
}

int fit_degree_1d(const std::function<double(double)>& f) {
    for (int deg = 4; deg <= 64; deg *= 2) {
        auto c = Cheb1::fit(kUnit.x, deg, f);
        double big = 0.0;
        for (double v : c.coeffs()) big = std::max(big, std::abs(v));
        double tail = 0.0;
        for (int k = deg / 2 + 1; k <= deg; ++k) tail = std::max(tail, std::abs(c.coeffs()[k]));
        if (tail <= 1e-15 * big) return deg;
    }
    return 64;
}

void forward_branch(const ModelFamily& fam, int a, int b, double x, double y, double& x1, double& y1, double& dA,
                    double& dB) {
    auto r = newton1([&](double u, double& f, double& df) { f = branch_A(fam, a, b, u, df) - x; },
                     (x - fam.c_offset(b)) / fam.alpha());
    x1 = r.x;
    branch_A(fam, a, b, r.x, dA);
    y1 = branch_B(fam, a, b, y, dB);
}

}  // namespace

FamilyConfig family_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "family config must be an object");
    static const std::vector<std::string> known{"lambda_s", "lambda_u",    "eps0",     "tau",      "eta",
                                                "beta",     "nonlinearity", "n0",      "tongue_x", "tongue_y",
                                                "perturb_branches"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw Error(ErrorCode::ConfigError, "unknown family key " + it.key());
    FamilyConfig c;
    c.lambda_s = get_or(j, "lambda_s", c.lambda_s);
    c.lambda_u = get_or(j, "lambda_u", 1.0 / c.lambda_s);
    c.eps0 = get_or(j, "eps0", c.eps0);
    c.tau = get_or(j, "tau", c.tau);
    c.eta = get_or(j, "eta", c.eta);
    c.beta = get_or(j, "beta", c.beta);
    c.nonlinearity = get_or(j, "nonlinearity", c.nonlinearity);
    if (j.contains("n0")) {
        if (!j.at("n0").is_number_integer()) throw Error(ErrorCode::ConfigError, "n0 must be an integer");
        c.n0 = j.at("n0").get<int>();
    }
    c.tongue_x = get_or(j, "tongue_x", c.tongue_x);
    c.tongue_y = get_or(j, "tongue_y", c.tongue_y);
    if (j.contains("perturb_branches")) {
        auto v = j.at("perturb_branches").get<std::vector<bool>>();
        if (v.size() != 4) throw Error(ErrorCode::ConfigError, "perturb_branches needs 4 flags");
        for (int k = 0; k < 4; ++k) c.perturb[k] = v[k];
    }
    return c;
}

nlohmann::json to_json(const FamilyConfig& c) {
    return nlohmann::json{{"lambda_s", c.lambda_s},
                          {"lambda_u", c.lambda_u},
                          {"eps0", c.eps0},
                          {"tau", c.tau},
                          {"eta", c.eta},
                          {"beta", c.beta},
                          {"nonlinearity", c.nonlinearity},
                          {"n0", c.n0},
                          {"tongue_x", c.tongue_x},
                          {"tongue_y", c.tongue_y},
                          {"perturb_branches", std::vector<bool>(c.perturb.begin(), c.perturb.end())}};
}

FoldMap ModelFamily::fold_at(double t) const {
    FoldConfig f = fold;
    f.t_max = std::max(f.t_max, std::abs(t));
    return make_model_fold(f, t);
}

ModelFamily make_family(const FamilyConfig& cfg) {
    if (!(cfg.lambda_s > 0.0 && cfg.lambda_s < 0.5))
        throw Error(ErrorCode::ConfigError, "lambda_s must lie in (0, 1/2) for disjoint strips");
    if (!(cfg.lambda_u > 2.0)) throw Error(ErrorCode::ConfigError, "lambda_u must exceed 2 for disjoint strips");
    if (!(cfg.eps0 > 0.0 && cfg.eps0 <= 1e-2)) throw Error(ErrorCode::ConfigError, "eps0 must lie in (0, 0.01]");
    if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) throw Error(ErrorCode::ConfigError, "tau must lie in (0, 1)");
    if (!(cfg.eta > 0.0 && cfg.eta < 1.0)) throw Error(ErrorCode::ConfigError, "eta must lie in (0, 1)");
    if (!(cfg.beta > 1.0)) throw Error(ErrorCode::ConfigError, "beta must exceed 1");
    if (cfg.n0 < 2) throw Error(ErrorCode::ConfigError, "n0 must be at least 2");
    if (!(std::abs(cfg.nonlinearity) <= 0.05))
        throw Error(ErrorCode::ConfigError, "nonlinearity amplitude must stay below 0.05");

    ModelFamily fam;
    fam.cfg = cfg;
    fam.rectangles = {kUnit, kUnit};
    for (int a : fam.alphabet)
        for (int b : fam.alphabet) fam.transitions.emplace_back(a, b);
    fam.t_range = Interval{cfg.eps0, 2.0 * cfg.eps0};

    // The tongue must sit in the gaps (alpha, 1 - alpha) and (lambda_s, 1 - lambda_s).
    double half = 1.2 * std::sqrt(2.0 * cfg.eps0);
    double a = fam.alpha();
    if (cfg.tongue_x - half <= a || cfg.tongue_x + half >= 1.0 - a)
        throw Error(ErrorCode::ConfigError, "tongue_x does not leave the tongue inside the x-gap");
    if (cfg.tongue_y - half <= cfg.lambda_s || cfg.tongue_y + half >= 1.0 - cfg.lambda_s)
        throw Error(ErrorCode::ConfigError, "tongue_y does not leave the tongue inside the y-gap");

    fam.fold.x_c = cfg.tongue_x;
    fam.fold.y_c = cfg.tongue_y;
    fam.fold.N0 = cfg.n0;
    fam.fold.source_chart = kUnit;
    fam.fold.target_chart = kUnit;
    fam.fold.t_max = 2.0 * cfg.eps0;
    make_model_fold(fam.fold, cfg.eps0);

    fam.d_s0 = std::log(2.0) / std::log(cfg.lambda_u);
    fam.d_u0 = std::log(2.0) / std::log(1.0 / cfg.lambda_s);
    fam.h4 = check_H4(fam.d_s0, fam.d_u0);
    if (!fam.h4) fam.warnings.push_back("H4Violated: configured dimensions fail (H4)");
    if (fam.d_s0 + fam.d_u0 <= 1.0) fam.warnings.push_back("d_s0 + d_u0 <= 1: not in the bifurcation regime");
    return fam;
}

ImplicitMap transition_map(const ModelFamily& fam, int a, int b, double) {
    bool ok = std::find(fam.transitions.begin(), fam.transitions.end(), std::make_pair(a, b)) != fam.transitions.end();
    if (!ok) throw Error(ErrorCode::NotATransition, "(" + std::to_string(a) + "," + std::to_string(b) + ")");
    std::string w{static_cast<char>('0' + a), static_cast<char>('0' + b)};
    return pure_cylinder_map(fam, w);
}

PlanarDiffeo branch_diffeo(const ModelFamily& fam, int a, int b) {
    return {[fam, a, b](double x, double y, double out[2], double jac[4]) {
        double dA, dB;
        forward_branch(fam, a, b, x, y, out[0], out[1], dA, dB);
        jac[0] = 1.0 / dA;
        jac[1] = 0.0;
        jac[2] = 0.0;
        jac[3] = dB;
    }};
}

Strip transition_strip(const ModelFamily& fam, int a, int b) {
    Strip s;
    s.orientation = Strip::Orientation::Vertical;
    s.chart = a;
    s.over = kUnit.y;
    double d;
    s.lower = Cheb1::constant(kUnit.y, branch_A(fam, a, b, 0.0, d));
    s.upper = Cheb1::constant(kUnit.y, branch_A(fam, a, b, 1.0, d));
    return s;
}

bool valid_itinerary(const ModelFamily& fam, const std::string& digits) {
    if (digits.empty()) return false;
    for (char c : digits)
        if (c < '0' || c >= '0' + static_cast<int>(fam.alphabet.size())) return false;
    return true;
}

double cylinder_A(const ModelFamily& fam, const std::string& digits, double x, double& d) {
    return word_A(fam, digits, x, d);
}

double cylinder_B(const ModelFamily& fam, const std::string& digits, double y, double& d) {
    return word_B(fam, digits, y, d);
}

PureCylinder pure_cylinder(const ModelFamily& fam, const std::string& w) {
    if (!valid_itinerary(fam, w)) throw Error(ErrorCode::NotATransition, "bad itinerary " + w);
    PureCylinder p;
    if (fam.affine()) {
        for (std::size_t i = w.size() - 1; i >= 1; --i) {
            p.a0 = fam.alpha() * p.a0 + fam.c_offset(w[i] - '0');
            p.ax *= fam.alpha();
        }
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            p.b0 = fam.cfg.lambda_s * p.b0 + fam.d_offset(w[i] - '0');
            p.by *= fam.cfg.lambda_s;
        }
        return p;
    }
    // Secant description of the nonlinear cylinder: exact edges, mean slopes.
    double d;
    p.a0 = word_A(fam, w, 0.0, d);
    p.ax = word_A(fam, w, 1.0, d) - p.a0;
    p.b0 = word_B(fam, w, 0.0, d);
    p.by = word_B(fam, w, 1.0, d) - p.b0;
    return p;
}

ImplicitMap pure_cylinder_map(const ModelFamily& fam, const std::string& w) {
    if (!valid_itinerary(fam, w)) throw Error(ErrorCode::NotATransition, "bad itinerary " + w);
    int src = w.front() - '0', dst = w.back() - '0';
    if (fam.affine()) {
        auto p = pure_cylinder(fam, w);
        return make_affine_map(kUnit, src, dst, p.a0, 0.0, p.ax, p.b0, p.by, 0.0);
    }
    auto fa = [&](double x) {
        double d;
        return word_A(fam, w, x, d);
    };
    auto fad = [&](double x) {
        double d;
        word_A(fam, w, x, d);
        return d;
    };
    auto fb = [&](double y) {
        double d;
        return word_B(fam, w, y, d);
    };
    auto fbd = [&](double y) {
        double d;
        word_B(fam, w, y, d);
        return d;
    };
    int da = std::max(fit_degree_1d(fa), fit_degree_1d(fad));
    int db = std::max(fit_degree_1d(fb), fit_degree_1d(fbd));
    auto A = ScalarField2::fit(kUnit, 0, da, [&](double, double x) { return fa(x); });
    auto Ax = ScalarField2::fit(kUnit, 0, da, [&](double, double x) { return fad(x); });
    auto B = ScalarField2::fit(kUnit, db, 0, [&](double y, double) { return fb(y); });
    auto By = ScalarField2::fit(kUnit, db, 0, [&](double y, double) { return fbd(y); });
    A.closed_form = nullptr;
    Ax.closed_form = nullptr;
    B.closed_form = nullptr;
    By.closed_form = nullptr;
    auto zero = ScalarField2::constant(kUnit, 0.0);
    return make_map(kUnit, src, dst, A, B, Ax, zero, zero, By);
}

Tongues tongues(const ModelFamily& fam, double t, int samples) {
    if (!(t > 0.0)) throw Error(ErrorCode::NotUnfolded, "tongues need t > 0");
    FoldMap G = fam.fold_at(t);
    Tongues T;
    T.t = t;
    // Endpoints of the lens: theta(0, 0) = w^2.
    T.w_max = std::sqrt(G.theta(0.0, 0.0).v);
    for (int k = 0; k < samples; ++k) {
        double w = -T.w_max + 2.0 * T.w_max * k / (samples - 1);
        // Floor: y_u = 0.
        T.Lu_floor.x.push_back(G.Xu(w, 0.0).v);
        T.Lu_floor.y.push_back(0.0);
        // Roof: x_s = 0, theta(y_u, 0) = w^2.
        auto r = newton1(
            [&](double yu, double& f, double& df) {
                Jet3 j = G.theta(yu, 0.0);
                f = j.v - w * w;
                df = j.y;
            },
            t - w * w);
        T.Lu_roof.x.push_back(G.Xu(w, r.x).v);
        T.Lu_roof.y.push_back(r.x);
        T.thickness_u = std::max(T.thickness_u, r.x);
        // Wall: x_s = 0 with y_s = Y_s(w, 0).
        T.Ls_wall.x.push_back(0.0);
        T.Ls_wall.y.push_back(G.Ys(w, 0.0).v);
        // Front: image of the floor, theta(0, x_s) = w^2.
        auto s = newton1(
            [&](double xs, double& f, double& df) {
                Jet3 j = G.theta(0.0, xs);
                f = j.v - w * w;
                df = j.x;
            },
            t - w * w);
        T.Ls_front.x.push_back(s.x);
        T.Ls_front.y.push_back(G.Ys(w, s.x).v);
        T.thickness_s = std::max(T.thickness_s, s.x);
    }
    return T;
}

namespace {

double point_segment(double px, double py, double ax, double ay, double bx, double by) {
    double dx = bx - ax, dy = by - ay;
    double L = dx * dx + dy * dy;
    double s = L > 0.0 ? std::clamp(((px - ax) * dx + (py - ay) * dy) / L, 0.0, 1.0) : 0.0;
    double qx = ax + s * dx - px, qy = ay + s * dy - py;
    return std::sqrt(qx * qx + qy * qy);
}

double point_polyline(double px, double py, const Polyline& P) {
    double best = 1e300;
    for (std::size_t k = 0; k + 1 < P.x.size(); ++k)
        best = std::min(best, point_segment(px, py, P.x[k], P.y[k], P.x[k + 1], P.y[k + 1]));
    return best;
}

double hausdorff(const Polyline& A, const Polyline& B) {
    double h = 0.0;
    for (std::size_t k = 0; k < A.x.size(); ++k) h = std::max(h, point_polyline(A.x[k], A.y[k], B));
    for (std::size_t k = 0; k < B.x.size(); ++k) h = std::max(h, point_polyline(B.x[k], B.y[k], A));
    return h;
}

}  // namespace

double tongue_roundtrip_distance(const ModelFamily& fam, const Tongues& T) {
    FoldMap G = fam.fold_at(T.t);
    Polyline wall, front;
    for (std::size_t k = 0; k < T.Lu_floor.x.size(); ++k) {
        double xs, ys;
        G.forward(T.Lu_floor.x[k], T.Lu_floor.y[k], xs, ys);
        front.x.push_back(xs);
        front.y.push_back(ys);
        G.forward(T.Lu_roof.x[k], T.Lu_roof.y[k], xs, ys);
        wall.x.push_back(xs);
        wall.y.push_back(ys);
    }
    return std::max(hausdorff(front, T.Ls_front), hausdorff(wall, T.Ls_wall));
}

SpecialRectangles special_rectangles(const ModelFamily& fam) {
    SpecialRectangles s;
    // L_s spans x_s in [0, thickness_s(2 eps0)] and L_u spans y_u in [0, thickness_u(2 eps0)].
    Tongues T = tongues(fam, fam.t_range.hi, 101);
    auto deepest = [&](char digit, double reach, bool vertical) {
        int n = 0;
        for (;;) {
            std::string w(static_cast<std::size_t>(n + 2), digit);
            auto p = pure_cylinder(fam, w);
            double lo = vertical ? p.a0 : p.b0, len = vertical ? p.ax : p.by;
            if (!(lo <= 0.0 && lo + len >= reach)) break;
            ++n;
        }
        return n;
    };
    s.n_s = deepest('0', T.thickness_s, true);
    s.n_u = deepest('1', T.thickness_u, false);
    s.Ps_word.assign(static_cast<std::size_t>(s.n_s + 1), '0');
    s.Qu_word.assign(static_cast<std::size_t>(s.n_u + 1), '1');
    auto ws = widths(pure_cylinder_map(fam, s.Ps_word));
    auto wu = widths(pure_cylinder_map(fam, s.Qu_word));
    s.Ps_width = ws.P;
    s.Qs_width = ws.Q;
    s.Pu_width = wu.P;
    s.Qu_width = wu.Q;
    double e = fam.cfg.eps0;
    s.C = std::max({s.Ps_width / e, e / s.Ps_width, s.Qu_width / e, e / s.Qu_width});
    return s;
}

double box_counting_dimension(const ModelFamily& fam, int depth) {
    // Left edges of all depth-n vertical cylinders in R_0 sample the Cantor set.
    std::vector<double> pts{0.0};
    std::vector<std::string> words{"0"};
    for (int k = 0; k < depth; ++k) {
        std::vector<std::string> next;
        next.reserve(words.size() * 2);
        for (const auto& w : words) {
            next.push_back(w + "0");
            next.push_back(w + "1");
        }
        words.swap(next);
    }
    pts.clear();
    pts.reserve(words.size());
    for (const auto& w : words) pts.push_back(pure_cylinder(fam, w).a0);
    std::sort(pts.begin(), pts.end());
    // Box sizes well above the depth resolution.
    double finest = std::pow(fam.alpha(), depth);
    std::vector<double> lx, ly;
    for (int j = 2;; ++j) {
        double size = std::pow(2.0, -j);
        if (size < 8.0 * finest) break;
        long last = -1, count = 0;
        for (double p : pts) {
            long b = static_cast<long>(std::floor(p / size));
            if (b != last) {
                ++count;
                last = b;
            }
        }
        lx.push_back(std::log(1.0 / size));
        ly.push_back(std::log(static_cast<double>(count)));
    }
    double n = static_cast<double>(lx.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sx += lx[k];
        sy += ly[k];
        sxx += lx[k] * lx[k];
        sxy += lx[k] * ly[k];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

CodingReport coding_check(const ModelFamily& fam, int grid, int depth) {
    CodingReport rep;
    rep.depth = depth;
    for (int a : fam.alphabet)
        for (int i = 0; i < grid; ++i)
            for (int j = 0; j < grid; ++j) {
                double x = (i + 0.5) / grid, y = (j + 0.5) / grid;
                ++rep.seeds;
                std::string w(1, static_cast<char>('0' + a));
                double cx = x, cy = y;
                int cur = a;
                bool alive = true;
                for (int k = 0; k < depth && alive; ++k) {
                    int next = -1;
                    for (int b : fam.alphabet) {
                        double d;
                        double lo = branch_A(fam, cur, b, 0.0, d), hi = branch_A(fam, cur, b, 1.0, d);
                        if (cx >= lo && cx <= hi) next = b;
                    }
                    if (next < 0) {
                        alive = false;
                        break;
                    }
                    double nx, ny, dA, dB;
                    forward_branch(fam, cur, next, cx, cy, nx, ny, dA, dB);
                    cx = nx;
                    cy = ny;
                    cur = next;
                    w.push_back(static_cast<char>('0' + next));
                }
                if (!alive) continue;
                ++rep.survivors;
                // Independent label: descend through the cylinder geometry alone.
                std::string label(1, static_cast<char>('0' + a));
                bool covered = true;
                for (int k = 0; k < depth && covered; ++k) {
                    covered = false;
                    for (int b : fam.alphabet) {
                        std::string cand = label + static_cast<char>('0' + b);
                        double d;
                        double lo = word_A(fam, cand, 0.0, d), hi = word_A(fam, cand, 1.0, d);
                        if (x >= lo - 1e-12 && x <= hi + 1e-12) {
                            label = cand;
                            covered = true;
                            break;
                        }
                    }
                }
                if (!covered)
                    ++rep.uncovered;
                else if (label != w)
                    ++rep.mismatches;
            }
    return rep;
}

double tangency_normalization_error(const ModelFamily& fam, const std::vector<double>& ts) {
    double worst = 0.0;
    for (double t : ts) worst = std::max(worst, std::abs(fam.fold_at(t).theta(0.0, 0.0).v - t));
    return worst;
}

std::string geometry_csv(const ModelFamily& fam, double t, int samples) {
    std::ostringstream os;
    os << "kind,id,index,x,y\n";
    auto emit = [&](const std::string& kind, const std::string& id, const std::vector<double>& xs,
                    const std::vector<double>& ys) {
        for (std::size_t k = 0; k < xs.size(); ++k)
            os << kind << ',' << id << ',' << k << ',' << fmt17(xs[k]) << ',' << fmt17(ys[k]) << '\n';
    };
    for (int a : fam.alphabet) emit("rectangle", std::to_string(a), {0, 1, 1, 0, 0}, {0, 0, 1, 1, 0});
    for (auto [a, b] : fam.transitions) {
        auto s = transition_strip(fam, a, b);
        double lo = s.lower(0.0), hi = s.upper(0.0);
        emit("strip", std::to_string(a) + std::to_string(b), {lo, hi, hi, lo, lo}, {0, 0, 1, 1, 0});
    }
    if (t > 0.0) {
        Tongues T = tongues(fam, t, samples);
        emit("Lu_floor", std::to_string(fam.a_u), T.Lu_floor.x, T.Lu_floor.y);
        emit("Lu_roof", std::to_string(fam.a_u), T.Lu_roof.x, T.Lu_roof.y);
        emit("Ls_wall", std::to_string(fam.a_s), T.Ls_wall.x, T.Ls_wall.y);
        emit("Ls_front", std::to_string(fam.a_s), T.Ls_front.x, T.Ls_front.y);
    }
    return os.str();
}

}  // namespace hs
