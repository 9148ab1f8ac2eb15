#include "horseshoe/fold_parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "horseshoe/errors.hpp"
#include "horseshoe/fitting.hpp"
#include "horseshoe/verify_suite.hpp"

namespace hs {

// ------------------------------------------------------------- FoldMap

Jet3 FoldMap::theta(double yu, double xs) const {
    const FoldConfig& c = cfg;
    Jet3 j;
    j.v = t - yu - xs - c.chi3 * xs * xs * xs + c.theta_q * (yu * xs + t * (yu + xs));
    j.y = -1.0 + c.theta_q * (xs + t);
    j.x = -1.0 - 3.0 * c.chi3 * xs * xs + c.theta_q * (yu + t);
    j.t = 1.0 + c.theta_q * (yu + xs);
    j.yy = 0.0;
    j.xy = c.theta_q;
    j.xx = -6.0 * c.chi3 * xs;
    j.yt = c.theta_q;
    j.xt = c.theta_q;
    return j;
}

Jet3 FoldMap::Xu(double w, double yu) const {
    const FoldConfig& c = cfg;
    Jet3 j;
    j.v = c.x_c + w + c.kappa_u * yu + c.q_u * (w * w + w * yu + yu * yu) + c.r_u * t * (w + yu);
    j.x = 1.0 + c.q_u * (2 * w + yu) + c.r_u * t;
    j.y = c.kappa_u + c.q_u * (w + 2 * yu) + c.r_u * t;
    j.t = c.r_u * (w + yu);
    j.xx = 2 * c.q_u;
    j.xy = c.q_u;
    j.yy = 2 * c.q_u;
    j.xt = c.r_u;
    j.yt = c.r_u;
    return j;
}

Jet3 FoldMap::Ys(double w, double xs) const {
    const FoldConfig& c = cfg;
    Jet3 j;
    j.v = c.y_c + w + c.kappa_s * xs + c.q_s * (w * w + w * xs + xs * xs) + c.r_s * t * (w + xs);
    j.y = 1.0 + c.q_s * (2 * w + xs) + c.r_s * t;
    j.x = c.kappa_s + c.q_s * (w + 2 * xs) + c.r_s * t;
    j.t = c.r_s * (w + xs);
    j.yy = 2 * c.q_s;
    j.xy = c.q_s;
    j.xx = 2 * c.q_s;
    j.yt = c.r_s;
    j.xt = c.r_s;
    return j;
}

FoldMap FoldMap::at(double t_new) const {
    FoldMap g = *this;
    g.t = t_new;
    return g;
}

namespace {

double solve_w(const FoldMap& G, double xu, double yu) {
    auto r = newton1(
        [&](double w, double& f, double& df) {
            Jet3 j = G.Xu(w, yu);
            f = j.v - xu;
            df = j.x;
        },
        xu - G.cfg.x_c - G.cfg.kappa_u * yu);
    if (!r.converged) throw Error(ErrorCode::NewtonFailure, "fold: cannot invert X_u in w");
    return r.x;
}

}  // namespace

void FoldMap::forward(double xu, double yu, double& xs, double& ys) const {
    double w = solve_w(*this, xu, yu);
    auto r = newton1(
        [&](double x, double& f, double& df) {
            Jet3 th = theta(yu, x);
            f = w * w - th.v;
            df = -th.x;
        },
        t - yu - w * w);
    if (!r.converged) throw Error(ErrorCode::NewtonFailure, "fold: cannot solve for x_s");
    xs = r.x;
    ys = Ys(w, xs).v;
}

int FoldMap::intersection_count(double yu, double xs) const {
    double th = theta(yu, xs).v;
    const Interval& xr = cfg.source_chart.x;
    const int m = 4001;
    int count = 0;
    double prev = 0.0;
    for (int k = 0; k < m; ++k) {
        double xu = xr.lo + xr.length() * k / (m - 1);
        double w = solve_w(*this, xu, yu);
        double g = w * w - th;
        if (k > 0 && ((prev < 0) != (g < 0))) ++count;
        prev = g;
    }
    return count;
}

FoldMap make_model_fold(const FoldConfig& cfg, double t) {
    FoldMap G{cfg, t};
    double half = std::sqrt(std::max(cfg.t_max, 0.0)) * 1.2;
    const Rect& s = cfg.source_chart;
    const Rect& d = cfg.target_chart;
    bool ok = s.x.contains(cfg.x_c - half) && s.x.contains(cfg.x_c + half) && s.y.contains(0.0) &&
              s.y.contains(cfg.t_max) && d.x.contains(0.0) && d.x.contains(cfg.t_max) &&
              d.y.contains(cfg.y_c - half) && d.y.contains(cfg.y_c + half);
    if (!ok) throw Error(ErrorCode::InvalidGeometry, "tongue bounds exceed the chart");
    if (std::abs(cfg.kappa_u) >= 1.0 || std::abs(cfg.kappa_s) >= 1.0)
        throw Error(ErrorCode::InvalidGeometry, "fold slopes must be below one");
    return G;
}

// -------------------------------------------------------------- jets

namespace {

Jet3 lift2(const Jet2& j) {
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

ParabolicJets make_jets(const ImplicitMap& F0, const FoldMap& G, const ImplicitMap& F1) {
    ParabolicJets J;
    auto m0 = std::make_shared<const ImplicitMap>(F0);
    auto m1 = std::make_shared<const ImplicitMap>(F1);
    J.A0 = [m0](double y, double x) { return lift2(m0->jetA(y, x)); };
    J.B0 = [m0](double y, double x) { return lift2(m0->jetB(y, x)); };
    J.A1 = [m1](double y, double x) { return lift2(m1->jetA(y, x)); };
    J.B1 = [m1](double y, double x) { return lift2(m1->jetB(y, x)); };
    J.theta = [G](double y, double x) { return G.theta(y, x); };
    J.Xu = [G](double w, double y) { return G.Xu(w, y); };
    J.Ys = [G](double w, double x) { return G.Ys(w, x); };
    J.xu_range = F0.rect.x;
    J.ys_range = F1.rect.y;
    return J;
}

ParabolicJets make_jets(const ParamMap& F0, const FoldMap& G0, const ParamMap& F1, double t) {
    ParabolicJets J;
    FoldMap G = G0.at(t);
    J.A0 = [A = F0.A, t](double y, double x) { return A(y, x, t); };
    J.B0 = [B = F0.B, t](double y, double x) { return B(y, x, t); };
    J.A1 = [A = F1.A, t](double y, double x) { return A(y, x, t); };
    J.B1 = [B = F1.B, t](double y, double x) { return B(y, x, t); };
    J.theta = [G](double y, double x) { return G.theta(y, x); };
    J.Xu = [G](double w, double y) { return G.Xu(w, y); };
    J.Ys = [G](double w, double x) { return G.Ys(w, x); };
    J.xu_range = F0.rect.x;
    J.ys_range = F1.rect.y;
    return J;
}

// --------------------------------------------------- elimination chain

ParabolicPoint parabolic_point(const ParabolicJets& J, double w, double y0, double x1) {
    ParabolicPoint p{};
    // x_u = X_u(w, B0(y0, x_u))
    double xu = J.Xu(w, J.B0(y0, J.xu_range.mid()).v).v;
    bool ok = false;
    for (int it = 0; it < kMaxNewtonIters; ++it) {
        Jet3 b0 = J.B0(y0, xu);
        Jet3 xj = J.Xu(w, b0.v);
        double step = (xu - xj.v) / (1.0 - xj.y * b0.x);
        xu -= step;
        if (std::abs(step) <= kNewtonTol * std::max(1.0, std::abs(xu))) {
            ok = true;
            break;
        }
    }
    if (!ok || !std::isfinite(xu)) throw Error(ErrorCode::NewtonFailure, "elimination of y_u did not converge");
    // y_s = Y_s(w, A1(y_s, x1))
    double ys = J.Ys(w, J.A1(J.ys_range.mid(), x1).v).v;
    ok = false;
    for (int it = 0; it < kMaxNewtonIters; ++it) {
        Jet3 a1 = J.A1(ys, x1);
        Jet3 yj = J.Ys(w, a1.v);
        double step = (ys - yj.v) / (1.0 - yj.x * a1.y);
        ys -= step;
        if (std::abs(step) <= kNewtonTol * std::max(1.0, std::abs(ys))) {
            ok = true;
            break;
        }
    }
    if (!ok || !std::isfinite(ys)) throw Error(ErrorCode::NewtonFailure, "elimination of x_s did not converge");

    p.X = xu;
    p.Y = ys;
    p.b0 = J.B0(y0, xu);
    p.xu = J.Xu(w, p.b0.v);
    p.a1 = J.A1(ys, x1);
    p.ys = J.Ys(w, p.a1.v);
    p.Ybar = p.b0.v;
    p.Xbar = p.a1.v;
    p.th = J.theta(p.Ybar, p.Xbar);
    p.C = w * w - p.th.v;

    const Jet3 &b0 = p.b0, &a1 = p.a1, &xj = p.xu, &yj = p.ys, &th = p.th;
    // X_u slots: y = y_u, x = w. Y_s slots: y = w, x = x_s.
    double Xuw = xj.x, Xuy = xj.y, Xut = xj.t, Xuww = xj.xx, Xuwy = xj.xy, Xuyy = xj.yy, Xuwt = xj.xt, Xuyt = xj.yt;
    double Ysw = yj.y, Ysx = yj.x, Yst = yj.t, Ysww = yj.yy, Yswx = yj.xy, Ysxx = yj.xx, Yswt = yj.yt, Ysxt = yj.xt;
    double B0x = b0.x, B0y = b0.y, B0t = b0.t, B0xx = b0.xx, B0xy = b0.xy, B0yy = b0.yy, B0xt = b0.xt, B0yt = b0.yt;
    double A1x = a1.x, A1y = a1.y, A1t = a1.t, A1xx = a1.xx, A1xy = a1.xy, A1yy = a1.yy, A1xt = a1.xt, A1yt = a1.yt;
    double thx = th.x, thy = th.y, tht = th.t, thxx = th.xx, thxy = th.xy, thyy = th.yy, thxt = th.xt, thyt = th.yt;

    double D0 = 1.0 - Xuy * B0x, D1 = 1.0 - Ysx * A1y;
    p.D0 = D0;
    p.D1 = D1;
    p.X_w = Xuw / D0;
    p.X_y = Xuy * B0y / D0;
    p.X_t = (Xut + Xuy * B0t) / D0;
    p.Y_w = Ysw / D1;
    p.Y_x = Ysx * A1x / D1;
    p.Y_t = (Yst + Ysx * A1t) / D1;
    p.Ybar_w = B0x * p.X_w;
    p.Ybar_y = B0y / D0;
    p.Ybar_t = (B0t + B0x * Xut) / D0;
    p.Xbar_w = A1y * p.Y_w;
    p.Xbar_x = A1x / D1;
    p.Xbar_t = (A1t + A1y * Yst) / D1;
    p.C_w = 2 * w - thx * p.Xbar_w - thy * p.Ybar_w;
    p.C_x = -thx * p.Xbar_x;
    p.C_y = -thy * p.Ybar_y;
    p.C_t = -(thx * p.Xbar_t + thy * p.Ybar_t + tht);

    double Xw = p.X_w, Xy = p.X_y, Xt = p.X_t, Yw = p.Y_w, Yx = p.Y_x, Yt = p.Y_t;
    double Ybw = p.Ybar_w, Yby = p.Ybar_y, Ybt = p.Ybar_t, Xbw = p.Xbar_w, Xbx = p.Xbar_x, Xbt = p.Xbar_t;

    p.X_ww = (Xuww + 2 * Xuwy * Ybw + Xuyy * Ybw * Ybw + Xuy * B0xx * Xw * Xw) / D0;
    p.X_wy = (Xuwy * Yby + Xuyy * Ybw * Yby + Xuy * Xw * (B0xy + B0xx * Xy)) / D0;
    p.X_yy = (Xuyy * Yby * Yby + Xuy * (B0yy + 2 * B0xy * Xy + B0xx * Xy * Xy)) / D0;
    p.X_wt = (Xuwt + Xuwy * Ybt + Xuyy * Ybw * Ybt + Xuyt * Ybw + Xuy * Xw * (B0xt + B0xx * Xt)) / D0;
    p.X_yt = (Xuyt * Yby + Xuyy * Yby * Ybt + Xuy * (B0yt + B0xy * Xt + B0xt * Xy + B0xx * Xy * Xt)) / D0;

    p.Y_ww = (Ysww + 2 * Yswx * Xbw + Ysxx * Xbw * Xbw + Ysx * A1yy * Yw * Yw) / D1;
    p.Y_wx = (Yswx * Xbx + Ysxx * Xbw * Xbx + Ysx * Yw * (A1xy + A1yy * Yx)) / D1;
    p.Y_xx = (Ysxx * Xbx * Xbx + Ysx * (A1xx + 2 * A1xy * Yx + A1yy * Yx * Yx)) / D1;
    p.Y_wt = (Yswt + Yswx * Xbt + Ysxx * Xbw * Xbt + Ysxt * Xbw + Ysx * Yw * (A1yt + A1yy * Yt)) / D1;
    p.Y_xt = (Ysxt * Xbx + Ysxx * Xbx * Xbt + Ysx * (A1xt + A1xy * Yt + A1yt * Yx + A1yy * Yx * Yt)) / D1;

    p.Xbar_ww = A1yy * Yw * Yw + A1y * p.Y_ww;
    p.Xbar_wx = A1xy * Yw + A1yy * Yw * Yx + A1y * p.Y_wx;
    p.Xbar_wt = A1yt * Yw + A1yy * Yw * Yt + A1y * p.Y_wt;
    p.Xbar_xx = A1xx + 2 * A1xy * Yx + A1yy * Yx * Yx + A1y * p.Y_xx;
    p.Xbar_xt = A1xt + A1xy * Yt + A1yt * Yx + A1yy * Yx * Yt + A1y * p.Y_xt;

    p.Ybar_ww = B0xx * Xw * Xw + B0x * p.X_ww;
    p.Ybar_wy = B0xy * Xw + B0xx * Xw * Xy + B0x * p.X_wy;
    p.Ybar_wt = B0xt * Xw + B0xx * Xw * Xt + B0x * p.X_wt;
    p.Ybar_yy = B0yy + 2 * B0xy * Xy + B0xx * Xy * Xy + B0x * p.X_yy;
    p.Ybar_yt = B0yt + B0xy * Xt + B0xt * Xy + B0xx * Xy * Xt + B0x * p.X_yt;

    p.C_ww = 2 - (thx * p.Xbar_ww + thy * p.Ybar_ww + thxx * Xbw * Xbw + 2 * thxy * Xbw * Ybw + thyy * Ybw * Ybw);
    p.C_wx = -(thxx * Xbw * Xbx + thxy * Ybw * Xbx + thx * p.Xbar_wx);
    p.C_wy = -(thyy * Ybw * Yby + thxy * Xbw * Yby + thy * p.Ybar_wy);
    p.C_wt = -(thxt * Xbw + thxx * Xbw * Xbt + thxy * (Xbw * Ybt + Ybw * Xbt) + thyy * Ybw * Ybt + thyt * Ybw +
               thx * p.Xbar_wt + thy * p.Ybar_wt);
    p.C_xx = -(thxx * Xbx * Xbx + thx * p.Xbar_xx);
    p.C_xy = -(thxy * Xbx * Yby);
    p.C_yy = -(thyy * Yby * Yby + thy * p.Ybar_yy);
    p.C_xt = -(thxt * Xbx + thxx * Xbx * Xbt + thxy * Xbx * Ybt + thx * p.Xbar_xt);
    p.C_yt = -(thyt * Yby + thyy * Yby * Ybt + thxy * Yby * Xbt + thy * p.Ybar_yt);
    return p;
}

double tangency_C(const ParabolicJets& J, double w, double y0, double x1) {
    return parabolic_point(J, w, y0, x1).C;
}

CbarPoint tangency_min(const ParabolicJets& J, double y0, double x1) {
    CbarPoint r;
    double w = 0.0;
    bool ok = false;
    for (int it = 0; it < kMaxNewtonIters; ++it) {
        ParabolicPoint p = parabolic_point(J, w, y0, x1);
        if (std::abs(p.C_ww - 2.0) > 0.5) break;
        double step = p.C_w / p.C_ww;
        w -= step;
        if (std::abs(step) <= kNewtonTol * std::max(1.0, std::abs(w))) {
            ok = true;
            break;
        }
    }
    if (!ok) {
        // Golden-section fallback on C over a wide bracket.
        double a = -4.0, b = 4.0;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = tangency_C(J, c, y0, x1), fd = tangency_C(J, d, y0, x1);
        for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = tangency_C(J, c, y0, x1);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = tangency_C(J, d, y0, x1);
            }
        }
        w = 0.5 * (a + b);
    }
    ParabolicPoint p = parabolic_point(J, w, y0, x1);
    r.w_min = w;
    r.cbar = p.C;
    r.cww = p.C_ww;
    return r;
}

bool tangency_roots(const ParabolicJets& J, double y0, double x1, double& wm, double& wp) {
    CbarPoint m = tangency_min(J, y0, x1);
    if (m.cbar >= 0.0) return false;
    double half = std::sqrt(-m.cbar / (0.5 * std::max(m.cww, 0.5)));
    auto root = [&](double seed) {
        double w = seed;
        for (int it = 0; it < kMaxNewtonIters; ++it) {
            ParabolicPoint p = parabolic_point(J, w, y0, x1);
            double step = p.C / p.C_w;
            w -= step;
            if (std::abs(step) <= kNewtonTol * std::max(1.0, std::abs(w))) return w;
        }
        throw Error(ErrorCode::NewtonFailure, "root of the tangency functional did not converge");
    };
    wp = root(m.w_min + half);
    wm = root(m.w_min - half);
    return wp > wm;
}

void check_pc1(const ImplicitMap& F0, const ImplicitMap& F1, double b) {
    double a1y = sup_abs(F1.Ay), a1yy = sup_abs(F1.Ay.dy());
    double b0x = sup_abs(F0.Bx), b0xx = sup_abs(F0.Bx.dx());
    if (a1y >= b || a1yy >= b || b0x >= b || b0xx >= b)
        throw Error(ErrorCode::PC1Violated, "tongue maps are not adapted: a PC1 bound fails");
}

TangencyFunctional tangency_functional(const ImplicitMap& F0, const FoldMap& G, const ImplicitMap& F1, double b) {
    check_pc1(F0, F1, b);
    auto J = std::make_shared<ParabolicJets>(make_jets(F0, G, F1));
    TangencyFunctional T;
    T.C = [J](double w, double y0, double x1) { return tangency_C(*J, w, y0, x1); };
    Rect rect{F0.rect.y, F1.rect.x};
    auto fit = fit_bundle(
        rect, 2,
        [&](double y0, double x1, double* out) {
            CbarPoint m = tangency_min(*J, y0, x1);
            out[0] = m.cbar;
            out[1] = m.w_min;
        },
        kMapFitTol);
    T.Cbar = fit.fields[0];
    T.Wmin = fit.fields[1];
    return T;
}

// ---------------------------------------------------------- displacement

namespace {

std::array<double, 4> corner_cbar(const ParabolicJets& J, const Rect& r) {
    return {tangency_min(J, r.y.lo, r.x.lo).cbar, tangency_min(J, r.y.lo, r.x.hi).cbar,
            tangency_min(J, r.y.hi, r.x.lo).cbar, tangency_min(J, r.y.hi, r.x.hi).cbar};
}

DisplacementQuad quad_from_corners(const std::array<double, 4>& c) {
    // -C-bar at (y_lo, .) and (y_hi, .)
    double a = -c[0], b = -c[1], d = -c[2], e = -c[3];
    DisplacementQuad q;
    q.delta = std::min({a, b, d, e});
    q.delta_LR = std::max({a, b, d, e});
    q.delta_L = std::max(std::min(a, b), std::min(d, e));
    q.delta_R = std::min(std::max(a, b), std::max(d, e));
    return q;
}

}  // namespace

DisplacementQuad displacement(const ParabolicJets& J, const Rect& rect) { return quad_from_corners(corner_cbar(J, rect)); }

DisplacementQuad displacement(const ImplicitMap& F0, const FoldMap& G, const ImplicitMap& F1) {
    return displacement(make_jets(F0, G, F1), Rect{F0.rect.y, F1.rect.x});
}

std::vector<DisplacementQuad> displacement_over(const ImplicitMap& F0, const FoldMap& G, const ImplicitMap& F1,
                                                const std::vector<double>& ts) {
    std::vector<DisplacementQuad> out;
    for (double t : ts) out.push_back(displacement(F0, G.at(t), F1));
    return out;
}

// ------------------------------------------------- parabolic composition

namespace {

// A, B, A_x, A_y, B_x, B_y of one branch at the root W.
void branch_values(const ParabolicJets& J, double y0, double x1, double W, double* out) {
    ParabolicPoint p = parabolic_point(J, W, y0, x1);
    Jet3 a0 = J.A0(y0, p.X), b1 = J.B1(p.Y, x1);
    double Wx = -p.C_x / p.C_w, Wy = -p.C_y / p.C_w;
    out[0] = a0.v;
    out[1] = b1.v;
    out[2] = a0.x * p.X_w * Wx;
    out[3] = a0.y + a0.x * (p.X_y + p.X_w * Wy);
    out[4] = b1.x + b1.y * (p.Y_x + p.Y_w * Wx);
    out[5] = b1.y * p.Y_w * Wy;
}

}  // namespace

ParabolicPair parabolic_compose(const ParabolicJets& J, const Rect& rect, int src, int dst,
                                const ParabolicOptions& opt, const ImplicitMap* F0, const ImplicitMap* F1) {
    ParabolicPair pair;
    pair.corner_cbar = corner_cbar(J, rect);
    pair.disp = quad_from_corners(pair.corner_cbar);
    if (pair.disp.delta_LR <= 0.0) throw Error(ErrorCode::NoIntersection, "curves miss: C-bar positive everywhere");
    if (pair.disp.delta <= 0.0) throw Error(ErrorCode::PC2Violated, "displacement is not positive on the rectangle");
    if (opt.enforce_pc2 && F0 && F1) {
        double need = (widths(*F1).P + widths(*F0).Q) / opt.b;
        if (pair.disp.delta <= need) throw Error(ErrorCode::PC2Violated, "displacement below the PC2 threshold");
    }
    auto node = [&](double y0, double x1, double* out) {
        double wm, wp;
        if (!tangency_roots(J, y0, x1, wm, wp))
            throw Error(ErrorCode::PC2Violated, "C-bar is not negative at a collocation node");
        branch_values(J, y0, x1, wp, out);
        branch_values(J, y0, x1, wm, out + 6);
        out[12] = wp;
        out[13] = wm;
    };
    auto fit = fit_bundle(rect, 14, node, kMapFitTol, opt.max_degree);
    auto& f = fit.fields;
    pair.plus = make_map(rect, src, dst, f[0], f[1], f[2], f[3], f[4], f[5]);
    pair.minus = make_map(rect, src, dst, f[6], f[7], f[8], f[9], f[10], f[11]);
    pair.W_plus = f[12];
    pair.W_minus = f[13];
    pair.plus.fit_tail = pair.minus.fit_tail = pair.fit_tail = fit.tail;
    return pair;
}

ParabolicPair parabolic_compose(const ImplicitMap& F0, const FoldMap& G, const ImplicitMap& F1,
                                const ParabolicOptions& opt) {
    if (opt.check_pc1) check_pc1(F0, F1, opt.b);
    ParabolicJets J = make_jets(F0, G, F1);
    ParabolicPair p = parabolic_compose(J, Rect{F0.rect.y, F1.rect.x}, F0.src, F1.dst, opt, &F0, &F1);
    p.t = G.t;
    return p;
}

// ------------------------------------------------------ branch formulas

std::map<std::string, double> parabolic_formulas(const ParabolicJets& J, double y0, double x1, double W) {
    ParabolicPoint p = parabolic_point(J, W, y0, x1);
    Jet3 a0 = J.A0(y0, p.X), b1 = J.B1(p.Y, x1);
    std::map<std::string, double> f;
    f["X_w"] = p.X_w;
    f["X_y"] = p.X_y;
    f["X_t"] = p.X_t;
    f["Y_w"] = p.Y_w;
    f["Y_x"] = p.Y_x;
    f["Y_t"] = p.Y_t;
    f["Ybar_w"] = p.Ybar_w;
    f["Ybar_y"] = p.Ybar_y;
    f["Ybar_t"] = p.Ybar_t;
    f["Xbar_w"] = p.Xbar_w;
    f["Xbar_x"] = p.Xbar_x;
    f["Xbar_t"] = p.Xbar_t;
    f["C_w"] = p.C_w;
    f["C_x"] = p.C_x;
    f["C_y"] = p.C_y;
    f["C_t"] = p.C_t;
    f["X_ww"] = p.X_ww;
    f["X_wy"] = p.X_wy;
    f["X_yy"] = p.X_yy;
    f["X_wt"] = p.X_wt;
    f["X_yt"] = p.X_yt;
    f["Y_ww"] = p.Y_ww;
    f["Y_wx"] = p.Y_wx;
    f["Y_xx"] = p.Y_xx;
    f["Y_wt"] = p.Y_wt;
    f["Y_xt"] = p.Y_xt;
    f["Xbar_ww"] = p.Xbar_ww;
    f["Xbar_wx"] = p.Xbar_wx;
    f["Xbar_wt"] = p.Xbar_wt;
    f["Xbar_xx"] = p.Xbar_xx;
    f["Xbar_xt"] = p.Xbar_xt;
    f["Ybar_ww"] = p.Ybar_ww;
    f["Ybar_wy"] = p.Ybar_wy;
    f["Ybar_wt"] = p.Ybar_wt;
    f["Ybar_yy"] = p.Ybar_yy;
    f["Ybar_yt"] = p.Ybar_yt;
    f["C_ww"] = p.C_ww;
    f["C_wx"] = p.C_wx;
    f["C_wy"] = p.C_wy;
    f["C_wt"] = p.C_wt;
    f["C_xx"] = p.C_xx;
    f["C_xy"] = p.C_xy;
    f["C_yy"] = p.C_yy;
    f["C_xt"] = p.C_xt;
    f["C_yt"] = p.C_yt;

    double Cw = p.C_w;
    double Wx = -p.C_x / Cw, Wy = -p.C_y / Cw, Wt = -p.C_t / Cw;
    double Wxx = -(p.C_ww * Wx * Wx + 2 * p.C_wx * Wx + p.C_xx) / Cw;
    double Wxy = -(p.C_ww * Wx * Wy + p.C_wx * Wy + p.C_wy * Wx + p.C_xy) / Cw;
    double Wyy = -(p.C_ww * Wy * Wy + 2 * p.C_wy * Wy + p.C_yy) / Cw;
    double Wxt = -(p.C_ww * Wx * Wt + p.C_wx * Wt + p.C_wt * Wx + p.C_xt) / Cw;
    double Wyt = -(p.C_ww * Wy * Wt + p.C_wy * Wt + p.C_wt * Wy + p.C_yt) / Cw;
    f["W_x"] = Wx;
    f["W_y"] = Wy;
    f["W_t"] = Wt;
    f["W_xx"] = Wxx;
    f["W_xy"] = Wxy;
    f["W_yy"] = Wyy;
    f["W_xt"] = Wxt;
    f["W_yt"] = Wyt;

    double Xw = p.X_w, Xy = p.X_y, Xt = p.X_t, Yw = p.Y_w, Yx = p.Y_x, Yt = p.Y_t;
    const Jet3 &th = p.th, &xj = p.xu, &yj = p.ys, &b0 = p.b0, &a1 = p.a1;
    double D0 = p.D0, D1 = p.D1;
    double my = Xy + Xw * Wy, mt = Xt + Xw * Wt;  // d/dy0 and d/dt of X(W, y0)
    double nx = Yx + Yw * Wx, nt = Yt + Yw * Wt;  // d/dx1 and d/dt of Y(W, x1)

    f["A_x"] = a0.x * Xw * Wx;
    f["A_y"] = a0.y + a0.x * my;
    f["A_t"] = a0.t + a0.x * mt;
    f["B_y"] = b1.y * Yw * Wy;
    f["B_x"] = b1.x + b1.y * nx;
    f["B_t"] = b1.t + b1.y * nt;
    f["A_x product form"] = a0.x * a1.x * th.x * xj.x / (Cw * D0 * D1);
    f["B_y product form"] = b1.y * b0.y * th.y * yj.y / (Cw * D0 * D1);
    f["A_y expanded"] = a0.y + a0.x * b0.y / D0 * (xj.y + xj.x * th.y / (D0 * Cw));
    f["B_x expanded"] = b1.x + b1.y * a1.x / D1 * (yj.x + yj.y * th.x / (D1 * Cw));
    double lead = th.t + th.x * p.Xbar_t + th.y * p.Ybar_t;
    f["A_t expanded"] = a0.t + a0.x / D0 * (xj.t + xj.y * b0.t + xj.x / Cw * lead);
    f["B_t expanded"] = b1.t + b1.y / D1 * (yj.t + yj.x * a1.t + yj.y / Cw * lead);

    double lA0x_x = a0.xx / a0.x, lA0x_y = a0.xy / a0.x, lA0x_t = a0.xt / a0.x;
    double lXw_w = p.X_ww / Xw, lXw_y = p.X_wy / Xw, lXw_t = p.X_wt / Xw;
    double lWx_x = Wxx / Wx, lWx_y = Wxy / Wx, lWx_t = Wxt / Wx;
    f["dx log|A_x|"] = Wx * Xw * lA0x_x + Wx * lXw_w + lWx_x;
    f["dy log|A_x|"] = lA0x_y + lA0x_x * my + lXw_y + Wy * lXw_w + lWx_y;
    f["dt log|A_x|"] = lA0x_t + lA0x_x * mt + lXw_t + Wt * lXw_w + lWx_t;
    f["A_yy"] = a0.yy + 2 * a0.xy * my + a0.xx * my * my +
                a0.x * (p.X_yy + 2 * p.X_wy * Wy + p.X_ww * Wy * Wy + Xw * Wyy);
    f["A_yt"] = a0.yt + a0.xy * mt + a0.xt * my + a0.xx * mt * my +
                a0.x * (p.X_yt + p.X_wy * Wt + p.X_wt * Wy + p.X_ww * Wy * Wt + Xw * Wyt);

    double lB1y_y = b1.yy / b1.y, lB1y_x = b1.xy / b1.y, lB1y_t = b1.yt / b1.y;
    double lYw_w = p.Y_ww / Yw, lYw_x = p.Y_wx / Yw, lYw_t = p.Y_wt / Yw;
    double lWy_y = Wyy / Wy, lWy_x = Wxy / Wy, lWy_t = Wyt / Wy;
    f["dy log|B_y|"] = Wy * Yw * lB1y_y + lWy_y + Wy * lYw_w;
    f["dx log|B_y|"] = lB1y_x + lYw_x + lWy_x + lB1y_y * nx + Wx * lYw_w;
    f["dt log|B_y|"] = lB1y_t + lB1y_y * nt + lYw_t + Wt * lYw_w + lWy_t;
    f["B_xx"] = b1.xx + 2 * b1.xy * nx + b1.yy * nx * nx +
                b1.y * (p.Y_xx + 2 * p.Y_wx * Wx + p.Y_ww * Wx * Wx + Yw * Wxx);
    f["B_xt"] = b1.xt + b1.xy * nt + b1.yt * nx + b1.yy * nx * nt +
                b1.y * (p.Y_xt + p.Y_wx * Wt + p.Y_wt * Wx + p.Y_ww * Wx * Wt + Yw * Wxt);
    return f;
}

// ------------------------------------------------------------ estimates

ParabolicEstimates check_parabolic_estimates(const ParabolicPair& pair, const ImplicitMap& F0, const FoldMap& G,
                                             const ImplicitMap& F1, double ceiling) {
    ParabolicEstimates e;
    Widths w0 = widths(F0), w1 = widths(F1);
    double delta = pair.disp.delta;
    double sq = 1.0 / std::sqrt(delta);
    double D0 = distortion(F0), D1 = distortion(F1);
    ParabolicJets J = make_jets(F0, G, F1);
    auto bump = [](double r) { return std::max(r, 1.0 / r); };
    for (const ImplicitMap* M : {&pair.plus, &pair.minus}) {
        Widths w = widths(*M);
        double rp = w.P / (w0.P * w1.P * sq), rq = w.Q / (w0.Q * w1.Q * sq);
        e.width_P_ratio = std::max(e.width_P_ratio, rp);
        e.width_Q_ratio = std::max(e.width_Q_ratio, rq);
        e.width_constant = std::max({e.width_constant, bump(rp), bump(rq)});
        double D = distortion(*M);
        double c1 = (D - D0) * delta / w0.Q, c2 = (D - D1) * delta / w1.P;
        e.distortion_constant = std::max(e.distortion_constant, std::max(0.0, std::min(c1, c2)));
    }
    // Deviations of A_y, B_x from the outer maps on a grid of both branches.
    const Rect& r = pair.plus.rect;
    const int m = 17;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            double y0 = r.y.lo + r.y.length() * a / (m - 1), x1 = r.x.lo + r.x.length() * b / (m - 1);
            double wm, wp;
            if (!tangency_roots(J, y0, x1, wm, wp)) continue;
            for (double W : {wp, wm}) {
                double v[6];
                branch_values(J, y0, x1, W, v);
                ParabolicPoint p = parabolic_point(J, W, y0, x1);
                e.ay_deviation = std::max(e.ay_deviation, std::abs(v[3] - J.A0(y0, p.X).y));
                e.bx_deviation = std::max(e.bx_deviation, std::abs(v[4] - J.B1(p.Y, x1).x));
            }
        }
    e.ay_constant = e.ay_deviation / (w0.P * w0.Q * sq);
    e.bx_constant = e.bx_deviation / (w1.P * w1.Q * sq);
    auto flag = [&](const char* name, double v) {
        if (v > ceiling) {
            e.ok = false;
            e.flagged.emplace_back(name);
        }
    };
    flag("width", e.width_constant);
    flag("distortion", e.distortion_constant);
    flag("A_y deviation", e.ay_constant);
    flag("B_x deviation", e.bx_constant);
    return e;
}

// -------------------------------------------------------- verification

namespace {

void accumulate(std::map<std::string, FormulaCheck>& acc, const std::string& name, double analytic, double numeric,
                const VerifyOptions& opt) {
    if (name == opt.corrupt) analytic *= 1.0 + 1e-3;
    double rel = std::abs(analytic - numeric) / std::max(std::abs(numeric), opt.rel_floor);
    if (!std::isfinite(rel)) rel = 1e300;
    auto& c = acc[name];
    c.name = name;
    c.max_abs = std::max(c.max_abs, std::abs(analytic - numeric));
    if (rel >= c.max_rel) {
        c.max_rel = rel;
        c.worst_analytic = analytic;
        c.worst_numeric = numeric;
    }
}

}  // namespace

CalculusReport verify_parabolic_calculus(const ParamMap& F0, const FoldConfig& fold, const ParamMap& F1, double t,
                                         const VerifyOptions& opt) {
    const double ht = opt.fd_step;
    const std::array<double, 5> off{-2, -1, 0, 1, 2};
    FoldMap G{fold, t};
    std::vector<ParabolicJets> Js;
    for (double k : off) Js.push_back(make_jets(F0, G, F1, t + k * ht));
    const ParabolicJets& J = Js[2];
    Rect rect{F0.rect.y, F1.rect.x};
    std::vector<ParabolicPair> pairs;
    ParabolicOptions popt;
    popt.check_pc1 = false;
    for (std::size_t k = 0; k < off.size(); ++k) {
        if (!opt.include_t && k != 2) {
            pairs.emplace_back();
            continue;
        }
        pairs.push_back(parabolic_compose(Js[k], rect, F0.src, F1.dst, popt));
    }
    double hy = opt.fd_step * rect.y.length() / 2.0, hx = opt.fd_step * rect.x.length() / 2.0;
    double hw = opt.fd_step;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uy(rect.y.lo + 3 * hy, rect.y.hi - 3 * hy);
    std::uniform_real_distribution<double> ux(rect.x.lo + 3 * hx, rect.x.hi - 3 * hx);
    std::map<std::string, FormulaCheck> acc;

    // Differences over t from samples at offsets -2, -1, 1, 2.
    auto dt = [&](const std::function<double(int)>& q) {
        return (8.0 * (q(3) - q(1)) - (q(4) - q(0))) / (12.0 * ht);
    };

    for (int pt = 0; pt < opt.points; ++pt) {
        double y0 = uy(rng), x1 = ux(rng);
        double wm, wp;
        if (!tangency_roots(J, y0, x1, wm, wp)) continue;
        for (int branch = 0; branch < 2; ++branch) {
            double W = branch == 0 ? wp : wm;
            auto f = parabolic_formulas(J, y0, x1, W);
            auto check = [&](const std::string& name, double numeric) { accumulate(acc, name, f[name], numeric, opt); };
            // Pointwise quantities at (w, y0, x1) for parameter slot k.
            auto P = [&](int k, double w, double y, double x) { return parabolic_point(Js[k], w, y, x); };
            auto Wroot = [&](int k, double y, double x) {
                double a, b;
                if (!tangency_roots(Js[k], y, x, a, b)) throw Error(ErrorCode::PC2Violated, "root lost");
                return branch == 0 ? b : a;
            };
            using Getter = double (*)(const ParabolicPoint&);
            auto in_w = [&](Getter g) { return fd1([&](double w) { return g(P(2, w, y0, x1)); }, W, hw); };
            auto in_y = [&](Getter g) { return fd1([&](double y) { return g(P(2, W, y, x1)); }, y0, hy); };
            auto in_x = [&](Getter g) { return fd1([&](double x) { return g(P(2, W, y0, x)); }, x1, hx); };
            auto in_t = [&](Getter g) { return dt([&](int k) { return g(P(k, W, y0, x1)); }); };
            Getter gX = [](const ParabolicPoint& p) { return p.X; };
            Getter gY = [](const ParabolicPoint& p) { return p.Y; };
            Getter gXb = [](const ParabolicPoint& p) { return p.Xbar; };
            Getter gYb = [](const ParabolicPoint& p) { return p.Ybar; };
            Getter gC = [](const ParabolicPoint& p) { return p.C; };
            Getter gXw = [](const ParabolicPoint& p) { return p.X_w; };
            Getter gXy = [](const ParabolicPoint& p) { return p.X_y; };
            Getter gYw = [](const ParabolicPoint& p) { return p.Y_w; };
            Getter gYx = [](const ParabolicPoint& p) { return p.Y_x; };
            Getter gXbw = [](const ParabolicPoint& p) { return p.Xbar_w; };
            Getter gXbx = [](const ParabolicPoint& p) { return p.Xbar_x; };
            Getter gYbw = [](const ParabolicPoint& p) { return p.Ybar_w; };
            Getter gYby = [](const ParabolicPoint& p) { return p.Ybar_y; };
            Getter gCw = [](const ParabolicPoint& p) { return p.C_w; };
            Getter gCx = [](const ParabolicPoint& p) { return p.C_x; };
            Getter gCy = [](const ParabolicPoint& p) { return p.C_y; };

            check("X_w", in_w(gX));
            check("X_y", in_y(gX));
            check("Y_w", in_w(gY));
            check("Y_x", in_x(gY));
            check("Ybar_w", in_w(gYb));
            check("Ybar_y", in_y(gYb));
            check("Xbar_w", in_w(gXb));
            check("Xbar_x", in_x(gXb));
            check("C_w", in_w(gC));
            check("C_x", in_x(gC));
            check("C_y", in_y(gC));
            check("X_ww", in_w(gXw));
            check("X_wy", in_y(gXw));
            check("X_yy", in_y(gXy));
            check("Y_ww", in_w(gYw));
            check("Y_wx", in_x(gYw));
            check("Y_xx", in_x(gYx));
            check("Xbar_ww", in_w(gXbw));
            check("Xbar_wx", in_x(gXbw));
            check("Xbar_xx", in_x(gXbx));
            check("Ybar_ww", in_w(gYbw));
            check("Ybar_wy", in_y(gYbw));
            check("Ybar_yy", in_y(gYby));
            check("C_ww", in_w(gCw));
            check("C_wx", in_x(gCw));
            check("C_wy", in_y(gCw));
            check("C_xx", in_x(gCx));
            check("C_xy", in_y(gCx));
            check("C_yy", in_y(gCy));

            auto Wf = [&](double y, double x) { return Wroot(2, y, x); };
            check("W_x", fd1([&](double x) { return Wf(y0, x); }, x1, hx));
            check("W_y", fd1([&](double y) { return Wf(y, x1); }, y0, hy));
            check("W_xx", fd2([&](double x) { return Wf(y0, x); }, x1, hx));
            check("W_yy", fd2([&](double y) { return Wf(y, x1); }, y0, hy));
            check("W_xy", fd11(Wf, y0, x1, hy, hx));

            const ImplicitMap& M = branch == 0 ? pairs[2].plus : pairs[2].minus;
            auto A = [&](double y, double x) { return M.A(y, x); };
            auto B = [&](double y, double x) { return M.B(y, x); };
            double Ax = fd1([&](double x) { return A(y0, x); }, x1, hx);
            double By = fd1([&](double y) { return B(y, x1); }, y0, hy);
            double Ay = fd1([&](double y) { return A(y, x1); }, y0, hy);
            double Bx = fd1([&](double x) { return B(y0, x); }, x1, hx);
            check("A_x", Ax);
            check("A_x product form", Ax);
            check("A_y", Ay);
            check("A_y expanded", Ay);
            check("B_y", By);
            check("B_y product form", By);
            check("B_x", Bx);
            check("B_x expanded", Bx);
            check("dx log|A_x|", fd2([&](double x) { return A(y0, x); }, x1, hx) / Ax);
            check("dy log|A_x|", fd11(A, y0, x1, hy, hx) / Ax);
            check("A_yy", fd2([&](double y) { return A(y, x1); }, y0, hy));
            check("dy log|B_y|", fd2([&](double y) { return B(y, x1); }, y0, hy) / By);
            check("dx log|B_y|", fd11(B, y0, x1, hy, hx) / By);
            check("B_xx", fd2([&](double x) { return B(y0, x); }, x1, hx));

            if (!opt.include_t) continue;
            check("X_t", in_t(gX));
            check("Y_t", in_t(gY));
            check("Xbar_t", in_t(gXb));
            check("Ybar_t", in_t(gYb));
            check("C_t", in_t(gC));
            check("X_wt", in_t(gXw));
            check("X_yt", in_t(gXy));
            check("Y_wt", in_t(gYw));
            check("Y_xt", in_t(gYx));
            check("Xbar_wt", in_t(gXbw));
            check("Xbar_xt", in_t(gXbx));
            check("Ybar_wt", in_t(gYbw));
            check("Ybar_yt", in_t(gYby));
            check("C_wt", in_t(gCw));
            check("C_xt", in_t(gCx));
            check("C_yt", in_t(gCy));
            check("W_t", dt([&](int k) { return Wroot(k, y0, x1); }));
            check("W_xt", dt([&](int k) { return fd1([&](double x) { return Wroot(k, y0, x); }, x1, hx); }));
            check("W_yt", dt([&](int k) { return fd1([&](double y) { return Wroot(k, y, x1); }, y0, hy); }));
            auto Mk = [&](int k) -> const ImplicitMap& { return branch == 0 ? pairs[k].plus : pairs[k].minus; };
            double At = dt([&](int k) { return Mk(k).A(y0, x1); });
            double Bt = dt([&](int k) { return Mk(k).B(y0, x1); });
            check("A_t", At);
            check("A_t expanded", At);
            check("B_t", Bt);
            check("B_t expanded", Bt);
            double Axt = dt([&](int k) { return fd1([&](double x) { return Mk(k).A(y0, x); }, x1, hx); });
            double Byt = dt([&](int k) { return fd1([&](double y) { return Mk(k).B(y, x1); }, y0, hy); });
            check("dt log|A_x|", Axt / Ax);
            check("dt log|B_y|", Byt / By);
            check("A_yt", dt([&](int k) { return fd1([&](double y) { return Mk(k).A(y, x1); }, y0, hy); }));
            check("B_xt", dt([&](int k) { return fd1([&](double x) { return Mk(k).B(y0, x); }, x1, hx); }));
        }
    }
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

// ----------------------------------------------------- Lipschitz checks

CurveFamily exponential_family(double s0, double k, double T, double y_ref, Interval s_range) {
    CurveFamily fam;
    fam.s_range = s_range;
    fam.phi = [=](double y, double s) {
        double e = std::exp(T * (y - y_ref));
        Jet3 j;
        j.v = s0 + k * s * e;
        j.y = k * s * T * e;
        j.x = k * e;
        j.yy = k * s * T * T * e;
        j.xy = k * T * e;
        j.xx = 0.0;
        return j;
    };
    return fam;
}

namespace {

double family_T(const CurveFamily& fam, const Interval& yr) {
    double T = 0.0;
    for (int a = 0; a <= 32; ++a)
        for (int b = 0; b <= 32; ++b) {
            double y = yr.lo + yr.length() * a / 32.0, s = fam.s_range.lo + fam.s_range.length() * b / 32.0;
            Jet3 j = fam.phi(y, s);
            T = std::max(T, std::abs(j.xy / j.x));
        }
    return T;
}

void check_monotone(const CurveFamily& fam, const Interval& yr) {
    double sign = 0.0;
    for (int a = 0; a <= 32; ++a)
        for (int b = 0; b <= 32; ++b) {
            double y = yr.lo + yr.length() * a / 32.0, s = fam.s_range.lo + fam.s_range.length() * b / 32.0;
            double d = fam.phi(y, s).x;
            if (d == 0.0 || (sign != 0.0 && (d > 0) != (sign > 0)))
                throw Error(ErrorCode::FamilyNotMonotone, "d phi / d s changes sign");
            sign = d;
        }
}

LipschitzReport fit_line(const std::vector<double>& Ts, const std::vector<double>& Tp) {
    LipschitzReport r;
    double n = static_cast<double>(Ts.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < Ts.size(); ++i) {
        sx += Ts[i];
        sy += Tp[i];
        sxx += Ts[i] * Ts[i];
        sxy += Ts[i] * Tp[i];
    }
    double den = n * sxx - sx * sx;
    r.a = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
    r.C = (sy - r.a * sx) / n;
    r.T = Ts.back();
    r.T_prime = Tp.back();
    return r;
}

}  // namespace

LipschitzReport lipschitz_recursion_check(const ImplicitMap& F, const CurveFamily& fam) {
    Interval y1r{F.image.lower(F.rect.x.mid()), F.image.upper(F.rect.x.mid())};
    y1r = Interval{std::min(y1r.lo, y1r.hi), std::max(y1r.lo, y1r.hi)};
    check_monotone(fam, y1r);
    LipschitzReport r;
    r.T = family_T(fam, y1r);
    // y1 = psi(y0, s) solves y1 = B(y0, phi(y1, s)).
    auto psi = [&](double y0, double s) {
        auto res = newton1(
            [&](double y1, double& f, double& df) {
                Jet3 p = fam.phi(y1, s);
                f = y1 - F.B(y0, p.v);
                df = 1.0 - F.Bx(y0, p.v) * p.y;
            },
            F.B(y0, F.rect.x.mid()), 1e-15);
        return res.x;
    };
    auto Phi = [&](double y0, double s) { return F.A(y0, fam.phi(psi(y0, s), s).v); };
    const Interval& yr = F.rect.y;
    const Interval& sr = fam.s_range;
    double hy = 1e-2 * yr.length() / 2, hs = 1e-2 * sr.length() / 2;
    double worst_rel = 0.0;
    for (int a = 0; a <= 16; ++a)
        for (int b = 0; b <= 16; ++b) {
            double y0 = yr.lo + 3 * hy + (yr.length() - 6 * hy) * a / 16.0;
            double s = sr.lo + 3 * hs + (sr.length() - 6 * hs) * b / 16.0;
            auto logPs = [&](double y) { return std::log(std::abs(fd1([&](double ss) { return Phi(y, ss); }, s, hs))); };
            double num = fd1(logPs, y0, hy);
            r.T_prime = std::max(r.T_prime, std::abs(num));
            // Three-term sum for the affine case.
            double y1 = psi(y0, s);
            Jet3 p = fam.phi(y1, s);
            Jet2 ja = F.jetA(y0, p.v), jb = F.jetB(y0, p.v);
            double den = 1.0 - jb.x * p.y;
            double psy = jb.y / den;
            double Z1 = ja.xy / ja.x + ja.xx / ja.x * p.y * psy;
            double Z2 = p.xy / p.x * psy;
            double Z3 = (p.yy * psy * jb.x + p.y * (jb.xy + jb.xx * p.y * psy)) / den;
            double an = Z1 + Z2 + Z3;
            worst_rel = std::max(worst_rel, std::abs(an - num) / std::max(std::abs(num), 1e-4));
        }
    r.formula_rel = worst_rel;
    return r;
}

LipschitzReport lipschitz_recursion_check(const ImplicitMap& F0, const FoldMap& G, const CurveFamily& fam) {
    ParabolicJets J;
    J.A0 = [&F0](double y, double x) { return lift2(F0.jetA(y, x)); };
    J.B0 = [&F0](double y, double x) { return lift2(F0.jetB(y, x)); };
    J.A1 = [&fam](double y, double s) { return fam.phi(y, s); };
    J.B1 = [](double, double) { return Jet3{}; };
    J.theta = [G](double y, double x) { return G.theta(y, x); };
    J.Xu = [G](double w, double y) { return G.Xu(w, y); };
    J.Ys = [G](double w, double x) { return G.Ys(w, x); };
    J.xu_range = F0.rect.x;
    J.ys_range = G.cfg.target_chart.y;
    check_monotone(fam, Interval{-2.0, 2.0});
    LipschitzReport r;
    r.T = family_T(fam, Interval{-2.0, 2.0});
    const Interval& yr = F0.rect.y;
    const Interval& sr = fam.s_range;
    double hy = 1e-2 * yr.length() / 2, hs = 1e-2 * sr.length() / 2;
    for (int branch = 0; branch < 2; ++branch) {
        auto Phi = [&](double y0, double s) {
            double wm, wp;
            if (!tangency_roots(J, y0, s, wm, wp)) throw Error(ErrorCode::NoIntersection, "curve misses the tongue");
            double W = branch == 0 ? wp : wm;
            return F0.A(y0, parabolic_point(J, W, y0, s).X);
        };
        for (int a = 0; a <= 12; ++a)
            for (int b = 0; b <= 12; ++b) {
                double y0 = yr.lo + 3 * hy + (yr.length() - 6 * hy) * a / 12.0;
                double s = sr.lo + 3 * hs + (sr.length() - 6 * hs) * b / 12.0;
                auto logPs = [&](double y) {
                    return std::log(std::abs(fd1([&](double ss) { return Phi(y, ss); }, s, hs)));
                };
                r.T_prime = std::max(r.T_prime, std::abs(fd1(logPs, y0, hy)));
            }
    }
    return r;
}

LipschitzReport lipschitz_recursion_fit(const ImplicitMap& F0, const FoldMap& G, double s0, double k,
                                        const std::vector<double>& Ts) {
    std::vector<double> Tin, Tout;
    for (double T : Ts) {
        auto rep = lipschitz_recursion_check(F0, G, exponential_family(s0, k, T, 0.0, Interval{0.0, 1.0}));
        Tin.push_back(rep.T);
        Tout.push_back(rep.T_prime);
    }
    return fit_line(Tin, Tout);
}

LipschitzReport lipschitz_recursion_fit(const ImplicitMap& F, double s0, double k, const std::vector<double>& Ts) {
    std::vector<double> Tin, Tout;
    double worst = 0.0;
    for (double T : Ts) {
        auto rep = lipschitz_recursion_check(F, exponential_family(s0, k, T, 0.0, Interval{0.0, 1.0}));
        Tin.push_back(rep.T);
        Tout.push_back(rep.T_prime);
        worst = std::max(worst, rep.formula_rel);
    }
    auto r = fit_line(Tin, Tout);
    r.formula_rel = worst;
    return r;
}

TangencyShape tangency_shape(const ParabolicJets& J, const Rect& rect, const Interval& ws, int n) {
    TangencyShape sh;
    auto at = [](const Interval& v, int i, int n) { return n == 1 ? v.mid() : v.lo + v.length() * i / (n - 1); };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double y0 = at(rect.y, i, n), x1 = at(rect.x, j, n), w = at(ws, k, n);
                auto C = [&](double ww) { return tangency_C(J, ww, y0, x1); };
                sh.cw_dev = std::max(sh.cw_dev, std::abs(fd1(C, w, 1e-3) - 2 * w));
                sh.cww_dev = std::max(sh.cww_dev, std::abs(fd2(C, w, 1e-2) - 2));
                ++sh.samples;
            }
    return sh;
}

// --------------------------------------------------------- random suite

ParabolicSuiteReport run_parabolic_suite(int instances, std::uint64_t seed, const VerifyOptions& opt) {
    ParabolicSuiteReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0), lin(0.2, 0.3), ut(0.8, 1.2);
    auto small = [&](double a) { return a * u(rng); };
    for (int k = 0; k < instances; ++k) {
        // Redraw until the tongue maps satisfy (PC1) at t.
        double t = 0.0;
        ParamMap F0, F1;
        FoldConfig fc;
        for (;;) {
            t = ut(rng);
            QuadTrig a0{small(0.1), small(0.05), lin(rng), small(0.02), small(0.02), small(0.02), small(0.02), 0.005,
                        small(2), small(2), small(2), true};
            QuadTrig b0{small(0.1), lin(rng), small(0.03), small(0.02), small(0.01), small(0.01), small(0.01), 0.002,
                        small(2), small(1), small(2), false};
            QuadTrig a1{small(0.1), small(0.03), lin(rng), small(0.02), small(0.01), small(0.01), small(0.01), 0.002,
                        small(1), small(2), small(2), true};
            QuadTrig b1{small(0.1), lin(rng), small(0.05), small(0.02), small(0.02), small(0.02), small(0.02), 0.005,
                        small(2), small(2), small(2), false};
            F0 = ParamMap{Rect{{-1, 1}, {-2, 2}}, 0, 0, a0, b0};
            F1 = ParamMap{Rect{{-2, 2}, {-1, 1}}, 1, 1, a1, b1};
            fc = FoldConfig{};
            fc.kappa_u = small(0.1);
            fc.kappa_s = small(0.1);
            fc.chi3 = small(0.05);
            fc.theta_q = small(0.02);
            fc.q_u = small(0.02);
            fc.q_s = small(0.02);
            fc.r_u = small(0.02);
            fc.r_s = small(0.02);
            try {
                check_pc1(param_map_at(F0, t), param_map_at(F1, t));
                break;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::PC1Violated) throw;
            }
        }
        FoldMap G{fc, t};
        VerifyOptions o = opt;
        o.seed = seed + k;
        auto r = verify_parabolic_calculus(F0, fc, F1, t, o);
        rep.instances++;
        rep.max_rel = std::max(rep.max_rel, r.max_rel);
        for (const auto& c : r.checks) rep.per_formula[c.name] = std::max(rep.per_formula[c.name], c.max_rel);
        if (!r.ok) rep.ok = false;

        // Tangency functional shape, displacement ordering and estimate constants.
        ImplicitMap M0 = param_map_at(F0, t), M1 = param_map_at(F1, t);
        ParabolicJets J = make_jets(M0, G, M1);
        for (double y0 : {-0.7, 0.0, 0.7})
            for (double x1 : {-0.7, 0.0, 0.7})
                for (double w : {-1.0, -0.3, 0.0, 0.4, 1.1}) {
                    auto Cw = fd1([&](double ww) { return tangency_C(J, ww, y0, x1); }, w, 1e-3);
                    auto Cww = fd2([&](double ww) { return tangency_C(J, ww, y0, x1); }, w, 1e-2);
                    rep.cw_dev = std::max(rep.cw_dev, std::abs(Cw - 2 * w));
                    rep.cww_dev = std::max(rep.cww_dev, std::abs(Cww - 2));
                }
        DisplacementQuad q = displacement(M0, G, M1);
        if (!(q.delta <= std::min(q.delta_L, q.delta_R) && std::max(q.delta_L, q.delta_R) <= q.delta_LR))
            rep.ordering_ok = false;
        ParabolicOptions po;
        po.check_pc1 = true;
        ParabolicPair pair = parabolic_compose(M0, G, M1, po);
        auto est = check_parabolic_estimates(pair, M0, G, M1);
        rep.max_constant = std::max({rep.max_constant, est.width_constant, est.distortion_constant, est.ay_constant,
                                     est.bx_constant});
        // d/dt of -C-bar at the centre.
        double h = 1e-3;
        auto cb = [&](double tt) {
            ImplicitMap m0 = param_map_at(F0, tt), m1 = param_map_at(F1, tt);
            return -tangency_min(make_jets(m0, G.at(tt), m1), 0.0, 0.0).cbar;
        };
        double d = (cb(t + h) - cb(t - h)) / (2 * h);
        rep.dt_cbar_min = std::min(rep.dt_cbar_min, d);
        rep.dt_cbar_max = std::max(rep.dt_cbar_max, d);
    }
    return rep;
}

}  // namespace hs
