#include "horseshoe/verify_suite.hpp"

#include <algorithm>
#include <cmath>

namespace hs {

Jet3 QuadTrig::operator()(double y, double x, double t) const {
    double ph = ky * y + kx * x + kt * t, sn = std::sin(ph), cs = std::cos(ph);
    double ly = cy + (t_on_x ? 0.0 : ct * t), lx = cx + (t_on_x ? ct * t : 0.0);
    Jet3 j;
    j.v = c0 + ly * y + lx * x + qyy * y * y + qxy * x * y + qxx * x * x + s * sn;
    j.y = ly + 2 * qyy * y + qxy * x + s * ky * cs;
    j.x = lx + qxy * y + 2 * qxx * x + s * kx * cs;
    j.t = ct * (t_on_x ? x : y) + s * kt * cs;
    j.yy = 2 * qyy - s * ky * ky * sn;
    j.xy = qxy - s * kx * ky * sn;
    j.xx = 2 * qxx - s * kx * kx * sn;
    j.yt = (t_on_x ? 0.0 : ct) - s * ky * kt * sn;
    j.xt = (t_on_x ? ct : 0.0) - s * kx * kt * sn;
    return j;
}

namespace {

const Rect kUnit{{-1.0, 1.0}, {-1.0, 1.0}};

QuadTrig random_poly(std::mt19937_64& rng, bool t_on_x) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), lin(0.15, 0.3);
    QuadTrig p{};
    p.t_on_x = t_on_x;
    p.c0 = 0.1 * u(rng);
    double main = lin(rng), cross = 0.1 * u(rng);
    p.cx = t_on_x ? main : cross;
    p.cy = t_on_x ? cross : main;
    p.ct = 0.05 * u(rng);
    p.qyy = 0.02 * u(rng);
    p.qxy = 0.02 * u(rng);
    p.qxx = 0.02 * u(rng);
    p.s = 0.01;
    p.ky = 2.0 * u(rng);
    p.kx = 2.0 * u(rng);
    p.kt = 2.0 * u(rng);
    return p;
}

}  // namespace

ParamMap random_param_map(std::mt19937_64& rng, int src, int dst) {
    ParamMap F;
    F.rect = kUnit;
    F.src = src;
    F.dst = dst;
    QuadTrig a = random_poly(rng, true), b = random_poly(rng, false);
    F.A = a;
    F.B = b;
    return F;
}

std::pair<ParamMap, ParamMap> random_cone_pair(std::mt19937_64& rng, double t, const ConeParams& cone) {
    auto draw = [&]() {
        for (;;) {
            ParamMap F = random_param_map(rng);
            if (check_cone(param_map_at(F, t), cone).ok) return F;
        }
    };
    ParamMap F = draw();
    ParamMap Fp = draw();
    return {F, Fp};
}

SimpleSuiteReport run_simple_suite(int pairs, std::uint64_t seed, const VerifyOptions& opt) {
    SimpleSuiteReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, 0.5);
    for (int k = 0; k < pairs; ++k) {
        double t = ut(rng);
        auto [F, Fp] = random_cone_pair(rng, t, ConeParams{});
        VerifyOptions o = opt;
        o.seed = seed + k;
        auto r = verify_simple_calculus(F, Fp, t, o);
        rep.pairs++;
        for (const auto& c : r.checks) {
            rep.evaluations += o.points;
            rep.per_formula[c.name] = std::max(rep.per_formula[c.name], c.max_rel);
        }
        rep.max_rel = std::max(rep.max_rel, r.max_rel);
        if (!r.ok) rep.ok = false;
    }
    return rep;
}

namespace {

// Explicit map (x0, y0) -> (x1, y1) of an implicit one, by inverting A(y0, .).
bool explicit_point(const ImplicitMap& F, double x0, double y0, double& x1, double& y1) {
    auto r = newton1(
        [&](double x, double& f, double& df) {
            f = F.A(y0, x) - x0;
            df = F.Ax(y0, x);
        },
        F.rect.x.mid(), 1e-15);
    x1 = r.x;
    y1 = F.B(y0, x1);
    return r.converged;
}

}  // namespace

ConeSuiteReport run_cone_suite(int pairs, std::uint64_t seed, const ConeParams& cone) {
    ConeSuiteReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, 0.5), uu(-0.8, 0.8);
    ConeParams sq{cone.lambda * cone.lambda, cone.u, cone.v};
    for (int k = 0; k < pairs; ++k) {
        double t = ut(rng);
        auto [pf, pfp] = random_cone_pair(rng, t, cone);
        ImplicitMap F = param_map_at(pf, t), Fp = param_map_at(pfp, t);
        ImplicitMap C = simple_compose(F, Fp);
        rep.pairs++;
        if (check_cone(C, sq).ok) rep.cone_pass++;
        Widths w = widths(F), wp = widths(Fp), wc = widths(C);
        for (double ratio : {wc.P / (w.P * wp.P), wc.Q / (w.Q * wp.Q)}) {
            rep.ratio_min = std::min(rep.ratio_min, ratio);
            rep.ratio_max = std::max(rep.ratio_max, ratio);
        }
        double D = distortion(F), Dp = distortion(Fp), Dc = distortion(C);
        double c1 = (Dc - D) / (w.Q * (D + Dp)), c2 = (Dc - Dp) / (wp.P * (D + Dp));
        rep.distortion_constant = std::max(rep.distortion_constant, std::max(0.0, std::min(c1, c2)));

        // det DF = B_y / A_x at a random point, Jacobian by central differences.
        double y0 = uu(rng), x1 = uu(rng);
        double x0 = F.A(y0, x1), h = 1e-5;
        double a1, b1, a2, b2, a3, b3, a4, b4;
        explicit_point(F, x0 + h, y0, a1, b1);
        explicit_point(F, x0 - h, y0, a2, b2);
        explicit_point(F, x0, y0 + h, a3, b3);
        explicit_point(F, x0, y0 - h, a4, b4);
        double j00 = (a1 - a2) / (2 * h), j10 = (b1 - b2) / (2 * h);
        double j01 = (a3 - a4) / (2 * h), j11 = (b3 - b4) / (2 * h);
        double det = j00 * j11 - j01 * j10;
        double want = F.By(y0, x1) / F.Ax(y0, x1);
        rep.det_rel_err = std::max(rep.det_rel_err, std::abs(det - want) / std::abs(want));
    }
    // Linear pairs without cross terms have Delta = 1, so the ratio is exactly one.
    std::uniform_real_distribution<double> lin(0.15, 0.3);
    for (int k = 0; k < 10; ++k) {
        auto F = make_affine_map(kUnit, 0, 0, 0, 0, lin(rng), 0, lin(rng), 0);
        auto Fp = make_affine_map(kUnit, 0, 0, 0, 0, lin(rng), 0, lin(rng), 0);
        auto C = simple_compose(F, Fp);
        Widths w = widths(F), wp = widths(Fp), wc = widths(C);
        rep.linear_ratio_err = std::max(rep.linear_ratio_err, std::abs(wc.P / (w.P * wp.P) - 1.0));
        rep.linear_ratio_err = std::max(rep.linear_ratio_err, std::abs(wc.Q / (w.Q * wp.Q) - 1.0));
    }
    return rep;
}

}  // namespace hs
