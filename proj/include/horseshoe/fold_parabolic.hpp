#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "horseshoe/affine_calculus.hpp"

namespace hs {

constexpr double kBConfig = 0.05;

struct FoldConfig {
    double kappa_u = 0.0;  // X_u = x_c + w + kappa_u y_u
    double kappa_s = 0.0;  // Y_s = y_c + w + kappa_s x_s
    double x_c = 0.0;
    double y_c = 0.0;
    double chi3 = 0.0;  // theta = t - y_u - (x_s + chi3 x_s^3) + theta_q (y_u x_s + t (y_u + x_s))
    double theta_q = 0.0;
    double q_u = 0.0;  // X_u += q_u (w^2 + w y_u + y_u^2) + r_u t (w + y_u)
    double r_u = 0.0;
    double q_s = 0.0;  // Y_s += q_s (w^2 + w x_s + x_s^2) + r_s t (w + x_s)
    double r_s = 0.0;
    int N0 = 2;
    Rect source_chart{{-2.5, 2.5}, {-2.5, 2.5}};
    Rect target_chart{{-2.5, 2.5}, {-2.5, 2.5}};
    double t_max = 1.0;  // largest parameter the tongue must fit for
};

// Folding map G = G+ o G0 o G- given implicitly by
//   x_u = X_u(w, y_u), y_s = Y_s(w, x_s), w^2 = theta(y_u, x_s).
// Jet conventions (first slot "y", second slot "x"):
//   theta(y_u, x_s), X_u with y = y_u and x = w, Y_s with y = w and x = x_s.
struct FoldMap {
    FoldConfig cfg;
    double t = 0.0;

    Jet3 theta(double y_u, double x_s) const;
    Jet3 Xu(double w, double y_u) const;
    Jet3 Ys(double w, double x_s) const;
    FoldMap at(double t_new) const;

    // Explicit branch of G: (x_u, y_u) -> (x_s, y_s).
    void forward(double x_u, double y_u, double& x_s, double& y_s) const;
    // Number of transverse intersection points of G({y_u = y}) with {x_s = x},
    // counted by sign changes on a fine w-grid.
    int intersection_count(double y_u, double x_s) const;
};

FoldMap make_model_fold(const FoldConfig& cfg, double t);

struct DisplacementQuad {
    double delta = 0.0;
    double delta_L = 0.0;
    double delta_R = 0.0;
    double delta_LR = 0.0;
};

// Pointwise building blocks: F0 carries (y0, x_u) -> x0, y_u and F1 carries
// (y_s, x1) -> x_s, y1. Both are evaluated at the fold's parameter.
struct ParabolicJets {
    std::function<Jet3(double, double)> A0, B0, A1, B1;
    std::function<Jet3(double, double)> theta, Xu, Ys;
    Interval xu_range;
    Interval ys_range;
};
ParabolicJets make_jets(const ImplicitMap& F0, const FoldMap& G, const ImplicitMap& F1);
ParabolicJets make_jets(const ParamMap& F0, const FoldMap& G, const ParamMap& F1, double t);

struct CbarPoint {
    double w_min = 0.0;
    double cbar = 0.0;
    double cww = 2.0;
};

double tangency_C(const ParabolicJets& J, double w, double y0, double x1);
CbarPoint tangency_min(const ParabolicJets& J, double y0, double x1);
// Roots W- < W+ of C(., y0, x1) = 0; false when C-bar >= 0.
bool tangency_roots(const ParabolicJets& J, double y0, double x1, double& wm, double& wp);

void check_pc1(const ImplicitMap& F0, const ImplicitMap& F1, double b = kBConfig);

struct TangencyFunctional {
    std::function<double(double w, double y0, double x1)> C;
    ScalarField2 Cbar;
    ScalarField2 Wmin;
};
TangencyFunctional tangency_functional(const ImplicitMap& F0, const FoldMap& G, const ImplicitMap& F1,
                                       double b = kBConfig);

DisplacementQuad displacement(const ImplicitMap& F0, const FoldMap& G, const ImplicitMap& F1);
DisplacementQuad displacement(const ParabolicJets& J, const Rect& rect);
std::vector<DisplacementQuad> displacement_over(const ImplicitMap& F0, const FoldMap& G, const ImplicitMap& F1,
                                                const std::vector<double>& ts);

struct ParabolicOptions {
    double b = kBConfig;
    bool check_pc1 = true;
    bool enforce_pc2 = false;
    int max_degree = 64;
};

struct ParabolicPair {
    ImplicitMap plus;
    ImplicitMap minus;
    ScalarField2 W_plus;
    ScalarField2 W_minus;
    DisplacementQuad disp;
    std::array<double, 4> corner_cbar{};  // (y_lo,x_lo), (y_lo,x_hi), (y_hi,x_lo), (y_hi,x_hi)
    double t = 0.0;
    double fit_tail = 0.0;
};

ParabolicPair parabolic_compose(const ImplicitMap& F0, const FoldMap& G, const ImplicitMap& F1,
                                const ParabolicOptions& opt = {});
ParabolicPair parabolic_compose(const ParabolicJets& J, const Rect& rect, int src, int dst,
                                const ParabolicOptions& opt = {}, const ImplicitMap* F0 = nullptr,
                                const ImplicitMap* F1 = nullptr);

// Every intermediate quantity of the elimination at (w, y0, x1).
struct ParabolicPoint {
    double X, Y, Xbar, Ybar, C;
    double D0, D1;
    double X_w, X_y, X_t, Y_w, Y_x, Y_t;
    double Ybar_w, Ybar_y, Ybar_t, Xbar_w, Xbar_x, Xbar_t;
    double C_w, C_x, C_y, C_t;
    double X_ww, X_wy, X_yy, X_wt, X_yt;
    double Y_ww, Y_wx, Y_xx, Y_wt, Y_xt;
    double Xbar_ww, Xbar_wx, Xbar_wt, Xbar_xx, Xbar_xt;
    double Ybar_ww, Ybar_wy, Ybar_wt, Ybar_yy, Ybar_yt;
    double C_ww, C_wx, C_wy, C_wt, C_xx, C_xy, C_yy, C_xt, C_yt;
    Jet3 b0, a1, xu, ys, th;
};
ParabolicPoint parabolic_point(const ParabolicJets& J, double w, double y0, double x1);

// Branch quantities at the root w = W(y0, x1).
std::map<std::string, double> parabolic_formulas(const ParabolicJets& J, double y0, double x1, double W);

struct ParabolicEstimates {
    double width_P_ratio = 0.0;  // |P+-| / (|P0| |P1| delta^-1/2), worst branch
    double width_Q_ratio = 0.0;
    double width_constant = 0.0;  // max(ratio, 1/ratio)
    double distortion_constant = 0.0;
    double ay_deviation = 0.0;
    double ay_constant = 0.0;
    double bx_deviation = 0.0;
    double bx_constant = 0.0;
    bool ok = true;
    std::vector<std::string> flagged;
};
ParabolicEstimates check_parabolic_estimates(const ParabolicPair& pair, const ImplicitMap& F0, const FoldMap& G,
                                             const ImplicitMap& F1, double ceiling = 10.0);

// Parabolic calculus check against finite differences; t-derivatives use
// refits at t +- h, t +- 2h.
CalculusReport verify_parabolic_calculus(const ParamMap& F0, const FoldConfig& fold, const ParamMap& F1, double t,
                                         const VerifyOptions& opt = {});

// One-parameter family of vertical-like curves x = phi(y, s).
struct CurveFamily {
    std::function<Jet3(double y, double s)> phi;  // jet slot "x" carries s
    Interval s_range;
};
// Curves x = s0 + k s exp(T (y - y_ref)): d/dy log dphi/ds = T exactly.
CurveFamily exponential_family(double s0, double k, double T, double y_ref, Interval s_range);

struct LipschitzReport {
    double T = 0.0;
    double T_prime = 0.0;
    double a = 0.0;  // slope of the affine recursion fit
    double C = 0.0;  // intercept
    double formula_rel = 0.0;  // analytic sum of the Z terms against differences (affine case)
};
LipschitzReport lipschitz_recursion_check(const ImplicitMap& F, const CurveFamily& family);
LipschitzReport lipschitz_recursion_check(const ImplicitMap& F0, const FoldMap& G, const CurveFamily& family);
// Fits T' = a T + C over several families of the exponential type.
LipschitzReport lipschitz_recursion_fit(const ImplicitMap& F0, const FoldMap& G, double s0, double k,
                                        const std::vector<double>& Ts);
LipschitzReport lipschitz_recursion_fit(const ImplicitMap& F, double s0, double k, const std::vector<double>& Ts);

struct ParabolicSuiteReport {
    int instances = 0;
    double max_rel = 0.0;
    std::map<std::string, double> per_formula;
    double cw_dev = 0.0;   // max |C_w - 2w|
    double cww_dev = 0.0;  // max |C_ww - 2|
    bool ordering_ok = true;
    double max_constant = 0.0;  // worst estimate constant
    double dt_cbar_min = 1e300;
    double dt_cbar_max = -1e300;
    bool ok = true;
};
// Finite-difference shape of w -> C(w, y0, x1) on an n x n x n grid over
// rect x ws: max |C_w - 2w| and max |C_ww - 2|.
struct TangencyShape {
    double cw_dev = 0.0;
    double cww_dev = 0.0;
    int samples = 0;
};
TangencyShape tangency_shape(const ParabolicJets& J, const Rect& rect, const Interval& ws, int n = 5);

// Random perturbed F0, F1 around the model fold.
ParabolicSuiteReport run_parabolic_suite(int instances, std::uint64_t seed, const VerifyOptions& opt = {});

}  // namespace hs
