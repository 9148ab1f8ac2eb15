#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "horseshoe/chebyshev.hpp"

namespace hs {

constexpr double kNewtonTol = 1e-12;
constexpr int kMaxNewtonIters = 50;
constexpr double kDeltaFloor = 1e-6;
constexpr double kDerivativeFloor = 1e-10;
constexpr double kMapFitTol = 1e-13;

// Value and derivatives of a function of (y, x, t), second order in (y, x)
// and mixed with t.
struct Jet3 {
    double v = 0.0;
    double y = 0.0;
    double x = 0.0;
    double t = 0.0;
    double yy = 0.0;
    double xy = 0.0;
    double xx = 0.0;
    double yt = 0.0;
    double xt = 0.0;
};

struct ConeParams {
    double lambda = 2.0;
    double u = 1.0;
    double v = 1.0;
    bool valid() const { return u * v > 1.0 && u * v <= lambda * lambda; }
};

struct Strip {
    enum class Orientation { Vertical, Horizontal };
    Orientation orientation = Orientation::Vertical;
    int chart = 0;
    Interval over;  // transverse parameter interval (y for vertical strips)
    Cheb1 lower;
    Cheb1 upper;

    double width_at(double s) const { return upper(s) - lower(s); }
    double max_width() const;
    double min_width() const;
    // Lower graph strictly below the upper one and both slopes within the bound.
    bool valid(double slope_bound) const;
    // True when other lies inside this strip up to tol (same chart and orientation).
    bool contains(const Strip& other, double tol = 1e-12) const;
    bool disjoint(const Strip& other) const;
};

// Affine-like map x0 = A(y0, x1), y1 = B(y0, x1). Derivative fields are stored
// separately so that deep composites keep relative precision in A_x, B_y.
struct ImplicitMap {
    Rect rect;
    int src = 0;
    int dst = 0;
    ScalarField2 A, B, Ax, Ay, Bx, By;
    Strip domain;
    Strip image;
    ConeParams cone;
    double fit_tail = 0.0;

    Jet2 jetA(double y, double x) const;
    Jet2 jetB(double y, double x) const;
    bool is_affine() const;
};

// Builds strips and, when derivative fields are absent, spectral derivatives.
ImplicitMap make_map(const Rect& rect, int src, int dst, ScalarField2 A, ScalarField2 B);
ImplicitMap make_map(const Rect& rect, int src, int dst, ScalarField2 A, ScalarField2 B, ScalarField2 Ax,
                     ScalarField2 Ay, ScalarField2 Bx, ScalarField2 By);
ImplicitMap make_affine_map(const Rect& rect, int src, int dst, double a0, double ay, double ax, double b0,
                            double by, double bx);
ImplicitMap identity_map(const Rect& rect, int chart);
void rebuild_strips(ImplicitMap& F);

struct Widths {
    double P = 0.0;
    double Q = 0.0;
};
Widths widths(const ImplicitMap& F);

struct ConeReport {
    bool ok = true;
    double margin = 0.0;
    double worst_y = 0.0;
    double worst_x = 0.0;
};
ConeReport check_cone(const ImplicitMap& F, const ConeParams& c);

double distortion(const ImplicitMap& F);

// Explicit planar diffeomorphism (x, y) -> (x1, y1) with Jacobian
// jac = {dx1/dx, dx1/dy, dy1/dx, dy1/dy}.
struct PlanarDiffeo {
    std::function<void(double x, double y, double out[2], double jac[4])> eval;
};
ImplicitMap from_diffeo(const PlanarDiffeo& phi, const Strip& P, const Rect& target, int src = 0, int dst = 0);

ImplicitMap simple_compose(const ImplicitMap& F, const ImplicitMap& Fp);

// Time reversal: the inverse map written with the roles of (A, B) swapped.
ImplicitMap time_reverse(const ImplicitMap& F);

// Derivative-formula bookkeeping shared by the simple and parabolic checks.
struct FormulaCheck {
    std::string name;
    double max_rel = 0.0;
    double max_abs = 0.0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    bool flagged = false;
};

struct CalculusReport {
    std::vector<FormulaCheck> checks;
    double max_rel = 0.0;
    double max_abs = 0.0;
    bool ok = true;
    std::vector<std::string> flagged() const;
};

struct VerifyOptions {
    int points = 8;
    std::uint64_t seed = 1;
    double fd_step = 1e-2;
    double rel_floor = 1e-4;
    double threshold = 1e-5;
    std::string corrupt;  // fault injection: scale this formula by (1 + 1e-3)
    bool include_t = true;
};

// Closed-form formulas for the composite of F then F' from jets of A, B at
// (y0, x1) and A', B' at (y1, x2).
std::map<std::string, double> simple_formulas(const Jet3& A, const Jet3& B, const Jet3& Ap, const Jet3& Bp);

// Analytic t-dependent affine-like map used by the verification harness.
struct ParamMap {
    Rect rect;
    int src = 0;
    int dst = 0;
    std::function<Jet3(double y, double x, double t)> A;
    std::function<Jet3(double y, double x, double t)> B;
};
ImplicitMap param_map_at(const ParamMap& F, double t);

// Analytic formulas against finite differences of the refit composite.
CalculusReport verify_simple_calculus(const ParamMap& F, const ParamMap& Fp, double t, const VerifyOptions& opt = {});
CalculusReport verify_composition_calculus(const ImplicitMap& F, const ImplicitMap& Fp, const ImplicitMap& Fpp,
                                           const VerifyOptions& opt = {});

// Fourth-order central differences.
double fd1(const std::function<double(double)>& f, double x, double h);
double fd2(const std::function<double(double)>& f, double x, double h);
double fd11(const std::function<double(double, double)>& f, double a, double b, double ha, double hb);

// Newton helpers used throughout.
struct Newton1Result {
    double x = 0.0;
    double deriv = 0.0;
    int iters = 0;
    bool converged = false;
};
Newton1Result newton1(const std::function<void(double, double&, double&)>& fdf, double x0, double tol = kNewtonTol,
                      int max_iter = kMaxNewtonIters);

}  // namespace hs
