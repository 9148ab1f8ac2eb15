#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace hs {

struct Interval {
    double lo = -1.0;
    double hi = 1.0;
    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
};

// Fields are functions f(y, x); the first argument is the vertical coordinate.
struct Rect {
    Interval y;
    Interval x;
};

struct Jet1 {
    double v = 0.0;
    double d = 0.0;
    double dd = 0.0;
};

struct Jet2 {
    double v = 0.0;
    double y = 0.0;
    double x = 0.0;
    double yy = 0.0;
    double xy = 0.0;
    double xx = 0.0;
};

// Chebyshev-Lobatto points cos(pi k / n), k = 0..n, descending in [-1, 1].
std::vector<double> lobatto_nodes(int n);
double to_unit(const Interval& dom, double v);
double from_unit(const Interval& dom, double s);

class Cheb1 {
public:
    Cheb1() = default;
    Cheb1(Interval dom, std::vector<double> coeffs);
    static Cheb1 constant(Interval dom, double c);
    static Cheb1 fit(Interval dom, int degree, const std::function<double(double)>& f);

    double operator()(double v) const;
    Jet1 jet(double v) const;
    Cheb1 derivative() const;

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const Interval& domain() const { return dom_; }
    const std::vector<double>& coeffs() const { return coeffs_; }

private:
    Interval dom_{};
    std::vector<double> coeffs_{0.0};
};

class ScalarField2 {
public:
    ScalarField2() = default;
    ScalarField2(Rect dom, int degree_y, int degree_x, std::vector<double> coeffs);

    static ScalarField2 constant(const Rect& dom, double c);
    // c + cy * y + cx * x in chart coordinates, stored exactly as a degree-1 field.
    static ScalarField2 affine(const Rect& dom, double c, double cy, double cx);
    static ScalarField2 fit(const Rect& dom, int degree_y, int degree_x,
                            const std::function<double(double, double)>& f);
    // values[i * (degree_x + 1) + j] sampled at (y node i, x node j).
    static ScalarField2 from_node_values(const Rect& dom, int degree_y, int degree_x,
                                         const std::vector<double>& values);

    double operator()(double y, double x) const;
    Jet2 jet(double y, double x) const;
    ScalarField2 dy() const;
    ScalarField2 dx() const;

    // Values on the tensor grid ys x xs, row-major in y.
    std::vector<double> eval_grid(const std::vector<double>& ys, const std::vector<double>& xs) const;

    // Drops trailing rows/columns whose coefficients are below tol * max|c|.
    ScalarField2 trimmed(double tol) const;

    bool is_affine() const;
    // Chart-coordinate coefficients (c, cy, cx); only meaningful when is_affine().
    void affine_coeffs(double& c, double& cy, double& cx) const;

    const Rect& domain() const { return dom_; }
    int degree_y() const { return ny_; }
    int degree_x() const { return nx_; }
    const std::vector<double>& coeffs() const { return c_; }
    double coeff(int i, int j) const { return c_[static_cast<std::size_t>(i) * (nx_ + 1) + j]; }

    // Optional analytic source; refresh() refits the coefficients from it.
    std::function<double(double, double)> closed_form;
    void refresh();

private:
    Rect dom_{};
    int ny_ = 0;
    int nx_ = 0;
    std::vector<double> c_{0.0};
};

struct FitReport {
    ScalarField2 field;
    bool degree_too_low = false;
    double tail = 0.0;  // largest dropped coefficient relative to the largest kept one
};

constexpr double kFitTolerance = 1e-10;

// samples[i][j] = f(y node i, x node j) on a Lobatto grid of any size; the
// interpolant is truncated to the requested degrees.
FitReport fit_field(const Rect& dom, const std::vector<std::vector<double>>& samples, int degree_y,
                    int degree_x);

using PointBatch = std::vector<std::pair<double, double>>;
using BatchEval = std::function<std::vector<double>(const PointBatch&)>;

struct AdaptiveFit {
    ScalarField2 field;
    double tail = 0.0;
    bool converged = false;
};

// Doubles the degree on nested Lobatto grids (4, 8, 16, 32, ...) until the
// trailing coefficients fall below tol relative to the largest.
AdaptiveFit fit_adaptive(const Rect& dom, const BatchEval& eval, double tol, int max_degree = 32);

// sup |f| over dom: grid of 65 x 65 refined by 2 until the polished maximum
// changes by less than 1e-10 relatively. Affine fields use the exact corners.
double sup_abs(const ScalarField2& f);
// Same for an arbitrary function with gradient-free polishing.
double sup_abs_fn(const Rect& dom, const std::function<double(double, double)>& f, int start_grid = 65);

using GridEval = std::function<std::vector<double>(const std::vector<double>&, const std::vector<double>&)>;
// Grid scan with a fast tensor evaluator, polishing through the pointwise one.
double sup_abs_grid(const Rect& dom, const std::function<double(double, double)>& f, const GridEval& grid,
                    int start_grid = 65);

}  // namespace hs
