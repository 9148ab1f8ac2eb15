#pragma once

#include <functional>
#include <vector>

#include "horseshoe/chebyshev.hpp"

namespace hs {

struct BundleFit {
    std::vector<ScalarField2> fields;
    double tail = 0.0;  // worst relative tail over the bundle
    bool converged = false;
    int degree = 0;
};

// Fits k fields sharing one pointwise evaluator, out[0..k), on nested Lobatto
// grids of degree 4, 8, 16, ... until every field's tail is below tol.
// Node evaluations run on the worker pool; the lowest-index error is rethrown.
BundleFit fit_bundle(const Rect& dom, int k, const std::function<void(double y, double x, double* out)>& node,
                     double tol, int max_degree = 32);

// Zeroes coefficients below rel * max|c| and trims trailing rows/columns.
ScalarField2 denoise(const ScalarField2& f, double rel = 1e-15);

}  // namespace hs
