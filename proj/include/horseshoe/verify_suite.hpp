#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>

#include "horseshoe/affine_calculus.hpp"

namespace hs {

// c0 + cy y + cx x + ct t (x or y) + qyy y^2 + qxy x y + qxx x^2 + s sin(ky y + kx x + kt t)
struct QuadTrig {
    double c0 = 0, cy = 0, cx = 0, ct = 0, qyy = 0, qxy = 0, qxx = 0, s = 0, ky = 0, kx = 0, kt = 0;
    bool t_on_x = true;  // t multiplies x when true, y otherwise
    Jet3 operator()(double y, double x, double t) const;
};

// Smooth t-dependent affine-like map on [-1,1]^2: hyperbolic linear part,
// small quadratic terms and a 0.01 trigonometric perturbation.
ParamMap random_param_map(std::mt19937_64& rng, int src = 0, int dst = 0);

// Draws pairs until both members pass the cone condition at t.
std::pair<ParamMap, ParamMap> random_cone_pair(std::mt19937_64& rng, double t, const ConeParams& cone);

struct SimpleSuiteReport {
    int pairs = 0;
    int evaluations = 0;  // analytic/numeric comparisons
    double max_rel = 0.0;
    std::map<std::string, double> per_formula;
    bool ok = true;
};

// Analytic composition formulas against finite differences on random pairs.
SimpleSuiteReport run_simple_suite(int pairs, std::uint64_t seed, const VerifyOptions& opt = {});

struct ConeSuiteReport {
    int pairs = 0;
    int cone_pass = 0;
    double ratio_min = 1e300;  // |P''| / (|P| |P'|)
    double ratio_max = 0.0;
    double linear_ratio_err = 0.0;
    double distortion_constant = 0.0;  // smallest C for which the composite distortion bound holds
    double det_rel_err = 0.0;
};

// Cone upgrade (lambda^2, u, v), width multiplicativity and determinant checks.
ConeSuiteReport run_cone_suite(int pairs, std::uint64_t seed, const ConeParams& cone = {});

}  // namespace hs
