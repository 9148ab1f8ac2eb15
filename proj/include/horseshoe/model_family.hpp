#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "horseshoe/affine_calculus.hpp"
#include "horseshoe/fold_parabolic.hpp"
#include "json.hpp"

namespace hs {

// Two-rectangle affine horseshoe with a quadratic heteroclinic tangency.
// Charts are unit squares (y, x) in [0,1]^2. The transition (a, a') reads
//   x0 = c_{a'} + lambda_u^-1 x1,  y1 = d_a + lambda_s y0
// with c_0 = 0, c_1 = 1 - lambda_u^-1, d_0 = 1 - lambda_s, d_1 = 0, so that
// p_s = (x 0, y 1) is the fixed point of (0,0) and p_u = (x 1, y 0) that of (1,1).
// The tongue leaves R_1 through the x-gap and lands in the y-gap of R_0.
struct FamilyConfig {
    double lambda_s = 0.284;
    double lambda_u = 1.0 / 0.284;
    double eps0 = 1e-4;
    double tau = 0.25;
    double eta = 0.05;
    double beta = 1.05;
    double nonlinearity = 0.0;  // amplitude of the quadratic branch terms
    int n0 = 2;
    double tongue_x = 0.5;  // fold anchor x_c in R_1
    double tongue_y = 0.5;  // fold anchor y_c in R_0
    std::array<bool, 4> perturb{true, true, true, true};  // per branch (a, a'), index 2a + a'
};

FamilyConfig family_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FamilyConfig& c);

struct ModelFamily {
    FamilyConfig cfg;
    std::vector<int> alphabet{0, 1};
    std::vector<Rect> rectangles;
    std::vector<std::pair<int, int>> transitions;
    int a_s = 0;
    int a_u = 1;
    std::array<double, 2> p_s{0.0, 1.0};  // (x, y) in R_0
    std::array<double, 2> p_u{1.0, 0.0};  // (x, y) in R_1
    FoldConfig fold;
    Interval t_range;  // I0 = [eps0, 2 eps0]
    double d_s0 = 0.0;  // closed form log 2 / log lambda_u (widths of vertical strips)
    double d_u0 = 0.0;  // closed form log 2 / log(1 / lambda_s)
    bool h4 = false;
    std::vector<std::string> warnings;

    double alpha() const { return 1.0 / cfg.lambda_u; }
    double c_offset(int a_next) const { return a_next == 0 ? 0.0 : 1.0 - alpha(); }
    double d_offset(int a) const { return a == 0 ? 1.0 - cfg.lambda_s : 0.0; }
    bool affine() const { return cfg.nonlinearity == 0.0; }
    bool branch_perturbed(int a, int b) const { return !affine() && cfg.perturb[2 * a + b]; }
    FoldMap fold_at(double t) const;
};

// Warns (does not throw) when (H4) fails; throws ConfigError on invalid rates.
ModelFamily make_family(const FamilyConfig& cfg = {});

// g_{a,a'} on P_{aa'}; transitions do not depend on t in this model.
ImplicitMap transition_map(const ModelFamily& fam, int a, int b, double t = 0.0);
// Explicit forward branch (x, y) in P_{aa'} -> (x1, y1) in R_{a'}.
PlanarDiffeo branch_diffeo(const ModelFamily& fam, int a, int b);
// Vertical strip P_{aa'} in R_a.
Strip transition_strip(const ModelFamily& fam, int a, int b);

// Pure cylinder with itinerary digits a_0 .. a_n (n + 1 symbols).
// For the affine model A = a0 + ax x, B = b0 + by y exactly.
struct PureCylinder {
    double a0 = 0.0, ax = 1.0;
    double b0 = 0.0, by = 1.0;
};
PureCylinder pure_cylinder(const ModelFamily& fam, const std::string& digits);
ImplicitMap pure_cylinder_map(const ModelFamily& fam, const std::string& digits);
bool valid_itinerary(const ModelFamily& fam, const std::string& digits);
// Pure words as 1D maps: x0 as a function of x_n, y_n as a function of y0.
// d receives the derivative.
double cylinder_A(const ModelFamily& fam, const std::string& digits, double x, double& d);
double cylinder_B(const ModelFamily& fam, const std::string& digits, double y, double& d);

struct Polyline {
    std::vector<double> x;
    std::vector<double> y;
};

struct Tongues {
    double t = 0.0;
    double w_max = 0.0;
    // L_u in R_{a_u}: floor on W^u(p_u) (y_u = 0) and roof on the pull-back of W^s(p_s).
    Polyline Lu_floor, Lu_roof;
    // L_s in R_{a_s}: wall on W^s(p_s) (x_s = 0) and the image of the L_u floor.
    Polyline Ls_wall, Ls_front;
    double thickness_u = 0.0;  // max y extent of L_u
    double thickness_s = 0.0;  // max x extent of L_s
};

// Throws NotUnfolded when t <= 0.
Tongues tongues(const ModelFamily& fam, double t, int samples = 201);
// Symmetric Hausdorff distance between the fold image of the L_u boundary and
// the independently computed L_s boundary.
double tongue_roundtrip_distance(const ModelFamily& fam, const Tongues& T);

struct SpecialRectangles {
    std::string Ps_word;  // 0^(n_s + 1)
    std::string Qu_word;  // 1^(n_u + 1)
    int n_s = 0;
    int n_u = 0;
    double Ps_width = 0.0;
    double Qs_width = 0.0;
    double Pu_width = 0.0;
    double Qu_width = 0.0;
    double C = 0.0;  // max(|P_s|/eps0, eps0/|P_s|, |Q_u|/eps0, eps0/|Q_u|)
};
SpecialRectangles special_rectangles(const ModelFamily& fam);

// Box-counting slope of the vertical-strip Cantor set at the given depth.
double box_counting_dimension(const ModelFamily& fam, int depth = 14);

struct CodingReport {
    int seeds = 0;
    int survivors = 0;
    int mismatches = 0;   // itinerary disagrees with the cylinder containing the seed
    int uncovered = 0;    // survivor outside every depth-N cylinder
    int depth = 0;
};
// Forward orbit simulation on a grid x grid seed set in each rectangle.
CodingReport coding_check(const ModelFamily& fam, int grid = 200, int depth = 8);

// theta(0, 0, t) - t over the grid, worst absolute value.
double tangency_normalization_error(const ModelFamily& fam, const std::vector<double>& ts);

// Rectangles, transition strips and tongues as CSV rows: kind,id,index,x,y.
std::string geometry_csv(const ModelFamily& fam, double t, int samples = 101);

}  // namespace hs
