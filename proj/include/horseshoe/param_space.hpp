#pragma once

#include <string>
#include <vector>

#include "horseshoe/chebyshev.hpp"
#include "json.hpp"

namespace hs {

struct ParamInterval {
    int level = 0;
    double lo = 0.0;
    double hi = 0.0;
    double eps = 0.0;     // nominal length eps_k
    long index = 0;       // candidate index inside the parent
    std::vector<long> path;  // candidate indices from the root
    Interval as_interval() const { return Interval{lo, hi}; }
    double length() const { return eps; }
    bool contains(const ParamInterval& o) const { return o.lo >= lo && o.hi <= hi; }
};

struct IntervalLevel {
    int level = 0;
    double eps = 0.0;
    double log_eps = 0.0;
    long candidates = 0;       // floor(eps_k^-tau), children per node
    double discarded = 0.0;    // eps_k - candidates * eps_{k+1}, per node
};

// Lazy scale tree: level data are explicit, nodes are generated on demand.
struct IntervalTree {
    double eps0 = 0.0;
    double tau = 0.0;
    int depth = 0;
    std::vector<IntervalLevel> levels;  // levels[0..depth]
    std::vector<std::string> warnings;

    ParamInterval root() const;
    ParamInterval child(const ParamInterval& parent, long i) const;
    std::vector<ParamInterval> children(const ParamInterval& parent) const;
    ParamInterval follow(const std::vector<long>& indices) const;
    // Sum of the discarded remainders of every node at level k.
    double level_discarded(int k) const;
};

// TooFewCandidates is a warning unless strict is set.
IntervalTree interval_tree(double eps0, double tau, int depth, bool strict = false);

bool check_H4(double ds, double du);

struct ExponentOffsets {
    double rho0 = 0.0, rho1 = 0.0, sigma0 = 0.0, sigma1 = 0.0;
};

struct ExponentSet {
    double ds = 0.0, du = 0.0;
    double rho0 = 0.0, rho1 = 0.0, rho0p = 0.0, rho1p = 0.0;
    double sigma0 = 0.0, sigma1 = 0.0;
    double beta_max = 0.0;
    double xcr_exponent = 0.0;     // sigma0 / (rho0 - rho1)
    double xcr_exponent_p = 0.0;   // sigma0 / (rho0' - rho1')
    double barx_exponent = 0.0;    // (sigma0 + sigma1) / rho1
    double critical_exponent = 0.0;  // sigma1 + sigma0 (rho0 - 2 rho1) / (rho0 - rho1)
    double exceptional_bound = 0.0;
    bool h4 = false;
    // Residuals of the leading-order identities.
    double xcr_identity = 0.0;       // sigma0/(rho0-rho1) - (ds+du)/ds
    double barx_identity = 0.0;      // (sigma0+sigma1)/rho1 - beta_max
    double gap_identity = 0.0;       // rho0 - rho1 - ds(1-ds)/(ds+du)
    double critical_identity = 0.0;  // critical exponent - (2 - 2ds - 2du)
    double primed_identity = 0.0;    // sigma0/(rho0'-rho1') - (ds+du)/du
    std::vector<std::string> warnings;
};

// Throws ConventionViolated when ds < du.
ExponentSet exponents(double ds, double du, const ExponentOffsets& off = {});
nlohmann::json to_json(const ExponentSet& e);

struct Budget0 {
    double B0 = 0.0;
    double B1 = 0.0;
    double B = 0.0;
    double x_cr = 0.0;
    double x_bar = 0.0;
    double B_cr = 0.0;
    bool regime0 = true;  // x <= x_cr
};

// Bicritical budget B = max(B0, B1). With primed = true the Q_s-side variant
// (rho0', rho1') is used and Pu_width is read as |Q_s|.
Budget0 bicritical_budget(double x, double I_alpha, double I_omega, double eps0, double Pu_width,
                          const ExponentSet& e, bool primed = false);

struct BudgetSample {
    int N = 0;
    double x = 0.0;
    Budget0 b;
};
// x = 2^-N for N in [N_lo, N_hi].
std::vector<BudgetSample> budget_sweep(int N_lo, int N_hi, double I_alpha, double I_omega, double eps0,
                                       double Pu_width, const ExponentSet& e);

struct H4Cell {
    double ds = 0.0, du = 0.0;
    bool h4 = false;
    bool bifurcation = false;  // ds + du > 1, where beta_max > 1 is equivalent to (H4)
    double beta_max = 0.0;
};
// n x n grid over (0,1)^2 at cell centres; beta_max uses the larger value as d_s.
std::vector<H4Cell> h4_region(int n);
std::string h4_region_csv(int n);

}  // namespace hs
