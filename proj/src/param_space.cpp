#include "horseshoe/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "horseshoe/errors.hpp"
#include "horseshoe/serialize.hpp"

namespace hs {

namespace {

// floor with a relative guard, so that (1e-4)^-0.25 counts as 10 and not 9.
long guarded_floor(double v) { return static_cast<long>(std::floor(v * (1.0 + 1e-12))); }

}  // namespace

ParamInterval IntervalTree::root() const {
    ParamInterval r;
    r.level = 0;
    r.lo = eps0;
    r.hi = 2.0 * eps0;
    r.eps = eps0;
    return r;
}

ParamInterval IntervalTree::child(const ParamInterval& p, long i) const {
    if (p.level >= depth) throw Error(ErrorCode::ConfigError, "interval tree depth exceeded");
    const IntervalLevel& L = levels[static_cast<std::size_t>(p.level)];
    if (i < 0 || i >= L.candidates) throw Error(ErrorCode::ConfigError, "candidate index out of range");
    double e = levels[static_cast<std::size_t>(p.level + 1)].eps;
    ParamInterval c;
    c.level = p.level + 1;
    c.lo = p.lo + static_cast<double>(i) * e;
    c.hi = std::min(p.hi, p.lo + static_cast<double>(i + 1) * e);
    c.eps = e;
    c.index = i;
    c.path = p.path;
    c.path.push_back(i);
    return c;
}

std::vector<ParamInterval> IntervalTree::children(const ParamInterval& p) const {
    std::vector<ParamInterval> out;
    long n = levels[static_cast<std::size_t>(p.level)].candidates;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) out.push_back(child(p, i));
    return out;
}

ParamInterval IntervalTree::follow(const std::vector<long>& idx) const {
    ParamInterval cur = root();
    for (long i : idx) cur = child(cur, i);
    return cur;
}

double IntervalTree::level_discarded(int k) const {
    double nodes = 1.0;
    for (int j = 0; j < k; ++j) nodes *= static_cast<double>(levels[static_cast<std::size_t>(j)].candidates);
    return nodes * levels[static_cast<std::size_t>(k)].discarded;
}

IntervalTree interval_tree(double eps0, double tau, int depth, bool strict) {
    if (!(eps0 > 0.0 && eps0 < 1.0)) throw Error(ErrorCode::ConfigError, "eps0 must lie in (0, 1)");
    if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::ConfigError, "tau must lie in (0, 1)");
    if (depth < 0) throw Error(ErrorCode::ConfigError, "depth must be nonnegative");
    IntervalTree T;
    T.eps0 = eps0;
    T.tau = tau;
    T.depth = depth;
    double le = std::log(eps0);
    for (int k = 0; k <= depth + 1; ++k) {
        IntervalLevel L;
        L.level = k;
        L.log_eps = le;
        L.eps = std::exp(le);
        L.candidates = guarded_floor(std::exp(-tau * le));
        T.levels.push_back(L);
        le *= 1.0 + tau;
    }
    for (int k = 0; k <= depth; ++k) {
        auto& L = T.levels[static_cast<std::size_t>(k)];
        L.discarded =
            std::max(0.0, L.eps - static_cast<double>(L.candidates) * T.levels[static_cast<std::size_t>(k + 1)].eps);
        if (L.candidates < 2) {
            std::string msg = "TooFewCandidates: level " + std::to_string(k) + " has " +
                              std::to_string(L.candidates) + " candidate(s)";
            if (strict) throw Error(ErrorCode::TooFewCandidates, msg);
            T.warnings.push_back(msg);
        }
    }
    T.levels.pop_back();
    return T;
}

bool check_H4(double ds, double du) {
    double s = ds + du, m = std::max(ds, du);
    return s * s + m * m < s + m;
}

ExponentSet exponents(double ds, double du, const ExponentOffsets& off) {
    if (!(ds > 0.0 && ds < 1.0 && du > 0.0 && du < 1.0))
        throw Error(ErrorCode::ConfigError, "dimensions must lie in (0, 1)");
    if (ds < du) throw Error(ErrorCode::ConventionViolated, "d_s0 < d_u0; swap the roles of s and u");
    ExponentSet e;
    e.ds = ds;
    e.du = du;
    double s = ds + du;
    if (s <= 1.0) e.warnings.push_back("d_s0 + d_u0 <= 1: outside the bifurcation regime");
    e.rho0 = ds + off.rho0;
    e.rho1 = ds * (2.0 * ds + du - 1.0) / s + off.rho1;
    e.sigma0 = 1.0 - ds + off.sigma0;
    e.sigma1 = ds - du + off.sigma1;
    e.rho0p = du / ds * e.rho0;
    e.rho1p = du / ds * e.rho1;
    e.beta_max = (1.0 - du) * s / (ds * (2.0 * ds + du - 1.0));
    e.xcr_exponent = e.sigma0 / (e.rho0 - e.rho1);
    e.xcr_exponent_p = e.sigma0 / (e.rho0p - e.rho1p);
    e.barx_exponent = (e.sigma0 + e.sigma1) / e.rho1;
    e.critical_exponent = e.sigma1 + e.sigma0 * (e.rho0 - 2.0 * e.rho1) / (e.rho0 - e.rho1);
    e.exceptional_bound = (s - 1.0) * 2.0 * ds / (2.0 * du + ds);
    e.h4 = check_H4(ds, du);
    e.xcr_identity = e.xcr_exponent - s / ds;
    e.barx_identity = e.barx_exponent - e.beta_max;
    e.gap_identity = e.rho0 - e.rho1 - ds * (1.0 - ds) / s;
    e.critical_identity = e.critical_exponent - (2.0 - 2.0 * ds - 2.0 * du);
    e.primed_identity = e.xcr_exponent_p - s / du;
    return e;
}

nlohmann::json to_json(const ExponentSet& e) {
    return nlohmann::json{{"d_s0", e.ds},
                          {"d_u0", e.du},
                          {"rho0", e.rho0},
                          {"rho1", e.rho1},
                          {"rho0_prime", e.rho0p},
                          {"rho1_prime", e.rho1p},
                          {"sigma0", e.sigma0},
                          {"sigma1", e.sigma1},
                          {"beta_max", e.beta_max},
                          {"x_cr_exponent", e.xcr_exponent},
                          {"x_cr_exponent_prime", e.xcr_exponent_p},
                          {"bar_x_exponent", e.barx_exponent},
                          {"critical_exponent", e.critical_exponent},
                          {"exceptional_bound", e.exceptional_bound},
                          {"h4", e.h4},
                          {"identities",
                           {{"x_cr", e.xcr_identity},
                            {"bar_x", e.barx_identity},
                            {"gap", e.gap_identity},
                            {"critical", e.critical_identity},
                            {"primed", e.primed_identity}}},
                          {"warnings", e.warnings}};
}

Budget0 bicritical_budget(double x, double I_alpha, double I_omega, double eps0, double Pu_width,
                          const ExponentSet& e, bool primed) {
    if (!(x > 0.0)) throw Error(ErrorCode::ConfigError, "x must be positive");
    double r0 = primed ? e.rho0p : e.rho0, r1 = primed ? e.rho1p : e.rho1;
    double X = x / (eps0 * Pu_width);
    double aa = I_alpha / eps0, aw = I_omega / eps0;
    Budget0 b;
    b.B0 = std::pow(X, -r0) * std::pow(aa, e.sigma0 + e.sigma1) * std::pow(aw, e.sigma0);
    b.B1 = std::pow(X, -r1) * std::pow(aa, e.sigma1) * std::pow(std::min(aa, aw), e.sigma0);
    b.B = std::max(b.B0, b.B1);
    double amax = std::max(aa, aw);
    b.x_cr = eps0 * Pu_width * std::pow(amax, e.sigma0 / (r0 - r1));
    b.x_bar = eps0 * Pu_width * std::pow(aa, (e.sigma0 + e.sigma1) / r1);
    b.B_cr = std::pow(aa, e.sigma0 + e.sigma1) * std::pow(aw, e.sigma0) * std::pow(amax, -r0 * e.sigma0 / (r0 - r1));
    b.regime0 = x <= b.x_cr;
    return b;
}

std::vector<BudgetSample> budget_sweep(int N_lo, int N_hi, double I_alpha, double I_omega, double eps0,
                                       double Pu_width, const ExponentSet& e) {
    std::vector<BudgetSample> out;
    for (int N = N_lo; N <= N_hi; ++N) {
        BudgetSample s;
        s.N = N;
        s.x = std::ldexp(1.0, -N);
        s.b = bicritical_budget(s.x, I_alpha, I_omega, eps0, Pu_width, e);
        out.push_back(s);
    }
    return out;
}

std::vector<H4Cell> h4_region(int n) {
    std::vector<H4Cell> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            H4Cell c;
            c.ds = (i + 0.5) / n;
            c.du = (j + 0.5) / n;
            c.h4 = check_H4(c.ds, c.du);
            double a = std::max(c.ds, c.du), b = std::min(c.ds, c.du);
            double den = a * (2.0 * a + b - 1.0);
            c.beta_max = den != 0.0 ? (1.0 - b) * (a + b) / den : 0.0;
            c.bifurcation = c.ds + c.du > 1.0;
            out.push_back(c);
        }
    return out;
}

std::string h4_region_csv(int n) {
    std::ostringstream os;
    os << "d_s0,d_u0,bifurcation,h4,beta_max\n";
    for (const auto& c : h4_region(n))
        os << fmt17(c.ds) << ',' << fmt17(c.du) << ',' << (c.bifurcation ? 1 : 0) << ',' << (c.h4 ? 1 : 0) << ',' << fmt17(c.beta_max) << '\n';
    return os.str();
}

}  // namespace hs
