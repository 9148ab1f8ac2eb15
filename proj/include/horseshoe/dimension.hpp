#pragma once

#include <string>
#include <utility>
#include <vector>

#include "horseshoe/rclass.hpp"
#include "json.hpp"

namespace hs {

struct Truncation {
    int m_trunc = 8;       // maximal number of primes in a cylinder state
    double w_min = 1e-8;   // primes thinner than this are excluded, thinner cylinders are not refined
    double y_base = 0.5;   // base point y0_a on every chart
    double d_minus = -1.0; // exponent of the tail mass; negative means d_s0 - 100 eps0
    double tail_limit = 0.1;
};

nlohmann::json to_json(const Truncation& t);
Truncation truncation_from_json(const nlohmann::json& j);
// d_s0 - C eps0 with C = 100.
double default_d_minus(const ModelFamily& fam);

// Log of the first diagonal coefficient of the inverse branch of `prime` along
// the stable curve x = phi(y) with phi the centre graph of `curve`'s P strip
// (the vertical line x = 1/2 when curve < 0), at y = y_base.
double dilatation(const RClass& cls, int prime, int curve = -1, double y_base = 0.5);
// Deepest stored cylinder a^k in R_a: proxy for the stable curve through the fixed point.
int stable_curve_proxy(const RClass& cls, int chart, int level = -1);
// Sum of the dilatations along a chain of primes, each one on the curve of the rest.
double birkhoff_sum(const RClass& cls, const std::vector<int>& primes, double y_base = 0.5, int level = -1);

struct CylinderState {
    std::vector<int> primes;  // prime ids, outermost first
    std::string word;
    int element = -1;         // stored element of the joined word
    int a = 0;                // base rectangle
    double width = 0.0;       // |P|
    double b = 0.0;           // Birkhoff sum of the dilatations along the chain
    int parent = -1;          // prefix node, -1 for depth 1
    std::vector<int> children;
    bool leaf = false;
};

// Prefix tree of prime chains and the transfer operator on its leaves:
// M[s', s] = exp(-d b(s')) when T+ maps cylinder s' onto the rectangle of s.
class TransferOperator {
public:
    TransferOperator(const RClass& cls, const Truncation& trunc = {}, int level = -1);

    const std::vector<CylinderState>& nodes() const { return nodes_; }
    const std::vector<int>& leaves() const { return leaves_; }
    // T+ of leaf slot s covers R_landing(s); it feeds every leaf rooted there.
    int landing(std::size_t s) const { return dst_[s]; }
    const std::vector<int>& rooted(int a) const { return by_rect_[a]; }  // leaf slots in R_a
    double b(std::size_t s) const { return b_[s]; }
    double tail_mass() const { return tail_; }
    std::size_t excluded_primes() const { return excluded_; }
    double d_minus() const { return d_minus_; }

    struct Spectrum {
        double d = 0.0;
        double lambda = 0.0;
        double lambda_rooted[2] = {0.0, 0.0};  // growth of the mass over cylinders rooted at R_a
        std::vector<double> nu;  // right eigenvector (conformal weights), per leaf slot
        std::vector<double> h;   // left eigenvector (eigenfunction), per leaf slot
        int iterations = 0;
        bool converged = false;
        double h_ratio = 0.0;    // max h / min h
    };
    // Power iteration from the all-ones vector (tol 1e-12, at most 10000 steps).
    Spectrum spectrum(double d, bool with_left = true) const;
    // Dense matrix M[s', s] = exp(-d b(s')) for s' -> s, leaves in slot order.
    std::vector<std::vector<double>> dense(double d) const;

private:
    std::vector<CylinderState> nodes_;
    std::vector<int> leaves_;              // node ids
    std::vector<int> dst_;                 // per leaf slot
    std::vector<int> by_rect_[2];
    std::vector<double> b_;                // per leaf slot
    std::vector<int> a_;                   // per leaf slot
    double tail_ = 0.0;
    std::size_t excluded_ = 0;
    double d_minus_ = 0.0;
};

struct DimensionResult {
    double d_s = 0.0;
    double lambda = 0.0;  // at d_s
    int bisections = 0;
    std::vector<std::pair<double, double>> lambda_curve;  // 20-point grid over the bracket
    bool monotone = true;
    double tail_mass = 0.0;
    std::size_t states = 0;
    double h_ratio = 0.0;
    int rooted_at = -1;
};

// Bisection for lambda_d = 1 on [d_lo, d_hi]. With rooted_at = a, lambda is the
// growth rate of the partition sum over cylinders rooted at R_a.
// Throws BracketFailure if lambda does not straddle 1 and TruncationTooCoarse
// when the excluded primes carry more than tail_limit.
DimensionResult solve_dimension(const RClass& cls, const Truncation& trunc = {}, int rooted_at = -1,
                                double d_lo = 0.05, double d_hi = 1.5, int level = -1);
DimensionResult solve_dimension(const TransferOperator& op, int rooted_at = -1, double d_lo = 0.05,
                                double d_hi = 1.5);
nlohmann::json to_json(const DimensionResult& r, const Truncation& t);

struct GibbsCylinder {
    std::string word;
    int depth = 0;  // number of primes; 0 for a base rectangle
    int a = 0;
    double width = 0.0;
    double mu = 0.0;
};

struct GibbsTable {
    double d_s = 0.0;
    std::vector<GibbsCylinder> cylinders;  // base rectangles first, then prefix-tree order
    double normalization[2] = {0.0, 0.0};  // raw mass of R_a before scaling to 1
    double gibbs_constant = 0.0;           // max of mu/|P|^d and |P|^d/mu over cylinders
    double additivity_error = 0.0;
};

GibbsTable gibbs_measure(const TransferOperator& op, double d_s);
std::string gibbs_csv(const GibbsTable& g);

struct ThetaSeries {
    double s = 0.0;
    std::vector<double> generations;  // sum of |P|^s per generation below P*, generation 0 = P*
    std::vector<double> partial;      // partial sums up to each stored generation
    int depth = 0;                    // requested depth
    double sum = 0.0;                 // partial sum up to min(depth, stored)
    double ratio = 0.0;               // last stored generation ratio
    double tail = 0.0;                // geometric estimate of the generations beyond depth
    bool converges = false;           // ratio < 1 and s >= d_s0 + margin
};

ThetaSeries theta_series(const RClass& cls, int id, double s, int depth, double margin = 0.01, int level = -1);

struct WeightedSum {
    double sum = 0.0;    // sum of |P'|^d kappa^r(P') over generation-m descendants
    double norm = 0.0;   // |P|^d kappa^r(P)
    std::size_t count = 0;
    double ratio = 0.0;        // sum / norm
    double bound_ratio = 0.0;  // sum / (kappa^(m/2) norm)
};

WeightedSum weighted_children_sum(const RClass& cls, int id, double kappa, double d_minus, int m, int level = -1);

}  // namespace hs
