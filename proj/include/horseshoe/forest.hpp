#pragma once

#include <cstdint>
#include <set>
#include <vector>

namespace hs {

// Finite forest: x <= y iff y lies on the parent chain of x (or y == x).
class Forest {
public:
    Forest() = default;
    // parent[i] = -1 for roots. Throws NotAForest on cycles or bad indices.
    explicit Forest(std::vector<int> parent);
    // Builds from an order matrix leq[a][b] (a <= b). Throws NotAForest when
    // the relation is not a partial order or some up-set is not a chain.
    static Forest from_order(const std::vector<std::vector<bool>>& leq);

    int size() const { return static_cast<int>(parent_.size()); }
    int parent(int x) const { return parent_[x]; }
    const std::vector<int>& up(int x) const { return up_[x]; }  // x, parent(x), ..., root
    bool leq(int a, int b) const;
    bool comparable(int a, int b) const { return leq(a, b) || leq(b, a); }
    int max(int a, int b) const { return leq(a, b) ? b : a; }  // a, b comparable

private:
    std::vector<int> parent_;
    std::vector<int> depth_;
    std::vector<std::vector<int>> up_;
};

using Point = std::vector<int>;
using PointSet = std::set<Point>;

struct ForestProduct {
    std::vector<Forest> factors;

    int arity() const { return static_cast<int>(factors.size()); }
    bool leq(const Point& a, const Point& b) const;
    bool c_comparable(const Point& a, const Point& b) const;
    Point join(const Point& a, const Point& b) const;  // requires c-comparable
    std::vector<Point> all_points() const;
};

PointSet down_closure(const ForestProduct& X, const PointSet& A);
bool is_hereditary(const ForestProduct& X, const PointSet& A);
bool is_concave(const ForestProduct& X, const PointSet& A);

// Joins of c-comparable pairs of A (A itself included, since x v x = x).
PointSet pairwise_joins(const ForestProduct& X, const PointSet& A);
// Two-factor recipe: down-closure of the pairwise joins. ConfigError unless arity 2.
PointSet ch_envelope(const ForestProduct& X, const PointSet& A);
// Smallest concave hereditary superset by fixed-point iteration (any arity).
PointSet brute_force_envelope(const ForestProduct& X, const PointSet& A);
// Down-closure of points x with x_j = x^j_j >= x^i_j for some x^1..x^n in A.
// Contains the envelope for any arity.
PointSet diagonal_bound(const ForestProduct& X, const PointSet& A);

// Random forest on n nodes; each node picks a root slot with probability p_root.
Forest random_forest(std::uint64_t seed, int n, double p_root = 0.25);

struct EnvelopeTrials {
    int trials = 0;
    int mismatches = 0;
    int nontrivial = 0;  // trials where the envelope strictly exceeds the down-closure
};
// Compares the two-factor recipe with brute force on random products.
EnvelopeTrials random_envelope_trials(int trials, std::uint64_t seed);

struct CounterexampleReport {
    // Example 1: chain in X1, y2 and z3 dominate in X2, X3.
    std::size_t ex1_A1_size = 0;
    bool ex1_w_in_envelope = false;
    bool ex1_w_dominated = false;  // by some point of A1
    bool recipe_sufficient = true;
    // Example 2: x1, y2, z3 dominate pairwise incomparable siblings.
    bool ex2_union_of_downsets = false;
    bool ex2_disjoint = false;
    bool ex2_bound_strict = false;  // diagonal bound strictly larger than the envelope
    bool ok = false;
};
CounterexampleReport ch_counterexamples();

}  // namespace hs
