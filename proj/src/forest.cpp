#include "horseshoe/forest.hpp"

#include <algorithm>
#include <random>

#include "horseshoe/errors.hpp"

namespace hs {

Forest::Forest(std::vector<int> parent) : parent_(std::move(parent)) {
    const int n = size();
    depth_.assign(n, -1);
    up_.resize(n);
    for (int x = 0; x < n; ++x) {
        std::vector<int> chain{x};
        int cur = parent_[x];
        while (cur != -1) {
            if (cur < 0 || cur >= n) throw Error(ErrorCode::NotAForest, "parent index out of range");
            if (static_cast<int>(chain.size()) > n) throw Error(ErrorCode::NotAForest, "parent links contain a cycle");
            chain.push_back(cur);
            cur = parent_[cur];
        }
        depth_[x] = static_cast<int>(chain.size()) - 1;
        up_[x] = std::move(chain);
    }
}

Forest Forest::from_order(const std::vector<std::vector<bool>>& leq) {
    const int n = static_cast<int>(leq.size());
    for (int a = 0; a < n; ++a) {
        if (static_cast<int>(leq[a].size()) != n) throw Error(ErrorCode::NotAForest, "order matrix is not square");
        if (!leq[a][a]) throw Error(ErrorCode::NotAForest, "order is not reflexive");
        for (int b = 0; b < n; ++b) {
            if (a != b && leq[a][b] && leq[b][a]) throw Error(ErrorCode::NotAForest, "order is not antisymmetric");
            for (int c = 0; c < n; ++c)
                if (leq[a][b] && leq[b][c] && !leq[a][c]) throw Error(ErrorCode::NotAForest, "order is not transitive");
        }
    }
    std::vector<int> parent(n, -1);
    for (int a = 0; a < n; ++a) {
        std::vector<int> upset;
        for (int b = 0; b < n; ++b)
            if (b != a && leq[a][b]) upset.push_back(b);
        for (int b : upset)
            for (int c : upset)
                if (!leq[b][c] && !leq[c][b]) throw Error(ErrorCode::NotAForest, "up-set is not totally ordered");
        // The parent is the least strict upper bound.
        for (int b : upset) {
            bool least = true;
            for (int c : upset)
                if (!leq[b][c]) least = false;
            if (least) parent[a] = b;
        }
    }
    return Forest(std::move(parent));
}

bool Forest::leq(int a, int b) const {
    int da = depth_[a], db = depth_[b];
    if (db > da) return false;
    return up_[a][da - db] == b;
}

bool ForestProduct::leq(const Point& a, const Point& b) const {
    for (int i = 0; i < arity(); ++i)
        if (!factors[i].leq(a[i], b[i])) return false;
    return true;
}

bool ForestProduct::c_comparable(const Point& a, const Point& b) const {
    for (int i = 0; i < arity(); ++i)
        if (!factors[i].comparable(a[i], b[i])) return false;
    return true;
}

Point ForestProduct::join(const Point& a, const Point& b) const {
    Point out(a.size());
    for (int i = 0; i < arity(); ++i) out[i] = factors[i].max(a[i], b[i]);
    return out;
}

std::vector<Point> ForestProduct::all_points() const {
    std::vector<Point> out{Point{}};
    for (const auto& f : factors) {
        std::vector<Point> next;
        for (const auto& p : out)
            for (int x = 0; x < f.size(); ++x) {
                Point q = p;
                q.push_back(x);
                next.push_back(std::move(q));
            }
        out = std::move(next);
    }
    return out;
}

PointSet down_closure(const ForestProduct& X, const PointSet& A) {
    PointSet out;
    if (A.empty()) return out;
    for (const auto& p : X.all_points())
        for (const auto& a : A)
            if (X.leq(p, a)) {
                out.insert(p);
                break;
            }
    return out;
}

bool is_hereditary(const ForestProduct& X, const PointSet& A) { return down_closure(X, A) == A; }

bool is_concave(const ForestProduct& X, const PointSet& A) {
    for (const auto& a : A)
        for (const auto& b : A)
            if (X.c_comparable(a, b) && !A.count(X.join(a, b))) return false;
    return true;
}

PointSet pairwise_joins(const ForestProduct& X, const PointSet& A) {
    PointSet out;
    for (const auto& a : A)
        for (const auto& b : A)
            if (X.c_comparable(a, b)) out.insert(X.join(a, b));
    return out;
}

PointSet ch_envelope(const ForestProduct& X, const PointSet& A) {
    if (X.arity() != 2) throw Error(ErrorCode::ConfigError, "the two-factor recipe needs exactly two forests");
    return down_closure(X, pairwise_joins(X, A));
}

PointSet brute_force_envelope(const ForestProduct& X, const PointSet& A) {
    PointSet cur = down_closure(X, A);
    for (;;) {
        PointSet next = down_closure(X, pairwise_joins(X, cur));
        if (next == cur) return cur;
        cur = std::move(next);
    }
}

PointSet diagonal_bound(const ForestProduct& X, const PointSet& A) {
    const int n = X.arity();
    std::vector<Point> pts(A.begin(), A.end());
    PointSet A1;
    // Choose x^j for each coordinate j; x_j = x^j_j must dominate every x^i_j.
    std::vector<std::size_t> pick(n, 0);
    if (pts.empty()) return {};
    for (;;) {
        bool good = true;
        for (int j = 0; j < n && good; ++j)
            for (int i = 0; i < n && good; ++i)
                if (!X.factors[j].leq(pts[pick[i]][j], pts[pick[j]][j])) good = false;
        if (good) {
            Point x(n);
            for (int j = 0; j < n; ++j) x[j] = pts[pick[j]][j];
            A1.insert(x);
        }
        int k = 0;
        while (k < n && ++pick[k] == pts.size()) pick[k++] = 0;
        if (k == n) break;
    }
    return down_closure(X, A1);
}

Forest random_forest(std::uint64_t seed, int n, double p_root) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<int> parent(n, -1);
    for (int i = 1; i < n; ++i)
        if (u(rng) >= p_root) parent[i] = std::uniform_int_distribution<int>(0, i - 1)(rng);
    return Forest(std::move(parent));
}

EnvelopeTrials random_envelope_trials(int trials, std::uint64_t seed) {
    EnvelopeTrials rep;
    std::mt19937_64 rng(seed);
    for (int k = 0; k < trials; ++k) {
        int n1 = std::uniform_int_distribution<int>(1, 6)(rng);
        int n2 = std::uniform_int_distribution<int>(1, 6)(rng);
        ForestProduct X{{random_forest(rng(), n1), random_forest(rng(), n2)}};
        double density = std::uniform_real_distribution<double>(0.05, 0.3)(rng);
        PointSet A;
        std::bernoulli_distribution pick(density);
        for (const auto& p : X.all_points())
            if (pick(rng)) A.insert(p);
        auto fast = ch_envelope(X, A);
        auto slow = brute_force_envelope(X, A);
        ++rep.trials;
        if (fast != slow) ++rep.mismatches;
        if (slow != down_closure(X, A)) ++rep.nontrivial;
    }
    return rep;
}

CounterexampleReport ch_counterexamples() {
    CounterexampleReport rep;
    {
        // X1: x1 > y1 > z1. X2: y2 above x2, z2. X3: z3 above x3, y3.
        ForestProduct X{{Forest({-1, 0, 1}), Forest({-1, 0, 0}), Forest({-1, 0, 0})}};
        Point x{0, 1, 1}, y{1, 0, 2}, z{2, 2, 0};
        PointSet A{x, y, z};
        PointSet A1 = pairwise_joins(X, A);
        rep.ex1_A1_size = A1.size();
        Point w{0, 0, 0};
        rep.ex1_w_in_envelope = brute_force_envelope(X, A).count(w) > 0;
        rep.ex1_w_dominated = std::any_of(A1.begin(), A1.end(), [&](const Point& u) { return X.leq(w, u); });
        rep.recipe_sufficient = down_closure(X, A1) == brute_force_envelope(X, A);
    }
    {
        // X1: x1 above y1, z1. X2: y2 above x2, z2. X3: z3 above x3, y3.
        ForestProduct X{{Forest({-1, 0, 0}), Forest({-1, 0, 0}), Forest({-1, 0, 0})}};
        Point x{0, 1, 1}, y{1, 0, 2}, z{2, 2, 0};
        PointSet A{x, y, z};
        PointSet dx = down_closure(X, {x}), dy = down_closure(X, {y}), dz = down_closure(X, {z});
        PointSet uni = dx;
        uni.insert(dy.begin(), dy.end());
        uni.insert(dz.begin(), dz.end());
        auto env = brute_force_envelope(X, A);
        rep.ex2_union_of_downsets = env == uni;
        rep.ex2_disjoint = uni.size() == dx.size() + dy.size() + dz.size();
        auto bound = diagonal_bound(X, A);
        rep.ex2_bound_strict = std::includes(bound.begin(), bound.end(), env.begin(), env.end()) && bound.size() > env.size();
    }
    rep.ok = rep.ex1_A1_size == 4 && rep.ex1_w_in_envelope && !rep.ex1_w_dominated && !rep.recipe_sufficient &&
             rep.ex2_union_of_downsets && rep.ex2_disjoint && rep.ex2_bound_strict;
    return rep;
}

}  // namespace hs
