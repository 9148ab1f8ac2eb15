#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "horseshoe/affine_calculus.hpp"
#include "horseshoe/fold_parabolic.hpp"
#include "horseshoe/model_family.hpp"
#include "horseshoe/param_space.hpp"
#include "json.hpp"

namespace hs {

enum class Relation { Transverse, Separated, CriticallyRelated };
enum class Criticality { Transverse, Critical, Undetermined };
enum class Side { P, Q };

const char* to_string(Relation r);
const char* to_string(Criticality c);

struct ClassBudget {
    int n_max = 40;
    double width_floor = 1e-9;
    std::size_t max_elements = 3'000'000;
    int t_grid = 9;
};

nlohmann::json to_json(const ClassBudget& b);
ClassBudget class_budget_from_json(const nlohmann::json& j);

// Itinerary words: digits are rectangles, '+' / '-' stand for the N0 fold
// steps of a parabolic branch (always between a 1 and a 0 in this model).
int word_length(const std::string& word, int N0);
bool word_is_pure(const std::string& word);
// Simple join: the shared digit appears once.
std::string join_words(const std::string& a, const std::string& b);
std::string parabolic_word(const std::string& f0, const std::string& f1, int sign);

struct Element {
    enum class Kind { Pure, Parabolic, Join };

    int id = -1;
    std::string word;
    int n = 0;
    int src = 0;
    int dst = 0;
    int born = 0;  // path level at which the element entered the class
    double P = 0.0;
    double Q = 0.0;
    Interval xP;  // x-extent of P in R_src
    Interval yQ;  // y-extent of Q in R_dst
    Kind kind = Kind::Pure;
    bool diagonal = true;  // A depends on x only, B on y only
    int a = -1;            // Join: a then b. Parabolic: F0 = a, F1 = b
    int b = -1;
    int sign = 0;
    // Wrapper form L [] core [] R with pure L, R (single letters for identities).
    int core = -1;
    std::string left;
    std::string right;
    int p_parent = -1;  // longest stored proper prefix
    int q_parent = -1;  // longest stored proper suffix
    bool prime = false;
    int r = 0;

    bool pure() const { return kind == Kind::Pure; }
};

// Preliminary relation on one triple, with the raw margins.
struct BaseEval {
    bool T1 = false;  // delta_LR >= 2|I| for all t in I
    bool T2 = false;  // delta_R >= 2|Q0|^(1-eta) for some grid t
    bool T3 = false;  // delta_L >= 2|P1|^(1-eta) for some grid t
    bool separated = false;  // delta_LR < 0 for all t in I
    double dLR_lo = 0.0;
    double dLR_hi = 0.0;
    bool ok() const { return T1 && T2 && T3; }
};

// Map-level predicate; I is the parameter interval, G0 the fold at any t.
BaseEval base_eval(const ImplicitMap& Q0, const ImplicitMap& P1, const FoldMap& G0, const Interval& I, double eta,
                   int t_grid = 9);
bool base_transversality(const ImplicitMap& Q0, const ImplicitMap& P1, const FoldMap& G0, const Interval& I,
                         double eta, int t_grid = 9);
// Without ancestors: Transverse iff base holds, Separated iff certified.
Relation relation_of_maps(const ImplicitMap& Q0, const ImplicitMap& P1, const FoldMap& G0, const Interval& I,
                          double eta, int t_grid = 9);

struct ExtendReport {
    int level = 0;
    std::size_t added_simple = 0;
    std::size_t added_parabolic = 0;
    std::size_t transverse_pairs = 0;
    std::size_t pairs_examined = 0;
    std::size_t compose_failures = 0;
    int sweeps = 0;
    bool budget_exhausted = false;
    std::vector<std::string> frontier;  // words whose extensions were not examined
};

struct ChildList {
    std::vector<int> simple;
    struct NonSimple {
        int id = -1;
        std::string witness;  // word of (P1, Q1, n1): the suffix after the fold step
    };
    std::vector<NonSimple> non_simple;
};

struct CriticalityResult {
    Criticality verdict = Criticality::Transverse;
    std::vector<std::string> witness;  // pieces visited from the root to the failing one
    int pieces_visited = 0;
};

struct RegularityResult {
    bool regular = true;
    int bicritical = 0;
    int undetermined = 0;
    double threshold = 0.0;  // |I|^beta
    std::string witness;     // fattest bicritical element violating the bound
    double witness_P = 0.0;
    double witness_Q = 0.0;
};

struct BicriticalRecord {
    std::string word;
    double P = 0.0;
    double Q = 0.0;
};
// Pure predicate behind regularity_test.
RegularityResult regularity_check(const std::vector<BicriticalRecord>& bicritical, double interval_length, double beta);

// Mutex that copies as a fresh mutex, so the class stays copyable.
struct CopyableMutex {
    mutable std::shared_mutex m;
    CopyableMutex() = default;
    CopyableMutex(const CopyableMutex&) {}
    CopyableMutex& operator=(const CopyableMutex&) { return *this; }
};

struct ElementFlags {
    bool P_critical = false;
    bool Q_critical = false;
    bool bicritical = false;
};

class RClass {
public:
    // Builds R(I0): all pure cylinders above the floors. A finite t_lo moves the
    // root interval to [t_lo, t_lo + eps0].
    RClass(const ModelFamily& fam, const ClassBudget& budget = {}, int tree_depth = 8,
           double t_lo = std::numeric_limits<double>::quiet_NaN());

    const ModelFamily& family() const { return fam_; }
    const ClassBudget& budget() const { return budget_; }
    const IntervalTree& tree() const { return tree_; }
    const SpecialRectangles& special() const { return special_; }
    const std::vector<ParamInterval>& path() const { return path_; }
    int level() const { return static_cast<int>(path_.size()) - 1; }
    const ParamInterval& interval(int level) const { return path_.at(level); }

    std::size_t size() const { return elems_.size(); }
    const Element& element(int id) const { return elems_.at(id); }
    int find(const std::string& word) const;
    // Elements of R(I_level) in breadth-first order: by n, then by word.
    std::vector<int> ids_at(int level) const;
    std::shared_ptr<const ImplicitMap> map(int id) const;

    bool in_Qu(int id) const;
    bool in_Ps(int id) const;
    bool contains_Qu(int id) const;  // Q strictly larger than Q_u
    bool contains_Ps(int id) const;

    BaseEval base(int q, int p, int level) const;
    bool transverse(int q, int p, int level) const;  // hereditary closure, memoized
    Relation transversality(int q, int p, int level) const;

    // Closes the class at the current level (idempotent).
    ExtendReport close();
    // Descends to candidate `index` of the current interval and closes.
    ExtendReport extend(long index, bool force = false);
    // Drops every level above `level`.
    void truncate(int level);

    ChildList children(int id, int level = -1) const;
    std::vector<int> q_children(int id, int level = -1) const;
    std::vector<int> p_children(int id, int level = -1) const;
    std::vector<int> prime_decompose(int id) const;

    CriticalityResult classify(int id, Side side, int level = -1) const;
    ElementFlags flags(int id, int level = -1) const;
    RegularityResult regularity(int level, double beta) const;

    // Dump: header line then one element per line, breadth-first order.
    std::string dump_jsonl(bool with_flags = true) const;
    static RClass load_jsonl(const std::string& text);
    nlohmann::json element_json(int id, bool with_flags) const;

    bool last_budget_exhausted() const { return exhausted_; }

private:
    struct Candidate {
        std::string word;
        int n = 0;
        Element::Kind kind = Element::Kind::Pure;
        int a = -1, b = -1, sign = 0;
    };
    struct Built {
        bool ok = false;
        Element e;
        std::shared_ptr<const ImplicitMap> map;
    };

    RClass() = default;
    void set_root(double t_lo);
    void init_pure();
    Built build(const Candidate& c, int level) const;
    int insert(Built&& b, int level);
    void relink();
    std::size_t simple_closure(int level, std::vector<int> fresh, std::vector<int> fresh_primes, ExtendReport& rep);
    std::size_t parabolic_step(int level, ExtendReport& rep, std::vector<int>& fresh);
    std::shared_ptr<const ImplicitMap> wrapper_map(const Element& e) const;
    double theta_at(double t, double y, double x) const;
    int up_q(int id, int level) const;
    int up_p(int id, int level) const;
    bool closure(int q, int p, int level) const;
    bool persistent_failure(int piece, int id, Side side, int level) const;
    Criticality search(int piece, int id, Side side, int level, std::vector<std::string>& trail, int& visited) const;
    void finalize_structure();
    void collect_kids(const std::vector<std::vector<int>>& kids, int id, int level, std::vector<int>& out) const;

    ModelFamily fam_;
    ClassBudget budget_;
    IntervalTree tree_;
    SpecialRectangles special_;
    std::vector<ParamInterval> path_;
    FoldMap fold0_;
    bool plain_theta_ = true;

    std::vector<Element> elems_;
    std::unordered_map<std::string, int> index_;
    std::vector<int> primes_;  // generation primes: letters' transitions and parabolic elements
    bool exhausted_ = false;

    std::vector<std::vector<int>> pkids_;  // direct children by parent link
    std::vector<std::vector<int>> qkids_;

    CopyableMutex map_mu_;
    mutable std::unordered_map<int, std::shared_ptr<const ImplicitMap>> maps_;
    CopyableMutex rel_mu_;
    mutable std::unordered_map<std::uint64_t, bool> rel_;
};

// Free-function spellings of the class operations.
RClass init_class(const ModelFamily& fam, const ClassBudget& budget = {});
ExtendReport extend_class(RClass& cls, long index, bool force = false);
std::vector<int> children(const RClass& cls, int id);
std::vector<int> prime_decompose(const RClass& cls, int id);
CriticalityResult classify_criticality(const RClass& cls, int id, Side side, int level);
RegularityResult regularity_test(const RClass& cls, int level, double beta);

// Invariant probes on a built class.
struct WidthLaw {
    double gamma = 0.0;
    double C = 0.0;  // max |P| exp(n^gamma)
    std::string worst;
};
WidthLaw stretched_exponential(const RClass& cls, int level = -1);

struct AlgebraReport {
    std::size_t heredity_checked = 0;
    std::size_t heredity_failures = 0;
    std::size_t concavity_checked = 0;
    std::size_t concavity_failures = 0;
    std::string concavity_example;
};
// Concavity on every stored quadruple; heredity on every stored triple when
// heredity_samples = 0, else on that many random triples.
AlgebraReport transversality_algebra(const RClass& cls, int level, std::uint64_t seed = 7,
                                     std::size_t heredity_samples = 2000);

}  // namespace hs
