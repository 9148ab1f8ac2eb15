#include "horseshoe/rclass.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "horseshoe/errors.hpp"
#include "horseshoe/fitting.hpp"
#include "horseshoe/parallel.hpp"
#include "horseshoe/serialize.hpp"

namespace hs {

namespace {

const Rect kUnit{{0.0, 1.0}, {0.0, 1.0}};
// Parabolic width estimate |P+-| ~ c |P0| |P1| delta^-1/2; c = 1/2 on the
// model, padded so that pruning never drops an element above the floor.
constexpr double kEstimateFactor = 0.75;
constexpr int kMaxFrontier = 10000;

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::vector<std::size_t> digit_positions(const std::string& w) {
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (is_digit(w[i])) pos.push_back(i);
    return pos;
}

bool bfs_less(const Element& a, const Element& b) { return a.n != b.n ? a.n < b.n : a.word < b.word; }

std::vector<double> t_grid(const Interval& I, int m) {
    std::vector<double> ts;
    if (m < 2) m = 2;
    for (int k = 0; k < m; ++k) ts.push_back(I.lo + (I.hi - I.lo) * k / (m - 1));
    return ts;
}

DisplacementQuad quad_of(double a, double b, double d, double e) {
    // a = (y_lo, x_lo), b = (y_lo, x_hi), d = (y_hi, x_lo), e = (y_hi, x_hi); values of -C-bar.
    DisplacementQuad q;
    q.delta = std::min({a, b, d, e});
    q.delta_LR = std::max({a, b, d, e});
    q.delta_L = std::max(std::min(a, b), std::min(d, e));
    q.delta_R = std::min(std::max(a, b), std::max(d, e));
    return q;
}

BaseEval eval_quads(const std::vector<DisplacementQuad>& quads, const std::vector<bool>& valid, double len, double Q0,
                    double P1, double eta) {
    BaseEval be;
    bool all_t1 = true, all_neg = true, any_valid = false;
    double need_q = 2.0 * std::pow(Q0, 1.0 - eta), need_p = 2.0 * std::pow(P1, 1.0 - eta);
    for (std::size_t k = 0; k < quads.size(); ++k) {
        if (!valid[k]) {
            all_t1 = false;
            all_neg = false;
            continue;
        }
        any_valid = true;
        const auto& q = quads[k];
        if (q.delta_LR < 2.0 * len) all_t1 = false;
        if (q.delta_LR >= 0.0) all_neg = false;
        if (q.delta_R >= need_q) be.T2 = true;
        if (q.delta_L >= need_p) be.T3 = true;
    }
    be.T1 = any_valid && all_t1;
    be.separated = any_valid && all_neg;
    if (!quads.empty()) {
        be.dLR_lo = quads.front().delta_LR;
        be.dLR_hi = quads.back().delta_LR;
    }
    return be;
}

std::uint64_t rel_key(int q, int p, int level) {
    return (static_cast<std::uint64_t>(q) << 36) ^ (static_cast<std::uint64_t>(p) << 4) ^
           static_cast<std::uint64_t>(level);
}

double grid_extreme(const std::function<double(double, double)>& f, const Rect& r, int m, bool want_max) {
    double best = want_max ? -1e300 : 1e300;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double y = r.y.lo + r.y.length() * i / (m - 1), x = r.x.lo + r.x.length() * j / (m - 1);
            double v = f(y, x);
            best = want_max ? std::max(best, v) : std::min(best, v);
        }
    return best;
}

}  // namespace

const char* to_string(Relation r) {
    switch (r) {
    case Relation::Transverse: return "Transverse";
    case Relation::Separated: return "Separated";
    case Relation::CriticallyRelated: return "CriticallyRelated";
    }
    return "?";
}

const char* to_string(Criticality c) {
    switch (c) {
    case Criticality::Transverse: return "Transverse";
    case Criticality::Critical: return "Critical";
    case Criticality::Undetermined: return "Undetermined";
    }
    return "?";
}

nlohmann::json to_json(const ClassBudget& b) {
    return {{"n_max", b.n_max}, {"width_floor", b.width_floor}, {"max_elements", b.max_elements}, {"t_grid", b.t_grid}};
}

ClassBudget class_budget_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "budget must be an object");
    ClassBudget b;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k == "n_max") b.n_max = it->get<int>();
        else if (k == "width_floor") b.width_floor = it->get<double>();
        else if (k == "max_elements") b.max_elements = it->get<std::size_t>();
        else if (k == "t_grid") b.t_grid = it->get<int>();
        else throw Error(ErrorCode::ConfigError, "unknown budget key " + k);
    }
    if (b.n_max < 1) throw Error(ErrorCode::ConfigError, "n_max must be positive");
    if (!(b.width_floor > 0.0 && b.width_floor < 1.0)) throw Error(ErrorCode::ConfigError, "width_floor must lie in (0, 1)");
    if (b.t_grid < 2) throw Error(ErrorCode::ConfigError, "t_grid needs at least 2 points");
    return b;
}

int word_length(const std::string& word, int N0) {
    int digits = 0, folds = 0;
    for (char c : word) {
        if (is_digit(c)) ++digits;
        else ++folds;
    }
    return (digits - 1 - folds) + N0 * folds;
}

bool word_is_pure(const std::string& word) { return std::all_of(word.begin(), word.end(), is_digit); }

std::string join_words(const std::string& a, const std::string& b) {
    if (a.empty() || b.empty() || a.back() != b.front())
        throw Error(ErrorCode::NotATransition, "words " + a + " and " + b + " do not chain");
    return a + b.substr(1);
}

std::string parabolic_word(const std::string& f0, const std::string& f1, int sign) {
    return f0 + (sign > 0 ? '+' : '-') + f1;
}

// ------------------------------------------------------------ map-level relation

BaseEval base_eval(const ImplicitMap& Q0, const ImplicitMap& P1, const FoldMap& G0, const Interval& I, double eta,
                   int m) {
    auto ts = t_grid(I, m);
    std::vector<DisplacementQuad> quads(ts.size());
    std::vector<bool> valid(ts.size(), true);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        try {
            quads[k] = displacement(Q0, G0.at(ts[k]), P1);
        } catch (const Error&) {
            valid[k] = false;
        }
    }
    return eval_quads(quads, valid, I.length(), widths(Q0).Q, widths(P1).P, eta);
}

bool base_transversality(const ImplicitMap& Q0, const ImplicitMap& P1, const FoldMap& G0, const Interval& I,
                         double eta, int m) {
    return base_eval(Q0, P1, G0, I, eta, m).ok();
}

Relation relation_of_maps(const ImplicitMap& Q0, const ImplicitMap& P1, const FoldMap& G0, const Interval& I,
                          double eta, int m) {
    auto be = base_eval(Q0, P1, G0, I, eta, m);
    if (be.ok()) return Relation::Transverse;
    if (be.separated) return Relation::Separated;
    return Relation::CriticallyRelated;
}

RegularityResult regularity_check(const std::vector<BicriticalRecord>& bicritical, double len, double beta) {
    RegularityResult r;
    r.threshold = std::pow(len, beta);
    r.bicritical = static_cast<int>(bicritical.size());
    double fattest = 0.0;
    for (const auto& b : bicritical) {
        double w = std::max(b.P, b.Q);
        if (w >= r.threshold && w > fattest) {
            fattest = w;
            r.regular = false;
            r.witness = b.word;
            r.witness_P = b.P;
            r.witness_Q = b.Q;
        }
    }
    return r;
}

// ------------------------------------------------------------------ class setup

RClass::RClass(const ModelFamily& fam, const ClassBudget& budget, int tree_depth, double t_lo)
    : fam_(fam), budget_(budget), tree_(interval_tree(fam.cfg.eps0, fam.cfg.tau, tree_depth)) {
    special_ = special_rectangles(fam_);
    set_root(t_lo);
    plain_theta_ = fam_.fold.chi3 == 0.0 && fam_.fold.theta_q == 0.0;
    init_pure();
    relink();
    finalize_structure();
}

void RClass::set_root(double t_lo) {
    ParamInterval root = tree_.root();
    if (std::isfinite(t_lo)) {
        root.lo = t_lo;
        root.hi = t_lo + root.eps;
    }
    path_.assign(1, root);
    fold0_ = fam_.fold_at(root.as_interval().mid());
}

void RClass::init_pure() {
    // Breadth-first over words; children of a word extend it by one digit.
    std::vector<std::string> layer;
    for (int a : fam_.alphabet) layer.push_back(std::string(1, static_cast<char>('0' + a)));
    for (int n = 0; !layer.empty(); ++n) {
        std::sort(layer.begin(), layer.end());
        std::vector<std::string> next;
        for (const auto& w : layer) {
            if (elems_.size() >= budget_.max_elements) {
                exhausted_ = true;
                return;
            }
            Candidate c{w, n, Element::Kind::Pure, -1, -1, 0};
            auto b = build(c, 0);
            if (!b.ok) continue;
            insert(std::move(b), 0);
            if (n + 1 > budget_.n_max) continue;
            for (int d : fam_.alphabet) next.push_back(w + static_cast<char>('0' + d));
        }
        layer.swap(next);
    }
}

int RClass::find(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? -1 : it->second;
}

std::vector<int> RClass::ids_at(int level) const {
    std::vector<int> out;
    for (const auto& e : elems_)
        if (e.born <= level) out.push_back(e.id);
    std::sort(out.begin(), out.end(), [&](int a, int b) { return bfs_less(elems_[a], elems_[b]); });
    return out;
}

bool RClass::in_Qu(int id) const {
    const auto& w = elems_[id].word;
    const auto& u = special_.Qu_word;
    return w.size() >= u.size() && w.compare(w.size() - u.size(), u.size(), u) == 0;
}

bool RClass::in_Ps(int id) const {
    const auto& w = elems_[id].word;
    const auto& s = special_.Ps_word;
    return w.size() >= s.size() && w.compare(0, s.size(), s) == 0;
}

bool RClass::contains_Qu(int id) const {
    const auto& w = elems_[id].word;
    const auto& u = special_.Qu_word;
    return w.size() < u.size() && u.compare(u.size() - w.size(), w.size(), w) == 0;
}

bool RClass::contains_Ps(int id) const {
    const auto& w = elems_[id].word;
    const auto& s = special_.Ps_word;
    return w.size() < s.size() && s.compare(0, w.size(), w) == 0;
}

double RClass::theta_at(double t, double y, double x) const {
    if (plain_theta_) return t - y - x;
    return fold0_.at(t).theta(y, x).v;
}

// ------------------------------------------------------------------ building

std::shared_ptr<const ImplicitMap> RClass::map(int id) const {
    {
        std::shared_lock lock(map_mu_.m);
        auto it = maps_.find(id);
        if (it != maps_.end()) return it->second;
    }
    const Element& e = elems_.at(id);
    std::shared_ptr<const ImplicitMap> m;
    if (e.pure()) {
        m = std::make_shared<const ImplicitMap>(pure_cylinder_map(fam_, e.word));
        if (fam_.affine()) return m;  // cheap, not cached
    } else if (e.core >= 0 && e.core != e.id) {
        m = wrapper_map(e);
    } else if (e.kind == Element::Kind::Join) {
        m = std::make_shared<const ImplicitMap>(simple_compose(*map(e.a), *map(e.b)));
    } else {
        throw Error(ErrorCode::InvalidGeometry, "parabolic element without a stored map: " + e.word);
    }
    std::unique_lock lock(map_mu_.m);
    auto [it, fresh] = maps_.emplace(id, m);
    return it->second;
}

std::shared_ptr<const ImplicitMap> RClass::wrapper_map(const Element& e) const {
    auto core = map(e.core);
    const std::string L = e.left, R = e.right;
    const ModelFamily& fam = fam_;
    auto node = [&](double y0, double x, double* out) {
        double dBL, dAR, dAL, dBR;
        double u = cylinder_B(fam, L, y0, dBL);
        double v = cylinder_A(fam, R, x, dAR);
        auto ja = core->jetA(u, v);
        auto jb = core->jetB(u, v);
        out[0] = cylinder_A(fam, L, ja.v, dAL);
        out[1] = cylinder_B(fam, R, jb.v, dBR);
        out[2] = dAL * ja.x * dAR;
        out[3] = dAL * ja.y * dBL;
        out[4] = dBR * jb.x * dAR;
        out[5] = dBR * jb.y * dBL;
    };
    auto fit = fit_bundle(kUnit, 6, node, kMapFitTol);
    auto& f = fit.fields;
    auto m = make_map(kUnit, e.src, e.dst, f[0], f[1], f[2], f[3], f[4], f[5]);
    m.fit_tail = fit.tail;
    return std::make_shared<const ImplicitMap>(std::move(m));
}

RClass::Built RClass::build(const Candidate& c, int) const {
    Built out;
    Element& e = out.e;
    e.word = c.word;
    e.n = c.n;
    e.kind = c.kind;
    e.a = c.a;
    e.b = c.b;
    e.sign = c.sign;
    e.src = c.word.front() - '0';
    e.dst = c.word.back() - '0';
    const double floor = budget_.width_floor;
    if (c.kind == Element::Kind::Pure) {
        auto pc = pure_cylinder(fam_, c.word);
        e.xP = Interval{pc.a0, pc.a0 + pc.ax};
        e.yQ = Interval{pc.b0, pc.b0 + pc.by};
        if (fam_.affine()) {
            e.P = pc.ax;
            e.Q = pc.by;
        } else {
            double pmax = 0.0, qmax = 0.0, d;
            for (int k = 0; k <= 128; ++k) {
                double s = k / 128.0;
                cylinder_A(fam_, c.word, s, d);
                pmax = std::max(pmax, std::abs(d));
                cylinder_B(fam_, c.word, s, d);
                qmax = std::max(qmax, std::abs(d));
            }
            e.P = pmax;
            e.Q = qmax;
        }
        e.diagonal = true;
        out.ok = c.n == 0 || (e.P >= floor && e.Q >= floor);
        return out;
    }
    e.diagonal = false;
    // Join a [] b with at least one non-pure side.
    const Element& A = elems_[c.a];
    const Element& B = elems_[c.b];
    if (A.pure() && B.core >= 0) {
        e.core = B.core;
        e.left = join_words(A.word, B.left);
        e.right = B.right;
    } else if (B.pure() && A.core >= 0) {
        e.core = A.core;
        e.left = A.left;
        e.right = join_words(A.right, B.word);
    }
    if (e.core >= 0) {
        auto core = map(e.core);
        const std::string &L = e.left, &R = e.right;
        if (fam_.affine()) {
            auto pl = pure_cylinder(fam_, L), pr = pure_cylinder(fam_, R);
            Rect sub{{pl.b0, pl.b0 + pl.by}, {pr.a0, pr.a0 + pr.ax}};
            e.P = pl.ax * pr.ax * sup_abs_fn(sub, [&](double y, double x) { return core->Ax(y, x); }, 3);
            e.Q = pl.by * pr.by * sup_abs_fn(sub, [&](double y, double x) { return core->By(y, x); }, 3);
            double amin = grid_extreme([&](double y, double x) { return core->A(y, x); }, sub, 3, false);
            double amax = grid_extreme([&](double y, double x) { return core->A(y, x); }, sub, 3, true);
            double bmin = grid_extreme([&](double y, double x) { return core->B(y, x); }, sub, 3, false);
            double bmax = grid_extreme([&](double y, double x) { return core->B(y, x); }, sub, 3, true);
            e.xP = Interval{pl.a0 + pl.ax * amin, pl.a0 + pl.ax * amax};
            e.yQ = Interval{pr.b0 + pr.by * bmin, pr.b0 + pr.by * bmax};
        } else {
            auto fa = [&](double y0, double x) {
                double dBL, dAR, dAL;
                double u = cylinder_B(fam_, L, y0, dBL), v = cylinder_A(fam_, R, x, dAR);
                cylinder_A(fam_, L, core->A(u, v), dAL);
                return dAL * core->Ax(u, v) * dAR;
            };
            auto fb = [&](double y0, double x) {
                double dBL, dAR, dBR;
                double u = cylinder_B(fam_, L, y0, dBL), v = cylinder_A(fam_, R, x, dAR);
                cylinder_B(fam_, R, core->B(u, v), dBR);
                return dBR * core->By(u, v) * dBL;
            };
            e.P = sup_abs_fn(kUnit, fa, 5);
            e.Q = sup_abs_fn(kUnit, fb, 5);
            auto m = wrapper_map(e);
            e.xP = Interval{grid_extreme([&](double y, double x) { return m->A(y, x); }, kUnit, 5, false),
                            grid_extreme([&](double y, double x) { return m->A(y, x); }, kUnit, 5, true)};
            e.yQ = Interval{grid_extreme([&](double y, double x) { return m->B(y, x); }, kUnit, 5, false),
                            grid_extreme([&](double y, double x) { return m->B(y, x); }, kUnit, 5, true)};
            out.map = m;
        }
    } else {
        try {
            auto m = std::make_shared<const ImplicitMap>(simple_compose(*map(c.a), *map(c.b)));
            auto w = widths(*m);
            e.P = w.P;
            e.Q = w.Q;
            e.xP = Interval{grid_extreme([&](double y, double x) { return m->A(y, x); }, kUnit, 9, false),
                            grid_extreme([&](double y, double x) { return m->A(y, x); }, kUnit, 9, true)};
            e.yQ = Interval{grid_extreme([&](double y, double x) { return m->B(y, x); }, kUnit, 9, false),
                            grid_extreme([&](double y, double x) { return m->B(y, x); }, kUnit, 9, true)};
            out.map = m;
        } catch (const Error&) {
            return out;
        }
    }
    out.ok = e.P >= floor && e.Q >= floor;
    return out;
}

int RClass::insert(Built&& b, int level) {
    Element e = std::move(b.e);
    e.id = static_cast<int>(elems_.size());
    e.born = level;
    if (e.kind == Element::Kind::Parabolic) {
        e.core = e.id;
        e.left = std::string(1, e.word.front());
        e.right = std::string(1, e.word.back());
        primes_.push_back(e.id);
    }
    if (e.pure() && e.n == 1) primes_.push_back(e.id);
    index_.emplace(e.word, e.id);
    if (b.map) maps_.emplace(e.id, b.map);
    elems_.push_back(std::move(e));
    return elems_.back().id;
}

// Parent links from the word structure; prime flags and factor counts.
void RClass::relink() {
    for (auto& e : elems_) {
        auto pos = digit_positions(e.word);
        e.p_parent = -1;
        e.q_parent = -1;
        for (std::size_t k = pos.size() - 1; k-- > 0;) {
            int id = find(e.word.substr(0, pos[k] + 1));
            if (id >= 0) {
                e.p_parent = id;
                break;
            }
        }
        for (std::size_t k = 1; k < pos.size(); ++k) {
            int id = find(e.word.substr(pos[k]));
            if (id >= 0) {
                e.q_parent = id;
                break;
            }
        }
    }
    pkids_.assign(elems_.size(), {});
    qkids_.assign(elems_.size(), {});
    for (const auto& e : elems_) {
        if (e.p_parent >= 0) pkids_[e.p_parent].push_back(e.id);
        if (e.q_parent >= 0) qkids_[e.q_parent].push_back(e.id);
    }
    auto order = [&](int a, int b) { return bfs_less(elems_[a], elems_[b]); };
    for (auto& v : pkids_) std::sort(v.begin(), v.end(), order);
    for (auto& v : qkids_) std::sort(v.begin(), v.end(), order);
}

void RClass::finalize_structure() {
    for (auto& e : elems_) {
        if (e.n == 0 || e.pure()) {
            e.prime = e.n == 1;
            continue;
        }
        auto pos = digit_positions(e.word);
        bool split = false;
        for (std::size_t k = 1; k + 1 < pos.size() && !split; ++k)
            split = find(e.word.substr(0, pos[k] + 1)) >= 0 && find(e.word.substr(pos[k])) >= 0;
        e.prime = !split;
    }
    for (auto& e : elems_) e.r = e.pure() ? e.n : static_cast<int>(prime_decompose(e.id).size());
}

// ------------------------------------------------------------------ relation

BaseEval RClass::base(int q, int p, int level) const {
    const Element& Q0 = elems_[q];
    const Element& P1 = elems_[p];
    const ParamInterval& I = path_.at(level);
    Interval iv = I.as_interval();
    const double eta = fam_.cfg.eta;
    if (Q0.diagonal && P1.diagonal) {
        auto ts = t_grid(iv, budget_.t_grid);
        std::vector<DisplacementQuad> quads(ts.size());
        for (std::size_t k = 0; k < ts.size(); ++k) {
            double t = ts[k];
            quads[k] = quad_of(theta_at(t, Q0.yQ.lo, P1.xP.lo), theta_at(t, Q0.yQ.lo, P1.xP.hi),
                               theta_at(t, Q0.yQ.hi, P1.xP.lo), theta_at(t, Q0.yQ.hi, P1.xP.hi));
        }
        return eval_quads(quads, std::vector<bool>(ts.size(), true), iv.length(), Q0.Q, P1.P, eta);
    }
    // General path: endpoints and midpoint; -C-bar is increasing in t.
    auto mq = map(q), mp = map(p);
    std::vector<double> ts{iv.lo, iv.mid(), iv.hi};
    std::vector<DisplacementQuad> quads(3);
    std::vector<bool> valid(3, true);
    for (int k = 0; k < 3; ++k) {
        try {
            quads[k] = displacement(make_jets(*mq, fam_.fold_at(ts[k]), *mp), Rect{mq->rect.y, mp->rect.x});
        } catch (const Error&) {
            valid[k] = false;
        }
    }
    return eval_quads(quads, valid, iv.length(), Q0.Q, P1.P, eta);
}

int RClass::up_q(int id, int level) const {
    int cur = elems_[id].q_parent;
    while (cur >= 0 && elems_[cur].born > level) cur = elems_[cur].q_parent;
    return cur;
}

int RClass::up_p(int id, int level) const {
    int cur = elems_[id].p_parent;
    while (cur >= 0 && elems_[cur].born > level) cur = elems_[cur].p_parent;
    return cur;
}

bool RClass::closure(int q, int p, int level) const {
    if (q < 0 || p < 0 || level < 0) return false;
    if (!in_Qu(q) || !in_Ps(p)) return false;
    if (elems_[q].born > level || elems_[p].born > level) return false;
    auto key = rel_key(q, p, level);
    {
        std::shared_lock lock(rel_mu_.m);
        auto it = rel_.find(key);
        if (it != rel_.end()) return it->second;
    }
    bool v = base(q, p, level).ok() || closure(up_q(q, level), p, level) || closure(q, up_p(p, level), level) ||
             closure(q, p, level - 1);
    std::unique_lock lock(rel_mu_.m);
    rel_.emplace(key, v);
    return v;
}

bool RClass::transverse(int q, int p, int level) const { return closure(q, p, level); }

Relation RClass::transversality(int q, int p, int level) const {
    if (closure(q, p, level)) return Relation::Transverse;
    if (base(q, p, level).separated) return Relation::Separated;
    return Relation::CriticallyRelated;
}

// ------------------------------------------------------------------ closure

ExtendReport RClass::close() {
    ExtendReport rep;
    rep.level = level();
    const int lv = level();
    for (;;) {
        ++rep.sweeps;
        std::vector<int> fresh;
        std::size_t added = parabolic_step(lv, rep, fresh);
        if (added == 0 || exhausted_) break;
        simple_closure(lv, fresh, fresh, rep);
        if (exhausted_) break;
    }
    relink();
    finalize_structure();
    rep.budget_exhausted = exhausted_;
    return rep;
}

std::size_t RClass::simple_closure(int level, std::vector<int> fresh, std::vector<int> fresh_primes,
                                   ExtendReport& rep) {
    const double floor = budget_.width_floor;
    const double slack = fam_.affine() ? 1.0 + 1e-9 : 1.5;
    std::size_t total = 0;
    while (!fresh.empty() || !fresh_primes.empty()) {
        // Elements and primes grouped by chart, widest first.
        std::array<std::vector<int>, 2> by_dst, primes_by_src;
        for (const auto& e : elems_) by_dst[e.dst].push_back(e.id);
        for (int p : primes_) primes_by_src[elems_[p].src].push_back(p);
        auto wider = [&](int x, int y) {
            const auto &ex = elems_[x], &ey = elems_[y];
            double wx = std::max(ex.P, ex.Q), wy = std::max(ey.P, ey.Q);
            return wx != wy ? wx > wy : bfs_less(ex, ey);
        };
        for (auto& v : by_dst) std::sort(v.begin(), v.end(), wider);
        for (auto& v : primes_by_src) std::sort(v.begin(), v.end(), wider);

        std::map<std::pair<int, std::string>, Candidate> cands;
        auto offer = [&](int E, int p) {
            const auto &e = elems_[E], &pp = elems_[p];
            if (e.n == 0) return;
            int n = e.n + pp.n;
            if (n > budget_.n_max) return;
            std::string w = join_words(e.word, pp.word);
            if (index_.count(w)) return;
            Candidate c{w, n, word_is_pure(w) ? Element::Kind::Pure : Element::Kind::Join, E, p, 0};
            auto key = std::make_pair(n, w);
            auto it = cands.find(key);
            // Prefer the longest stored prefix.
            if (it == cands.end()) cands.emplace(key, c);
            else if (elems_[it->second.a].n < e.n) it->second = c;
        };
        auto bound = [&](int E, int p) {
            const auto &e = elems_[E], &pp = elems_[p];
            return e.P * pp.P * slack >= floor && e.Q * pp.Q * slack >= floor;
        };
        for (int E : fresh)
            for (int p : primes_by_src[elems_[E].dst]) {
                const auto &e = elems_[E], &pp = elems_[p];
                if (std::max(e.P, e.Q) * std::max(pp.P, pp.Q) * slack < floor) break;
                if (bound(E, p)) offer(E, p);
            }
        for (int p : fresh_primes)
            for (int E : by_dst[elems_[p].src]) {
                const auto &e = elems_[E], &pp = elems_[p];
                if (std::max(e.P, e.Q) * std::max(pp.P, pp.Q) * slack < floor) break;
                if (bound(E, p)) offer(E, p);
            }
        fresh.clear();
        fresh_primes.clear();
        if (cands.empty()) break;
        std::vector<Candidate> list;
        list.reserve(cands.size());
        for (auto& [k, c] : cands) list.push_back(std::move(c));
        std::vector<Built> built(list.size());
        parallel_for(list.size(), [&](std::size_t i) { built[i] = build(list[i], level); });
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (!built[i].ok) continue;
            if (elems_.size() >= budget_.max_elements) {
                exhausted_ = true;
                for (std::size_t j = i; j < list.size() && rep.frontier.size() < kMaxFrontier; ++j)
                    if (built[j].ok) rep.frontier.push_back(list[j].word);
                return total;
            }
            fresh.push_back(insert(std::move(built[i]), level));
            ++total;
            ++rep.added_simple;
        }
    }
    return total;
}

std::size_t RClass::parabolic_step(int level, ExtendReport& rep, std::vector<int>& fresh) {
    relink();
    {
        std::unique_lock lock(rel_mu_.m);
        rel_.clear();
    }
    const double floor = budget_.width_floor;
    const int N0 = fam_.cfg.n0;
    const double tm = path_[level].as_interval().mid();
    std::vector<int> Qs, Ps;
    for (const auto& e : elems_) {
        if (e.born > level) continue;
        if (in_Qu(e.id)) Qs.push_back(e.id);
        if (in_Ps(e.id)) Ps.push_back(e.id);
    }
    auto order = [&](int x, int y) { return bfs_less(elems_[x], elems_[y]); };
    std::sort(Qs.begin(), Qs.end(), order);
    std::sort(Ps.begin(), Ps.end(), order);

    struct Pair {
        int q, p;
    };
    std::vector<Pair> pairs;
    for (int q : Qs) {
        const Element& Q0 = elems_[q];
        for (int p : Ps) {
            const Element& P1 = elems_[p];
            int n = Q0.n + P1.n + N0;
            if (n > budget_.n_max) continue;
            double delta = theta_at(tm, Q0.yQ.hi, P1.xP.hi);
            if (!(delta > 0.0)) continue;
            double s = kEstimateFactor / std::sqrt(delta);
            if (Q0.P * P1.P * s < floor || Q0.Q * P1.Q * s < floor) continue;
            std::string wp = parabolic_word(Q0.word, P1.word, +1), wm = parabolic_word(Q0.word, P1.word, -1);
            if (index_.count(wp) && index_.count(wm)) continue;
            pairs.push_back({q, p});
        }
    }
    rep.pairs_examined += pairs.size();
    std::vector<Pair> allowed;
    for (const auto& pr : pairs)
        if (closure(pr.q, pr.p, level)) allowed.push_back(pr);
    rep.transverse_pairs += allowed.size();

    struct Result {
        bool ok = false;
        Built plus, minus;
    };
    std::vector<Result> res(allowed.size());
    FoldMap G = fam_.fold_at(tm);
    parallel_for(allowed.size(), [&](std::size_t i) {
        const Element& Q0 = elems_[allowed[i].q];
        const Element& P1 = elems_[allowed[i].p];
        try {
            auto m0 = map(Q0.id), m1 = map(P1.id);
            auto pair = parabolic_compose(*m0, G, *m1);
            auto fill = [&](Built& b, ImplicitMap&& m, int sign) {
                Element& e = b.e;
                e.word = parabolic_word(Q0.word, P1.word, sign);
                e.n = Q0.n + P1.n + N0;
                e.kind = Element::Kind::Parabolic;
                e.a = Q0.id;
                e.b = P1.id;
                e.sign = sign;
                e.src = Q0.src;
                e.dst = P1.dst;
                e.diagonal = false;
                auto w = widths(m);
                e.P = w.P;
                e.Q = w.Q;
                auto sp = std::make_shared<const ImplicitMap>(std::move(m));
                e.xP = Interval{grid_extreme([&](double y, double x) { return sp->A(y, x); }, kUnit, 9, false),
                                grid_extreme([&](double y, double x) { return sp->A(y, x); }, kUnit, 9, true)};
                e.yQ = Interval{grid_extreme([&](double y, double x) { return sp->B(y, x); }, kUnit, 9, false),
                                grid_extreme([&](double y, double x) { return sp->B(y, x); }, kUnit, 9, true)};
                b.map = sp;
                b.ok = e.P >= floor && e.Q >= floor;
            };
            fill(res[i].plus, std::move(pair.plus), +1);
            fill(res[i].minus, std::move(pair.minus), -1);
            res[i].ok = true;
        } catch (const Error&) {
            res[i].ok = false;
        }
    });
    // Insert in breadth-first order of the resulting words.
    std::vector<Built*> outs;
    for (auto& r : res) {
        if (!r.ok) {
            ++rep.compose_failures;
            continue;
        }
        for (Built* b : {&r.plus, &r.minus})
            if (b->ok && !index_.count(b->e.word)) outs.push_back(b);
    }
    std::sort(outs.begin(), outs.end(), [](const Built* x, const Built* y) { return bfs_less(x->e, y->e); });
    std::size_t added = 0;
    for (Built* b : outs) {
        if (elems_.size() >= budget_.max_elements) {
            exhausted_ = true;
            if (rep.frontier.size() < kMaxFrontier) rep.frontier.push_back(b->e.word);
            continue;
        }
        fresh.push_back(insert(std::move(*b), level));
        ++added;
        ++rep.added_parabolic;
    }
    return added;
}

ExtendReport RClass::extend(long index, bool force) {
    if (!force && level() > 0) {
        auto reg = regularity(level(), fam_.cfg.beta);
        if (!reg.regular)
            throw Error(ErrorCode::ConfigError, "current interval is not regular; witness " + reg.witness);
    }
    path_.push_back(tree_.child(path_.back(), index));
    {
        std::unique_lock lock(rel_mu_.m);
        rel_.clear();
    }
    return close();
}

void RClass::truncate(int lv) {
    if (lv < 0 || lv > level()) throw Error(ErrorCode::ConfigError, "no such level");
    std::vector<int> remap(elems_.size(), -1);
    std::vector<Element> kept;
    for (const auto& e : elems_)
        if (e.born <= lv) {
            remap[e.id] = static_cast<int>(kept.size());
            kept.push_back(e);
        }
    std::unordered_map<int, std::shared_ptr<const ImplicitMap>> maps;
    for (auto& e : kept) {
        int old = e.id;
        e.id = remap[old];
        if (e.a >= 0) e.a = remap[e.a];
        if (e.b >= 0) e.b = remap[e.b];
        if (e.core >= 0) e.core = remap[e.core];
        auto it = maps_.find(old);
        if (it != maps_.end()) maps.emplace(e.id, it->second);
    }
    elems_ = std::move(kept);
    maps_ = std::move(maps);
    index_.clear();
    primes_.clear();
    for (const auto& e : elems_) {
        index_.emplace(e.word, e.id);
        if (e.kind == Element::Kind::Parabolic || (e.pure() && e.n == 1)) primes_.push_back(e.id);
    }
    path_.resize(lv + 1);
    rel_.clear();
    exhausted_ = false;
    relink();
    finalize_structure();
}

// ------------------------------------------------------------------ structure

void RClass::collect_kids(const std::vector<std::vector<int>>& kids, int id, int lv, std::vector<int>& out) const {
    // Direct children born above the level are transparent at that level.
    for (int c : kids[id]) {
        if (elems_[c].born <= lv) out.push_back(c);
        else collect_kids(kids, c, lv, out);
    }
}

std::vector<int> RClass::p_children(int id, int lv) const {
    if (lv < 0) lv = level();
    std::vector<int> out;
    collect_kids(pkids_, id, lv, out);
    std::sort(out.begin(), out.end(), [&](int a, int b) { return bfs_less(elems_[a], elems_[b]); });
    return out;
}

std::vector<int> RClass::q_children(int id, int lv) const {
    if (lv < 0) lv = level();
    std::vector<int> out;
    collect_kids(qkids_, id, lv, out);
    std::sort(out.begin(), out.end(), [&](int a, int b) { return bfs_less(elems_[a], elems_[b]); });
    return out;
}

ChildList RClass::children(int id, int lv) const {
    ChildList cl;
    const std::string& w = elems_[id].word;
    for (int c : p_children(id, lv)) {
        const std::string& cw = elems_[c].word;
        char step = cw[w.size()];
        if (is_digit(step) || cw.size() == w.size()) cl.simple.push_back(c);
        else cl.non_simple.push_back({c, cw.substr(w.size() + 1)});
    }
    return cl;
}

std::vector<int> RClass::prime_decompose(int id) const {
    std::vector<int> out;
    const std::string& w = elems_[id].word;
    auto pos = digit_positions(w);
    std::size_t start = 0;  // index into pos
    while (start + 1 < pos.size()) {
        int best = -1;
        std::size_t best_end = start;
        for (std::size_t k = pos.size() - 1; k > start; --k) {
            int f = find(w.substr(pos[start], pos[k] - pos[start] + 1));
            if (f >= 0 && elems_[f].prime) {
                best = f;
                best_end = k;
                break;
            }
        }
        if (best < 0) {
            // Fall back to the shortest stored factor to keep the walk finite.
            for (std::size_t k = start + 1; k < pos.size(); ++k) {
                int f = find(w.substr(pos[start], pos[k] - pos[start] + 1));
                if (f >= 0) {
                    best = f;
                    best_end = k;
                    break;
                }
            }
            if (best < 0) break;
        }
        out.push_back(best);
        start = best_end;
    }
    return out;
}

// ------------------------------------------------------------------ criticality

bool RClass::persistent_failure(int piece, int id, Side side, int lv) const {
    if (!elems_[piece].diagonal) return false;
    for (int j = 0; j <= lv; ++j) {
        if (elems_[piece].born > j) continue;
        if (side == Side::P) {
            for (int pt = id; pt >= 0 && in_Ps(pt); pt = elems_[pt].p_parent) {
                if (elems_[pt].born > j) continue;
                auto be = base(piece, pt, j);
                if (be.T1 && be.T3) return false;
            }
        } else {
            for (int qt = id; qt >= 0 && in_Qu(qt); qt = elems_[qt].q_parent) {
                if (elems_[qt].born > j) continue;
                auto be = base(qt, piece, j);
                if (be.T1 && be.T2) return false;
            }
        }
    }
    return true;
}

Criticality RClass::search(int piece, int id, Side side, int lv, std::vector<std::string>& trail, int& visited) const {
    ++visited;
    Relation rel = side == Side::P ? transversality(piece, id, lv) : transversality(id, piece, lv);
    if (rel != Relation::CriticallyRelated) return Criticality::Transverse;
    trail.push_back(elems_[piece].word);
    if (persistent_failure(piece, id, side, lv)) return Criticality::Critical;
    auto kids = side == Side::P ? q_children(piece, lv) : p_children(piece, lv);
    if (kids.empty()) return Criticality::Undetermined;
    // A certified failure anywhere takes precedence over a truncated branch.
    std::vector<std::string> undetermined;
    for (int k : kids) {
        std::size_t mark = trail.size();
        auto r = search(k, id, side, lv, trail, visited);
        if (r == Criticality::Critical) return r;
        if (r == Criticality::Undetermined && undetermined.empty()) undetermined = trail;
        trail.resize(mark);
    }
    if (!undetermined.empty()) {
        trail = std::move(undetermined);
        return Criticality::Undetermined;
    }
    trail.pop_back();
    return Criticality::Transverse;
}

CriticalityResult RClass::classify(int id, Side side, int lv) const {
    if (lv < 0) lv = level();
    CriticalityResult res;
    if (side == Side::Q) {
        if (contains_Qu(id)) {
            res.verdict = Criticality::Critical;
            res.witness.push_back(elems_[id].word);
            return res;
        }
        if (!in_Qu(id)) return res;
        int root = find(special_.Ps_word);
        if (root < 0) {
            res.verdict = Criticality::Undetermined;
            return res;
        }
        res.verdict = search(root, id, side, lv, res.witness, res.pieces_visited);
    } else {
        if (contains_Ps(id)) {
            res.verdict = Criticality::Critical;
            res.witness.push_back(elems_[id].word);
            return res;
        }
        if (!in_Ps(id)) return res;
        int root = find(special_.Qu_word);
        if (root < 0) {
            res.verdict = Criticality::Undetermined;
            return res;
        }
        res.verdict = search(root, id, side, lv, res.witness, res.pieces_visited);
    }
    if (res.verdict == Criticality::Transverse) res.witness.clear();
    return res;
}

ElementFlags RClass::flags(int id, int lv) const {
    ElementFlags f;
    f.P_critical = classify(id, Side::P, lv).verdict != Criticality::Transverse;
    f.Q_critical = classify(id, Side::Q, lv).verdict != Criticality::Transverse;
    f.bicritical = f.P_critical && f.Q_critical;
    return f;
}

RegularityResult RClass::regularity(int lv, double beta) const {
    const double len = path_.at(lv).as_interval().length();
    const double thr = std::pow(len, beta);
    std::vector<BicriticalRecord> bic;
    int undetermined = 0;
    for (int id : ids_at(lv)) {
        const Element& e = elems_[id];
        if (!(in_Ps(id) && in_Qu(id))) continue;
        // Thin elements satisfy the bound whatever their criticality.
        if (std::max(e.P, e.Q) < thr) continue;
        auto cp = classify(id, Side::P, lv);
        if (cp.verdict == Criticality::Transverse) continue;
        auto cq = classify(id, Side::Q, lv);
        if (cq.verdict == Criticality::Transverse) continue;
        if (cp.verdict == Criticality::Undetermined || cq.verdict == Criticality::Undetermined) ++undetermined;
        bic.push_back({e.word, e.P, e.Q});
    }
    auto r = regularity_check(bic, len, beta);
    r.undetermined = undetermined;
    return r;
}

// ------------------------------------------------------------------ dump / load

nlohmann::json RClass::element_json(int id, bool with_flags) const {
    const Element& e = elems_[id];
    nlohmann::json j;
    j["word"] = e.word;
    j["n"] = e.n;
    j["r"] = e.r;
    j["widths"] = {{"P", e.P}, {"Q", e.Q}};
    if (with_flags) {
        auto f = flags(id);
        j["flags"] = {{"P_critical", f.P_critical}, {"Q_critical", f.Q_critical}, {"bicritical", f.bicritical}};
    } else {
        j["flags"] = nlohmann::json::object();
    }
    j["parent_word"] = e.p_parent >= 0 ? nlohmann::json(elems_[e.p_parent].word) : nlohmann::json(nullptr);
    j["born"] = e.born;
    j["prime"] = e.prime;
    const char* kind = e.kind == Element::Kind::Pure ? "pure" : e.kind == Element::Kind::Parabolic ? "parabolic" : "join";
    nlohmann::json b{{"kind", kind}};
    if (e.a >= 0) b["a"] = elems_[e.a].word;
    if (e.b >= 0) b["b"] = elems_[e.b].word;
    if (e.sign != 0) b["sign"] = e.sign;
    j["build"] = b;
    return j;
}

std::string RClass::dump_jsonl(bool with_flags) const {
    std::ostringstream os;
    std::vector<long> idx;
    for (std::size_t k = 1; k < path_.size(); ++k) idx.push_back(path_[k].index);
    nlohmann::json header{{"header",
                           {{"family", to_json(fam_.cfg)},
                            {"budget", to_json(budget_)},
                            {"tree_depth", tree_.depth},
                            {"path", idx},
                            {"t_lo", path_.front().lo},
                            {"level", level()},
                            {"elements", elems_.size()},
                            {"budget_exhausted", exhausted_}}}};
    os << header.dump() << '\n';
    for (int id : ids_at(level())) os << element_json(id, with_flags).dump() << '\n';
    return os.str();
}

RClass RClass::load_jsonl(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorCode::ConfigError, "empty class dump");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(line).at("header");
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("bad class dump header: ") + e.what());
    }
    RClass c;
    c.fam_ = make_family(family_config_from_json(h.at("family")));
    c.budget_ = class_budget_from_json(h.at("budget"));
    c.tree_ = interval_tree(c.fam_.cfg.eps0, c.fam_.cfg.tau, h.at("tree_depth").get<int>());
    c.special_ = special_rectangles(c.fam_);
    c.set_root(h.value("t_lo", c.tree_.root().lo));
    for (long i : h.at("path").get<std::vector<long>>()) c.path_.push_back(c.tree_.child(c.path_.back(), i));
    c.plain_theta_ = c.fam_.fold.chi3 == 0.0 && c.fam_.fold.theta_q == 0.0;
    c.exhausted_ = h.value("budget_exhausted", false);
    const int N0 = c.fam_.cfg.n0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        std::string word = j.at("word").get<std::string>();
        if (c.index_.count(word)) continue;
        int born = j.at("born").get<int>();
        const auto& b = j.at("build");
        std::string kind = b.at("kind").get<std::string>();
        auto need = [&](const char* key) {
            int id = c.find(b.at(key).get<std::string>());
            if (id < 0) throw Error(ErrorCode::ConfigError, "dump refers to a missing element for " + word);
            return id;
        };
        if (kind == "pure") {
            Candidate cand{word, word_length(word, N0), Element::Kind::Pure, -1, -1, 0};
            auto built = c.build(cand, born);
            built.ok = true;
            c.insert(std::move(built), born);
        } else if (kind == "join") {
            Candidate cand{word, word_length(word, N0), Element::Kind::Join, need("a"), need("b"), 0};
            auto built = c.build(cand, born);
            c.insert(std::move(built), born);
        } else if (kind == "parabolic") {
            int q = need("a"), p = need("b");
            int sign = b.at("sign").get<int>();
            auto m0 = c.map(q), m1 = c.map(p);
            auto pair = parabolic_compose(*m0, c.fam_.fold_at(c.path_.at(born).as_interval().mid()), *m1);
            Built built;
            Element& e = built.e;
            e.word = word;
            e.n = word_length(word, N0);
            e.kind = Element::Kind::Parabolic;
            e.a = q;
            e.b = p;
            e.sign = sign;
            e.src = c.elems_[q].src;
            e.dst = c.elems_[p].dst;
            e.diagonal = false;
            auto sp = std::make_shared<const ImplicitMap>(sign > 0 ? std::move(pair.plus) : std::move(pair.minus));
            auto w = widths(*sp);
            e.P = w.P;
            e.Q = w.Q;
            e.xP = Interval{grid_extreme([&](double y, double x) { return sp->A(y, x); }, kUnit, 9, false),
                            grid_extreme([&](double y, double x) { return sp->A(y, x); }, kUnit, 9, true)};
            e.yQ = Interval{grid_extreme([&](double y, double x) { return sp->B(y, x); }, kUnit, 9, false),
                            grid_extreme([&](double y, double x) { return sp->B(y, x); }, kUnit, 9, true)};
            built.map = sp;
            built.ok = true;
            c.insert(std::move(built), born);
        } else {
            throw Error(ErrorCode::ConfigError, "unknown element kind " + kind);
        }
    }
    c.relink();
    c.finalize_structure();
    return c;
}

// ------------------------------------------------------------------ free functions

RClass init_class(const ModelFamily& fam, const ClassBudget& budget) { return RClass(fam, budget); }

ExtendReport extend_class(RClass& cls, long index, bool force) { return cls.extend(index, force); }

std::vector<int> children(const RClass& cls, int id) { return cls.p_children(id); }

std::vector<int> prime_decompose(const RClass& cls, int id) { return cls.prime_decompose(id); }

CriticalityResult classify_criticality(const RClass& cls, int id, Side side, int level) {
    return cls.classify(id, side, level);
}

RegularityResult regularity_test(const RClass& cls, int level, double beta) { return cls.regularity(level, beta); }

WidthLaw stretched_exponential(const RClass& cls, int level) {
    if (level < 0) level = cls.level();
    WidthLaw w;
    w.gamma = std::log(1.5) / std::log(2.0);
    for (int id : cls.ids_at(level)) {
        const auto& e = cls.element(id);
        if (e.n < 1) continue;
        double c = e.P * std::exp(std::pow(static_cast<double>(e.n), w.gamma));
        if (c > w.C) {
            w.C = c;
            w.worst = e.word;
        }
    }
    return w;
}

AlgebraReport transversality_algebra(const RClass& cls, int level, std::uint64_t seed, std::size_t samples) {
    AlgebraReport rep;
    std::vector<int> Qs, Ps;
    for (int id : cls.ids_at(level)) {
        if (cls.in_Qu(id)) Qs.push_back(id);
        if (cls.in_Ps(id)) Ps.push_back(id);
    }
    auto chain_q = [&](int id, int lv) {
        std::vector<int> c;
        for (int cur = id; cur >= 0 && cls.in_Qu(cur); cur = cls.element(cur).q_parent)
            if (cls.element(cur).born <= lv) c.push_back(cur);
        return c;
    };
    auto chain_p = [&](int id, int lv) {
        std::vector<int> c;
        for (int cur = id; cur >= 0 && cls.in_Ps(cur); cur = cls.element(cur).p_parent)
            if (cls.element(cur).born <= lv) c.push_back(cur);
        return c;
    };
    // Concavity: Q0 with P1' and Q0' with P1 transverse imply Q0' with P1'.
    for (int q0 : Qs) {
        auto qc = chain_q(q0, level);
        for (int p1 : Ps) {
            auto pc = chain_p(p1, level);
            for (int q0p : qc)
                for (int p1p : pc) {
                    if (q0p == q0 && p1p == p1) continue;
                    if (!cls.transverse(q0, p1p, level) || !cls.transverse(q0p, p1, level)) continue;
                    ++rep.concavity_checked;
                    if (!cls.transverse(q0p, p1p, level)) {
                        if (rep.concavity_failures == 0)
                            rep.concavity_example = cls.element(q0).word + " | " + cls.element(q0p).word + " | " +
                                                    cls.element(p1).word + " | " + cls.element(p1p).word;
                        ++rep.concavity_failures;
                    }
                }
        }
    }
    // Heredity: every ancestor triple that is transverse forces the descendant
    // one. samples = 0 walks every stored triple, otherwise random triples.
    if (Qs.empty() || Ps.empty()) return rep;
    auto check = [&](int q, int p, int lv) {
        auto qc = chain_q(q, lv), pc = chain_p(p, lv);
        bool here = cls.transverse(q, p, lv);
        for (int qt : qc)
            for (int pt : pc)
                for (int lt = std::max(cls.element(qt).born, cls.element(pt).born); lt <= lv; ++lt) {
                    if (!cls.transverse(qt, pt, lt)) continue;
                    ++rep.heredity_checked;
                    if (!here) ++rep.heredity_failures;
                }
    };
    if (samples == 0) {
        for (int q : Qs)
            for (int p : Ps)
                for (int lv = std::max(cls.element(q).born, cls.element(p).born); lv <= level; ++lv) check(q, p, lv);
        return rep;
    }
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < samples; ++k) {
        int q = Qs[rng() % Qs.size()], p = Ps[rng() % Ps.size()];
        int lv = static_cast<int>(rng() % (level + 1));
        int lo = std::max(cls.element(q).born, cls.element(p).born);
        if (lo > level) continue;
        check(q, p, std::max(lv, lo));
    }
    return rep;
}

}  // namespace hs
