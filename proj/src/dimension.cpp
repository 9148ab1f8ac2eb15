#include "horseshoe/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "horseshoe/errors.hpp"
#include "horseshoe/parallel.hpp"

namespace hs {

namespace {

constexpr double kPowerTol = 1e-12;
constexpr int kPowerMaxIter = 10000;
constexpr int kGridPoints = 20;

int digit_of(char c) { return c - '0'; }

}  // namespace

nlohmann::json to_json(const Truncation& t) {
    return {{"m_trunc", t.m_trunc},
            {"w_min", t.w_min},
            {"y_base", t.y_base},
            {"d_minus", t.d_minus},
            {"tail_limit", t.tail_limit}};
}

Truncation truncation_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "truncation must be an object");
    Truncation t;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k == "m_trunc") t.m_trunc = it->get<int>();
        else if (k == "w_min") t.w_min = it->get<double>();
        else if (k == "y_base") t.y_base = it->get<double>();
        else if (k == "d_minus") t.d_minus = it->get<double>();
        else if (k == "tail_limit") t.tail_limit = it->get<double>();
        else throw Error(ErrorCode::ConfigError, "unknown truncation key " + k);
    }
    if (t.m_trunc < 1) throw Error(ErrorCode::ConfigError, "m_trunc must be positive");
    if (!(t.w_min > 0.0 && t.w_min < 1.0)) throw Error(ErrorCode::ConfigError, "w_min must lie in (0, 1)");
    if (!(t.y_base >= 0.0 && t.y_base <= 1.0)) throw Error(ErrorCode::ConfigError, "y_base must lie in [0, 1]");
    if (!(t.tail_limit > 0.0)) throw Error(ErrorCode::ConfigError, "tail_limit must be positive");
    return t;
}

double default_d_minus(const ModelFamily& fam) { return fam.d_s0 - 100.0 * fam.cfg.eps0; }

// ------------------------------------------------------------------ dilatation

double dilatation(const RClass& cls, int prime, int curve, double y_base) {
    auto F = cls.map(prime);
    std::shared_ptr<const ImplicitMap> G;
    if (curve >= 0) G = cls.map(curve);
    auto phi = [&](double y) { return G ? G->A(y, 0.5) : 0.5; };
    auto dphi = [&](double y) { return G ? G->Ay(y, 0.5) : 0.0; };
    const double y = y_base;
    // The point of the image curve hit from height y: x' = phi(B(y, x')).
    double x = 0.5;
    for (int k = 0; k < 200; ++k) {
        double xn = std::clamp(phi(std::clamp(F->B(y, x), 0.0, 1.0)), 0.0, 1.0);
        bool done = std::abs(xn - x) < 1e-15;
        x = xn;
        if (done) break;
    }
    double yp = std::clamp(F->B(y, x), 0.0, 1.0);
    double c = (1.0 - F->Bx(y, x) * dphi(yp)) / F->Ax(y, x);
    return std::log(std::abs(c));
}

int stable_curve_proxy(const RClass& cls, int chart, int level) {
    if (level < 0) level = cls.level();
    std::string w(1, static_cast<char>('0' + chart));
    int best = -1;
    for (;;) {
        int id = cls.find(w);
        if (id < 0 || cls.element(id).born > level) break;
        best = id;
        w.push_back(w.back());
    }
    return best;
}

double birkhoff_sum(const RClass& cls, const std::vector<int>& primes, double y_base, int level) {
    double sum = 0.0;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        int curve = -1;
        if (i + 1 < primes.size()) {
            std::string rest = cls.element(primes[i + 1]).word;
            for (std::size_t k = i + 2; k < primes.size(); ++k) rest = join_words(rest, cls.element(primes[k]).word);
            curve = cls.find(rest);
        }
        if (curve >= 0 && level >= 0 && cls.element(curve).born > level) curve = -1;
        if (curve < 0) curve = stable_curve_proxy(cls, cls.element(primes[i]).dst, level);
        sum += dilatation(cls, primes[i], curve, y_base);
    }
    return sum;
}

// ------------------------------------------------------------------ transfer operator

TransferOperator::TransferOperator(const RClass& cls, const Truncation& trunc, int level) {
    const int lv = level < 0 ? cls.level() : level;
    d_minus_ = trunc.d_minus < 0.0 ? default_d_minus(cls.family()) : trunc.d_minus;
    std::vector<std::vector<int>> primes_by_src(2);
    for (int id : cls.ids_at(lv)) {
        const auto& e = cls.element(id);
        if (!e.prime || e.n < 1) continue;
        if (e.P >= trunc.w_min) {
            primes_by_src[e.src].push_back(id);
        } else {
            ++excluded_;
            tail_ += e.n * std::pow(e.P, d_minus_);
        }
    }
    if (tail_ > trunc.tail_limit) {
        std::ostringstream os;
        os << "excluded primes carry tail mass " << tail_ << " > " << trunc.tail_limit;
        throw Error(ErrorCode::TruncationTooCoarse, os.str());
    }

    // Prefix tree, breadth first.
    for (int a = 0; a < 2; ++a)
        for (int p : primes_by_src[a]) {
            CylinderState s;
            s.primes = {p};
            s.word = cls.element(p).word;
            s.element = p;
            s.a = a;
            s.width = cls.element(p).P;
            nodes_.push_back(std::move(s));
        }
    // Nodes at least w_min wide are refined into every stored chain one prime longer.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (static_cast<int>(nodes_[i].primes.size()) >= trunc.m_trunc || nodes_[i].width < trunc.w_min) continue;
        int dst = digit_of(nodes_[i].word.back());
        for (int q : primes_by_src[dst]) {
            std::string w = join_words(nodes_[i].word, cls.element(q).word);
            int id = cls.find(w);
            if (id < 0) continue;
            const auto& e = cls.element(id);
            if (e.born > lv) continue;
            CylinderState s;
            s.primes = nodes_[i].primes;
            s.primes.push_back(q);
            s.word = std::move(w);
            s.element = id;
            s.a = nodes_[i].a;
            s.width = e.P;
            s.parent = static_cast<int>(i);
            nodes_[i].children.push_back(static_cast<int>(nodes_.size()));
            nodes_.push_back(std::move(s));
        }
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].children.empty()) {
            nodes_[i].leaf = true;
            leaves_.push_back(static_cast<int>(i));
        }
    // The leaves form a prefix code: T+ of a leaf cylinder covers the base
    // rectangle of its last prime, so it feeds every leaf rooted there.
    const std::size_t L = leaves_.size();
    b_.assign(L, 0.0);
    a_.assign(L, 0);
    dst_.assign(L, 0);
    for (std::size_t s = 0; s < L; ++s) {
        const CylinderState& st = nodes_[leaves_[s]];
        a_[s] = st.a;
        dst_[s] = cls.element(st.primes.back()).dst;
        by_rect_[a_[s]].push_back(static_cast<int>(s));
    }
    parallel_for(nodes_.size(), [&](std::size_t i) {
        nodes_[i].b = birkhoff_sum(cls, nodes_[i].primes, trunc.y_base, lv);
    });
    for (std::size_t s = 0; s < L; ++s) b_[s] = nodes_[leaves_[s]].b;
}

TransferOperator::Spectrum TransferOperator::spectrum(double d, bool with_left) const {
    const std::size_t L = leaves_.size();
    Spectrum sp;
    sp.d = d;
    if (L == 0) return sp;
    std::vector<double> w(L);
    for (std::size_t i = 0; i < L; ++i) w[i] = std::exp(-d * b_[i]);

    // Right eigenvector: (M v)(s') = w(s') sum over successors.
    std::vector<double> v(L, 1.0 / L), u(L);
    double lam = 0.0;
    for (int it = 1; it <= kPowerMaxIter; ++it) {
        double V[2] = {0.0, 0.0};
        for (std::size_t j = 0; j < L; ++j) V[a_[j]] += v[j];
        for (std::size_t i = 0; i < L; ++i) u[i] = w[i] * V[dst_[i]];
        double su = 0.0, sv = 0.0, sa[2] = {0.0, 0.0}, va[2] = {0.0, 0.0};
        for (std::size_t i = 0; i < L; ++i) {
            su += u[i];
            sv += v[i];
            sa[a_[i]] += u[i];
            va[a_[i]] += v[i];
        }
        double next = su / sv;
        for (int a = 0; a < 2; ++a) sp.lambda_rooted[a] = va[a] > 0.0 ? sa[a] / va[a] : 0.0;
        double diff = 0.0, vmax = 0.0;
        for (std::size_t i = 0; i < L; ++i) {
            u[i] /= su;
            diff = std::max(diff, std::abs(u[i] - v[i]));
            vmax = std::max(vmax, u[i]);
        }
        v.swap(u);
        sp.iterations = it;
        bool done = diff <= kPowerTol * vmax && std::abs(next - lam) <= kPowerTol * next;
        lam = next;
        if (done) {
            sp.converged = true;
            break;
        }
    }
    sp.lambda = lam;
    sp.nu = v;
    if (!with_left) return sp;

    // Left eigenvector: (h M)(s) = sum of h(s') w(s') over s' landing in R_a(s).
    std::vector<double> h(L, 1.0), g(L);
    for (int it = 0; it < kPowerMaxIter; ++it) {
        double H[2] = {0.0, 0.0};
        for (std::size_t i = 0; i < L; ++i) H[dst_[i]] += h[i] * w[i];
        for (std::size_t j = 0; j < L; ++j) g[j] = H[a_[j]];
        double gmax = *std::max_element(g.begin(), g.end());
        double diff = 0.0;
        for (std::size_t j = 0; j < L; ++j) {
            g[j] /= gmax;
            diff = std::max(diff, std::abs(g[j] - h[j]));
        }
        h.swap(g);
        if (diff <= kPowerTol) break;
    }
    sp.h = h;
    double hmin = *std::min_element(h.begin(), h.end()), hmax = *std::max_element(h.begin(), h.end());
    sp.h_ratio = hmin > 0.0 ? hmax / hmin : std::numeric_limits<double>::infinity();
    return sp;
}

std::vector<std::vector<double>> TransferOperator::dense(double d) const {
    const std::size_t L = leaves_.size();
    std::vector<std::vector<double>> M(L, std::vector<double>(L, 0.0));
    for (std::size_t i = 0; i < L; ++i)
        for (int j : by_rect_[dst_[i]]) M[i][j] = std::exp(-d * b_[i]);
    return M;
}

// ------------------------------------------------------------------ dimension

DimensionResult solve_dimension(const TransferOperator& op, int rooted_at, double d_lo, double d_hi) {
    if (rooted_at > 1) throw Error(ErrorCode::ConfigError, "rooted_at must be -1, 0 or 1");
    auto lam = [&](double d) {
        auto sp = op.spectrum(d, false);
        return rooted_at < 0 ? sp.lambda : sp.lambda_rooted[rooted_at];
    };
    DimensionResult r;
    r.rooted_at = rooted_at;
    r.tail_mass = op.tail_mass();
    r.states = op.leaves().size();
    for (int i = 0; i < kGridPoints; ++i) {
        double d = d_lo + (d_hi - d_lo) * i / (kGridPoints - 1);
        r.lambda_curve.emplace_back(d, lam(d));
        if (i > 0 && !(r.lambda_curve[i].second < r.lambda_curve[i - 1].second)) r.monotone = false;
    }
    double f_lo = r.lambda_curve.front().second, f_hi = r.lambda_curve.back().second;
    if (!(f_lo > 1.0 && f_hi < 1.0)) {
        std::ostringstream os;
        os << "lambda(" << d_lo << ") = " << f_lo << ", lambda(" << d_hi << ") = " << f_hi << " do not straddle 1";
        throw Error(ErrorCode::BracketFailure, os.str());
    }
    double lo = d_lo, hi = d_hi;
    while (hi - lo > 1e-13 && r.bisections < 200) {
        double mid = 0.5 * (lo + hi);
        double f = lam(mid);
        ++r.bisections;
        if (f > 1.0) lo = mid;
        else hi = mid;
        if (f == 1.0) lo = hi = mid;
    }
    r.d_s = 0.5 * (lo + hi);
    auto sp = op.spectrum(r.d_s, true);
    r.lambda = rooted_at < 0 ? sp.lambda : sp.lambda_rooted[rooted_at];
    r.h_ratio = sp.h_ratio;
    return r;
}

DimensionResult solve_dimension(const RClass& cls, const Truncation& trunc, int rooted_at, double d_lo, double d_hi,
                                int level) {
    TransferOperator op(cls, trunc, level);
    return solve_dimension(op, rooted_at, d_lo, d_hi);
}

nlohmann::json to_json(const DimensionResult& r, const Truncation& t) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& [d, l] : r.lambda_curve) curve.push_back({d, l});
    return {{"d_s", r.d_s},
            {"lambda", r.lambda},
            {"lambda_curve", curve},
            {"monotone", r.monotone},
            {"tail_mass", r.tail_mass},
            {"states", r.states},
            {"h_ratio", r.h_ratio},
            {"bisections", r.bisections},
            {"rooted_at", r.rooted_at},
            {"truncation", to_json(t)}};
}

// ------------------------------------------------------------------ Gibbs measure

GibbsTable gibbs_measure(const TransferOperator& op, double d_s) {
    GibbsTable g;
    g.d_s = d_s;
    auto sp = op.spectrum(d_s, false);
    const auto& nodes = op.nodes();
    std::vector<double> mass(nodes.size(), 0.0);
    for (std::size_t s = 0; s < op.leaves().size(); ++s) mass[op.leaves()[s]] = sp.nu[s];
    for (std::size_t i = nodes.size(); i-- > 0;)
        if (nodes[i].parent >= 0) mass[nodes[i].parent] += mass[i];
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].parent < 0) g.normalization[nodes[i].a] += mass[i];
    for (int a = 0; a < 2; ++a) g.cylinders.push_back({std::string(1, static_cast<char>('0' + a)), 0, a, 1.0, 1.0});
    std::vector<double> mu(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& st = nodes[i];
        mu[i] = g.normalization[st.a] > 0.0 ? mass[i] / g.normalization[st.a] : 0.0;
        g.cylinders.push_back({st.word, static_cast<int>(st.primes.size()), st.a, st.width, mu[i]});
        double ref = std::pow(st.width, d_s);
        if (mu[i] > 0.0) g.gibbs_constant = std::max({g.gibbs_constant, mu[i] / ref, ref / mu[i]});
        else g.gibbs_constant = std::numeric_limits<double>::infinity();
    }
    // Additivity on the cylinder algebra.
    double top[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].parent < 0) top[nodes[i].a] += mu[i];
        if (nodes[i].children.empty()) continue;
        double sum = 0.0;
        for (int c : nodes[i].children) sum += mu[c];
        g.additivity_error = std::max(g.additivity_error, std::abs(sum - mu[i]));
    }
    for (int a = 0; a < 2; ++a)
        if (g.normalization[a] > 0.0) g.additivity_error = std::max(g.additivity_error, std::abs(top[a] - 1.0));
    return g;
}

std::string gibbs_csv(const GibbsTable& g) {
    std::ostringstream os;
    os.precision(17);
    os << "word,depth,rectangle,width,mu\n";
    for (const auto& c : g.cylinders) os << c.word << ',' << c.depth << ',' << c.a << ',' << c.width << ',' << c.mu << '\n';
    return os.str();
}

// ------------------------------------------------------------------ series

ThetaSeries theta_series(const RClass& cls, int id, double s, int depth, double margin, int level) {
    if (level < 0) level = cls.level();
    ThetaSeries th;
    th.s = s;
    th.depth = depth;
    std::vector<int> gen{id};
    while (!gen.empty()) {
        double g = 0.0;
        for (int x : gen) g += std::pow(cls.element(x).P, s);
        th.generations.push_back(g);
        th.partial.push_back((th.partial.empty() ? 0.0 : th.partial.back()) + g);
        std::vector<int> next;
        for (int x : gen) {
            auto kids = cls.p_children(x, level);
            next.insert(next.end(), kids.begin(), kids.end());
        }
        gen.swap(next);
    }
    const int last = static_cast<int>(th.generations.size()) - 1;
    th.sum = th.partial[std::min(depth, last)];
    th.ratio = last > 0 ? th.generations[last] / th.generations[last - 1] : 0.0;
    // Stored generations beyond the depth, then a geometric continuation.
    double tail = 0.0;
    for (int k = depth + 1; k <= last; ++k) tail += th.generations[k];
    if (th.ratio < 1.0) {
        int first = std::max(depth + 1, last + 1);
        tail += th.generations[last] * std::pow(th.ratio, first - last) / (1.0 - th.ratio);
    } else {
        tail = std::numeric_limits<double>::infinity();
    }
    th.tail = tail;
    th.converges = th.ratio < 1.0 && s >= cls.family().d_s0 + margin;
    return th;
}

WeightedSum weighted_children_sum(const RClass& cls, int id, double kappa, double d_minus, int m, int level) {
    if (level < 0) level = cls.level();
    if (!(kappa > 0.0 && kappa < 1.0)) throw Error(ErrorCode::ConfigError, "kappa must lie in (0, 1)");
    auto norm = [&](int x) {
        const auto& e = cls.element(x);
        return std::pow(e.P, d_minus) * std::pow(kappa, e.r);
    };
    WeightedSum ws;
    ws.norm = norm(id);
    std::vector<int> gen{id};
    for (int k = 0; k < m; ++k) {
        std::vector<int> next;
        for (int x : gen) {
            auto kids = cls.p_children(x, level);
            next.insert(next.end(), kids.begin(), kids.end());
        }
        gen.swap(next);
    }
    for (int x : gen) ws.sum += norm(x);
    ws.count = gen.size();
    ws.ratio = ws.sum / ws.norm;
    ws.bound_ratio = ws.ratio / std::pow(kappa, 0.5 * m);
    return ws;
}

}  // namespace hs
