#include "horseshoe/serialize.hpp"

#include <cstdio>
#include <cstring>

#include "horseshoe/errors.hpp"

namespace hs {

namespace {

bool same_double(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

bool same_interval(const Interval& a, const Interval& b) { return same_double(a.lo, b.lo) && same_double(a.hi, b.hi); }

bool same_cheb(const Cheb1& a, const Cheb1& b) {
    if (!same_interval(a.domain(), b.domain()) || a.coeffs().size() != b.coeffs().size()) return false;
    for (std::size_t i = 0; i < a.coeffs().size(); ++i)
        if (!same_double(a.coeffs()[i], b.coeffs()[i])) return false;
    return true;
}

bool same_strip(const Strip& a, const Strip& b) {
    return a.orientation == b.orientation && a.chart == b.chart && same_interval(a.over, b.over) &&
           same_cheb(a.lower, b.lower) && same_cheb(a.upper, b.upper);
}

const json& need(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::ConfigError, std::string("missing key ") + key);
    return j.at(key);
}

}  // namespace

json to_json(const Interval& v) { return json::array({v.lo, v.hi}); }

json to_json(const Rect& r) { return json{{"y", to_json(r.y)}, {"x", to_json(r.x)}}; }

json to_json(const Cheb1& c) { return json{{"domain", to_json(c.domain())}, {"coeffs", c.coeffs()}}; }

json to_json(const ScalarField2& f) {
    return json{{"domain", to_json(f.domain())},
                {"degrees", json::array({f.degree_y(), f.degree_x()})},
                {"coeffs", f.coeffs()}};
}

json to_json(const Strip& s) {
    return json{{"orientation", s.orientation == Strip::Orientation::Vertical ? "vertical" : "horizontal"},
                {"chart", s.chart},
                {"over", to_json(s.over)},
                {"phi_minus", to_json(s.lower)},
                {"phi_plus", to_json(s.upper)}};
}

json to_json(const ImplicitMap& F) {
    return json{{"domain", to_json(F.rect)},
                {"src", F.src},
                {"dst", F.dst},
                {"A", to_json(F.A)},
                {"B", to_json(F.B)},
                {"Ax", to_json(F.Ax)},
                {"Ay", to_json(F.Ay)},
                {"Bx", to_json(F.Bx)},
                {"By", to_json(F.By)},
                {"strips", to_json(F.domain)},
                {"image", to_json(F.image)},
                {"cone", json::array({F.cone.lambda, F.cone.u, F.cone.v})},
                {"fit_tail", F.fit_tail}};
}

json to_json(const DisplacementQuad& q) {
    return json{{"delta", q.delta}, {"delta_L", q.delta_L}, {"delta_R", q.delta_R}, {"delta_LR", q.delta_LR}};
}

json to_json(const ParabolicPair& p) {
    return json{{"plus", to_json(p.plus)},
                {"minus", to_json(p.minus)},
                {"W_plus", to_json(p.W_plus)},
                {"W_minus", to_json(p.W_minus)},
                {"displacement", to_json(p.disp)},
                {"corner_cbar", p.corner_cbar},
                {"t", p.t},
                {"fit_tail", p.fit_tail}};
}

Interval interval_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::ConfigError, "interval must be [lo, hi]");
    return Interval{j[0].get<double>(), j[1].get<double>()};
}

Rect rect_from_json(const json& j) { return Rect{interval_from_json(need(j, "y")), interval_from_json(need(j, "x"))}; }

Cheb1 cheb1_from_json(const json& j) {
    return Cheb1(interval_from_json(need(j, "domain")), need(j, "coeffs").get<std::vector<double>>());
}

ScalarField2 field_from_json(const json& j) {
    const json& deg = need(j, "degrees");
    int ny = deg.at(0).get<int>(), nx = deg.at(1).get<int>();
    auto c = need(j, "coeffs").get<std::vector<double>>();
    if (ny < 0 || nx < 0 || c.size() != static_cast<std::size_t>(ny + 1) * static_cast<std::size_t>(nx + 1))
        throw Error(ErrorCode::ConfigError, "field coefficient count does not match degrees");
    return ScalarField2(rect_from_json(need(j, "domain")), ny, nx, std::move(c));
}

Strip strip_from_json(const json& j) {
    Strip s;
    s.orientation =
        need(j, "orientation").get<std::string>() == "vertical" ? Strip::Orientation::Vertical : Strip::Orientation::Horizontal;
    s.chart = need(j, "chart").get<int>();
    s.over = interval_from_json(need(j, "over"));
    s.lower = cheb1_from_json(need(j, "phi_minus"));
    s.upper = cheb1_from_json(need(j, "phi_plus"));
    return s;
}

ImplicitMap map_from_json(const json& j) {
    ImplicitMap F;
    F.rect = rect_from_json(need(j, "domain"));
    F.src = need(j, "src").get<int>();
    F.dst = need(j, "dst").get<int>();
    F.A = field_from_json(need(j, "A"));
    F.B = field_from_json(need(j, "B"));
    F.Ax = field_from_json(need(j, "Ax"));
    F.Ay = field_from_json(need(j, "Ay"));
    F.Bx = field_from_json(need(j, "Bx"));
    F.By = field_from_json(need(j, "By"));
    F.domain = strip_from_json(need(j, "strips"));
    F.image = strip_from_json(need(j, "image"));
    const json& c = need(j, "cone");
    F.cone = ConeParams{c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
    F.fit_tail = need(j, "fit_tail").get<double>();
    return F;
}

DisplacementQuad disp_from_json(const json& j) {
    return DisplacementQuad{need(j, "delta").get<double>(), need(j, "delta_L").get<double>(),
                            need(j, "delta_R").get<double>(), need(j, "delta_LR").get<double>()};
}

ParabolicPair pair_from_json(const json& j) {
    ParabolicPair p;
    p.plus = map_from_json(need(j, "plus"));
    p.minus = map_from_json(need(j, "minus"));
    p.W_plus = field_from_json(need(j, "W_plus"));
    p.W_minus = field_from_json(need(j, "W_minus"));
    p.disp = disp_from_json(need(j, "displacement"));
    p.corner_cbar = need(j, "corner_cbar").get<std::array<double, 4>>();
    p.t = need(j, "t").get<double>();
    p.fit_tail = need(j, "fit_tail").get<double>();
    return p;
}

bool same_bits(const ScalarField2& a, const ScalarField2& b) {
    if (a.degree_y() != b.degree_y() || a.degree_x() != b.degree_x()) return false;
    if (!same_interval(a.domain().y, b.domain().y) || !same_interval(a.domain().x, b.domain().x)) return false;
    for (std::size_t i = 0; i < a.coeffs().size(); ++i)
        if (!same_double(a.coeffs()[i], b.coeffs()[i])) return false;
    return true;
}

bool same_bits(const ImplicitMap& a, const ImplicitMap& b) {
    return a.src == b.src && a.dst == b.dst && same_interval(a.rect.y, b.rect.y) &&
           same_interval(a.rect.x, b.rect.x) && same_bits(a.A, b.A) && same_bits(a.B, b.B) &&
           same_bits(a.Ax, b.Ax) && same_bits(a.Ay, b.Ay) && same_bits(a.Bx, b.Bx) && same_bits(a.By, b.By) &&
           same_strip(a.domain, b.domain) && same_strip(a.image, b.image);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace hs
