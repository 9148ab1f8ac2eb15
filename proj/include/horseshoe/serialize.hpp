#pragma once

#include <string>

#include "horseshoe/affine_calculus.hpp"
#include "horseshoe/fold_parabolic.hpp"
#include "json.hpp"

namespace hs {

using json = nlohmann::json;

// Layouts: field {domain, degrees, coeffs (row-major in y)}; map {domain,
// src, dst, fields, strips: {phi_minus, phi_plus}, image}. Doubles are written
// in shortest round-trip form, so dump then load is bit-exact.
json to_json(const Interval& v);
json to_json(const Rect& r);
json to_json(const Cheb1& c);
json to_json(const ScalarField2& f);
json to_json(const Strip& s);
json to_json(const ImplicitMap& F);
json to_json(const DisplacementQuad& q);
json to_json(const ParabolicPair& p);

Interval interval_from_json(const json& j);
Rect rect_from_json(const json& j);
Cheb1 cheb1_from_json(const json& j);
ScalarField2 field_from_json(const json& j);
Strip strip_from_json(const json& j);
ImplicitMap map_from_json(const json& j);
DisplacementQuad disp_from_json(const json& j);
ParabolicPair pair_from_json(const json& j);

// Bitwise equality of every coefficient, domain and strip.
bool same_bits(const ScalarField2& a, const ScalarField2& b);
bool same_bits(const ImplicitMap& a, const ImplicitMap& b);

// Fixed 17-significant-digit rendering used in CSV outputs.
std::string fmt17(double v);

}  // namespace hs
