#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rsjd/measures.hpp"
#include "rsjd/memm.hpp"
#include "rsjd/model.hpp"

namespace rsjd {

using Json = nlohmann::json;

/// Malformed JSON document (bad syntax, missing or mistyped field).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A descriptor is a bare number (constant) or an object
// {"kind": "constant", "value": v}
// {"kind": "piecewise", "breakpoints": [...], "values": [...]}
// {"kind": "power_law", "scale": a, "exponent": p}
Descriptor descriptor_from_json(const Json& j);
Json to_json(const Descriptor& d);

// {"measure": "P", "regimes": [{"c", "h", "sigma"}...],
//  "hazards": [{"from": i, "to": j, "rate": descriptor}...], "metadata": {...}}
// Regime indices are 0-based.
ModelSpec model_from_json(const Json& j);
Json to_json(const ModelSpec& spec);

// {"regimes": [{"c_star", "h_star", "sigma_star"}...]}; missing fields are 0.
MeasureChangeSpec change_from_json(const Json& j);
Json to_json(const MeasureChangeSpec& change);

/// Either {"lambda": [l1, l2], "c": [...], "h": [...], "sigma": [...]} or a
/// two-regime model document with constant coefficients and hazards.
MemmProblem problem_from_json(const Json& j);
Json to_json(const MemmProblem& p);
Json to_json(const MemmSolution& s);
Json to_json(const EntropyCoefficients& e);
Json to_json(const LevySolution& s);
Json to_json(const NoMeasure& n);
Json to_json(const ValidationReport& r);

/// Reads and parses a JSON file; throws ParseError.
Json read_json_file(const std::string& path);

}  // namespace rsjd
