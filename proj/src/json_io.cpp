#include "rsjd/json_io.hpp"

#include <fstream>

namespace rsjd {

namespace {

double number(const Json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ParseError(std::string("field \"") + key + "\" must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw ParseError(std::string("field \"") + key + "\" must be an array");
  }
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ParseError(std::string("field \"") + key + "\" must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Descriptor field(const Json& j, const char* key) {
  if (!j.contains(key)) return Descriptor::constant(0.0);
  try {
    return descriptor_from_json(j.at(key));
  } catch (const ParseError& e) {
    throw ParseError(std::string(key) + ": " + e.what());
  }
}

std::array<double, 2> pair(const Json& j, const char* key) {
  const auto v = numbers(j, key);
  if (v.size() != 2) throw ParseError(std::string("field \"") + key + "\" must have 2 entries");
  return {v[0], v[1]};
}

double constant_value(const Descriptor& d, const std::string& what) {
  if (d.kind() != DescriptorKind::Constant) {
    throw ParseError(what + " must be constant for a two-state problem");
  }
  return d(0.0);
}

}  // namespace

Descriptor descriptor_from_json(const Json& j) {
  if (j.is_number()) return Descriptor::constant(j.get<double>());
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ParseError("descriptor must be a number or an object with a \"kind\"");
  }
  const auto kind = j.at("kind").get<std::string>();
  try {
    if (kind == "constant") return Descriptor::constant(number(j, "value"));
    if (kind == "piecewise") {
      return Descriptor::piecewise(numbers(j, "breakpoints"), numbers(j, "values"));
    }
    if (kind == "power_law") return Descriptor::power_law(number(j, "scale"), number(j, "exponent"));
  } catch (const std::invalid_argument& e) {
    throw SpecError(std::string("malformed ") + kind + " descriptor: " + e.what());
  }
  throw ParseError("unknown descriptor kind \"" + kind + "\"");
}

Json to_json(const Descriptor& d) {
  switch (d.kind()) {
    case DescriptorKind::Constant: return d(0.0);
    case DescriptorKind::PiecewiseConstant:
      return {{"kind", "piecewise"}, {"breakpoints", d.breakpoints()}, {"values", d.values()}};
    case DescriptorKind::PowerLaw:
      return {{"kind", "power_law"}, {"scale", d.scale()}, {"exponent", d.exponent()}};
  }
  return nullptr;
}

ModelSpec model_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("model must be a JSON object");
  if (!j.contains("regimes") || !j.at("regimes").is_array()) {
    throw ParseError("model needs a \"regimes\" array");
  }
  std::vector<RegimeTriplet> regimes;
  for (const auto& r : j.at("regimes")) {
    if (!r.is_object()) throw ParseError("each regime must be an object");
    regimes.push_back({field(r, "c"), field(r, "h"), field(r, "sigma")});
  }
  const std::size_t d = regimes.size();
  HazardMatrix hazards(d, std::vector<std::optional<Descriptor>>(d));
  if (j.contains("hazards")) {
    if (!j.at("hazards").is_array()) throw ParseError("\"hazards\" must be an array");
    for (const auto& h : j.at("hazards")) {
      if (!h.is_object() || !h.contains("from") || !h.contains("to") || !h.contains("rate")) {
        throw ParseError("each hazard needs \"from\", \"to\" and \"rate\"");
      }
      if (!h.at("from").is_number_unsigned() || !h.at("to").is_number_unsigned()) {
        throw ParseError("hazard \"from\" and \"to\" must be regime indices");
      }
      const auto from = h.at("from").get<std::size_t>();
      const auto to = h.at("to").get<std::size_t>();
      if (from >= d || to >= d) throw SpecError("hazard regime index out of range");
      if (hazards[from][to]) throw SpecError("duplicate hazard entry");
      hazards[from][to] = field(h, "rate");
    }
  }
  std::string label = "P";
  if (j.contains("measure")) {
    if (!j.at("measure").is_string()) throw ParseError("\"measure\" must be a string");
    label = j.at("measure").get<std::string>();
  }
  std::map<std::string, std::string> metadata;
  if (j.contains("metadata")) {
    for (const auto& [k, v] : j.at("metadata").items()) {
      metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  return ModelSpec(std::move(regimes), std::move(hazards), label, std::move(metadata));
}

Json to_json(const ModelSpec& spec) {
  Json regimes = Json::array();
  for (const auto& r : spec.regimes()) {
    regimes.push_back({{"c", to_json(r.c)}, {"h", to_json(r.h)}, {"sigma", to_json(r.sigma)}});
  }
  Json hazards = Json::array();
  for (std::size_t i = 0; i < spec.regime_count(); ++i) {
    for (std::size_t j = 0; j < spec.regime_count(); ++j) {
      if (const auto& g = spec.hazard(i, j)) {
        hazards.push_back({{"from", i}, {"to", j}, {"rate", to_json(*g)}});
      }
    }
  }
  Json out{{"measure", spec.measure_label()}, {"regimes", regimes}, {"hazards", hazards}};
  if (!spec.metadata().empty()) out["metadata"] = spec.metadata();
  return out;
}

MeasureChangeSpec change_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("regimes") || !j.at("regimes").is_array()) {
    throw ParseError("measure change needs a \"regimes\" array");
  }
  std::vector<ChangeTriplet> regimes;
  for (const auto& r : j.at("regimes")) {
    if (!r.is_object()) throw ParseError("each change regime must be an object");
    regimes.push_back({field(r, "c_star"), field(r, "h_star"), field(r, "sigma_star")});
  }
  return MeasureChangeSpec(std::move(regimes));
}

Json to_json(const MeasureChangeSpec& change) {
  Json regimes = Json::array();
  for (const auto& r : change.regimes()) {
    regimes.push_back({{"c_star", to_json(r.c_star)},
                       {"h_star", to_json(r.h_star)},
                       {"sigma_star", to_json(r.sigma_star)}});
  }
  return {{"regimes", regimes}};
}

MemmProblem problem_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("problem must be a JSON object");
  MemmProblem p;
  if (j.contains("lambda")) {
    p.lambda = pair(j, "lambda");
    p.c = pair(j, "c");
    p.h = pair(j, "h");
    p.sigma = pair(j, "sigma");
    return p;
  }
  const ModelSpec spec = model_from_json(j);
  if (spec.regime_count() != 2) throw ParseError("a MEMM problem has exactly two regimes");
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& r = spec.regime(i);
    const std::string at = "regime " + std::to_string(i) + " ";
    p.c[i] = constant_value(r.c, at + "c");
    p.h[i] = constant_value(r.h, at + "h");
    p.sigma[i] = constant_value(r.sigma, at + "sigma");
    const auto& g = spec.hazard(i, 1 - i);
    if (!g) throw ParseError(at + "has no outgoing hazard");
    p.lambda[i] = constant_value(*g, at + "hazard");
  }
  return p;
}

Json to_json(const MemmProblem& p) {
  return {{"lambda", p.lambda}, {"c", p.c}, {"h", p.h}, {"sigma", p.sigma}};
}

Json to_json(const EntropyCoefficients& e) {
  return {{"b1", e.b1}, {"b2", e.b2}, {"A1", e.A1}, {"A2", e.A2},
          {"B", e.B},   {"lambda1_star", e.lambda1_star}, {"lambda2_star", e.lambda2_star}};
}

Json to_json(const MemmSolution& s) {
  Json out{{"kind", to_string(s.kind)},
           {"lambda_star", s.lambda_star},
           {"sigma_star", s.sigma_star},
           {"coefficients", to_json(s.coefficients)},
           {"converged", s.converged}};
  if (s.kind == MemmKind::Horizon) {
    out["horizon"] = s.horizon;
    out["initial_state"] = s.initial_state;
  }
  if (!s.diagnostic.empty()) out["diagnostic"] = s.diagnostic;
  return out;
}

Json to_json(const LevySolution& s) {
  return {{"beta_star", s.beta_star},
          {"lambda_star", s.lambda_star},
          {"entropy_slope", s.entropy_slope}};
}

Json to_json(const NoMeasure& n) {
  return {{"no_measure", true},
          {"reason", n.reason == NoMeasure::Reason::ZeroJump ? "zero_jump" : "sign_condition"},
          {"regime", n.regime},
          {"time", n.time},
          {"message", n.message}};
}

Json to_json(const ValidationReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations) v.push_back({{"location", x.location}, {"message", x.message}});
  return {{"ok", r.ok()}, {"violations", v}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace rsjd
