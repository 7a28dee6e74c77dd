#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsjd/descriptor.hpp"

namespace rsjd {

/// Default tolerance for invariant and condition checks.
inline constexpr double kDefaultTolerance = 1e-9;

/// Drift c, jump size h and diffusion sigma of one regime, all functions of
/// the elapsed holding time.
struct RegimeTriplet {
  Descriptor c;
  Descriptor h;
  Descriptor sigma;
};

/// Girsanov data of one regime.
struct ChangeTriplet {
  Descriptor c_star;
  Descriptor h_star;
  Descriptor sigma_star;
};

/// hazards[i][j] is the transition hazard rate i -> j; empty means the
/// transition never fires. The diagonal is always empty.
using HazardMatrix = std::vector<std::vector<std::optional<Descriptor>>>;

/// Structural defect of a specification (wrong sizes, hazard on the
/// diagonal, malformed descriptor). Distinct from invariant violations,
/// which are reported through ValidationReport.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The model P-dynamics are such that gamma^P vanishes where gamma^Q does not.
class InaccessibleMeasure : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Violation {
  std::string location;  // e.g. "regimes[1].sigma", "hazards[0->1]"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// A measure change rejected against a model; carries every violation found.
class InvalidMeasureChange : public std::invalid_argument {
 public:
  explicit InvalidMeasureChange(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Regime-switching jump-diffusion under a named measure.
class ModelSpec {
 public:
  /// Throws SpecError for structural problems.
  ModelSpec(std::vector<RegimeTriplet> regimes, HazardMatrix hazards,
            std::string measure_label = "P",
            std::map<std::string, std::string> metadata = {});

  std::size_t regime_count() const { return regimes_.size(); }
  const std::vector<RegimeTriplet>& regimes() const { return regimes_; }
  const RegimeTriplet& regime(std::size_t i) const { return regimes_.at(i); }
  const HazardMatrix& hazards() const { return hazards_; }
  const std::optional<Descriptor>& hazard(std::size_t i, std::size_t j) const;
  const std::string& measure_label() const { return label_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  /// gamma_i(t), the total switching rate out of regime i.
  double total_hazard(std::size_t i, double t) const;
  /// Integral of gamma_i over [0, t].
  double cumulative_hazard(std::size_t i, double t) const;
  /// Breakpoints of every hazard leaving regime i.
  std::vector<double> hazard_breakpoints(std::size_t i) const;

 private:
  std::vector<RegimeTriplet> regimes_;
  HazardMatrix hazards_;
  std::string label_;
  std::map<std::string, std::string> metadata_;
};

class MeasureChangeSpec {
 public:
  explicit MeasureChangeSpec(std::vector<ChangeTriplet> regimes);
  /// c* = h* = sigma* = 0 in every regime.
  static MeasureChangeSpec identity(std::size_t regime_count);

  std::size_t regime_count() const { return regimes_.size(); }
  const std::vector<ChangeTriplet>& regimes() const { return regimes_; }
  const ChangeTriplet& regime(std::size_t i) const { return regimes_.at(i); }

 private:
  std::vector<ChangeTriplet> regimes_;
};

/// Two-regime (or d-regime) model with constant coefficients and constant
/// switching intensities; each regime jumps to the next one cyclically when
/// d > 2.
ModelSpec make_constant_model(const std::vector<double>& lambda, const std::vector<double>& c,
                              const std::vector<double>& h, const std::vector<double>& sigma,
                              std::string label = "P");

/// Evaluation points used by the grid checks: multiples of step in
/// (0, horizon], every positive breakpoint of the listed descriptors that
/// lies in the horizon, and t = 0 when all of them are finite there.
std::vector<double> check_points(const std::vector<const Descriptor*>& fns, double horizon,
                                 double step);

struct CheckOptions {
  double tolerance = kDefaultTolerance;
  /// Lower bound on gamma^Q on the horizon.
  double intensity_floor = kDefaultTolerance;
  /// Step of the evaluation grid; <= 0 picks horizon / 2048.
  double step = 0.0;
};

ValidationReport validate_model(const ModelSpec& spec, double horizon);

/// Checks h* > -1, gamma^P h* + c* = 0 and gamma^Q >= floor on the horizon.
ValidationReport validate_change(const ModelSpec& spec_p, const MeasureChangeSpec& change,
                                 double horizon, const CheckOptions& opts = {});

double survival(const ModelSpec& spec, std::size_t i, double t);
/// exp(-integral of gamma_i over [s, t]); throws std::invalid_argument if s > t.
double conditional_survival(const ModelSpec& spec, std::size_t i, double t, double s);
/// Density of the first switching time, gamma_i(t) * survival(t).
double holding_density(const ModelSpec& spec, std::size_t i, double t);
/// Sub-density of switching at t to regime j: gamma_ij(t) * survival_i(t).
double transition_density(const ModelSpec& spec, std::size_t i, std::size_t j, double t);

struct MartingaleCheck {
  bool holds = false;
  double max_residual = 0.0;
  std::vector<double> regime_residual;  // sup_t |gamma_i h_i + c_i|
};

MartingaleCheck check_martingale_condition(const ModelSpec& spec, double horizon,
                                           double tol = kDefaultTolerance, double step = 0.0);

/// Q-dynamics of X: drift c + sigma sigma*, same h and sigma, hazards
/// gamma^Q_ij = (1 + h*_i) gamma^P_ij. The split of gamma^Q_i over targets
/// keeps the P proportions. Throws InvalidMeasureChange.
ModelSpec apply_girsanov(const ModelSpec& spec_p, const MeasureChangeSpec& change,
                         const Tabulation& tab, const CheckOptions& opts = {});

/// Descriptor of gamma_i as a single function.
Descriptor total_hazard_descriptor(const ModelSpec& spec, std::size_t i, const Tabulation& tab);

/// The change with c* = gamma^P - gamma^Q, h* = gamma^Q / gamma^P - 1 and the
/// given sigma*. Throws InaccessibleMeasure where gamma^P = 0 < gamma^Q.
MeasureChangeSpec measure_change_from_intensities(const ModelSpec& spec_p,
                                                  const std::vector<Descriptor>& gamma_q,
                                                  const std::vector<Descriptor>& sigma_star,
                                                  const Tabulation& tab);

}  // namespace rsjd
