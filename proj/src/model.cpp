#include "rsjd/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rsjd {

namespace {

std::string regime_field(std::size_t i, const char* field) {
  return "regimes[" + std::to_string(i) + "]." + field;
}

std::string hazard_field(std::size_t i, std::size_t j) {
  return "hazards[" + std::to_string(i) + "->" + std::to_string(j) + "]";
}

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

double effective_step(double horizon, double step) {
  return step > 0.0 ? step : horizon / 2048.0;
}

}  // namespace

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.location + ": " + v.message;
  }
  return out;
}

InvalidMeasureChange::InvalidMeasureChange(ValidationReport report)
    : std::invalid_argument("invalid measure change: " + report.summary()),
      report_(std::move(report)) {}

ModelSpec::ModelSpec(std::vector<RegimeTriplet> regimes, HazardMatrix hazards,
                     std::string measure_label, std::map<std::string, std::string> metadata)
    : regimes_(std::move(regimes)),
      hazards_(std::move(hazards)),
      label_(std::move(measure_label)),
      metadata_(std::move(metadata)) {
  const std::size_t d = regimes_.size();
  if (d < 2) throw SpecError("a model needs at least two regimes");
  if (hazards_.size() != d) throw SpecError("hazard matrix must have one row per regime");
  for (std::size_t i = 0; i < d; ++i) {
    if (hazards_[i].size() != d) throw SpecError("hazard matrix must be square");
    if (hazards_[i][i].has_value()) throw SpecError("hazard matrix diagonal must be empty");
  }
}

const std::optional<Descriptor>& ModelSpec::hazard(std::size_t i, std::size_t j) const {
  return hazards_.at(i).at(j);
}

double ModelSpec::total_hazard(std::size_t i, double t) const {
  double sum = 0.0;
  for (const auto& g : hazards_.at(i)) {
    if (g) sum += (*g)(t);
  }
  return sum;
}

double ModelSpec::cumulative_hazard(std::size_t i, double t) const {
  double sum = 0.0;
  for (const auto& g : hazards_.at(i)) {
    if (g) sum += g->integral(t);
  }
  return sum;
}

std::vector<double> ModelSpec::hazard_breakpoints(std::size_t i) const {
  std::vector<double> out;
  for (const auto& g : hazards_.at(i)) {
    if (!g) continue;
    const auto b = g->interior_breakpoints();
    out.insert(out.end(), b.begin(), b.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

MeasureChangeSpec::MeasureChangeSpec(std::vector<ChangeTriplet> regimes)
    : regimes_(std::move(regimes)) {
  if (regimes_.empty()) throw SpecError("a measure change needs at least one regime");
}

MeasureChangeSpec MeasureChangeSpec::identity(std::size_t regime_count) {
  return MeasureChangeSpec(std::vector<ChangeTriplet>(regime_count));
}

ModelSpec make_constant_model(const std::vector<double>& lambda, const std::vector<double>& c,
                              const std::vector<double>& h, const std::vector<double>& sigma,
                              std::string label) {
  const std::size_t d = lambda.size();
  if (c.size() != d || h.size() != d || sigma.size() != d) {
    throw SpecError("constant model parameter lists must have equal length");
  }
  std::vector<RegimeTriplet> regimes;
  HazardMatrix hazards(d, std::vector<std::optional<Descriptor>>(d));
  for (std::size_t i = 0; i < d; ++i) {
    regimes.push_back({Descriptor::constant(c[i]), Descriptor::constant(h[i]),
                       Descriptor::constant(sigma[i])});
    hazards[i][(i + 1) % d] = Descriptor::constant(lambda[i]);
  }
  return ModelSpec(std::move(regimes), std::move(hazards), std::move(label));
}

std::vector<double> check_points(const std::vector<const Descriptor*>& fns, double horizon,
                                 double step) {
  step = effective_step(horizon, step);
  const auto n = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  std::vector<double> pts;
  pts.reserve(n + 1);
  bool finite_at_zero = true;
  for (const auto* f : fns) {
    finite_at_zero = finite_at_zero && f->finite_at_zero();
    for (double b : f->interior_breakpoints()) {
      if (b <= horizon) pts.push_back(b);
    }
  }
  if (finite_at_zero) pts.push_back(0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    pts.push_back(std::min(horizon, static_cast<double>(k) * horizon / static_cast<double>(n)));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

ValidationReport validate_model(const ModelSpec& spec, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("validation horizon must be positive");
  ValidationReport report;
  auto add = [&](std::string loc, std::string msg) {
    report.violations.push_back({std::move(loc), std::move(msg)});
  };
  const std::size_t d = spec.regime_count();
  for (std::size_t i = 0; i < d; ++i) {
    std::size_t outgoing = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const auto& g = spec.hazard(i, j);
      if (!g) continue;
      ++outgoing;
      const auto loc = hazard_field(i, j);
      if (g->kind() == DescriptorKind::PowerLaw) {
        if (g->scale() < 0.0) add(loc, "hazard rate must be nonnegative");
        if (g->exponent() <= -1.0) {
          add(loc, "hazard not integrable at 0 (power-law exponent must exceed -1)");
          continue;
        }
      } else if (g->min_on(std::numeric_limits<double>::infinity()) < 0.0) {
        add(loc, "hazard rate must be nonnegative");
      }
      if (!g->integral_diverges()) {
        add(loc, "non-exploding condition fails: integral of the hazard is finite");
      }
    }
    if (outgoing == 0) {
      add("hazards[" + std::to_string(i) + "]",
          "regime has no outgoing transition; non-exploding condition fails");
    }
    const auto& r = spec.regime(i);
    if (r.c.kind() == DescriptorKind::PowerLaw && r.c.exponent() <= -1.0) {
      add(regime_field(i, "c"), "drift not locally integrable");
    }
    if (r.sigma.kind() == DescriptorKind::PowerLaw) {
      if (r.sigma.scale() < 0.0) add(regime_field(i, "sigma"), "sigma must be nonnegative");
      if (r.sigma.exponent() <= -0.5) {
        add(regime_field(i, "sigma"), "sigma not locally square integrable");
      }
    } else if (r.sigma.min_on(horizon) < 0.0) {
      add(regime_field(i, "sigma"), "sigma must be nonnegative");
    }
  }
  return report;
}

ValidationReport validate_change(const ModelSpec& spec_p, const MeasureChangeSpec& change,
                                 double horizon, const CheckOptions& opts) {
  if (!(horizon > 0.0)) throw std::invalid_argument("validation horizon must be positive");
  ValidationReport report;
  auto add = [&](std::string loc, std::string msg) {
    report.violations.push_back({std::move(loc), std::move(msg)});
  };
  const std::size_t d = spec_p.regime_count();
  if (change.regime_count() != d) {
    add("change", "regime count " + std::to_string(change.regime_count()) +
                      " does not match model regime count " + std::to_string(d));
    return report;
  }
  for (std::size_t i = 0; i < d; ++i) {
    const auto& ch = change.regime(i);
    const auto loc = "change." + regime_field(i, "");
    if (ch.h_star.min_on(horizon) <= -1.0) {
      add(loc + "h_star", "h* must exceed -1 (minimum " + fmt_double(ch.h_star.min_on(horizon)) +
                              ")");
    }
    if (ch.sigma_star.kind() == DescriptorKind::PowerLaw && ch.sigma_star.exponent() <= -0.5) {
      add(loc + "sigma_star", "sigma* not locally square integrable");
    }
    std::vector<const Descriptor*> fns{&ch.c_star, &ch.h_star};
    for (const auto& g : spec_p.hazards()[i]) {
      if (g) fns.push_back(&*g);
    }
    double worst_residual = 0.0;
    double worst_t = 0.0;
    double min_q = std::numeric_limits<double>::infinity();
    double min_q_t = 0.0;
    for (double t : check_points(fns, horizon, opts.step)) {
      const double gp = spec_p.total_hazard(i, t);
      const double hs = ch.h_star(t);
      const double residual = std::abs(gp * hs + ch.c_star(t));
      if (residual > worst_residual) {
        worst_residual = residual;
        worst_t = t;
      }
      const double gq = (1.0 + hs) * gp;
      if (gq < min_q) {
        min_q = gq;
        min_q_t = t;
      }
    }
    if (worst_residual > opts.tolerance) {
      add(loc + "c_star", "consistency gamma^P h* + c* = 0 fails: residual " +
                              fmt_double(worst_residual) + " at t=" + fmt_double(worst_t));
    }
    if (min_q < opts.intensity_floor) {
      add(loc + "h_star", "induced intensity gamma^Q = " + fmt_double(min_q) + " at t=" +
                              fmt_double(min_q_t) + " is below the floor " +
                              fmt_double(opts.intensity_floor));
    }
  }
  return report;
}

double survival(const ModelSpec& spec, std::size_t i, double t) {
  if (t < 0.0) throw std::invalid_argument("survival requires t >= 0");
  return std::exp(-spec.cumulative_hazard(i, t));
}

double conditional_survival(const ModelSpec& spec, std::size_t i, double t, double s) {
  if (s < 0.0 || s > t) throw std::invalid_argument("conditional survival requires 0 <= s <= t");
  double sum = 0.0;
  for (const auto& g : spec.hazards().at(i)) {
    if (g) sum += g->integral(s, t);
  }
  return std::exp(-sum);
}

double holding_density(const ModelSpec& spec, std::size_t i, double t) {
  return spec.total_hazard(i, t) * survival(spec, i, t);
}

double transition_density(const ModelSpec& spec, std::size_t i, std::size_t j, double t) {
  const auto& g = spec.hazard(i, j);
  return g ? (*g)(t) * survival(spec, i, t) : 0.0;
}

MartingaleCheck check_martingale_condition(const ModelSpec& spec, double horizon, double tol,
                                           double step) {
  MartingaleCheck out;
  const std::size_t d = spec.regime_count();
  out.regime_residual.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const auto& r = spec.regime(i);
    std::vector<const Descriptor*> fns{&r.c, &r.h};
    for (const auto& g : spec.hazards()[i]) {
      if (g) fns.push_back(&*g);
    }
    for (double t : check_points(fns, horizon, step)) {
      const double residual = std::abs(spec.total_hazard(i, t) * r.h(t) + r.c(t));
      out.regime_residual[i] = std::max(out.regime_residual[i], residual);
    }
    out.max_residual = std::max(out.max_residual, out.regime_residual[i]);
  }
  out.holds = out.max_residual <= tol;
  return out;
}

ModelSpec apply_girsanov(const ModelSpec& spec_p, const MeasureChangeSpec& change,
                         const Tabulation& tab, const CheckOptions& opts) {
  auto report = validate_change(spec_p, change, tab.horizon, opts);
  if (!report.ok()) throw InvalidMeasureChange(std::move(report));
  const std::size_t d = spec_p.regime_count();
  std::vector<RegimeTriplet> regimes;
  HazardMatrix hazards(d, std::vector<std::optional<Descriptor>>(d));
  for (std::size_t i = 0; i < d; ++i) {
    const auto& r = spec_p.regime(i);
    const auto& ch = change.regime(i);
    regimes.push_back({add(r.c, multiply(r.sigma, ch.sigma_star, tab), tab), r.h, r.sigma});
    const Descriptor factor = add(ch.h_star, Descriptor::constant(1.0), tab);
    for (std::size_t j = 0; j < d; ++j) {
      if (const auto& g = spec_p.hazard(i, j)) hazards[i][j] = multiply(*g, factor, tab);
    }
  }
  auto metadata = spec_p.metadata();
  metadata["transition_split"] = "proportional";
  metadata["derived_from"] = spec_p.measure_label();
  return ModelSpec(std::move(regimes), std::move(hazards), "Q", std::move(metadata));
}

Descriptor total_hazard_descriptor(const ModelSpec& spec, std::size_t i, const Tabulation& tab) {
  std::optional<Descriptor> sum;
  for (const auto& g : spec.hazards().at(i)) {
    if (!g) continue;
    sum = sum ? add(*sum, *g, tab) : *g;
  }
  return sum.value_or(Descriptor::constant(0.0));
}

MeasureChangeSpec measure_change_from_intensities(const ModelSpec& spec_p,
                                                  const std::vector<Descriptor>& gamma_q,
                                                  const std::vector<Descriptor>& sigma_star,
                                                  const Tabulation& tab) {
  const std::size_t d = spec_p.regime_count();
  if (gamma_q.size() != d || sigma_star.size() != d) {
    throw SpecError("intensity and sigma* lists must have one entry per regime");
  }
  std::vector<ChangeTriplet> out;
  for (std::size_t i = 0; i < d; ++i) {
    const Descriptor gp = total_hazard_descriptor(spec_p, i, tab);
    const Descriptor& gq = gamma_q[i];
    for (double t : check_points({&gp, &gq}, tab.horizon, tab.step)) {
      if (gp(t) == 0.0 && gq(t) > 0.0) {
        throw InaccessibleMeasure("regime " + std::to_string(i) + ": gamma^P vanishes at t=" +
                                  fmt_double(t) + " where gamma^Q > 0");
      }
    }
    Descriptor h_star;
    if (!gp.is_piecewise() && !gq.is_piecewise()) {
      h_star = add(Descriptor::power_law(gq.scale() / gp.scale(), gq.exponent() - gp.exponent()),
                   Descriptor::constant(-1.0), tab);
    } else {
      h_star = combine(
          gq, gp,
          [i](double q, double p) {
            if (p > 0.0) return q / p - 1.0;
            if (q > 0.0) {
              throw InaccessibleMeasure("regime " + std::to_string(i) +
                                        ": gamma^P vanishes where gamma^Q > 0");
            }
            return 0.0;
          },
          tab);
    }
    out.push_back({subtract(gp, gq, tab), std::move(h_star), sigma_star[i]});
  }
  return MeasureChangeSpec(std::move(out));
}

}  // namespace rsjd
