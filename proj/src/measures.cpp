#include "rsjd/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsjd/csv.hpp"

namespace rsjd {

namespace {

std::vector<const Descriptor*> regime_functions(const ModelSpec& spec, std::size_t i) {
  const auto& r = spec.regime(i);
  std::vector<const Descriptor*> fns{&r.c, &r.h, &r.sigma};
  for (const auto& g : spec.hazards()[i]) {
    if (g) fns.push_back(&*g);
  }
  return fns;
}

}  // namespace

std::vector<double> martingale_measure_residual(const ModelSpec& spec_p,
                                                const MeasureChangeSpec& change, double horizon,
                                                double step) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (change.regime_count() != spec_p.regime_count()) {
    throw std::invalid_argument("measure change does not match the model's regime count");
  }
  if (step <= 0.0) step = horizon / 2048.0;
  std::vector<double> out;
  for (std::size_t i = 0; i < spec_p.regime_count(); ++i) {
    const auto& r = spec_p.regime(i);
    const auto& ch = change.regime(i);
    auto fns = regime_functions(spec_p, i);
    fns.push_back(&ch.h_star);
    fns.push_back(&ch.sigma_star);
    double worst = 0.0;
    for (double t : check_points(fns, horizon, step)) {
      const double gamma_q = (1.0 + ch.h_star(t)) * spec_p.total_hazard(i, t);
      const double res = r.c(t) + r.sigma(t) * ch.sigma_star(t) + gamma_q * r.h(t);
      worst = std::max(worst, std::abs(res));
    }
    out.push_back(worst);
  }
  return out;
}

EsscherResult esscher_transform(const ModelSpec& spec_p, const Tabulation& tab) {
  const std::size_t d = spec_p.regime_count();
  std::vector<bool> diffusive(d);
  bool any_zero = false;
  for (std::size_t i = 0; i < d; ++i) {
    diffusive[i] = spec_p.regime(i).sigma.min_on(tab.horizon) > 0.0;
    any_zero = any_zero || !diffusive[i];
  }
  if (any_zero) {
    std::string msg = "Esscher transform needs sigma > 0 in every regime:";
    for (std::size_t i = 0; i < d; ++i) {
      msg += " regime " + std::to_string(i) + (diffusive[i] ? " esscher;" : " jump-telegraph;");
    }
    msg += " use the jump-telegraph measure for sigma = 0";
    throw std::domain_error(msg);
  }

  EsscherParams params;
  std::vector<ChangeTriplet> triplets;
  for (std::size_t i = 0; i < d; ++i) {
    const auto& r = spec_p.regime(i);
    const Descriptor gamma = total_hazard_descriptor(spec_p, i, tab);
    const Descriptor drift = add(r.c, multiply(gamma, r.h, tab), tab);
    const Descriptor theta =
        combine(drift, r.sigma, [](double num, double s) { return -num / (s * s); }, tab);
    params.theta.push_back(theta);
    triplets.push_back({Descriptor::constant(0.0), Descriptor::constant(0.0),
                        multiply(theta, r.sigma, tab)});
  }
  return {std::move(params), MeasureChangeSpec(std::move(triplets))};
}

TelegraphMeasure jump_telegraph_unique_measure(const ModelSpec& spec_p, const Tabulation& tab,
                                               double tol) {
  const std::size_t d = spec_p.regime_count();
  for (std::size_t i = 0; i < d; ++i) {
    if (spec_p.regime(i).sigma.max_on(tab.horizon) != 0.0) {
      throw std::domain_error("regime " + std::to_string(i) +
                              " has sigma != 0; the jump-telegraph measure needs sigma = 0");
    }
  }
  const double step = tab.step > 0.0 ? tab.step : tab.horizon / 2048.0;
  std::vector<Descriptor> gamma_q;
  for (std::size_t i = 0; i < d; ++i) {
    const auto& r = spec_p.regime(i);
    for (double t : check_points({&r.c, &r.h}, tab.horizon, step)) {
      const double h = r.h(t);
      const double c = r.c(t);
      if (std::abs(h) <= tol) {
        NoMeasure none{NoMeasure::Reason::ZeroJump, i, t, ""};
        none.message = "regime " + std::to_string(i) + ": h = 0 at t=" + format_double(t) +
                       "; no martingale measure or infinitely many";
        return none;
      }
      if (!(c / h < 0.0)) {
        NoMeasure none{NoMeasure::Reason::SignCondition, i, t, ""};
        none.message = "regime " + std::to_string(i) + ": c/h = " + format_double(c / h) +
                       " at t=" + format_double(t) +
                       " is not negative; the martingale measure does not exist";
        return none;
      }
    }
    gamma_q.push_back(combine(r.c, r.h, [](double c, double h) { return -c / h; }, tab));
  }
  std::vector<Descriptor> zero(d, Descriptor::constant(0.0));
  return measure_change_from_intensities(spec_p, gamma_q, zero, tab);
}

}  // namespace rsjd
