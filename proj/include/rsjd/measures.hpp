#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "rsjd/model.hpp"

namespace rsjd {

/// sup over the horizon grid of |c_i + sigma_i sigma*_i + gamma^Q_i h_i|, per
/// regime, with gamma^Q_i = (1 + h*_i) gamma^P_i. Zero iff Q is a martingale
/// measure for X.
std::vector<double> martingale_measure_residual(const ModelSpec& spec_p,
                                                const MeasureChangeSpec& change, double horizon,
                                                double step = 0.0);

struct EsscherParams {
  std::vector<Descriptor> theta;
};

struct EsscherResult {
  EsscherParams params;
  MeasureChangeSpec change;
};

/// theta_i = -(c_i + gamma_i h_i) / sigma_i^2 and the change c* = h* = 0,
/// sigma*_i = theta_i sigma_i. Throws std::domain_error if some sigma_i
/// vanishes on the horizon; the message lists, per regime, whether the
/// Esscher or the jump-telegraph rule applies.
EsscherResult esscher_transform(const ModelSpec& spec_p, const Tabulation& tab = {});

struct NoMeasure {
  enum class Reason {
    SignCondition,  // c_i / h_i < 0 fails somewhere
    ZeroJump,       // h_i = 0 somewhere: no measure or infinitely many
  };
  Reason reason = Reason::SignCondition;
  std::size_t regime = 0;
  double time = 0.0;
  std::string message;
};

using TelegraphMeasure = std::variant<MeasureChangeSpec, NoMeasure>;

/// Pure jump-telegraph model (sigma = 0): the unique martingale measure has
/// gamma^Q_i = -c_i / h_i, provided that is positive on the horizon.
/// Throws std::domain_error when some sigma_i is not identically 0.
TelegraphMeasure jump_telegraph_unique_measure(const ModelSpec& spec_p, const Tabulation& tab = {},
                                               double tol = kDefaultTolerance);

}  // namespace rsjd
