#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "rsjd/model.hpp"

namespace rsjd {

/// d functions sampled on a common uniform grid 0, step, ..., horizon.
struct GridFunctionSet {
  std::vector<double> grid;
  std::vector<std::vector<double>> values;  // values[i][k] at grid[k]
  std::string label;

  std::size_t regime_count() const { return values.size(); }
  std::size_t size() const { return grid.size(); }
  double step() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
  double horizon() const { return grid.back(); }
  /// Linear interpolation of function i at t within [0, horizon].
  double at(std::size_t i, double t) const;
  /// CSV with columns t,value_regime1,...,value_regime<d>.
  void write_csv(std::ostream& os) const;
};

/// Uniform solver grid; the step is rounded down so it divides the horizon.
/// step <= 0 picks horizon / 2048.
std::vector<double> solver_grid(double horizon, double step);

/// a_i(t), the integral of c_i F_i + h_i f_i over [0, t].
GridFunctionSet forcing_mu(const ModelSpec& spec, double horizon, double step = 0.0);

/// mu_i(t) = E[X(t) | starting in regime i], from the renewal system
/// mu_i(t) = a_i(t) + sum_j int_0^t mu_j(t-u) f_ij(u) du, by product
/// trapezoidal time stepping (second order in the step).
GridFunctionSet solve_mu(const ModelSpec& spec, double horizon, double step = 0.0);

/// mu_i(t|s), the expectation given no switch up to s. Values for t <= s are
/// l_i(t). The mu argument must come from solve_mu on the same spec; its grid
/// is reused.
GridFunctionSet solve_mu_conditional(const ModelSpec& spec, const GridFunctionSet& mu, double s);
GridFunctionSet solve_mu_conditional(const ModelSpec& spec, double s, double horizon,
                                     double step = 0.0);

/// Entropy rate b_i(u) of a change at elapsed time u.
double entropy_rate(const ModelSpec& spec_p, const MeasureChangeSpec& change, std::size_t i,
                    double u);

/// a_i(t) = int_0^t b_i(u) F^Q_i(u) du. Throws InaccessibleMeasure if
/// gamma^P vanishes where the change asks for a positive gamma^Q, and
/// InvalidMeasureChange if the change fails validation.
GridFunctionSet entropy_forcing(const ModelSpec& spec_p, const MeasureChangeSpec& change,
                                double horizon, double step = 0.0, const CheckOptions& opts = {});

/// Relative entropy H_i(t) of Q with respect to P, starting in regime i;
/// the renewal system is driven by the Q-kernels.
GridFunctionSet solve_entropy(const ModelSpec& spec_p, const MeasureChangeSpec& change,
                              double horizon, double step = 0.0, const CheckOptions& opts = {});

struct EntropyCoefficients {
  double b1 = 0.0;
  double b2 = 0.0;
  double A1 = 0.0;
  double A2 = 0.0;
  double B = 0.0;
  double lambda1_star = 0.0;
  double lambda2_star = 0.0;
};

/// Throws std::invalid_argument unless b_i >= 0 and lambda_i* > 0.
EntropyCoefficients entropy_coefficients(double b1, double b2, double lambda1_star,
                                         double lambda2_star);

struct ClosedFormEntropy {
  double H1 = 0.0;
  double H2 = 0.0;
  EntropyCoefficients coefficients;
};

/// Two-state constant case: H_i(t) = B t + A_i (1 - exp(-(lambda1* + lambda2*) t)).
ClosedFormEntropy closed_form_entropy(double b1, double b2, double lambda1_star,
                                      double lambda2_star, double t);

}  // namespace rsjd
