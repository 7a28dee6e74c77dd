#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rsjd/model.hpp"
#include "rsjd/volterra.hpp"

namespace rsjd {

/// Two-state Markov model with constant coefficients, sigma_i > 0.
struct MemmProblem {
  std::array<double, 2> lambda{1.0, 1.0};
  std::array<double, 2> c{0.0, 0.0};
  std::array<double, 2> h{0.0, 0.0};
  std::array<double, 2> sigma{1.0, 1.0};

  /// Throws std::invalid_argument unless lambda_i > 0, sigma_i > 0 and all
  /// values are finite.
  void validate() const;
  double C2(std::size_t i) const { return h[i] * h[i] / (sigma[i] * sigma[i]); }
  /// -c_i / h_i (infinite when h_i = 0).
  double alpha(std::size_t i) const;
};

/// The model used for the entropy-per-time and argmin plots:
/// lambda = (1, 1), sigma = (1, 1), c = (-1, 3), h = (1, -0.1).
MemmProblem figure_one_problem();
/// Symmetric instance lambda = 1, sigma = 1, c = (1, -1), h = (1, -1).
MemmProblem symmetric_problem();

// Entropy rate of regime i as a function of the Q-intensity x, with
// sigma* = -(c + x h) / sigma substituted, and its derivatives.
double memm_b(const MemmProblem& p, std::size_t i, double x);
double memm_db(const MemmProblem& p, std::size_t i, double x);
double memm_d2b(const MemmProblem& p, std::size_t i, double x);
double memm_sigma_star(const MemmProblem& p, std::size_t i, double x);

enum class MemmKind { ShortTerm, LongTerm, Horizon };
std::string to_string(MemmKind kind);

struct MemmSolution {
  std::array<double, 2> lambda_star{};
  std::array<double, 2> sigma_star{};
  EntropyCoefficients coefficients;
  MemmKind kind = MemmKind::ShortTerm;
  double horizon = 0.0;           // Horizon kind only
  std::size_t initial_state = 0;  // Horizon kind only
  bool converged = true;
  std::string diagnostic;
};

/// Solution record for arbitrary intensities (sigma* and coefficients filled).
MemmSolution make_solution(const MemmProblem& p, double lambda1_star, double lambda2_star,
                           MemmKind kind);

struct BisectionResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Bisection for a sign change of f on [lo, hi]; stops at f = 0 exactly,
/// |f| <= tol, an interval that no longer shrinks, or max_iter steps.
BisectionResult bisect(const std::function<double(double)>& f, double lo, double hi,
                       double tol = 1e-12, int max_iter = 200);

/// Per-regime minimiser of b_i: the root of b_i' found by bisection.
MemmSolution solve_short_term(const MemmProblem& p, double tol = 1e-12);

/// (Phi_1, Phi_2): stationarity conditions of B(lambda1*, lambda2*).
std::array<double, 2> long_term_residuals(const MemmProblem& p, double lambda1_star,
                                          double lambda2_star);

struct Hessian2 {
  double b11 = 0.0;
  double b22 = 0.0;
  double b12 = 0.0;
  bool positive_semidefinite(double tol = 1e-12) const;
};

/// Second derivatives of B with respect to (lambda1*, lambda2*).
Hessian2 long_term_hessian(const MemmProblem& p, double lambda1_star, double lambda2_star);

/// Minimiser of B: nested bisection, inner Phi_1 = 0 in lambda1*, outer
/// b_1' + b_2' = 0 in lambda2*.
MemmSolution solve_long_term(const MemmProblem& p, double tol = 1e-12);

/// H_i(t; lambda1*, lambda2*) for initial state i (0 or 1).
double horizon_entropy(const MemmProblem& p, double t, std::size_t initial_state,
                       double lambda1_star, double lambda2_star);
/// Gradient of horizon_entropy in (lambda1*, lambda2*).
std::array<double, 2> horizon_entropy_gradient(const MemmProblem& p, double t,
                                               std::size_t initial_state, double lambda1_star,
                                               double lambda2_star);

/// Minimiser of H_i(t) over both intensities: damped Newton in log
/// intensities started from the short- and long-term solutions, keeping the
/// best. converged = false with a diagnostic if no start met the tolerance;
/// the best iterate is still returned.
MemmSolution solve_horizon(const MemmProblem& p, double t, std::size_t initial_state = 0,
                           double tol = 1e-10);

struct LevySolution {
  double beta_star = 0.0;
  double lambda_star = 0.0;
  double entropy_slope = 0.0;
};

/// Single-regime case: root beta* of c + beta sigma^2 + lambda h e^{beta h}.
/// Throws std::invalid_argument unless h != 0, sigma > 0 and lambda > 0.
LevySolution solve_levy(double c, double h, double sigma, double lambda, double tol = 1e-12);

/// Constant two-state ModelSpec of the problem (regimes 0 and 1).
ModelSpec to_model_spec(const MemmProblem& p);
/// Change with c* = lambda - lambda*, h* = lambda*/lambda - 1 and sigma*.
MeasureChangeSpec to_measure_change(const MemmProblem& p, const MemmSolution& s);

struct SweepRow {
  double t = 0.0;
  double lambda1_star = 0.0;
  double lambda2_star = 0.0;
  double H1_over_t = 0.0;
  double H2_over_t = 0.0;
  bool converged = true;
};

/// For every t: the argmin of H_{initial_state}(t), and min H_1 / t and
/// min H_2 / t, each minimised on its own.
std::vector<SweepRow> horizon_sweep(const MemmProblem& p, const std::vector<double>& times,
                                    std::size_t initial_state = 0, double tol = 1e-10);
/// n log-spaced times from t_min to t_max.
std::vector<double> log_spaced(double t_min, double t_max, std::size_t n);
/// CSV with columns t,lambda1_star,lambda2_star,H1_over_t,H2_over_t.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace rsjd
