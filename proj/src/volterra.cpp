#include "rsjd/volterra.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>

#include "rsjd/csv.hpp"

namespace rsjd {

namespace {

using Matrix = std::vector<std::vector<double>>;

void append(std::vector<double>& to, const std::vector<double>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

// Running integral of f from `from` to every grid node (0 before `from`).
std::vector<double> cumulative(const std::function<double(double)>& f,
                               const std::vector<double>& grid, const std::vector<double>& breaks,
                               double from = 0.0) {
  std::vector<double> out(grid.size(), 0.0);
  double acc = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double a = std::max(grid[k - 1], from);
    const double b = grid[k];
    if (b > a) acc += integrate(f, a, b, breaks);
    out[k] = acc;
  }
  return out;
}

// Product-trapezoid cell moments of a kernel: alpha weights the left end of
// the cell [a, b] in the variable u, beta the right end.
void cell_moments(const std::function<double(double)>& k, double a, double b, double lo,
                  double delta, const std::vector<double>& breaks, double& alpha, double& beta) {
  alpha = integrate([&](double u) { return k(u) * (lo + delta - u) / delta; }, a, b, breaks);
  beta = integrate([&](double u) { return k(u) * (u - lo) / delta; }, a, b, breaks);
}

// Solves y_i(t) = a_i(t) + sum_j int_0^t y_j(t-u) k_ij(u) du on the grid with
// k_ij = gamma_ij exp(-Gamma_i) taken from spec.
Matrix renewal_solve(const ModelSpec& spec, const std::vector<double>& grid, const Matrix& forcing) {
  const std::size_t d = spec.regime_count();
  const std::size_t n = grid.size() - 1;
  const double delta = grid[1] - grid[0];

  // w[i][j][q] multiplies y_j at node k - q (q < k); the last cell adds
  // end[i][j][k-1] times y_j at node 0.
  std::vector<std::vector<std::vector<double>>> w(d, std::vector<std::vector<double>>(d));
  std::vector<std::vector<std::vector<double>>> end(d, std::vector<std::vector<double>>(d));
  for (std::size_t i = 0; i < d; ++i) {
    const auto breaks = spec.hazard_breakpoints(i);
    for (std::size_t j = 0; j < d; ++j) {
      const auto& g = spec.hazard(i, j);
      if (!g) continue;
      auto kernel = [&, i](double u) { return (*g)(u) * std::exp(-spec.cumulative_hazard(i, u)); };
      std::vector<double> alpha(n), beta(n);
      for (std::size_t m = 0; m < n; ++m) {
        cell_moments(kernel, grid[m], grid[m + 1], grid[m], delta, breaks, alpha[m], beta[m]);
      }
      auto& wij = w[i][j];
      wij.assign(n, 0.0);
      wij[0] = alpha[0];
      for (std::size_t q = 1; q < n; ++q) wij[q] = alpha[q] + beta[q - 1];
      end[i][j] = std::move(beta);
    }
  }

  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                                      static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (!w[i][j].empty()) system(i, j) -= w[i][j][0];
    }
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);

  Matrix y(d, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < d; ++i) y[i][0] = forcing[i][0];
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(d));
  for (std::size_t k = 1; k <= n; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      double r = forcing[i][k];
      for (std::size_t j = 0; j < d; ++j) {
        const auto& wij = w[i][j];
        if (wij.empty()) continue;
        const auto& yj = y[j];
        double s = end[i][j][k - 1] * yj[0];
        for (std::size_t q = 1; q < k; ++q) s += wij[q] * yj[k - q];
        r += s;
      }
      rhs(static_cast<Eigen::Index>(i)) = r;
    }
    const Eigen::VectorXd next = lu.solve(rhs);
    for (std::size_t i = 0; i < d; ++i) y[i][k] = next(static_cast<Eigen::Index>(i));
  }
  return y;
}

std::vector<double> drift_jump_breaks(const ModelSpec& spec, std::size_t i) {
  auto breaks = spec.hazard_breakpoints(i);
  append(breaks, spec.regime(i).c.interior_breakpoints());
  append(breaks, spec.regime(i).h.interior_breakpoints());
  return breaks;
}

}  // namespace

double GridFunctionSet::at(std::size_t i, double t) const {
  const auto& v = values.at(i);
  if (t <= grid.front()) return v.front();
  if (t >= grid.back()) return v.back();
  const double delta = step();
  auto k = static_cast<std::size_t>((t - grid.front()) / delta);
  k = std::min(k, grid.size() - 2);
  const double w = (t - grid[k]) / (grid[k + 1] - grid[k]);
  return (1.0 - w) * v[k] + w * v[k + 1];
}

void GridFunctionSet::write_csv(std::ostream& os) const {
  os << 't';
  for (std::size_t i = 0; i < values.size(); ++i) os << ",value_regime" << i + 1;
  os << '\n';
  for (std::size_t k = 0; k < grid.size(); ++k) {
    os << format_double(grid[k]);
    for (const auto& v : values) os << ',' << format_double(v[k]);
    os << '\n';
  }
}

std::vector<double> solver_grid(double horizon, double step) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("horizon must be positive and finite");
  }
  if (step <= 0.0) step = horizon / 2048.0;
  const auto n = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  std::vector<double> grid(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    grid[k] = horizon * static_cast<double>(k) / static_cast<double>(n);
  }
  return grid;
}

GridFunctionSet forcing_mu(const ModelSpec& spec, double horizon, double step) {
  GridFunctionSet out{solver_grid(horizon, step), {}, "a"};
  for (std::size_t i = 0; i < spec.regime_count(); ++i) {
    const auto& r = spec.regime(i);
    auto integrand = [&, i](double u) {
      return (r.c(u) + r.h(u) * spec.total_hazard(i, u)) * std::exp(-spec.cumulative_hazard(i, u));
    };
    out.values.push_back(cumulative(integrand, out.grid, drift_jump_breaks(spec, i)));
  }
  return out;
}

GridFunctionSet solve_mu(const ModelSpec& spec, double horizon, double step) {
  const GridFunctionSet a = forcing_mu(spec, horizon, step);
  return {a.grid, renewal_solve(spec, a.grid, a.values), "mu"};
}

GridFunctionSet solve_mu_conditional(const ModelSpec& spec, const GridFunctionSet& mu, double s) {
  const auto& grid = mu.grid;
  const double horizon = grid.back();
  if (!(s >= 0.0) || !(s < horizon)) {
    throw std::invalid_argument("conditioning time must lie in [0, horizon)");
  }
  if (mu.regime_count() != spec.regime_count()) {
    throw std::invalid_argument("mu does not match the model's regime count");
  }
  const std::size_t d = spec.regime_count();
  const std::size_t n = grid.size() - 1;
  const double delta = mu.step();
  const auto m0 = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), s) -
                                           grid.begin());

  GridFunctionSet out{grid, Matrix(d, std::vector<double>(n + 1, 0.0)), "mu_conditional"};
  for (std::size_t i = 0; i < d; ++i) {
    const auto& r = spec.regime(i);
    const double gamma_s = spec.cumulative_hazard(i, s);
    auto cond_survival = [&, i](double u) {
      return std::exp(-(spec.cumulative_hazard(i, u) - gamma_s));
    };
    const auto breaks = drift_jump_breaks(spec, i);
    const auto forcing = cumulative(
        [&, i](double u) { return (r.c(u) + r.h(u) * spec.total_hazard(i, u)) * cond_survival(u); },
        grid, breaks, s);
    const double l_s = r.c.integral(s);

    // Per-target cell moments in u over [s, horizon].
    std::vector<std::vector<double>> alpha(d), beta(d);
    std::vector<double> part_left(d, 0.0), part_right(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      const auto& g = spec.hazard(i, j);
      if (!g) continue;
      auto kernel = [&](double u) { return (*g)(u) * cond_survival(u); };
      alpha[j].assign(n, 0.0);
      beta[j].assign(n, 0.0);
      for (std::size_t m = m0; m < n; ++m) {
        cell_moments(kernel, grid[m], grid[m + 1], grid[m], delta, breaks, alpha[j][m], beta[j][m]);
      }
      if (m0 > 0 && grid[m0] > s) {
        // Partial cell [s, u_m0] inside [u_{m0-1}, u_m0].
        cell_moments(kernel, s, grid[m0], grid[m0 - 1], delta, breaks, part_left[j],
                     part_right[j]);
      }
    }

    for (std::size_t k = 0; k <= n; ++k) {
      if (grid[k] <= s) {
        out.values[i][k] = r.c.integral(grid[k]);
        continue;
      }
      double v = l_s + forcing[k];
      for (std::size_t j = 0; j < d; ++j) {
        if (alpha[j].empty()) continue;
        const auto& yj = mu.values[j];
        double acc = 0.0;
        for (std::size_t m = m0; m < k; ++m) acc += alpha[j][m] * yj[k - m] + beta[j][m] * yj[k - m - 1];
        if (m0 > 0 && grid[m0] > s) {
          acc += part_left[j] * yj[k - m0 + 1] + part_right[j] * yj[k - m0];
        }
        v += acc;
      }
      out.values[i][k] = v;
    }
  }
  return out;
}

GridFunctionSet solve_mu_conditional(const ModelSpec& spec, double s, double horizon,
                                     double step) {
  return solve_mu_conditional(spec, solve_mu(spec, horizon, step), s);
}

double entropy_rate(const ModelSpec& spec_p, const MeasureChangeSpec& change, std::size_t i,
                    double u) {
  const auto& ch = change.regime(i);
  const double gamma_p = spec_p.total_hazard(i, u);
  const double hs = ch.h_star(u);
  const double ss = ch.sigma_star(u);
  double jump = 0.0;
  if (gamma_p > 0.0) {
    // gamma^P - gamma^Q + gamma^Q ln(gamma^Q / gamma^P) with gamma^Q = (1 + h*) gamma^P.
    const double xlogx = hs > -1.0 ? (1.0 + hs) * std::log1p(hs) : 0.0;
    jump = gamma_p * (xlogx - hs);
  }
  return std::max(0.0, jump + 0.5 * ss * ss);
}

namespace {

void check_accessible(const ModelSpec& spec_p, const MeasureChangeSpec& change, double horizon,
                      const CheckOptions& opts) {
  const double step = opts.step > 0.0 ? opts.step : horizon / 2048.0;
  for (std::size_t i = 0; i < spec_p.regime_count(); ++i) {
    std::vector<const Descriptor*> fns{&change.regime(i).c_star};
    for (const auto& g : spec_p.hazards()[i]) {
      if (g) fns.push_back(&*g);
    }
    for (double t : check_points(fns, horizon, step)) {
      const double gamma_q = spec_p.total_hazard(i, t) - change.regime(i).c_star(t);
      if (spec_p.total_hazard(i, t) <= 0.0 && gamma_q > opts.tolerance) {
        throw InaccessibleMeasure("regime " + std::to_string(i) +
                                  ": gamma^P vanishes at t=" + format_double(t) +
                                  " where gamma^Q=" + format_double(gamma_q) + " > 0");
      }
    }
  }
}

struct EntropySetup {
  std::vector<double> grid;
  ModelSpec q;
  Matrix forcing;
};

EntropySetup entropy_setup(const ModelSpec& spec_p, const MeasureChangeSpec& change,
                           double horizon, double step, const CheckOptions& opts) {
  if (change.regime_count() != spec_p.regime_count()) {
    throw std::invalid_argument("measure change does not match the model's regime count");
  }
  auto grid = solver_grid(horizon, step);
  check_accessible(spec_p, change, horizon, opts);
  const Tabulation tab{horizon, grid[1] - grid[0]};
  ModelSpec q = apply_girsanov(spec_p, change, tab, opts);
  Matrix forcing;
  for (std::size_t i = 0; i < spec_p.regime_count(); ++i) {
    auto breaks = spec_p.hazard_breakpoints(i);
    append(breaks, q.hazard_breakpoints(i));
    append(breaks, change.regime(i).h_star.interior_breakpoints());
    append(breaks, change.regime(i).sigma_star.interior_breakpoints());
    forcing.push_back(cumulative(
        [&, i](double u) {
          return entropy_rate(spec_p, change, i, u) * std::exp(-q.cumulative_hazard(i, u));
        },
        grid, breaks));
  }
  return {std::move(grid), std::move(q), std::move(forcing)};
}

}  // namespace

GridFunctionSet entropy_forcing(const ModelSpec& spec_p, const MeasureChangeSpec& change,
                                double horizon, double step, const CheckOptions& opts) {
  auto setup = entropy_setup(spec_p, change, horizon, step, opts);
  return {std::move(setup.grid), std::move(setup.forcing), "a_entropy"};
}

GridFunctionSet solve_entropy(const ModelSpec& spec_p, const MeasureChangeSpec& change,
                              double horizon, double step, const CheckOptions& opts) {
  const auto setup = entropy_setup(spec_p, change, horizon, step, opts);
  return {setup.grid, renewal_solve(setup.q, setup.grid, setup.forcing), "H"};
}

EntropyCoefficients entropy_coefficients(double b1, double b2, double lambda1_star,
                                         double lambda2_star) {
  if (!(b1 >= 0.0) || !(b2 >= 0.0)) throw std::invalid_argument("entropy rates must be >= 0");
  if (!(lambda1_star > 0.0) || !(lambda2_star > 0.0)) {
    throw std::invalid_argument("intensities must be positive");
  }
  const double l = lambda1_star + lambda2_star;
  EntropyCoefficients e;
  e.b1 = b1;
  e.b2 = b2;
  e.lambda1_star = lambda1_star;
  e.lambda2_star = lambda2_star;
  e.B = (lambda2_star * b1 + lambda1_star * b2) / l;
  e.A1 = lambda1_star * (b1 - b2) / (l * l);
  e.A2 = lambda2_star * (b2 - b1) / (l * l);
  return e;
}

ClosedFormEntropy closed_form_entropy(double b1, double b2, double lambda1_star,
                                      double lambda2_star, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
  const auto e = entropy_coefficients(b1, b2, lambda1_star, lambda2_star);
  const double decay = -std::expm1(-(lambda1_star + lambda2_star) * t);
  return {e.B * t + e.A1 * decay, e.B * t + e.A2 * decay, e};
}

}  // namespace rsjd
