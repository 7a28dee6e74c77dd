#include "rsjd/memm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "rsjd/csv.hpp"

namespace rsjd {

void MemmProblem::validate() const {
  for (std::size_t i = 0; i < 2; ++i) {
    if (!std::isfinite(c[i]) || !std::isfinite(h[i])) {
      throw std::invalid_argument("c and h must be finite");
    }
    if (!(lambda[i] > 0.0) || !std::isfinite(lambda[i])) {
      throw std::invalid_argument("lambda must be positive");
    }
    if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i])) {
      throw std::invalid_argument("sigma must be positive; use the jump-telegraph measure for sigma = 0");
    }
  }
}

double MemmProblem::alpha(std::size_t i) const {
  if (h[i] == 0.0) return std::numeric_limits<double>::infinity();
  return -c[i] / h[i];
}

MemmProblem figure_one_problem() { return {{1.0, 1.0}, {-1.0, 3.0}, {1.0, -0.1}, {1.0, 1.0}}; }

MemmProblem symmetric_problem() { return {{1.0, 1.0}, {1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}}; }

double memm_b(const MemmProblem& p, std::size_t i, double x) {
  const double l = p.lambda[i];
  const double drift = p.c[i] + x * p.h[i];
  return std::max(0.0, l - x + x * std::log(x / l) + drift * drift / (2.0 * p.sigma[i] * p.sigma[i]));
}

double memm_db(const MemmProblem& p, std::size_t i, double x) {
  return std::log(x / p.lambda[i]) + p.h[i] * (p.c[i] + x * p.h[i]) / (p.sigma[i] * p.sigma[i]);
}

double memm_d2b(const MemmProblem& p, std::size_t i, double x) { return 1.0 / x + p.C2(i); }

double memm_sigma_star(const MemmProblem& p, std::size_t i, double x) {
  return -(p.c[i] + x * p.h[i]) / p.sigma[i];
}

std::string to_string(MemmKind kind) {
  switch (kind) {
    case MemmKind::ShortTerm: return "short_term";
    case MemmKind::LongTerm: return "long_term";
    case MemmKind::Horizon: return "horizon";
  }
  return "unknown";
}

MemmSolution make_solution(const MemmProblem& p, double lambda1_star, double lambda2_star,
                           MemmKind kind) {
  MemmSolution s;
  s.kind = kind;
  s.lambda_star = {lambda1_star, lambda2_star};
  s.sigma_star = {memm_sigma_star(p, 0, lambda1_star), memm_sigma_star(p, 1, lambda2_star)};
  s.coefficients = entropy_coefficients(memm_b(p, 0, lambda1_star), memm_b(p, 1, lambda2_star),
                                        lambda1_star, lambda2_star);
  return s;
}

BisectionResult bisect(const std::function<double(double)>& f, double lo, double hi, double tol,
                       int max_iter) {
  double flo = f(lo);
  if (flo == 0.0) return {lo, 0.0, 0, true};
  double fhi = f(hi);
  if (fhi == 0.0) return {hi, 0.0, 0, true};
  if ((flo < 0.0) == (fhi < 0.0)) throw std::invalid_argument("bisection needs a sign change");
  int it = 0;
  while (it < max_iter) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    ++it;
    const double fm = f(mid);
    if (fm == 0.0 || std::abs(fm) <= tol) return {mid, fm, it, true};
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  const bool left = std::abs(flo) <= std::abs(fhi);
  const double fx = left ? flo : fhi;
  return {left ? lo : hi, fx, it, std::abs(fx) <= tol};
}

namespace {

// Root of an increasing function on (0, inf) that tends to -inf at 0 and to
// +inf at infinity, bracketed geometrically from x0.
BisectionResult positive_root(const std::function<double(double)>& f, double x0, double tol) {
  const double f0 = f(x0);
  if (f0 == 0.0) return {x0, 0.0, 0, true};
  double lo = x0, hi = x0;
  if (f0 < 0.0) {
    hi = 2.0 * x0;
    while (f(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) throw std::runtime_error("root bracket expansion overflowed");
    }
  } else {
    lo = 0.5 * x0;
    while (f(lo) > 0.0) {
      hi = lo;
      lo *= 0.5;
      if (!(lo > 0.0)) throw std::runtime_error("root bracket expansion underflowed");
    }
  }
  return bisect(f, lo, hi, tol);
}

}  // namespace

MemmSolution solve_short_term(const MemmProblem& p, double tol) {
  p.validate();
  std::array<double, 2> x{};
  bool ok = true;
  for (std::size_t i = 0; i < 2; ++i) {
    if (p.h[i] == 0.0) {
      x[i] = p.lambda[i];
      continue;
    }
    const auto r = positive_root([&](double v) { return memm_db(p, i, v); }, p.lambda[i], tol);
    x[i] = r.x;
    ok = ok && r.converged;
  }
  auto s = make_solution(p, x[0], x[1], MemmKind::ShortTerm);
  s.converged = ok;
  if (!ok) s.diagnostic = "bisection stopped before |b'| <= tol";
  return s;
}

std::array<double, 2> long_term_residuals(const MemmProblem& p, double lambda1_star,
                                          double lambda2_star) {
  const double l = lambda1_star + lambda2_star;
  const double b1 = memm_b(p, 0, lambda1_star);
  const double b2 = memm_b(p, 1, lambda2_star);
  return {l * memm_db(p, 0, lambda1_star) + b2 - b1, l * memm_db(p, 1, lambda2_star) + b1 - b2};
}

bool Hessian2::positive_semidefinite(double tol) const {
  return b11 >= -tol && b22 >= -tol && b11 * b22 - b12 * b12 >= -tol;
}

Hessian2 long_term_hessian(const MemmProblem& p, double lambda1_star, double lambda2_star) {
  const double l = lambda1_star + lambda2_star;
  const auto phi = long_term_residuals(p, lambda1_star, lambda2_star);
  const double l3 = l * l * l;
  Hessian2 hs;
  hs.b11 = lambda2_star * memm_d2b(p, 0, lambda1_star) / l - 2.0 * lambda2_star * phi[0] / l3;
  hs.b22 = lambda1_star * memm_d2b(p, 1, lambda2_star) / l - 2.0 * lambda1_star * phi[1] / l3;
  hs.b12 = (lambda1_star * phi[0] + lambda2_star * phi[1]) / l3;
  return hs;
}

MemmSolution solve_long_term(const MemmProblem& p, double tol) {
  p.validate();
  const auto short_term = solve_short_term(p, tol);
  const double start1 = short_term.lambda_star[0];

  auto phi = [&](double l2) {
    return positive_root([&](double l1) { return long_term_residuals(p, l1, l2)[0]; }, start1, tol)
        .x;
  };
  auto g = [&](double l2) { return memm_db(p, 0, phi(l2)) + memm_db(p, 1, l2); };

  const double x0 = short_term.lambda_star[1];
  const double g0 = g(x0);
  double root = x0;
  if (g0 != 0.0) {
    // Expand on both sides of x0 until g changes sign.
    double near_up = x0, near_down = x0;
    bool found = false;
    double lo = x0, hi = x0;
    for (int k = 0; k < 200 && !found; ++k) {
      const double up = near_up * 2.0;
      if (std::isfinite(up) && (g(up) < 0.0) != (g0 < 0.0)) {
        lo = near_up;
        hi = up;
        found = true;
        break;
      }
      near_up = up;
      const double down = near_down * 0.5;
      if (down > 0.0 && (g(down) < 0.0) != (g0 < 0.0)) {
        lo = down;
        hi = near_down;
        found = true;
        break;
      }
      near_down = down;
    }
    if (!found) throw std::runtime_error("long-term MEMM: no sign change of b1' + b2' found");
    root = bisect(g, lo, hi, tol).x;
  }
  const double l1 = phi(root);
  auto s = make_solution(p, l1, root, MemmKind::LongTerm);
  const auto res = long_term_residuals(p, l1, root);
  const double worst = std::max(std::abs(res[0]), std::abs(res[1]));
  s.converged = worst <= std::max(tol, 1e-10);
  if (!s.converged) s.diagnostic = "Phi residual " + format_double(worst) + " above tolerance";
  return s;
}

double horizon_entropy(const MemmProblem& p, double t, std::size_t initial_state,
                       double lambda1_star, double lambda2_star) {
  const auto e = closed_form_entropy(memm_b(p, 0, lambda1_star), memm_b(p, 1, lambda2_star),
                                     lambda1_star, lambda2_star, t);
  return initial_state == 0 ? e.H1 : e.H2;
}

std::array<double, 2> horizon_entropy_gradient(const MemmProblem& p, double t,
                                               std::size_t initial_state, double lambda1_star,
                                               double lambda2_star) {
  const double l1 = lambda1_star, l2 = lambda2_star;
  const double l = l1 + l2;
  const double l_2 = l * l, l_3 = l_2 * l;
  const double b1 = memm_b(p, 0, l1), b2 = memm_b(p, 1, l2);
  const double d1 = memm_db(p, 0, l1), d2 = memm_db(p, 1, l2);
  const auto phi = long_term_residuals(p, l1, l2);
  const double dB1 = l2 * phi[0] / l_2;
  const double dB2 = l1 * phi[1] / l_2;
  const double decay = std::exp(-l * t);
  const double e = -std::expm1(-l * t);
  const double de = t * decay;  // same for both intensities

  double a, da1, da2;
  if (initial_state == 0) {
    a = l1 * (b1 - b2) / l_2;
    da1 = (b1 - b2) / l_2 + l1 * d1 / l_2 - 2.0 * l1 * (b1 - b2) / l_3;
    da2 = -l1 * d2 / l_2 - 2.0 * l1 * (b1 - b2) / l_3;
  } else {
    a = l2 * (b2 - b1) / l_2;
    da2 = (b2 - b1) / l_2 + l2 * d2 / l_2 - 2.0 * l2 * (b2 - b1) / l_3;
    da1 = -l2 * d1 / l_2 - 2.0 * l2 * (b2 - b1) / l_3;
  }
  return {t * dB1 + da1 * e + a * de, t * dB2 + da2 * e + a * de};
}

namespace {

struct NewtonRun {
  std::array<double, 2> lambda{};
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double last_step = 0.0;
};

NewtonRun newton_log(const MemmProblem& p, double t, std::size_t state, std::array<double, 2> x,
                     double tol) {
  auto value = [&](const std::array<double, 2>& y) {
    return horizon_entropy(p, t, state, std::exp(y[0]), std::exp(y[1]));
  };
  auto grad = [&](const std::array<double, 2>& y) {
    const double l1 = std::exp(y[0]), l2 = std::exp(y[1]);
    const auto g = horizon_entropy_gradient(p, t, state, l1, l2);
    return std::array<double, 2>{l1 * g[0], l2 * g[1]};
  };

  NewtonRun run;
  double f = value(x);
  constexpr int kMaxIter = 200;
  constexpr double kFd = 1e-5;
  for (int it = 0; it < kMaxIter; ++it) {
    run.iterations = it + 1;
    const auto g = grad(x);
    if (g[0] == 0.0 && g[1] == 0.0) {
      run.converged = true;
      break;
    }
    // Hessian by central differences of the analytic gradient.
    double hm[2][2];
    for (int k = 0; k < 2; ++k) {
      auto xp = x, xm = x;
      xp[k] += kFd;
      xm[k] -= kFd;
      const auto gp = grad(xp), gm = grad(xm);
      hm[0][k] = (gp[0] - gm[0]) / (2.0 * kFd);
      hm[1][k] = (gp[1] - gm[1]) / (2.0 * kFd);
    }
    const double a = hm[0][0], c = hm[1][1], b = 0.5 * (hm[0][1] + hm[1][0]);
    // Eigen-decomposition of the symmetric 2x2; negative curvature is
    // flipped so the step always descends.
    const double mean = 0.5 * (a + c);
    const double rad = std::hypot(0.5 * (a - c), b);
    double ev[2] = {mean + rad, mean - rad};
    double vx[2] = {1.0, 0.0}, vy[2] = {0.0, 1.0};
    if (b != 0.0) {
      for (int k = 0; k < 2; ++k) {
        const double nx = ev[k] - c, ny = b;
        const double nn = std::hypot(nx, ny);
        vx[k] = nx / nn;
        vy[k] = ny / nn;
      }
    } else {
      ev[0] = a;
      ev[1] = c;
    }
    const double floor = 1e-12 * std::max(std::abs(ev[0]), std::abs(ev[1])) + 1e-300;
    std::array<double, 2> d{0.0, 0.0};
    for (int k = 0; k < 2; ++k) {
      const double proj = vx[k] * g[0] + vy[k] * g[1];
      const double curv = std::max(std::abs(ev[k]), floor);
      d[0] -= proj / curv * vx[k];
      d[1] -= proj / curv * vy[k];
    }
    const double dn = std::max(std::abs(d[0]), std::abs(d[1]));
    if (dn > 2.0) {
      d[0] *= 2.0 / dn;
      d[1] *= 2.0 / dn;
    }
    run.last_step = std::min(dn, 2.0);
    if (dn <= tol) {
      run.converged = true;
      break;
    }
    const double slope = g[0] * d[0] + g[1] * d[1];
    double step = 1.0;
    bool accepted = false;
    bool stalled = false;
    while (step > 1e-12) {
      const std::array<double, 2> xn{x[0] + step * d[0], x[1] + step * d[1]};
      const double fn = value(xn);
      if (fn <= f + 1e-4 * step * slope) {
        // A decrease at rounding level means the iterate is as good as the
        // arithmetic allows.
        stalled = f - fn <= 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f);
        x = xn;
        f = fn;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No decrease the arithmetic can resolve: accept when the Newton step
      // is already small.
      run.converged = dn <= 1e-6;
      break;
    }
    if (stalled && dn <= 1e-6) {
      run.converged = true;
      break;
    }
  }
  run.lambda = {std::exp(x[0]), std::exp(x[1])};
  run.value = f;
  return run;
}

}  // namespace

MemmSolution solve_horizon(const MemmProblem& p, double t, std::size_t initial_state, double tol) {
  p.validate();
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("horizon t must be positive");
  if (initial_state > 1) throw std::invalid_argument("initial state must be 0 or 1");
  const auto st = solve_short_term(p);
  const auto lt = solve_long_term(p);
  const std::array<std::array<double, 2>, 2> starts{
      std::array<double, 2>{std::log(st.lambda_star[0]), std::log(st.lambda_star[1])},
      std::array<double, 2>{std::log(lt.lambda_star[0]), std::log(lt.lambda_star[1])}};

  NewtonRun best;
  bool have = false;
  for (const auto& x0 : starts) {
    const auto run = newton_log(p, t, initial_state, x0, tol);
    const bool better = !have || (run.converged && !best.converged) ||
                        (run.converged == best.converged && run.value < best.value);
    if (better) {
      best = run;
      have = true;
    }
  }
  auto s = make_solution(p, best.lambda[0], best.lambda[1], MemmKind::Horizon);
  s.horizon = t;
  s.initial_state = initial_state;
  s.converged = best.converged;
  if (!best.converged) {
    s.diagnostic = "Newton did not converge after " + std::to_string(best.iterations) +
                   " iterations; best iterate returned (last step " +
                   format_double(best.last_step) + ")";
  }
  return s;
}

LevySolution solve_levy(double c, double h, double sigma, double lambda, double tol) {
  if (h == 0.0 || !std::isfinite(h)) throw std::invalid_argument("levy case needs h != 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("levy case needs sigma > 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("levy case needs lambda > 0");
  auto f = [&](double beta) { return c + beta * sigma * sigma + lambda * h * std::exp(beta * h); };
  double beta = 0.0;
  const double f0 = f(0.0);
  if (f0 != 0.0) {
    double lo = 0.0, hi = 0.0;
    if (f0 < 0.0) {
      hi = 1.0;
      while (f(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
      }
    } else {
      lo = -1.0;
      while (f(lo) > 0.0) {
        hi = lo;
        lo *= 2.0;
      }
    }
    beta = bisect(f, lo, hi, tol).x;
  }
  const double e = std::exp(beta * h);
  const double drift = c / h + lambda * e;
  LevySolution out;
  out.beta_star = beta;
  out.lambda_star = lambda * e;
  out.entropy_slope =
      lambda * (1.0 - e + beta * h * e) + h * h / (2.0 * sigma * sigma) * drift * drift;
  return out;
}

ModelSpec to_model_spec(const MemmProblem& p) {
  return make_constant_model({p.lambda[0], p.lambda[1]}, {p.c[0], p.c[1]}, {p.h[0], p.h[1]},
                             {p.sigma[0], p.sigma[1]});
}

MeasureChangeSpec to_measure_change(const MemmProblem& p, const MemmSolution& s) {
  std::vector<ChangeTriplet> regimes;
  for (std::size_t i = 0; i < 2; ++i) {
    regimes.push_back({Descriptor::constant(p.lambda[i] - s.lambda_star[i]),
                       Descriptor::constant(s.lambda_star[i] / p.lambda[i] - 1.0),
                       Descriptor::constant(s.sigma_star[i])});
  }
  return MeasureChangeSpec(std::move(regimes));
}

std::vector<SweepRow> horizon_sweep(const MemmProblem& p, const std::vector<double>& times,
                                    std::size_t initial_state, double tol) {
  std::vector<SweepRow> rows;
  for (double t : times) {
    const auto s1 = solve_horizon(p, t, 0, tol);
    const auto s2 = solve_horizon(p, t, 1, tol);
    const auto& chosen = initial_state == 0 ? s1 : s2;
    SweepRow row;
    row.t = t;
    row.lambda1_star = chosen.lambda_star[0];
    row.lambda2_star = chosen.lambda_star[1];
    row.H1_over_t = horizon_entropy(p, t, 0, s1.lambda_star[0], s1.lambda_star[1]) / t;
    row.H2_over_t = horizon_entropy(p, t, 1, s2.lambda_star[0], s2.lambda_star[1]) / t;
    row.converged = s1.converged && s2.converged;
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> log_spaced(double t_min, double t_max, std::size_t n) {
  if (!(t_min > 0.0) || !(t_max > t_min) || n < 2) {
    throw std::invalid_argument("log_spaced needs 0 < t_min < t_max and n >= 2");
  }
  std::vector<double> out(n);
  const double a = std::log(t_min), b = std::log(t_max);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
  }
  out.front() = t_min;
  out.back() = t_max;
  return out;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "t,lambda1_star,lambda2_star,H1_over_t,H2_over_t\n";
  for (const auto& r : rows) {
    os << format_double(r.t) << ',' << format_double(r.lambda1_star) << ','
       << format_double(r.lambda2_star) << ',' << format_double(r.H1_over_t) << ','
       << format_double(r.H2_over_t) << '\n';
  }
}

}  // namespace rsjd
