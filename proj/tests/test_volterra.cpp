#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rsjd/memm.hpp"
#include "rsjd/simulate.hpp"
#include "rsjd/volterra.hpp"

using namespace rsjd;

namespace {

double sup_abs(const GridFunctionSet& g) {
  double m = 0.0;
  for (const auto& v : g.values)
    for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

MeasureChangeSpec constant_change(const std::vector<double>& lambda, const std::vector<double>& lambda_q,
                                  const std::vector<double>& sigma_star) {
  std::vector<ChangeTriplet> r;
  for (std::size_t i = 0; i < lambda.size(); ++i)
    r.push_back({Descriptor::constant(lambda[i] - lambda_q[i]), Descriptor::constant(lambda_q[i] / lambda[i] - 1.0),
                 Descriptor::constant(sigma_star[i])});
  return MeasureChangeSpec(r);
}

}  // namespace

TEST_CASE("solver grid") {
  const auto g = solver_grid(2.0, 0.3);
  CHECK(g.size() == 8);
  CHECK(g.back() == 2.0);
  CHECK(solver_grid(1.0, 0.0).size() == 2049);
}

TEST_CASE("forcing examples") {
  CHECK(sup_abs(forcing_mu(make_constant_model({1, 1}, {-1, -1}, {1, 1}, {0, 0}), 3.0)) <= 1e-12);

  const auto a = forcing_mu(make_constant_model({1, 1}, {1, 1}, {0, 0}, {0, 0}), 3.0, 0.01);
  const auto b = forcing_mu(make_constant_model({2, 2}, {0, 0}, {1, 1}, {0, 0}), 3.0, 0.01);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a.grid[k];
    CHECK(a.values[0][k] == doctest::Approx(1.0 - std::exp(-t)).epsilon(1e-10));
    CHECK(b.values[1][k] == doctest::Approx(1.0 - std::exp(-2 * t)).epsilon(1e-10));
  }
}

TEST_CASE("solve_mu examples") {
  CHECK(sup_abs(solve_mu(make_constant_model({1, 1}, {-1, -1}, {1, 1}, {0, 0}), 5.0)) <= 1e-10);

  const auto drift = solve_mu(make_constant_model({1, 1}, {1, 1}, {0, 0}, {0, 0}), 4.0, 0.01);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < drift.size(); ++k)
      CHECK(drift.values[i][k] == doctest::Approx(drift.grid[k]).epsilon(1e-9));
}

TEST_CASE("solve_mu matches Monte Carlo on the two-state example") {
  const auto P = to_model_spec(figure_one_problem());
  const auto mu = solve_mu(P, 2.0);
  McConfig cfg;
  cfg.n_paths = 100000;
  cfg.seed = 31;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto est = mc_expectation(P, i, Functional::TerminalX, {0.5, 1.0, 2.0}, cfg);
    for (const auto& e : est) CHECK(std::abs(mu.at(i, e.t) - e.estimate) <= 3 * e.std_error);
  }
}

TEST_CASE("non-Markov renewal system: drift-only model has mu = t") {
  HazardMatrix hz(2, std::vector<std::optional<Descriptor>>(2));
  hz[0][1] = Descriptor::power_law(1.5, 0.5);
  hz[1][0] = Descriptor::piecewise({0.0, 0.7}, {0.3, 2.0});
  const RegimeTriplet r{Descriptor::constant(1.0), Descriptor::constant(0.0), Descriptor::constant(0.0)};
  const ModelSpec m({r, r}, hz);
  const auto mu = solve_mu(m, 3.0, 3.0 / 1024);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < mu.size(); k += 64) CHECK(mu.values[i][k] == doctest::Approx(mu.grid[k]).epsilon(1e-5));
}

TEST_CASE("non-Markov solve_mu matches Monte Carlo") {
  HazardMatrix hz(2, std::vector<std::optional<Descriptor>>(2));
  hz[0][1] = Descriptor::power_law(1.5, 0.5);
  hz[1][0] = Descriptor::piecewise({0.0, 0.7}, {0.3, 2.0});
  const ModelSpec m({{Descriptor::constant(0.4), Descriptor::constant(0.8), Descriptor::constant(0.5)},
                     {Descriptor::constant(-0.2), Descriptor::power_law(-0.5, 1.0), Descriptor::constant(1.0)}},
                    hz);
  const auto mu = solve_mu(m, 2.0);
  McConfig cfg;
  cfg.n_paths = 100000;
  cfg.seed = 41;
  for (std::size_t i = 0; i < 2; ++i)
    for (const auto& e : mc_expectation(m, i, Functional::TerminalX, {1.0, 2.0}, cfg))
      CHECK(std::abs(mu.at(i, e.t) - e.estimate) <= 3 * e.std_error);
}

TEST_CASE("conditional expectation") {
  const auto P = make_constant_model({1.0, 2.0}, {0.5, -1.0}, {0.4, 0.3}, {1.0, 1.0});
  const auto mu = solve_mu(P, 3.0);
  const auto c0 = solve_mu_conditional(P, mu, 0.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < mu.size(); ++k) CHECK(c0.values[i][k] == doctest::Approx(mu.values[i][k]).epsilon(1e-12));

  CHECK_THROWS_AS(solve_mu_conditional(P, mu, 3.0), std::invalid_argument);

  const auto mart = make_constant_model({1, 1}, {-1, -1}, {1, 1}, {0.5, 0.5});
  const double s = 0.8;
  const auto cm = solve_mu_conditional(mart, s, 3.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < cm.size(); ++k) {
      const double l = -std::min(cm.grid[k], s);  // l_i(t) = c min(t, s)
      CHECK(cm.values[i][k] == doctest::Approx(l).epsilon(1e-9));
    }

  // Filtered Monte Carlo: keep paths whose first switch happens after s.
  const double s2 = 0.5;
  const auto cond = solve_mu_conditional(P, mu, s2);
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<double> x1, x2;
    for (std::uint64_t p = 0; x1.size() < 60000 && p < 1000000; ++p) {
      CounterRng rng(77, p);
      const auto path = simulate_path_on(P, i, {0.0, s2, 1.0, 2.0}, rng);
      if (path.switch_count(s2) > 0) continue;
      x1.push_back(path.x(2));
      x2.push_back(path.x(3));
    }
    const auto e1 = summarize(1.0, x1), e2 = summarize(2.0, x2);
    CHECK(std::abs(cond.at(i, 1.0) - e1.estimate) <= 3 * e1.std_error);
    CHECK(std::abs(cond.at(i, 2.0) - e2.estimate) <= 3 * e2.std_error);
  }
}

TEST_CASE("entropy rate and forcing examples") {
  const auto P = make_constant_model({1, 1}, {0, 0}, {0.5, -0.5}, {1, 1});
  CHECK(sup_abs(entropy_forcing(P, MeasureChangeSpec::identity(2), 2.0)) == 0.0);
  CHECK(sup_abs(solve_entropy(P, MeasureChangeSpec::identity(2), 2.0)) <= 1e-15);

  const auto jump = constant_change({1, 1}, {2, 2}, {0, 0});
  const double b = 1.0 - 2.0 + 2.0 * std::log(2.0);
  CHECK(entropy_rate(P, jump, 0, 0.3) == doctest::Approx(b).epsilon(1e-14));
  const auto a = entropy_forcing(P, jump, 2.0, 0.01);
  for (std::size_t k = 0; k < a.size(); ++k)
    CHECK(a.values[0][k] == doctest::Approx(b * (1.0 - std::exp(-2.0 * a.grid[k])) / 2.0).epsilon(1e-10));

  const auto diff = constant_change({1, 1}, {1, 1}, {1, 1});
  CHECK(entropy_rate(P, diff, 1, 1.0) == doctest::Approx(0.5));
  const auto a2 = entropy_forcing(P, diff, 2.0, 0.01);
  for (std::size_t k = 0; k < a2.size(); ++k)
    CHECK(a2.values[1][k] == doctest::Approx(0.5 * (1.0 - std::exp(-a2.grid[k]))).epsilon(1e-10));
}

TEST_CASE("inaccessible measure") {
  HazardMatrix hz(2, std::vector<std::optional<Descriptor>>(2));
  hz[0][1] = Descriptor::piecewise({0.0, 1.0}, {0.0, 1.0});
  hz[1][0] = Descriptor::constant(1.0);
  const RegimeTriplet r{Descriptor::constant(0.0), Descriptor::constant(0.0), Descriptor::constant(0.0)};
  const ModelSpec P({r, r}, hz);
  const MeasureChangeSpec change({{Descriptor::piecewise({0.0, 1.0}, {-1.0, 0.0}), Descriptor::constant(0.0), Descriptor{}},
                                  {Descriptor::constant(0.0), Descriptor::constant(0.0), Descriptor{}}});
  CHECK_THROWS_AS(entropy_forcing(P, change, 2.0), InaccessibleMeasure);
}

TEST_CASE("closed-form entropy examples") {
  const auto eq = closed_form_entropy(0.7, 0.7, 1.3, 0.4, 2.0);
  CHECK(eq.coefficients.A1 == 0.0);
  CHECK(eq.coefficients.A2 == 0.0);
  CHECK(eq.H1 == doctest::Approx(1.4));
  CHECK(eq.H2 == doctest::Approx(1.4));

  const auto cf = closed_form_entropy(0.0, 4.159, 1.0, 1.332, 1.0);
  const double s = 2.332;
  CHECK(cf.coefficients.B == doctest::Approx(4.159 / s).epsilon(1e-14));
  CHECK(cf.coefficients.B == doctest::Approx(1.7835).epsilon(1e-4));
  CHECK(cf.coefficients.A1 == doctest::Approx(-4.159 / (s * s)).epsilon(1e-14));
  CHECK(cf.coefficients.A2 == doctest::Approx(1.332 * 4.159 / (s * s)).epsilon(1e-14));
  CHECK(cf.H1 == doctest::Approx(4.159 / s - 4.159 / (s * s) * (1.0 - std::exp(-s))).epsilon(1e-14));
  // B + A_i (l1 + l2) = b_i
  CHECK(cf.coefficients.B + cf.coefficients.A1 * s == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cf.coefficients.B + cf.coefficients.A2 * s == doctest::Approx(4.159));

  const auto zero = closed_form_entropy(0.3, 2.0, 1.0, 2.0, 0.0);
  CHECK(zero.H1 == 0.0);
  CHECK(zero.H2 == 0.0);
  CHECK_THROWS_AS(entropy_coefficients(-0.1, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(entropy_coefficients(0.1, 1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("solver reproduces closed form and converges at second order") {
  const auto p = figure_one_problem();
  const auto P = to_model_spec(p);
  const auto sol = solve_short_term(p);
  const auto change = to_measure_change(p, sol);
  const double b1 = entropy_rate(P, change, 0, 0.0), b2 = entropy_rate(P, change, 1, 0.0);
  CHECK(b1 == doctest::Approx(memm_b(p, 0, sol.lambda_star[0])).epsilon(1e-12));
  CHECK(b2 == doctest::Approx(memm_b(p, 1, sol.lambda_star[1])).epsilon(1e-12));

  auto err = [&](double step) {
    const auto H = solve_entropy(P, change, 4.0, step);
    double e = 0.0;
    for (std::size_t k = 0; k < H.size(); ++k) {
      const auto cf = closed_form_entropy(b1, b2, sol.lambda_star[0], sol.lambda_star[1], H.grid[k]);
      e = std::max({e, std::abs(H.values[0][k] - cf.H1), std::abs(H.values[1][k] - cf.H2)});
    }
    return e;
  };
  CHECK(err(0.0) <= 1e-5);
  const double e1 = err(0.1), e2 = err(0.05);
  CHECK(e1 / e2 >= 3.5);
}

TEST_CASE("entropy is nonnegative, nondecreasing and matches Monte Carlo under Q") {
  HazardMatrix hz(2, std::vector<std::optional<Descriptor>>(2));
  hz[0][1] = Descriptor::piecewise({0.0, 1.0}, {2.0, 1.0});
  hz[1][0] = Descriptor::constant(1.5);
  const ModelSpec P({{Descriptor::constant(0.5), Descriptor::constant(0.3), Descriptor::constant(1.0)},
                     {Descriptor::constant(-0.2), Descriptor::constant(-0.4), Descriptor::constant(0.5)}},
                    hz);
  const MeasureChangeSpec change({{Descriptor::piecewise({0.0, 1.0}, {-1.0, -0.5}), Descriptor::constant(0.5),
                                   Descriptor::constant(0.4)},
                                  {Descriptor::constant(0.45), Descriptor::constant(-0.3), Descriptor::constant(-0.2)}});
  const auto H = solve_entropy(P, change, 2.0);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(H.values[i][0] == 0.0);
    for (std::size_t k = 1; k < H.size(); ++k) {
      CHECK(H.values[i][k] >= 0.0);
      CHECK(H.values[i][k] >= H.values[i][k - 1] - 1e-14);
    }
  }
  const auto Q = apply_girsanov(P, change, Tabulation{2.0, 2.0 / 2048});
  McConfig cfg;
  cfg.n_paths = 100000;
  cfg.seed = 17;
  for (std::size_t i = 0; i < 2; ++i)
    for (const auto& e : mc_expectation(Q, i, Functional::TerminalEntropyIntegrand, {1.0, 2.0}, cfg, &change))
      CHECK(std::abs(H.at(i, e.t) - e.estimate) <= 3 * e.std_error);
}

TEST_CASE("short-time and long-time asymptotics") {
  const double b1 = 0.3, b2 = 2.0, l1 = 0.8, l2 = 1.7;
  for (double dt : {1e-2, 1e-3, 1e-4}) {
    const auto cf = closed_form_entropy(b1, b2, l1, l2, dt);
    CHECK(std::abs(cf.H1 / dt - b1) <= 2.0 * dt);
    CHECK(std::abs(cf.H2 / dt - b2) <= 2.0 * dt);
  }
  const auto far = closed_form_entropy(b1, b2, l1, l2, 1e4);
  CHECK(far.H1 / 1e4 == doctest::Approx(far.coefficients.B).epsilon(1e-3));
}

TEST_CASE("grid function csv") {
  GridFunctionSet g{{0.0, 0.5}, {{0.0, 1.0}, {0.0, 2.0}}, "mu"};
  std::ostringstream os;
  g.write_csv(os);
  CHECK(os.str() == "t,value_regime1,value_regime2\n0,0,0\n0.5,1,2\n");
  CHECK(g.at(1, 0.25) == doctest::Approx(1.0));
}
