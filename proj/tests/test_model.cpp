#include <doctest.h>

#include <cmath>

#include "rsjd/model.hpp"

using namespace rsjd;

namespace {

bool has_message(const ValidationReport& r, const std::string& text) {
  for (const auto& v : r.violations) {
    if (v.message.find(text) != std::string::npos) return true;
  }
  return false;
}

ModelSpec with_hazard(const Descriptor& g12) {
  HazardMatrix hz(2, std::vector<std::optional<Descriptor>>(2));
  hz[0][1] = g12;
  hz[1][0] = Descriptor::constant(1.0);
  const RegimeTriplet r{Descriptor::constant(0.0), Descriptor::constant(0.0), Descriptor::constant(1.0)};
  return ModelSpec({r, r}, hz);
}

}  // namespace

TEST_CASE("validate_model examples") {
  CHECK(validate_model(make_constant_model({1, 1}, {0, 0}, {0, 0}, {1, 1}), 10.0).ok());

  const auto bad_power = validate_model(with_hazard(Descriptor::power_law(1.0, -1.5)), 10.0);
  CHECK(has_message(bad_power, "hazard not integrable at 0"));
  CHECK(bad_power.violations.front().location.find("0->1") != std::string::npos);

  const auto dead = validate_model(with_hazard(Descriptor::piecewise({0.0, 1.0}, {1.0, 0.0})), 10.0);
  CHECK(has_message(dead, "non-exploding condition fails"));

  CHECK_THROWS_AS(validate_model(make_constant_model({1, 1}, {0, 0}, {0, 0}, {1, 1}), 0.0),
                  std::invalid_argument);
}

TEST_CASE("structural errors are distinct from violations") {
  HazardMatrix hz(2, std::vector<std::optional<Descriptor>>(2));
  hz[0][0] = Descriptor::constant(1.0);
  const RegimeTriplet r{};
  CHECK_THROWS_AS(ModelSpec({r, r}, hz), SpecError);
  CHECK_THROWS_AS(ModelSpec({r}, HazardMatrix(1, std::vector<std::optional<Descriptor>>(1))),
                  SpecError);
}

TEST_CASE("survival examples") {
  const auto m = make_constant_model({1, 1}, {0, 0}, {0, 0}, {1, 1});
  CHECK(survival(m, 0, 0.0) == 1.0);
  CHECK(survival(m, 0, std::log(2.0)) == doctest::Approx(0.5));
  const auto pw = with_hazard(Descriptor::piecewise({0.0, 1.0}, {2.0, 1.0}));
  CHECK(survival(pw, 0, 1.5) == doctest::Approx(std::exp(-2.5)));
  // Quadrature oracle for the step function.
  const double q = integrate([&](double u) { return pw.total_hazard(0, u); }, 0.0, 1.5, {1.0});
  CHECK(std::log(survival(pw, 0, 1.5)) == doctest::Approx(-q).epsilon(1e-13));
}

TEST_CASE("conditional survival") {
  const auto m = make_constant_model({1, 1}, {0, 0}, {0, 0}, {1, 1});
  CHECK(conditional_survival(m, 0, 1.3, 1.3) == 1.0);
  CHECK(conditional_survival(m, 0, 1.3, 0.0) == doctest::Approx(survival(m, 0, 1.3)));
  CHECK(conditional_survival(m, 0, 2.0, 1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(conditional_survival(m, 0, 1.0, 2.0), std::invalid_argument);
  const auto pw = with_hazard(Descriptor::power_law(1.5, 0.5));
  CHECK(conditional_survival(pw, 0, 2.0, 0.7) ==
        doctest::Approx(survival(pw, 0, 2.0) / survival(pw, 0, 0.7)));
}

TEST_CASE("survival properties for every descriptor kind") {
  for (const auto& g : {Descriptor::constant(1.3), Descriptor::piecewise({0, 0.4, 2}, {0.5, 3, 1}),
                        Descriptor::power_law(2.0, 0.7), Descriptor::power_law(0.5, -0.5)}) {
    const auto m = with_hazard(g);
    double prev = 1.0;
    CHECK(survival(m, 0, 0.0) == 1.0);
    for (double t = 0.05; t < 4.0; t += 0.05) {
      const double s = survival(m, 0, t);
      CHECK(s <= prev);
      prev = s;
    }
  }
}

TEST_CASE("survival factorises over targets") {
  HazardMatrix hz(3, std::vector<std::optional<Descriptor>>(3));
  hz[0][1] = Descriptor::constant(1.0);
  hz[0][2] = Descriptor::piecewise({0.0, 0.5}, {3.0, 0.5});
  hz[1][0] = Descriptor::constant(1.0);
  hz[2][0] = Descriptor::constant(1.0);
  const RegimeTriplet r{};
  const ModelSpec m({r, r, r}, hz);
  for (double t : {0.1, 0.5, 1.7}) {
    const double prod = std::exp(-hz[0][1]->integral(t)) * std::exp(-hz[0][2]->integral(t));
    CHECK(std::abs(survival(m, 0, t) - prod) <= 1e-10);
  }
  const auto c = make_constant_model({1, 2, 3}, {0, 0, 0}, {0, 0, 0}, {1, 1, 1});
  CHECK(survival(c, 1, 0.7) == std::exp(-2.0 * 0.7));
}

TEST_CASE("check_martingale_condition examples") {
  const auto ok = check_martingale_condition(make_constant_model({1, 1}, {-1, -1}, {1, 1}, {1, 1}), 5.0);
  CHECK(ok.holds);
  CHECK(ok.max_residual == 0.0);
  const auto bad = check_martingale_condition(make_constant_model({1, 1}, {1, 1}, {1, 1}, {1, 1}), 5.0);
  CHECK_FALSE(bad.holds);
  CHECK(bad.max_residual == doctest::Approx(2.0));
  CHECK(bad.regime_residual.size() == 2);
  CHECK(check_martingale_condition(make_constant_model({1, 1}, {0, 0}, {0, 0}, {1, 1}), 5.0).holds);
}

TEST_CASE("apply_girsanov examples") {
  const Tabulation tab{5.0, 5.0 / 1024};
  const auto P = make_constant_model({1, 1}, {3, 3}, {-0.1, -0.1}, {1, 1});
  const auto Q0 = apply_girsanov(P, MeasureChangeSpec::identity(2), tab);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(Q0.regime(i).c == P.regime(i).c);
    CHECK(Q0.regime(i).h == P.regime(i).h);
    CHECK(Q0.regime(i).sigma == P.regime(i).sigma);
    CHECK(*Q0.hazard(i, 1 - i) == *P.hazard(i, 1 - i));
  }
  CHECK(Q0.measure_label() == "Q");
  CHECK(Q0.metadata().at("transition_split") == "proportional");

  const MeasureChangeSpec ch({{Descriptor::constant(-0.5), Descriptor::constant(0.5), Descriptor::constant(-2.8668)},
                              {Descriptor::constant(-0.5), Descriptor::constant(0.5), Descriptor::constant(0.0)}});
  const auto Q = apply_girsanov(P, ch, tab);
  CHECK((*Q.hazard(0, 1))(0.3) == doctest::Approx(1.5));
  CHECK(Q.regime(0).c(0.0) == doctest::Approx(3.0 - 2.8668));
  CHECK(Q.regime(0).c(0.0) == doctest::Approx(0.1332));

  const MeasureChangeSpec bad({{Descriptor::constant(1.2), Descriptor::constant(-1.2), Descriptor::constant(0.0)},
                               {Descriptor::constant(0.0), Descriptor::constant(0.0), Descriptor::constant(0.0)}});
  CHECK_THROWS_AS(apply_girsanov(P, bad, tab), InvalidMeasureChange);
  try {
    apply_girsanov(P, bad, tab);
  } catch (const InvalidMeasureChange& e) {
    CHECK(has_message(e.report(), "h* must exceed -1"));
  }
}

TEST_CASE("apply_girsanov splits gamma^Q proportionally") {
  HazardMatrix hz(3, std::vector<std::optional<Descriptor>>(3));
  hz[0][1] = Descriptor::constant(1.0);
  hz[0][2] = Descriptor::constant(3.0);
  hz[1][0] = Descriptor::constant(1.0);
  hz[2][0] = Descriptor::constant(1.0);
  const RegimeTriplet r{};
  const ModelSpec P({r, r, r}, hz);
  const MeasureChangeSpec ch({{Descriptor::constant(-2.0), Descriptor::constant(0.5), Descriptor{}},
                              {}, {}});
  const auto Q = apply_girsanov(P, ch, Tabulation{});
  CHECK((*Q.hazard(0, 1))(0.0) == doctest::Approx(1.5));
  CHECK((*Q.hazard(0, 2))(0.0) == doctest::Approx(4.5));
}

TEST_CASE("measure_change_from_intensities examples") {
  const Tabulation tab{5.0, 5.0 / 1024};
  const auto P = make_constant_model({1, 1}, {0, 0}, {0, 0}, {1, 1});
  const std::vector<Descriptor> zero(2, Descriptor::constant(0.0));
  const auto same = measure_change_from_intensities(P, {Descriptor::constant(1), Descriptor::constant(1)}, zero, tab);
  CHECK(same.regime(0).c_star(0.0) == 0.0);
  CHECK(same.regime(0).h_star(0.0) == 0.0);
  const auto up = measure_change_from_intensities(P, {Descriptor::constant(2), Descriptor::constant(0.5)}, zero, tab);
  CHECK(up.regime(0).c_star(0.0) == doctest::Approx(-1.0));
  CHECK(up.regime(0).h_star(0.0) == doctest::Approx(1.0));
  CHECK(up.regime(1).c_star(0.0) == doctest::Approx(0.5));
  CHECK(up.regime(1).h_star(0.0) == doctest::Approx(-0.5));

  HazardMatrix hz(2, std::vector<std::optional<Descriptor>>(2));
  hz[0][1] = Descriptor::piecewise({0.0, 1.0}, {0.0, 1.0});
  hz[1][0] = Descriptor::constant(1.0);
  const RegimeTriplet r{};
  const ModelSpec dead({r, r}, hz);
  CHECK_THROWS_AS(measure_change_from_intensities(dead, {Descriptor::constant(1), Descriptor::constant(1)}, zero, tab),
                  InaccessibleMeasure);
}

TEST_CASE("girsanov round trip recovers c* and h*") {
  const Tabulation tab{4.0, 4.0 / 1024};
  HazardMatrix hz(2, std::vector<std::optional<Descriptor>>(2));
  hz[0][1] = Descriptor::piecewise({0.0, 1.0}, {2.0, 1.0});
  hz[1][0] = Descriptor::constant(1.5);
  const ModelSpec P({{Descriptor::constant(0.5), Descriptor::constant(0.3), Descriptor::constant(1.0)},
                     {Descriptor::constant(-0.2), Descriptor::constant(-0.4), Descriptor::constant(0.5)}},
                    hz);
  const MeasureChangeSpec ch({{Descriptor::piecewise({0.0, 1.0}, {-1.0, -0.5}), Descriptor::constant(0.5),
                               Descriptor::constant(0.4)},
                              {Descriptor::constant(0.45), Descriptor::constant(-0.3), Descriptor::constant(-0.2)}});
  const auto Q = apply_girsanov(P, ch, tab);
  std::vector<Descriptor> gq, ss;
  for (std::size_t i = 0; i < 2; ++i) {
    gq.push_back(total_hazard_descriptor(Q, i, tab));
    ss.push_back(ch.regime(i).sigma_star);
  }
  const auto back = measure_change_from_intensities(P, gq, ss, tab);
  for (std::size_t i = 0; i < 2; ++i) {
    for (double t : {0.0, 0.5, 0.99, 1.0, 2.0, 3.9}) {
      CHECK(std::abs(back.regime(i).c_star(t) - ch.regime(i).c_star(t)) <= 1e-12);
      CHECK(std::abs(back.regime(i).h_star(t) - ch.regime(i).h_star(t)) <= 1e-12);
    }
  }
}

TEST_CASE("martingale condition under Q matches c + sigma sigma* + gamma^Q h = 0") {
  const Tabulation tab{3.0, 3.0 / 1024};
  const auto P = make_constant_model({1, 1}, {-1, 3}, {1, -0.1}, {1, 1});
  // gamma^Q = (1, 2); sigma* chosen to zero the drift in regime 1 only.
  const double lq2 = 2.0;
  auto make = [&](double s2) {
    return MeasureChangeSpec({{Descriptor::constant(0.0), Descriptor::constant(0.0), Descriptor::constant(0.0)},
                              {Descriptor::constant(1.0 - lq2), Descriptor::constant(lq2 - 1.0),
                               Descriptor::constant(s2)}});
  };
  const double s_mart = -(3.0 + lq2 * -0.1) / 1.0;
  CHECK(check_martingale_condition(apply_girsanov(P, make(s_mart), tab), 3.0).holds);
  CHECK_FALSE(check_martingale_condition(apply_girsanov(P, make(s_mart + 0.1), tab), 3.0).holds);
}
