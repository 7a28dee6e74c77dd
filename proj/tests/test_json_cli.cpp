#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "rsjd/cli.hpp"
#include "rsjd/json_io.hpp"

using namespace rsjd;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rsjd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("rsjd_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write(const std::string& name, const Json& j) {
  const auto p = scratch() / name;
  std::ofstream(p) << j.dump();
  return p.string();
}

Json model_json() {
  return Json::parse(R"({
    "measure": "P",
    "regimes": [{"c": -1, "h": 1, "sigma": 1}, {"c": 3, "h": -0.1, "sigma": 1}],
    "hazards": [{"from": 0, "to": 1, "rate": 1}, {"from": 1, "to": 0, "rate": 1}]
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("descriptor and model JSON round trip") {
  for (const auto& d : {Descriptor::constant(1.5), Descriptor::piecewise({0.0, 1.0, 2.0}, {1.0, 0.25, 3.0}),
                        Descriptor::power_law(2.0, -0.5)}) {
    CHECK(descriptor_from_json(to_json(d)) == d);
  }
  CHECK(descriptor_from_json(Json(2.5)) == Descriptor::constant(2.5));
  CHECK_THROWS_AS(descriptor_from_json(Json::parse(R"({"kind": "spline"})")), ParseError);
  CHECK_THROWS_AS(descriptor_from_json(Json::parse(R"({"kind": "piecewise", "breakpoints": [0, 1], "values": [1]})")),
                  SpecError);

  const auto m = model_from_json(model_json());
  const auto back = model_from_json(to_json(m));
  CHECK(back.regime_count() == 2);
  CHECK(back.regime(1).c == m.regime(1).c);
  CHECK(*back.hazard(0, 1) == *m.hazard(0, 1));
  CHECK_FALSE(back.hazard(0, 0).has_value());

  CHECK_THROWS_AS(model_from_json(Json::parse(R"({"regimes": 3})")), ParseError);

  const auto c = change_from_json(Json::parse(R"({"regimes": [{"h_star": 0.5}, {"c_star": 1, "sigma_star": -2}]})"));
  CHECK(c.regime(0).h_star(0.0) == 0.5);
  CHECK(c.regime(0).c_star(0.0) == 0.0);
  CHECK(change_from_json(to_json(c)).regime(1).sigma_star(3.0) == -2.0);

  const auto p = problem_from_json(model_json());
  CHECK(p.c[1] == 3.0);
  CHECK(p.h[1] == -0.1);
  const auto p2 = problem_from_json(to_json(p));
  CHECK(p2.lambda == p.lambda);
  CHECK(p2.sigma == p.sigma);
}

TEST_CASE("result serialisation") {
  const auto s = solve_short_term(figure_one_problem());
  const Json j = to_json(s);
  CHECK(j.at("kind") == "short_term");
  CHECK(j.at("lambda_star")[1].get<double>() == s.lambda_star[1]);
  NoMeasure n{NoMeasure::Reason::ZeroJump, 1, 0.0, "h vanishes"};
  CHECK(to_json(n).at("no_measure") == true);
  ValidationReport r{{{"regimes[0].h_star", "bad"}}};
  CHECK(to_json(r).at("ok") == false);
  CHECK(to_json(r).at("violations")[0].at("location") == "regimes[0].h_star");
}

TEST_CASE("cli: validate") {
  const auto cfg = write("validate.json", {{"model", model_json()}, {"horizon", 2.0}});
  const auto ok = cli({"validate", "--config", cfg});
  CHECK(ok.code == kExitOk);
  CHECK(Json::parse(ok.out).at("ok") == true);

  Json change = Json::parse(R"({"regimes": [{"h_star": -1.2, "c_star": 1.2}, {}]})");
  const auto bad_cfg = write("validate_bad.json", {{"model", model_json()}, {"change", change}, {"horizon", 2.0}});
  const auto bad = cli({"validate", "--config", bad_cfg});
  CHECK(bad.code == kExitInvalid);
  CHECK(bad.err.find("h* must exceed -1") != std::string::npos);
}

TEST_CASE("cli: usage and parse errors") {
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"validate", "--config", (scratch() / "missing.json").string()}).code == kExitUsage);
  const auto p = scratch() / "broken.json";
  std::ofstream(p) << "{\"model\": [1, 2";
  CHECK(cli({"validate", "--config", p.string()}).code == kExitUsage);
}

TEST_CASE("cli: entropy with identity change is zero") {
  const auto cfg = write("entropy.json", {{"model", model_json()},
                                          {"change", Json::parse(R"({"regimes": [{}, {}]})")},
                                          {"horizon", 1.0},
                                          {"step", 0.25}});
  const auto r = cli({"entropy", "--config", cfg});
  REQUIRE(r.code == kExitOk);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,value_regime1,value_regime2,closed_regime1,closed_regime2");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    const auto comma = line.find(',');
    CHECK(line.substr(comma) == ",0,0,0,0");
  }
  CHECK(rows == 5);
}

TEST_CASE("cli: memm commands") {
  const auto cfg = write("memm.json", {{"model", model_json()}, {"times", {0.001, 1.0, 50.0}}});
  const auto s = cli({"memm", "short", "--config", cfg});
  REQUIRE(s.code == kExitOk);
  CHECK(Json::parse(s.out).at("lambda_star")[1].get<double>() == doctest::Approx(1.332).epsilon(1e-3));
  const auto l = cli({"memm", "long", "--config", cfg});
  REQUIRE(l.code == kExitOk);
  CHECK(Json::parse(l.out).at("hessian").at("positive_semidefinite") == true);
  const auto h = cli({"memm", "horizon", "--config", cfg});
  REQUIRE(h.code == kExitOk);
  CHECK(h.out.rfind("t,lambda1_star,lambda2_star,H1_over_t,H2_over_t\n", 0) == 0);
  CHECK(std::count(h.out.begin(), h.out.end(), '\n') == 4);
  const auto one = cli({"memm", "horizon", "--config", cfg, "--horizon", "2"});
  CHECK(std::count(one.out.begin(), one.out.end(), '\n') == 2);
}

TEST_CASE("cli: figures, levy, esscher, telegraph") {
  const auto f = cli({"figures", "--out", (scratch() / "fig.csv").string()});
  REQUIRE(f.code == kExitOk);
  const auto fig = slurp(scratch() / "fig.csv");
  CHECK(std::count(fig.begin(), fig.end(), '\n') == 102);

  const auto lv = cli({"levy", "--config", write("levy.json", {{"c", 0}, {"h", 1}, {"sigma", 1}, {"lambda", 1}})});
  REQUIRE(lv.code == kExitOk);
  CHECK(Json::parse(lv.out).at("beta_star").get<double>() == doctest::Approx(-0.567143290409784));

  const auto es = cli({"esscher", "--config", write("ess.json", {{"model", model_json()}, {"horizon", 1.0}})});
  CHECK(es.code == kExitOk);

  Json tele = Json::parse(R"({"regimes": [{"c": 1, "h": 1, "sigma": 0}, {"c": -1, "h": 1, "sigma": 0}],
    "hazards": [{"from": 0, "to": 1, "rate": 1}, {"from": 1, "to": 0, "rate": 1}]})");
  const auto none = cli({"telegraph-measure", "--config", write("tele.json", {{"model", tele}, {"horizon", 1.0}})});
  CHECK(none.code == kExitOk);
  CHECK(Json::parse(none.out).at("no_measure") == true);

  const auto sig = cli({"esscher", "--config", write("tele2.json", {{"model", tele}, {"horizon", 1.0}})});
  CHECK(sig.code == kExitInvalid);
}

TEST_CASE("cli: simulate is reproducible, flags override the config") {
  const auto cfg = write("sim.json", {{"model", model_json()}, {"horizon", 1.0}, {"step", 0.1}, {"paths", 3}, {"seed", 9}});
  const auto a = cli({"simulate", "--config", cfg});
  const auto b = cli({"simulate", "--config", cfg});
  REQUIRE(a.code == kExitOk);
  CHECK(a.out == b.out);
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 1 + 3 * 11);
  const auto c = cli({"simulate", "--config", cfg, "--paths", "2", "--seed", "10"});
  CHECK(std::count(c.out.begin(), c.out.end(), '\n') == 1 + 2 * 11);
  CHECK(c.out.substr(0, 200) != a.out.substr(0, 200));

  const auto mc = cli({"expectation", "--config", cfg, "--mc", "--paths", "50"});
  CHECK(mc.code == kExitUsage);
}

TEST_CASE("cli: referenced files resolve via RSJD_CONFIG_DIR") {
  const auto dir = scratch() / "shared";
  fs::create_directories(dir);
  std::ofstream(dir / "two_state.json") << model_json().dump();
  const auto cfg = write("indirect.json", {{"model", "two_state.json"}, {"horizon", 1.0}});
  CHECK(cli({"validate", "--config", cfg}).code == kExitUsage);
  ::setenv("RSJD_CONFIG_DIR", dir.string().c_str(), 1);
  CHECK(cli({"validate", "--config", cfg}).code == kExitOk);
  ::unsetenv("RSJD_CONFIG_DIR");
}

#ifdef RSJD_CLI_PATH
TEST_CASE("installed binary reports exit codes") {
  const std::string bin = RSJD_CLI_PATH;
  CHECK(WEXITSTATUS(std::system((bin + " nonsense > /dev/null 2>&1").c_str())) == kExitUsage);
  const auto cfg = write("bin.json", {{"model", model_json()}, {"horizon", 1.0}});
  CHECK(WEXITSTATUS(std::system((bin + " validate --config " + cfg + " > /dev/null").c_str())) == kExitOk);
}
#endif
