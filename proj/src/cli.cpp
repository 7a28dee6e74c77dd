#include "rsjd/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "rsjd/csv.hpp"
#include "rsjd/json_io.hpp"
#include "rsjd/measures.hpp"
#include "rsjd/memm.hpp"
#include "rsjd/simulate.hpp"
#include "rsjd/volterra.hpp"

namespace rsjd {

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::string out;
  std::string mc_out;
  double horizon = 0.0;
  double step = 0.0;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::size_t initial_state = 0;
  bool mc = false;
};

class Context {
 public:
  Context(const CLI::App& sub, Flags flags) : sub_(sub), flags_(std::move(flags)) {
    if (!flags_.config.empty()) {
      const fs::path path = locate(flags_.config, fs::current_path());
      cfg_ = read_json_file(path.string());
      if (!cfg_.is_object()) throw ParseError("config must be a JSON object");
      base_ = path.parent_path();
    } else {
      cfg_ = Json::object();
      base_ = fs::current_path();
    }
  }

  const Json& cfg() const { return cfg_; }
  bool given(const char* flag) const { return sub_.count(flag) > 0; }

  double number(const char* flag, const char* key, double fallback) const {
    if (given(flag)) return flag_number(flag);
    return cfg_number(key, fallback);
  }
  double cfg_number(const char* key, double fallback) const {
    if (!cfg_.contains(key)) return fallback;
    if (!cfg_.at(key).is_number()) throw ParseError(std::string("\"") + key + "\" must be a number");
    return cfg_.at(key).get<double>();
  }

  double horizon(double fallback = 10.0) const {
    const double h = number("--horizon", "horizon", fallback);
    if (!(h > 0.0)) throw ParseError("horizon must be positive");
    return h;
  }
  double step(double horizon, double divisions = 2048.0) const {
    const double s = number("--step", "step", horizon / divisions);
    if (!(s > 0.0)) throw ParseError("step must be positive");
    return s;
  }
  std::size_t paths(std::size_t fallback) const {
    if (given("--paths")) return flags_.paths;
    return static_cast<std::size_t>(cfg_number("paths", static_cast<double>(fallback)));
  }
  std::uint64_t seed() const {
    if (given("--seed")) return flags_.seed;
    if (!cfg_.contains("seed")) return 0;
    if (!cfg_.at("seed").is_number_unsigned()) throw ParseError("\"seed\" must be a nonnegative integer");
    return cfg_.at("seed").get<std::uint64_t>();
  }
  unsigned threads() const {
    if (given("--threads")) return std::max(1u, flags_.threads);
    return static_cast<unsigned>(std::max(1.0, cfg_number("threads", 1.0)));
  }
  std::size_t initial_state() const {
    if (given("--initial-state")) return flags_.initial_state;
    return static_cast<std::size_t>(cfg_number("initial_state", 0.0));
  }
  double tolerance() const { return cfg_number("tolerance", kDefaultTolerance); }
  bool mc() const { return flags_.mc || (cfg_.contains("mc") && cfg_.at("mc").is_boolean() && cfg_.at("mc").get<bool>()); }

  std::string out_path() const {
    if (given("--out")) return flags_.out;
    if (cfg_.contains("out") && cfg_.at("out").is_string()) return resolve_out(cfg_.at("out").get<std::string>());
    return {};
  }
  std::string mc_out_path() const {
    if (given("--mc-out")) return flags_.mc_out;
    if (cfg_.contains("mc_out") && cfg_.at("mc_out").is_string()) {
      return resolve_out(cfg_.at("mc_out").get<std::string>());
    }
    const auto o = out_path();
    return o.empty() ? std::string{} : o + ".mc.csv";
  }

  /// An embedded object, or the parsed file named by a string value.
  Json document(const char* key) const {
    if (!cfg_.contains(key)) throw ParseError(std::string("config needs \"") + key + "\"");
    const auto& v = cfg_.at(key);
    if (v.is_string()) return read_json_file(locate(v.get<std::string>(), base_).string());
    return v;
  }
  bool has(const char* key) const { return cfg_.contains(key); }

  std::vector<double> times(std::vector<double> fallback) const {
    if (!cfg_.contains("times")) return fallback;
    std::vector<double> out;
    for (const auto& v : cfg_.at("times")) {
      if (!v.is_number()) throw ParseError("\"times\" must hold numbers");
      out.push_back(v.get<double>());
    }
    if (out.empty()) throw ParseError("\"times\" is empty");
    return out;
  }

 private:
  double flag_number(const char* flag) const {
    const std::string f(flag);
    if (f == "--horizon") return flags_.horizon;
    if (f == "--step") return flags_.step;
    return 0.0;
  }
  std::string resolve_out(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? p : (base_ / path).string();
  }
  static fs::path locate(const std::string& name, const fs::path& base) {
    const fs::path p(name);
    if (p.is_absolute()) return p;
    if (fs::exists(base / p)) return base / p;
    if (const char* dir = std::getenv("RSJD_CONFIG_DIR")) {
      if (fs::exists(fs::path(dir) / p)) return fs::path(dir) / p;
    }
    return base / p;
  }

  const CLI::App& sub_;
  Flags flags_;
  Json cfg_;
  fs::path base_;
};

void emit(std::ostream& fallback, const std::string& path, const std::string& text) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot write " + path);
  f << text;
  if (!f) throw ParseError("write failed for " + path);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

CheckOptions check_options(const Context& ctx, double horizon) {
  CheckOptions o;
  o.tolerance = ctx.tolerance();
  o.intensity_floor = ctx.cfg_number("intensity_floor", kDefaultTolerance);
  o.step = ctx.step(horizon);
  return o;
}

MemmProblem problem(const Context& ctx) {
  if (ctx.has("problem")) return problem_from_json(ctx.document("problem"));
  return problem_from_json(ctx.document("model"));
}

int cmd_validate(const Context& ctx, std::ostream& out, std::ostream& err) {
  const ModelSpec spec = model_from_json(ctx.document("model"));
  const double horizon = ctx.horizon();
  ValidationReport report = validate_model(spec, horizon);
  if (ctx.has("change")) {
    const auto change = change_from_json(ctx.document("change"));
    const auto more = validate_change(spec, change, horizon, check_options(ctx, horizon));
    report.violations.insert(report.violations.end(), more.violations.begin(),
                             more.violations.end());
  }
  emit(out, ctx.out_path(), dump(to_json(report)));
  if (!report.ok()) {
    err << report.summary() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}

int cmd_simulate(const Context& ctx, std::ostream& out) {
  const ModelSpec spec = model_from_json(ctx.document("model"));
  const double horizon = ctx.horizon();
  const double step = ctx.step(horizon, 100.0);
  const std::size_t n = ctx.paths(10);
  const std::uint64_t seed = ctx.seed();
  std::vector<Path> paths;
  for (std::size_t p = 0; p < n; ++p) {
    CounterRng rng(seed, p);
    paths.push_back(simulate_path(spec, ctx.initial_state(), horizon, step, rng));
  }
  std::ostringstream os;
  write_path_csv(os, paths);
  emit(out, ctx.out_path(), os.str());
  return kExitOk;
}

McConfig mc_config(const Context& ctx) {
  McConfig cfg;
  cfg.n_paths = ctx.paths(10'000);
  cfg.seed = ctx.seed();
  cfg.threads = ctx.threads();
  if (cfg.n_paths < 100) throw ParseError("Monte Carlo commands need paths >= 100");
  return cfg;
}

int cmd_expectation(const Context& ctx, std::ostream& out) {
  const ModelSpec spec = model_from_json(ctx.document("model"));
  const double horizon = ctx.horizon();
  const auto mu = solve_mu(spec, horizon, ctx.step(horizon));
  std::ostringstream os;
  mu.write_csv(os);
  emit(out, ctx.out_path(), os.str());
  if (ctx.mc()) {
    const auto est = mc_expectation(spec, ctx.initial_state(), Functional::TerminalX,
                                    ctx.times({horizon / 4, horizon / 2, horizon}), mc_config(ctx));
    std::ostringstream ms;
    write_estimates_csv(ms, est);
    emit(out, ctx.mc_out_path(), ms.str());
  }
  return kExitOk;
}

bool constant_two_state(const ModelSpec& spec, const MeasureChangeSpec& change) {
  if (spec.regime_count() != 2) return false;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& g = spec.hazard(i, 1 - i);
    if (!g || g->kind() != DescriptorKind::Constant) return false;
    const auto& ch = change.regime(i);
    for (const Descriptor* d : {&ch.c_star, &ch.h_star, &ch.sigma_star}) {
      if (d->kind() != DescriptorKind::Constant) return false;
    }
  }
  return true;
}

int cmd_entropy(const Context& ctx, std::ostream& out) {
  const ModelSpec spec = model_from_json(ctx.document("model"));
  const auto change = change_from_json(ctx.document("change"));
  const double horizon = ctx.horizon();
  const double step = ctx.step(horizon);
  const auto opts = check_options(ctx, horizon);
  const auto H = solve_entropy(spec, change, horizon, step, opts);

  std::ostringstream os;
  if (constant_two_state(spec, change)) {
    // Append the closed form next to the numerical solution.
    const double b1 = entropy_rate(spec, change, 0, 0.0);
    const double b2 = entropy_rate(spec, change, 1, 0.0);
    const double l1 = (1.0 + change.regime(0).h_star(0.0)) * spec.total_hazard(0, 0.0);
    const double l2 = (1.0 + change.regime(1).h_star(0.0)) * spec.total_hazard(1, 0.0);
    os << "t,value_regime1,value_regime2,closed_regime1,closed_regime2\n";
    for (std::size_t k = 0; k < H.size(); ++k) {
      const auto cf = closed_form_entropy(b1, b2, l1, l2, H.grid[k]);
      os << format_double(H.grid[k]) << ',' << format_double(H.values[0][k]) << ','
         << format_double(H.values[1][k]) << ',' << format_double(cf.H1) << ','
         << format_double(cf.H2) << '\n';
    }
  } else {
    H.write_csv(os);
  }
  emit(out, ctx.out_path(), os.str());

  if (ctx.mc()) {
    const ModelSpec q = apply_girsanov(spec, change, Tabulation{horizon, step}, opts);
    const auto est = mc_expectation(q, ctx.initial_state(), Functional::TerminalEntropyIntegrand,
                                    ctx.times({horizon / 4, horizon / 2, horizon}), mc_config(ctx),
                                    &change);
    std::ostringstream ms;
    write_estimates_csv(ms, est);
    emit(out, ctx.mc_out_path(), ms.str());
  }
  return kExitOk;
}

int cmd_girsanov(const Context& ctx, std::ostream& out) {
  const ModelSpec spec = model_from_json(ctx.document("model"));
  const auto change = change_from_json(ctx.document("change"));
  const double horizon = ctx.horizon();
  const double step = ctx.step(horizon);
  const ModelSpec q = apply_girsanov(spec, change, Tabulation{horizon, step}, check_options(ctx, horizon));
  emit(out, ctx.out_path(), dump(to_json(q)));
  return kExitOk;
}

int cmd_esscher(const Context& ctx, std::ostream& out) {
  const ModelSpec spec = model_from_json(ctx.document("model"));
  const double horizon = ctx.horizon();
  const auto result = esscher_transform(spec, Tabulation{horizon, ctx.step(horizon)});
  Json theta = Json::array();
  for (const auto& t : result.params.theta) theta.push_back(to_json(t));
  const auto residual = martingale_measure_residual(spec, result.change, horizon, ctx.step(horizon));
  emit(out, ctx.out_path(),
       dump({{"theta", theta}, {"change", to_json(result.change)}, {"martingale_residual", residual}}));
  return kExitOk;
}

int cmd_telegraph(const Context& ctx, std::ostream& out, std::ostream& err) {
  const ModelSpec spec = model_from_json(ctx.document("model"));
  const double horizon = ctx.horizon();
  const auto result =
      jump_telegraph_unique_measure(spec, Tabulation{horizon, ctx.step(horizon)}, ctx.tolerance());
  if (const auto* none = std::get_if<NoMeasure>(&result)) {
    err << none->message << '\n';
    emit(out, ctx.out_path(), dump(to_json(*none)));
  } else {
    emit(out, ctx.out_path(), dump({{"change", to_json(std::get<MeasureChangeSpec>(result))}}));
  }
  return kExitOk;
}

int cmd_memm(const Context& ctx, const std::string& which, std::ostream& out) {
  const MemmProblem p = problem(ctx);
  const double tol = ctx.cfg_number("tolerance", 1e-12);
  if (which == "short") {
    const auto s = solve_short_term(p, tol);
    Json j = to_json(s);
    j["stationarity"] = {memm_db(p, 0, s.lambda_star[0]), memm_db(p, 1, s.lambda_star[1])};
    emit(out, ctx.out_path(), dump(j));
  } else if (which == "long") {
    const auto s = solve_long_term(p, tol);
    Json j = to_json(s);
    const auto res = long_term_residuals(p, s.lambda_star[0], s.lambda_star[1]);
    const auto hs = long_term_hessian(p, s.lambda_star[0], s.lambda_star[1]);
    j["residuals"] = res;
    j["hessian"] = {{"B11", hs.b11}, {"B22", hs.b22}, {"B12", hs.b12},
                    {"positive_semidefinite", hs.positive_semidefinite()}};
    emit(out, ctx.out_path(), dump(j));
  } else {
    std::vector<double> times;
    if (ctx.given("--horizon")) {
      times = {ctx.horizon()};
    } else {
      times = ctx.times(log_spaced(ctx.cfg_number("t_min", 1e-3), ctx.cfg_number("t_max", 100.0),
                                   static_cast<std::size_t>(ctx.cfg_number("n_times", 101))));
    }
    const double htol = ctx.cfg_number("tolerance", 1e-10);
    std::ostringstream os;
    write_sweep_csv(os, horizon_sweep(p, times, ctx.initial_state(), htol));
    emit(out, ctx.out_path(), os.str());
  }
  return kExitOk;
}

int cmd_levy(const Context& ctx, std::ostream& out) {
  const Json j = ctx.has("levy") ? ctx.document("levy") : ctx.cfg();
  auto get = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
      throw ParseError(std::string("levy needs numeric \"") + key + "\"");
    }
    return j.at(key).get<double>();
  };
  const auto s = solve_levy(get("c"), get("h"), get("sigma"), get("lambda"),
                            ctx.cfg_number("tolerance", 1e-12));
  emit(out, ctx.out_path(), dump(to_json(s)));
  return kExitOk;
}

int cmd_figures(const Context& ctx, std::ostream& out) {
  const auto times = ctx.times(log_spaced(ctx.cfg_number("t_min", 1e-3),
                                          ctx.cfg_number("t_max", 100.0),
                                          static_cast<std::size_t>(ctx.cfg_number("n_times", 101))));
  std::ostringstream os;
  write_sweep_csv(os, horizon_sweep(figure_one_problem(), times, ctx.initial_state()));
  emit(out, ctx.out_path(), os.str());
  return kExitOk;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file");
  sub->add_option("--horizon", f.horizon, "time horizon");
  sub->add_option("--step", f.step, "grid step");
  sub->add_option("--paths", f.paths, "Monte Carlo or dumped path count");
  sub->add_option("--seed", f.seed, "RNG seed");
  sub->add_option("--out", f.out, "output file (default stdout)");
  sub->add_option("--threads", f.threads, "worker threads for Monte Carlo");
  sub->add_option("--initial-state", f.initial_state, "initial regime (0-based)");
  sub->add_flag("--mc", f.mc, "add a Monte Carlo cross-check");
  sub->add_option("--mc-out", f.mc_out, "output file for the Monte Carlo estimates");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regime-switching jump-diffusion toolkit", "rsjd"};
  app.require_subcommand(1);
  Flags flags;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"validate", "check model (and change) invariants"},
      {"simulate", "dump simulated paths as CSV"},
      {"expectation", "solve for E[X(t)] (optionally with Monte Carlo)"},
      {"entropy", "solve for the relative entropy H_i(t)"},
      {"girsanov", "emit the Q-dynamics of a measure change"},
      {"esscher", "regime-switching Esscher transform"},
      {"telegraph-measure", "unique martingale measure of a jump-telegraph model"},
      {"levy", "single-regime minimal entropy measure"},
      {"figures", "entropy-per-time and argmin sweep for the preset model"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, flags);
    subs.push_back(sub);
  }
  auto* memm = app.add_subcommand("memm", "minimal entropy martingale measure");
  memm->require_subcommand(1);
  std::vector<CLI::App*> memm_subs;
  for (const char* which : {"short", "long", "horizon"}) {
    auto* sub = memm->add_subcommand(which, std::string(which) + " MEMM");
    add_common(sub, flags);
    memm_subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    for (auto* sub : subs) {
      if (!sub->parsed()) continue;
      const Context ctx(*sub, flags);
      const std::string name = sub->get_name();
      if (name == "validate") return cmd_validate(ctx, out, err);
      if (name == "simulate") return cmd_simulate(ctx, out);
      if (name == "expectation") return cmd_expectation(ctx, out);
      if (name == "entropy") return cmd_entropy(ctx, out);
      if (name == "girsanov") return cmd_girsanov(ctx, out);
      if (name == "esscher") return cmd_esscher(ctx, out);
      if (name == "telegraph-measure") return cmd_telegraph(ctx, out, err);
      if (name == "levy") return cmd_levy(ctx, out);
      if (name == "figures") return cmd_figures(ctx, out);
    }
    for (auto* sub : memm_subs) {
      if (!sub->parsed()) continue;
      const Context ctx(*sub, flags);
      return cmd_memm(ctx, sub->get_name(), out);
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SpecError& e) {
    err << "structural error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidMeasureChange& e) {
    err << "invalid measure change: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace rsjd
