#include "rsjd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "rsjd/csv.hpp"

namespace rsjd {

namespace {

// Integral of f * g over [a, b].
double cross_integral(const Descriptor& f, const Descriptor& g, double a, double b) {
  if (f.kind() == DescriptorKind::Constant && g.kind() == DescriptorKind::Constant) {
    return f(0.0) * g(0.0) * (b - a);
  }
  std::vector<double> breaks = f.interior_breakpoints();
  const auto gb = g.interior_breakpoints();
  breaks.insert(breaks.end(), gb.begin(), gb.end());
  return integrate([&](double u) { return f(u) * g(u); }, a, b, breaks);
}

double functional_value(const Path& path, Functional functional, std::size_t node,
                        const MeasureChangeSpec* change) {
  const double t = path.grid[node];
  switch (functional) {
    case Functional::TerminalX: return path.x(node);
    case Functional::TerminalEntropyIntegrand:
      if (!change) throw std::invalid_argument("entropy integrand needs a measure change");
      return entropy_integrand(path, *change, t);
    case Functional::SwitchCount: return static_cast<double>(path.switch_count(t));
    case Functional::NoSwitchIndicator: return path.switch_count(t) == 0 ? 1.0 : 0.0;
  }
  return 0.0;
}

std::vector<double> observation_nodes(const std::vector<double>& times) {
  std::vector<double> nodes{0.0};
  for (double t : times) {
    if (!(t >= 0.0)) throw std::invalid_argument("observation times must be nonnegative");
    nodes.push_back(t);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  if (nodes.size() == 1) nodes.push_back(0.0 + 1e-12);
  return nodes;
}

// Runs sampler(path_id) -> per-time values for every path, in parallel chunks.
template <class Sampler>
std::vector<std::vector<double>> run_batch(std::size_t n_times, const McConfig& cfg,
                                           Sampler sampler) {
  if (cfg.n_paths < 100) throw std::invalid_argument("Monte Carlo estimates need n_paths >= 100");
  std::vector<std::vector<double>> samples(n_times, std::vector<double>(cfg.n_paths));
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, 64));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const auto values = sampler(p);
      for (std::size_t m = 0; m < n_times; ++m) samples[m][p] = values[m];
    }
  };
  if (threads == 1) {
    work(0, cfg.n_paths);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (cfg.n_paths + threads - 1) / threads;
    for (unsigned k = 0; k < threads; ++k) {
      const std::size_t b = std::min(cfg.n_paths, k * chunk);
      const std::size_t e = std::min(cfg.n_paths, b + chunk);
      pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return samples;
}

}  // namespace

HoldingDraw sample_holding(const ModelSpec& spec, std::size_t i, CounterRng& rng, double cap) {
  HoldingDraw best{std::numeric_limits<double>::infinity(), i, true};
  for (std::size_t j = 0; j < spec.regime_count(); ++j) {
    const auto& g = spec.hazard(i, j);
    if (!g) continue;
    const double t = g->inverse_integral(rng.exponential());
    if (t < best.time) best = {t, j, false};
  }
  if (best.censored || best.time >= cap) return {cap, i, true};
  return best;
}

std::size_t Path::switch_count(double t) const {
  const auto it = std::upper_bound(switch_times.begin(), switch_times.end(), t);
  return static_cast<std::size_t>(it - switch_times.begin()) - 1;
}

std::size_t Path::node_index(double t) const {
  const auto it = std::lower_bound(grid.begin(), grid.end(), t - 1e-12 * std::max(1.0, t));
  if (it == grid.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, t)) {
    throw std::invalid_argument("time is not a node of the path grid");
  }
  return static_cast<std::size_t>(it - grid.begin());
}

std::vector<double> uniform_grid(double horizon, double step) {
  if (!(horizon > 0.0) || !(step > 0.0)) {
    throw std::invalid_argument("grid needs positive horizon and step");
  }
  const auto n = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  std::vector<double> grid(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    grid[k] = horizon * static_cast<double>(k) / static_cast<double>(n);
  }
  return grid;
}

Path simulate_path(const ModelSpec& spec, std::size_t i0, double horizon, double grid_step,
                   CounterRng& rng) {
  return simulate_path_on(spec, i0, uniform_grid(horizon, grid_step), rng);
}

Path simulate_path_on(const ModelSpec& spec, std::size_t i0, const std::vector<double>& nodes,
                      CounterRng& rng) {
  if (nodes.size() < 2 || nodes.front() != 0.0) {
    throw std::invalid_argument("path grid must start at 0 and have at least two nodes");
  }
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    if (!(nodes[k] > nodes[k - 1])) throw std::invalid_argument("path grid must be increasing");
  }
  if (i0 >= spec.regime_count()) throw std::invalid_argument("initial regime out of range");

  const double horizon = nodes.back();
  const std::size_t n = nodes.size();
  Path path;
  path.grid = nodes;
  path.grid_regime.assign(n, 0);
  path.tc.assign(n, 0.0);
  path.nh.assign(n, 0.0);
  path.wsigma.assign(n, 0.0);
  path.switch_times.push_back(0.0);
  path.regimes.push_back(i0);

  double tau = 0.0;
  double tc_tau = 0.0;
  double nh = 0.0;
  double w = 0.0;
  std::size_t regime = i0;
  std::size_t k = 0;
  std::vector<double> cuts;

  while (true) {
    const auto& coeffs = spec.regime(regime);
    const HoldingDraw draw = sample_holding(spec, regime, rng, horizon - tau);
    const double seg_end = draw.censored ? horizon : tau + draw.time;
    const std::size_t segment = path.regimes.size() - 1;

    while (k < n && nodes[k] <= tau) {
      path.grid_regime[k] = regime;
      path.tc[k] = tc_tau;
      path.nh[k] = nh;
      path.wsigma[k] = w;
      ++k;
    }

    cuts.clear();
    for (std::size_t q = k; q < n && nodes[q] < seg_end; ++q) cuts.push_back(nodes[q]);
    for (double b : coeffs.sigma.interior_breakpoints()) {
      if (tau + b < seg_end) cuts.push_back(tau + b);
    }
    cuts.push_back(seg_end);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double prev = tau;
    for (double cut : cuts) {
      if (!(cut > prev)) continue;
      const double z = rng.normal();
      const double a = prev - tau;
      const double b = cut - tau;
      w += z * std::sqrt(coeffs.sigma.square_integral(a, b));
      path.noise.push_back({prev, cut, a, segment, z});
      prev = cut;
      if (k < n && nodes[k] == cut && (cut < seg_end || draw.censored)) {
        path.grid_regime[k] = regime;
        path.tc[k] = tc_tau + coeffs.c.integral(b);
        path.nh[k] = nh;
        path.wsigma[k] = w;
        ++k;
      }
    }

    if (draw.censored) break;

    const double holding = draw.time;
    tc_tau += coeffs.c.integral(holding);
    nh += coeffs.h(holding);
    tau = seg_end;
    path.switch_times.push_back(tau);
    path.holding_times.push_back(holding);
    path.regimes.push_back(draw.next);
    regime = draw.next;
    if (path.holding_times.size() > kMaxSwitchesPerPath) {
      throw std::runtime_error("path exceeded the switch-count safety cap; hazards may explode");
    }
  }
  return path;
}

WeightedSample radon_nikodym_weight(const Path& path, const ModelSpec& spec_p,
                                    const MeasureChangeSpec& change, double t) {
  const std::size_t node = path.node_index(t);
  t = path.grid[node];
  double log_w = 0.0;

  const std::size_t segments = path.regimes.size();
  for (std::size_t s = 0; s < segments; ++s) {
    const double start = path.switch_times[s];
    if (start > t) break;
    if (s > 0) {
      const double jump = change.regime(path.regimes[s - 1]).h_star(path.holding_times[s - 1]);
      if (!(1.0 + jump > 0.0)) {
        throw std::domain_error("1 + h* must be positive at every realised jump");
      }
      log_w += std::log1p(jump);
    }
    const double end = s + 1 < segments ? std::min(path.switch_times[s + 1], t) : t;
    const auto& ch = change.regime(path.regimes[s]);
    const double e = end - start;
    log_w += ch.c_star.integral(e) - 0.5 * ch.sigma_star.square_integral(0.0, e);
  }

  const double limit = t + 1e-12 * std::max(1.0, t);
  for (const auto& cell : path.noise) {
    if (cell.end > limit) break;
    const std::size_t r = path.regimes[cell.segment];
    const auto& sigma = spec_p.regime(r).sigma;
    const auto& sigma_star = change.regime(r).sigma_star;
    const double a = cell.elapsed;
    const double b = cell.elapsed + (cell.end - cell.start);
    const double s2 = sigma.square_integral(a, b);
    if (s2 > 0.0) {
      log_w += cell.z * cross_integral(sigma, sigma_star, a, b) / std::sqrt(s2);
    } else {
      log_w += cell.z * sigma_star.integral(a, b) / std::sqrt(b - a);
    }
  }
  return {0.0, std::exp(log_w), log_w};
}

double entropy_integrand(const Path& path, const MeasureChangeSpec& change, double t) {
  if (t < 0.0 || t > path.horizon() * (1.0 + 1e-12)) {
    throw std::invalid_argument("entropy integrand time outside the path horizon");
  }
  double total = 0.0;
  const std::size_t segments = path.regimes.size();
  for (std::size_t s = 0; s < segments; ++s) {
    const double start = path.switch_times[s];
    if (start > t) break;
    if (s > 0) {
      const double jump = change.regime(path.regimes[s - 1]).h_star(path.holding_times[s - 1]);
      if (!(1.0 + jump > 0.0)) {
        throw std::domain_error("1 + h* must be positive at every realised jump");
      }
      total += std::log1p(jump);
    }
    const double end = s + 1 < segments ? std::min(path.switch_times[s + 1], t) : t;
    const auto& ch = change.regime(path.regimes[s]);
    const double e = end - start;
    total += ch.c_star.integral(e) + 0.5 * ch.sigma_star.square_integral(0.0, e);
  }
  return total;
}

double pairwise_sum(const double* values, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += values[k];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

Estimate summarize(double t, const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("need at least two samples");
  const double mean = pairwise_sum(samples.data(), n) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t k = 0; k < n; ++k) sq[k] = (samples[k] - mean) * (samples[k] - mean);
  const double var = pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
  return {t, mean, std::sqrt(var / static_cast<double>(n)), n};
}

std::vector<Estimate> mc_expectation(const ModelSpec& spec, std::size_t i0, Functional functional,
                                     const std::vector<double>& times, const McConfig& cfg,
                                     const MeasureChangeSpec* change) {
  if (functional == Functional::TerminalEntropyIntegrand && !change) {
    throw std::invalid_argument("entropy integrand needs a measure change");
  }
  const auto nodes = observation_nodes(times);
  auto samples = run_batch(times.size(), cfg, [&](std::size_t p) {
    CounterRng rng(cfg.seed, p);
    const Path path = simulate_path_on(spec, i0, nodes, rng);
    std::vector<double> v(times.size());
    for (std::size_t m = 0; m < times.size(); ++m) {
      v[m] = functional_value(path, functional, path.node_index(times[m]), change);
    }
    return v;
  });
  std::vector<Estimate> out;
  for (std::size_t m = 0; m < times.size(); ++m) out.push_back(summarize(times[m], samples[m]));
  return out;
}

Estimate mc_expectation(const ModelSpec& spec, std::size_t i0, Functional functional, double t,
                        const McConfig& cfg, const MeasureChangeSpec* change) {
  return mc_expectation(spec, i0, functional, std::vector<double>{t}, cfg, change).front();
}

std::vector<Estimate> mc_weighted_expectation(const ModelSpec& spec_p,
                                              const MeasureChangeSpec& change, std::size_t i0,
                                              Functional functional,
                                              const std::vector<double>& times,
                                              const McConfig& cfg) {
  const auto nodes = observation_nodes(times);
  auto samples = run_batch(times.size(), cfg, [&](std::size_t p) {
    CounterRng rng(cfg.seed, p);
    const Path path = simulate_path_on(spec_p, i0, nodes, rng);
    std::vector<double> v(times.size());
    for (std::size_t m = 0; m < times.size(); ++m) {
      const std::size_t node = path.node_index(times[m]);
      v[m] = radon_nikodym_weight(path, spec_p, change, times[m]).weight *
             functional_value(path, functional, node, &change);
    }
    return v;
  });
  std::vector<Estimate> out;
  for (std::size_t m = 0; m < times.size(); ++m) out.push_back(summarize(times[m], samples[m]));
  return out;
}

std::vector<Estimate> mc_weight_mean(const ModelSpec& spec_p, const MeasureChangeSpec& change,
                                     std::size_t i0, const std::vector<double>& times,
                                     const McConfig& cfg) {
  const auto nodes = observation_nodes(times);
  auto samples = run_batch(times.size(), cfg, [&](std::size_t p) {
    CounterRng rng(cfg.seed, p);
    const Path path = simulate_path_on(spec_p, i0, nodes, rng);
    std::vector<double> v(times.size());
    for (std::size_t m = 0; m < times.size(); ++m) {
      v[m] = radon_nikodym_weight(path, spec_p, change, times[m]).weight;
    }
    return v;
  });
  std::vector<Estimate> out;
  for (std::size_t m = 0; m < times.size(); ++m) out.push_back(summarize(times[m], samples[m]));
  return out;
}

void write_path_csv(std::ostream& os, const std::vector<Path>& paths, bool header) {
  if (header) os << "path_id,t,regime,Tc,Nh,Wsigma,X\n";
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& path = paths[p];
    for (std::size_t k = 0; k < path.grid.size(); ++k) {
      os << p << ',' << format_double(path.grid[k]) << ',' << path.grid_regime[k] << ','
         << format_double(path.tc[k]) << ',' << format_double(path.nh[k]) << ','
         << format_double(path.wsigma[k]) << ',' << format_double(path.x(k)) << '\n';
    }
  }
}

void write_estimates_csv(std::ostream& os, const std::vector<Estimate>& estimates) {
  os << "t,estimate,std_error,n_paths\n";
  for (const auto& e : estimates) {
    os << format_double(e.t) << ',' << format_double(e.estimate) << ','
       << format_double(e.std_error) << ',' << e.n_paths << '\n';
  }
}

}  // namespace rsjd
