#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rsjd/model.hpp"
#include "rsjd/rng.hpp"

namespace rsjd {

/// Hard limit on switches per path; exceeding it throws std::runtime_error.
inline constexpr std::size_t kMaxSwitchesPerPath = 10'000'000;

struct HoldingDraw {
  double time = 0.0;     // holding time, or the cap when censored
  std::size_t next = 0;  // target regime (equals the source when censored)
  bool censored = false;
};

/// Competing-risks draw of the holding time in regime i: one latent time per
/// outgoing hazard by inverting its cumulative hazard, keeping the minimum.
/// Draws at or beyond cap are censored.
HoldingDraw sample_holding(const ModelSpec& spec, std::size_t i, CounterRng& rng,
                           double cap = std::numeric_limits<double>::infinity());

/// One standard-normal draw driving the Brownian motion over [start, end],
/// a piece of a holding segment on which no grid node or sigma breakpoint
/// falls.
struct NoiseCell {
  double start;
  double end;
  double elapsed;       // elapsed holding time at start
  std::size_t segment;  // index into Path::regimes
  double z;
};

/// One realised trajectory on a time grid.
struct Path {
  std::vector<double> grid;
  std::vector<double> switch_times;     // tau_0 = 0 < tau_1 < ... (<= horizon)
  std::vector<std::size_t> regimes;     // regimes[n] = epsilon(tau_n)
  std::vector<double> holding_times;    // T_n = tau_n - tau_{n-1}, n >= 1
  std::vector<std::size_t> grid_regime;
  std::vector<double> tc;
  std::vector<double> nh;
  std::vector<double> wsigma;
  std::vector<NoiseCell> noise;

  double horizon() const { return grid.back(); }
  double x(std::size_t k) const { return tc[k] + nh[k] + wsigma[k]; }
  /// N(t), the number of switches in (0, t].
  std::size_t switch_count(double t) const;
  /// Index of the grid node equal to t; throws std::invalid_argument if t is
  /// not a node.
  std::size_t node_index(double t) const;
};

/// Uniform grid 0, step', 2 step', ..., horizon, with step' <= step the
/// largest step dividing the horizon.
std::vector<double> uniform_grid(double horizon, double step);

/// Simulates X = T^c + N^h + W^sigma from regime i0. Brownian increments
/// have the exact variance of sigma^2 integrated over each noise cell; the
/// elapsed-time argument restarts at every switch.
Path simulate_path(const ModelSpec& spec, std::size_t i0, double horizon, double grid_step,
                   CounterRng& rng);
/// Same on an arbitrary increasing node list starting at 0.
Path simulate_path_on(const ModelSpec& spec, std::size_t i0, const std::vector<double>& nodes,
                      CounterRng& rng);

struct WeightedSample {
  double value = 0.0;
  double weight = 1.0;
  double log_weight = 0.0;
};

/// Radon-Nikodym density Z(t) = E_t(X*) along a path simulated under P,
/// evaluated at grid node t. The Brownian part of X* reuses the path's noise:
/// on each noise cell the sigma* increment is the projection of the sigma*
/// integral onto the simulated increment, which is exact whenever sigma* is
/// proportional to sigma on the cell (always the case for constant
/// coefficients). Throws std::domain_error if 1 + h* <= 0 at a realised jump.
WeightedSample radon_nikodym_weight(const Path& path, const ModelSpec& spec_p,
                                    const MeasureChangeSpec& change, double t);

/// T^{c* + sigma*^2/2}(t) + N^{ln(1+h*)}(t) along a path (the relative
/// entropy integrand when the path is simulated under Q).
double entropy_integrand(const Path& path, const MeasureChangeSpec& change, double t);

enum class Functional {
  TerminalX,
  TerminalEntropyIntegrand,
  SwitchCount,        // N(t)
  NoSwitchIndicator,  // 1{tau_1 > t}
};

struct Estimate {
  double t = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
};

struct McConfig {
  std::size_t n_paths = 10'000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Sample mean and standard error of a functional at each time, from
/// n_paths paths simulated under spec. TerminalEntropyIntegrand needs the
/// change (spec should then be the Q-dynamics). Path p uses RNG stream p.
std::vector<Estimate> mc_expectation(const ModelSpec& spec, std::size_t i0, Functional functional,
                                     const std::vector<double>& times, const McConfig& cfg,
                                     const MeasureChangeSpec* change = nullptr);
Estimate mc_expectation(const ModelSpec& spec, std::size_t i0, Functional functional, double t,
                        const McConfig& cfg, const MeasureChangeSpec* change = nullptr);

/// E_P[Z(t) f] from paths simulated under P.
std::vector<Estimate> mc_weighted_expectation(const ModelSpec& spec_p,
                                              const MeasureChangeSpec& change, std::size_t i0,
                                              Functional functional,
                                              const std::vector<double>& times,
                                              const McConfig& cfg);

/// Mean of Z(t) itself (should be 1) and the mean of log Z(t) under P.
std::vector<Estimate> mc_weight_mean(const ModelSpec& spec_p, const MeasureChangeSpec& change,
                                     std::size_t i0, const std::vector<double>& times,
                                     const McConfig& cfg);

/// Pairwise (cascade) summation; the result does not depend on how the
/// samples were produced.
double pairwise_sum(const double* values, std::size_t n);
Estimate summarize(double t, const std::vector<double>& samples);

/// CSV with columns path_id,t,regime,Tc,Nh,Wsigma,X.
void write_path_csv(std::ostream& os, const std::vector<Path>& paths, bool header = true);
/// CSV with columns t,estimate,std_error,n_paths.
void write_estimates_csv(std::ostream& os, const std::vector<Estimate>& estimates);

}  // namespace rsjd
