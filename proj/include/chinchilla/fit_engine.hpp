#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chinchilla/scaling_model.hpp"

namespace chinchilla {

struct TrainingRun {
  double n_params = 0.0;  // N
  double d_tokens = 0.0;  // D
  double loss = 0.0;      // L, nats
  std::string run_id;     // optional

  friend bool operator==(const TrainingRun&, const TrainingRun&) = default;
};

struct RunDataset {
  std::vector<TrainingRun> runs;

  std::size_t size() const { return runs.size(); }
  bool empty() const { return runs.empty(); }
  // Distinct n_params values in ascending order.
  std::vector<double> distinct_params() const;

  friend bool operator==(const RunDataset&, const RunDataset&) = default;
};

// Throws InputError unless the dataset has at least 5 runs, 3 distinct
// n_params, 3 distinct d_tokens and every value positive and finite.
void validate(const RunDataset& dataset);

// Log-space twin of ScalingLawParams: a = ln A, b = ln B, e = ln E.
struct LogParams {
  double a = 0.0;
  double b = 0.0;
  double e = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  std::array<double, 5> to_array() const { return {a, b, e, alpha, beta}; }
  static LogParams from_array(const std::array<double, 5>& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
  }
  friend bool operator==(const LogParams&, const LogParams&) = default;
};

ScalingLawParams to_params(const LogParams& log_params);
// Requires E, A, B > 0.
LogParams to_log_params(const ScalingLawParams& params);

// Cartesian lattice of starting points; index order is alpha-major, then
// beta, e, a, b (b varies fastest).
struct InitGrid {
  std::vector<double> alpha{0.0, 0.5, 1.0, 1.5, 2.0};
  std::vector<double> beta{0.0, 0.5, 1.0, 1.5, 2.0};
  std::vector<double> e{-1.0, -0.5, 0.0, 0.5, 1.0};
  std::vector<double> a{0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
  std::vector<double> b{0.0, 5.0, 10.0, 15.0, 20.0, 25.0};

  std::size_t size() const;
  LogParams at(std::size_t index) const;
};

struct FitConfig {
  double huber_delta = 1e-3;
  InitGrid grid;
  // When nonempty these starting points replace the lattice.
  std::vector<LogParams> starts;
  int max_iterations = 10000;
  double gradient_tolerance = 1e-8;
  // A start is abandoned once 100 iterations improve the objective by less
  // than this fraction; 0 disables the check.
  double stall_tolerance = 1e-7;
  std::uint64_t seed = 0;
  // 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

// Throws InputError for a nonpositive delta or an empty grid.
void validate(const FitConfig& config);

std::vector<LogParams> initializations(const FitConfig& config);

struct FitResult {
  ScalingLawParams params;
  LogParams log_params;
  double objective = 0.0;
  bool converged = false;
  std::size_t start_index = 0;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::size_t starts_tried = 0;
  std::size_t starts_converged = 0;

  friend bool operator==(const FitResult&, const FitResult&) = default;
};

double huber(double residual, double delta);

// Sum over runs of huber(LSE(a - alpha ln N, b - beta ln D, e) - ln L).
// Throws InputError on non-finite parameters or a nonpositive delta.
double huber_lse_objective(const LogParams& log_params, const RunDataset& dataset,
                           double delta);

// Objective plus its analytic gradient (ordered as LogParams::to_array).
double huber_lse_objective(const LogParams& log_params, const RunDataset& dataset,
                           double delta, std::array<double, 5>& gradient);

// Runs a BFGS descent from every initialization and keeps the lowest final
// objective (lowest start index on ties). Throws InputError for an
// underdetermined dataset and NumericalError when every start diverges.
FitResult fit(const RunDataset& dataset, const FitConfig& config = {});

struct BootstrapConfig {
  int n_resamples = 4000;
  std::uint64_t seed = 0;
  double ci_level = 0.80;
  // Refit each resample from the full-data optimum only instead of the whole
  // initialization lattice.
  bool warm_start = true;
};

struct ParamSummary {
  double estimate = 0.0;
  double standard_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

inline constexpr std::array<const char*, 5> kParamNames{"E", "A", "alpha", "B", "beta"};
std::array<double, 5> param_values(const ScalingLawParams& params);

struct BootstrapResult {
  int n_resamples = 0;  // requested
  int n_succeeded = 0;
  int n_dropped = 0;
  bool flagged = false;     // more than 10% of resamples dropped
  bool degenerate = false;  // fewer than two successful resamples
  std::uint64_t seed = 0;
  double ci_level = 0.0;
  // Ordered as kParamNames.
  std::array<ParamSummary, 5> summary{};
  // Successful refits in resample-index order.
  std::vector<ScalingLawParams> samples;
};

// Indices of a with-replacement resample of size n, determined by
// (seed, resample_index) alone.
std::vector<std::size_t> resample_indices(std::size_t n, std::uint64_t seed,
                                          std::uint64_t resample_index);

BootstrapResult bootstrap(const RunDataset& dataset, const FitConfig& config,
                          const BootstrapConfig& boot);
// Reuses an existing full-data fit as the point estimate.
BootstrapResult bootstrap(const RunDataset& dataset, const FitConfig& config,
                          const BootstrapConfig& boot, const FitResult& point);

}  // namespace chinchilla
