#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chinchilla/fit_engine.hpp"
#include "chinchilla/perturb.hpp"
#include "chinchilla/scaling_model.hpp"

namespace chinchilla {

struct SweepOptions {
  FitConfig fit;
  std::optional<BootstrapConfig> bootstrap;
  ComputeModel compute;
  std::vector<double> compute_grid = default_compute_grid();
};

struct SweepPointResult {
  Perturbation perturbation;
  double value = 0.0;
  std::optional<FitResult> fit;
  std::optional<BootstrapResult> bootstrap;
  // tokens_per_param over SweepResult::compute_grid
  std::vector<double> ratio_curve;
  double slope_per_decade = 0.0;
  double ratio_exponent = 0.0;
  // Set iff a fitted or derived quantity is non-finite, or the point failed.
  bool nan_flag = false;
  // Non-empty when perturbing or fitting threw; fit is then empty.
  std::string error;
};

struct SweepResult {
  PerturbationKind kind = PerturbationKind::Multiplicative;
  FitResult baseline;
  std::optional<BootstrapResult> baseline_bootstrap;
  std::vector<double> baseline_ratio_curve;
  std::vector<double> compute_grid;
  double geometric_mean_params = 0.0;
  std::vector<SweepPointResult> points;  // grid order
};

// Perturbs the distinct model sizes (ascending order) and maps them back to
// the runs, so runs that share a model share its perturbed count.
RunDataset perturb_dataset(const RunDataset& dataset, const Perturbation& perturbation);

// Fits the unperturbed dataset, then every grid point. Per-point failures are
// recorded in the point and do not stop the sweep.
SweepResult run_sweep(const RunDataset& dataset, const SweepGrid& grid,
                      const SweepOptions& options);

// A_hat = A * c_m^alpha, everything else unchanged.
ScalingLawParams predict_multiplicative(const ScalingLawParams& base, double factor);

// Factor by which the ratio prefactor K moves: c_m^(-2 alpha / (alpha + beta)).
double multiplicative_ratio_shift(const ScalingLawParams& base, double factor);

// alpha_hat = alpha / s, A_hat = A * mu^(alpha (1 - s) / s).
ScalingLawParams predict_systematic(const ScalingLawParams& base, double slope,
                                    double geometric_mean);

// Local log-log slope magnitude alpha * N / (N + c_a). Requires N > 0 and
// N + c_a > 0.
double additive_effective_slope(double n_params, double offset, double alpha);

struct PowerLawTrend {
  double log_prefactor = 0.0;  // natural log
  double exponent = 0.0;
  double r_squared = 0.0;
};

// OLS of ln y on ln x. Needs at least 3 points, all positive.
PowerLawTrend fit_power_law_trend(std::span<const double> xs, std::span<const double> ys);

}  // namespace chinchilla
