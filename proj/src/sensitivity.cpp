#include "chinchilla/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "chinchilla/errors.hpp"
#include "chinchilla/numeric.hpp"

namespace chinchilla {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool finite_params(const ScalingLawParams& p) {
  const auto values = param_values(p);
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

// Ratio quantities that may legitimately be undefined for a bad fit; those
// become NaN instead of throwing.
struct RatioSummary {
  std::vector<double> curve;
  double slope = kNaN;
  double exponent = kNaN;
};

RatioSummary summarize_ratio(const ScalingLawParams& params, const SweepOptions& options) {
  RatioSummary out;
  out.curve.assign(options.compute_grid.size(), kNaN);
  try {
    out.curve = ratio_curve(params, options.compute_grid, options.compute);
    out.exponent = ratio_exponent(params);
    std::vector<double> xs;
    xs.reserve(options.compute_grid.size());
    for (double c : options.compute_grid) xs.push_back(std::log10(c));
    out.slope = ols(xs, out.curve).slope;
  } catch (const InputError&) {
  }
  return out;
}

bool any_non_finite(const SweepPointResult& point) {
  if (!point.fit) return true;
  if (!finite_params(point.fit->params) || !std::isfinite(point.fit->objective)) return true;
  if (!std::isfinite(point.slope_per_decade) || !std::isfinite(point.ratio_exponent)) {
    return true;
  }
  for (double r : point.ratio_curve) {
    if (!std::isfinite(r)) return true;
  }
  if (point.bootstrap) {
    for (const ParamSummary& s : point.bootstrap->summary) {
      if (!std::isfinite(s.standard_error) || !std::isfinite(s.lower) ||
          !std::isfinite(s.upper)) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

RunDataset perturb_dataset(const RunDataset& dataset, const Perturbation& perturbation) {
  const std::vector<double> models = dataset.distinct_params();
  const std::vector<double> perturbed = chinchilla::apply(perturbation, models);
  std::map<double, double> lookup;
  for (std::size_t i = 0; i < models.size(); ++i) lookup.emplace(models[i], perturbed[i]);
  RunDataset out = dataset;
  for (TrainingRun& run : out.runs) run.n_params = lookup.at(run.n_params);
  return out;
}

SweepResult run_sweep(const RunDataset& dataset, const SweepGrid& grid,
                      const SweepOptions& options) {
  validate(grid);
  validate(dataset);
  if (options.compute_grid.size() < 2) throw InputError("compute grid needs two budgets");

  SweepResult result;
  result.kind = grid.kind;
  result.compute_grid = options.compute_grid;
  const std::vector<double> models = dataset.distinct_params();
  result.geometric_mean_params = geometric_mean(models);
  result.baseline = fit(dataset, options.fit);
  if (options.bootstrap) {
    result.baseline_bootstrap = bootstrap(dataset, options.fit, *options.bootstrap,
                                          result.baseline);
  }
  result.baseline_ratio_curve = summarize_ratio(result.baseline.params, options).curve;

  for (const Perturbation& perturbation : grid.points) {
    SweepPointResult point;
    point.perturbation = perturbation;
    point.value = value_of(perturbation);
    point.slope_per_decade = kNaN;
    point.ratio_exponent = kNaN;
    try {
      const RunDataset perturbed = perturb_dataset(dataset, perturbation);
      point.fit = fit(perturbed, options.fit);
      if (options.bootstrap) {
        point.bootstrap = bootstrap(perturbed, options.fit, *options.bootstrap, *point.fit);
      }
      RatioSummary ratio = summarize_ratio(point.fit->params, options);
      point.ratio_curve = std::move(ratio.curve);
      point.slope_per_decade = ratio.slope;
      point.ratio_exponent = ratio.exponent;
    } catch (const InputError& e) {
      point.error = e.what();
    } catch (const NumericalError& e) {
      point.error = e.what();
    }
    if (point.ratio_curve.empty()) point.ratio_curve.assign(options.compute_grid.size(), kNaN);
    point.nan_flag = any_non_finite(point);
    result.points.push_back(std::move(point));
  }
  return result;
}

ScalingLawParams predict_multiplicative(const ScalingLawParams& base, double factor) {
  if (!(factor > 0.0)) throw InputError("multiplicative factor must be positive");
  ScalingLawParams out = base;
  out.A = base.A * std::pow(factor, base.alpha);
  return out;
}

double multiplicative_ratio_shift(const ScalingLawParams& base, double factor) {
  if (!(factor > 0.0)) throw InputError("multiplicative factor must be positive");
  return std::pow(factor, -2.0 * base.alpha / (base.alpha + base.beta));
}

ScalingLawParams predict_systematic(const ScalingLawParams& base, double slope,
                                    double geometric_mean) {
  if (!(slope > 0.0) || !(geometric_mean > 0.0)) {
    throw InputError("systematic prediction needs s > 0 and a positive geometric mean");
  }
  ScalingLawParams out = base;
  out.alpha = base.alpha / slope;
  out.A = base.A * std::pow(geometric_mean, base.alpha * (1.0 - slope) / slope);
  return out;
}

double additive_effective_slope(double n_params, double offset, double alpha) {
  if (!(n_params > 0.0) || !(n_params + offset > 0.0)) {
    throw InputError("effective slope needs N > 0 and N + c_a > 0");
  }
  return alpha * n_params / (n_params + offset);
}

PowerLawTrend fit_power_law_trend(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InputError("power-law trend: size mismatch");
  if (xs.size() < 3) throw InputError("power-law trend needs at least three points");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw InputError("power-law trend needs positive values");
    }
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  const LinearFit line = ols(lx, ly);
  return {line.intercept, line.slope, line.r_squared};
}

}  // namespace chinchilla
