#include "chinchilla/fit_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>

#include "chinchilla/errors.hpp"
#include "chinchilla/numeric.hpp"
#include "parallel.hpp"

namespace chinchilla {
namespace {

using Vec5 = std::array<double, 5>;

// Logs of the observations, computed once per fit.
struct PreparedData {
  std::vector<double> log_n;
  std::vector<double> log_d;
  std::vector<double> log_l;

  explicit PreparedData(const RunDataset& dataset) {
    log_n.reserve(dataset.size());
    log_d.reserve(dataset.size());
    log_l.reserve(dataset.size());
    for (const TrainingRun& run : dataset.runs) {
      log_n.push_back(std::log(run.n_params));
      log_d.push_back(std::log(run.d_tokens));
      log_l.push_back(std::log(run.loss));
    }
  }
};

double huber_derivative(double residual, double delta) {
  if (std::abs(residual) <= delta) return residual;
  return residual > 0.0 ? delta : -delta;
}

template <bool kWithGradient>
double objective_impl(const Vec5& x, const PreparedData& data, double delta, Vec5* gradient) {
  const double a = x[0];
  const double b = x[1];
  const double e = x[2];
  const double alpha = x[3];
  const double beta = x[4];
  double total = 0.0;
  Vec5 g{};
  for (std::size_t i = 0; i < data.log_n.size(); ++i) {
    const double t1 = a - alpha * data.log_n[i];
    const double t2 = b - beta * data.log_d[i];
    const double t3 = e;
    const double m = std::max({t1, t2, t3});
    // exp(0) == 1 exactly, so the largest term skips the call.
    const double w1 = t1 == m ? 1.0 : std::exp(t1 - m);
    const double w2 = t2 == m ? 1.0 : std::exp(t2 - m);
    const double w3 = t3 == m ? 1.0 : std::exp(t3 - m);
    const double s = w1 + w2 + w3;
    const double residual = m + std::log(s) - data.log_l[i];
    total += huber(residual, delta);
    if constexpr (kWithGradient) {
      const double h = huber_derivative(residual, delta) / s;
      g[0] += h * w1;
      g[1] += h * w2;
      g[2] += h * w3;
      g[3] -= h * w1 * data.log_n[i];
      g[4] -= h * w2 * data.log_d[i];
    }
  }
  if constexpr (kWithGradient) *gradient = g;
  return total;
}

double dot(const Vec5& u, const Vec5& v) {
  double out = 0.0;
  for (std::size_t i = 0; i < 5; ++i) out += u[i] * v[i];
  return out;
}

double norm(const Vec5& v) { return std::sqrt(dot(v, v)); }

bool all_finite(const Vec5& v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

struct LocalResult {
  Vec5 x{};
  double f = std::numeric_limits<double>::infinity();
  double gradient_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

using Matrix5 = std::array<Vec5, 5>;

Matrix5 identity(double scale = 1.0) {
  Matrix5 m{};
  for (std::size_t i = 0; i < 5; ++i) m[i][i] = scale;
  return m;
}

// BFGS on the inverse Hessian with a backtracking Armijo line search.
// Also stops when the objective improved by less than stall_tolerance
// (relative) over the last kStallWindow iterations.
LocalResult bfgs(const Vec5& start, const PreparedData& data, double delta, int max_iterations,
                 double gradient_tolerance, double stall_tolerance) {
  constexpr int kStallWindow = 100;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;
  constexpr double kMaxStep = 5.0;

  LocalResult out;
  Vec5 x = start;
  Vec5 g{};
  double f = objective_impl<true>(x, data, delta, &g);
  if (!std::isfinite(f) || !all_finite(g)) return out;

  Matrix5 h = identity();
  bool fresh = true;  // h is a (scaled) identity, not yet updated
  bool scaled = false;
  double window_start_f = f;
  int iteration = 0;
  for (; iteration < max_iterations; ++iteration) {
    const double gnorm = norm(g);
    if (gnorm <= gradient_tolerance) {
      out.converged = true;
      break;
    }
    if (iteration > 0 && iteration % kStallWindow == 0) {
      if (window_start_f - f <= stall_tolerance * std::abs(f)) break;
      window_start_f = f;
    }
    Vec5 direction{};
    for (std::size_t i = 0; i < 5; ++i) direction[i] = -dot(h[i], g);
    double slope = dot(g, direction);
    if (!(slope < 0.0)) {
      h = identity();
      fresh = true;
      for (std::size_t i = 0; i < 5; ++i) direction[i] = -g[i];
      slope = -gnorm * gnorm;
    }
    double step = 1.0;
    if (fresh) {
      const double dn = norm(direction);
      if (dn > kMaxStep) step = kMaxStep / dn;
    }

    Vec5 x_new{};
    Vec5 g_new{};
    double f_new = 0.0;
    bool accepted = false;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      for (std::size_t i = 0; i < 5; ++i) x_new[i] = x[i] + step * direction[i];
      f_new = objective_impl<true>(x_new, data, delta, &g_new);
      if (std::isfinite(f_new) && all_finite(g_new) && f_new <= f + kArmijo * step * slope) {
        accepted = f_new < f;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (fresh) break;  // no progress even along steepest descent
      h = identity();
      fresh = true;
      continue;
    }

    Vec5 s{};
    Vec5 y{};
    for (std::size_t i = 0; i < 5; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * norm(s) * norm(y) && sy > 0.0) {
      if (!scaled || fresh) {
        h = identity(sy / dot(y, y));
        scaled = true;
      }
      const double rho = 1.0 / sy;
      Vec5 hy{};
      for (std::size_t i = 0; i < 5; ++i) hy[i] = dot(h[i], y);
      const double yhy = dot(y, hy);
      for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
          h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
      }
      fresh = false;
    }
    x = x_new;
    g = g_new;
    f = f_new;
  }
  out.x = x;
  out.f = f;
  out.gradient_norm = norm(g);
  out.iterations = iteration;
  return out;
}

std::uint64_t splitmix64(std::uint64_t state) {
  state += 0x9E3779B97F4A7C15ULL;
  state = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9ULL;
  state = (state ^ (state >> 27)) * 0x94D049BB133111EBULL;
  return state ^ (state >> 31);
}

}  // namespace

std::vector<double> RunDataset::distinct_params() const {
  std::set<double> unique;
  for (const TrainingRun& run : runs) unique.insert(run.n_params);
  return {unique.begin(), unique.end()};
}

void validate(const RunDataset& dataset) {
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const TrainingRun& run = dataset.runs[i];
    const bool ok = std::isfinite(run.n_params) && std::isfinite(run.d_tokens) &&
                    std::isfinite(run.loss) && run.n_params > 0.0 && run.d_tokens > 0.0 &&
                    run.loss > 0.0;
    if (!ok) {
      throw InputError("run " + std::to_string(i + 1) +
                       " has a nonpositive or non-finite value");
    }
  }
  std::set<double> n_values;
  std::set<double> d_values;
  for (const TrainingRun& run : dataset.runs) {
    n_values.insert(run.n_params);
    d_values.insert(run.d_tokens);
  }
  if (dataset.size() < 5 || n_values.size() < 3 || d_values.size() < 3) {
    throw InputError("dataset is underdetermined: need >= 5 runs with >= 3 distinct model "
                     "sizes and >= 3 distinct token counts (got " +
                     std::to_string(dataset.size()) + " runs, " +
                     std::to_string(n_values.size()) + " sizes, " +
                     std::to_string(d_values.size()) + " token counts)");
  }
}

ScalingLawParams to_params(const LogParams& log_params) {
  return {std::exp(log_params.e), std::exp(log_params.a), log_params.alpha,
          std::exp(log_params.b), log_params.beta};
}

LogParams to_log_params(const ScalingLawParams& params) {
  if (!(params.E > 0.0) || !(params.A > 0.0) || !(params.B > 0.0)) {
    throw InputError("log parameters need E, A, B > 0");
  }
  return {std::log(params.A), std::log(params.B), std::log(params.E), params.alpha,
          params.beta};
}

std::size_t InitGrid::size() const {
  return alpha.size() * beta.size() * e.size() * a.size() * b.size();
}

LogParams InitGrid::at(std::size_t index) const {
  LogParams p;
  p.b = b[index % b.size()];
  index /= b.size();
  p.a = a[index % a.size()];
  index /= a.size();
  p.e = e[index % e.size()];
  index /= e.size();
  p.beta = beta[index % beta.size()];
  index /= beta.size();
  p.alpha = alpha[index];
  return p;
}

void validate(const FitConfig& config) {
  if (!(config.huber_delta > 0.0)) throw InputError("huber delta must be positive");
  if (config.starts.empty() && config.grid.size() == 0) {
    throw InputError("initialization grid is empty");
  }
  if (config.max_iterations <= 0) throw InputError("max_iterations must be positive");
}

std::vector<LogParams> initializations(const FitConfig& config) {
  if (!config.starts.empty()) return config.starts;
  std::vector<LogParams> out;
  out.reserve(config.grid.size());
  for (std::size_t i = 0; i < config.grid.size(); ++i) out.push_back(config.grid.at(i));
  return out;
}

double huber(double residual, double delta) {
  const double magnitude = std::abs(residual);
  if (magnitude <= delta) return 0.5 * residual * residual;
  return delta * (magnitude - 0.5 * delta);
}

double huber_lse_objective(const LogParams& log_params, const RunDataset& dataset,
                           double delta) {
  Vec5 unused{};
  return huber_lse_objective(log_params, dataset, delta, unused);
}

double huber_lse_objective(const LogParams& log_params, const RunDataset& dataset, double delta,
                           std::array<double, 5>& gradient) {
  if (!(delta > 0.0)) throw InputError("huber delta must be positive");
  const Vec5 x = log_params.to_array();
  if (!all_finite(x)) throw InputError("objective evaluated at non-finite parameters");
  const PreparedData data(dataset);
  return objective_impl<true>(x, data, delta, &gradient);
}

FitResult fit(const RunDataset& dataset, const FitConfig& config) {
  validate(dataset);
  validate(config);
  const PreparedData data(dataset);
  const std::vector<LogParams> starts = initializations(config);

  std::vector<LocalResult> local(starts.size());
  detail::parallel_for(starts.size(), config.threads, [&](std::size_t i) {
    local[i] = bfgs(starts[i].to_array(), data, config.huber_delta, config.max_iterations,
                    config.gradient_tolerance, config.stall_tolerance);
  });

  std::size_t best = starts.size();
  std::size_t converged = 0;
  for (std::size_t i = 0; i < local.size(); ++i) {
    if (local[i].converged) ++converged;
    if (!std::isfinite(local[i].f)) continue;
    if (best == starts.size() || local[i].f < local[best].f) best = i;
  }
  if (best == starts.size()) {
    throw NumericalError("all " + std::to_string(starts.size()) +
                         " initializations diverged (non-finite objective)");
  }

  FitResult result;
  result.log_params = LogParams::from_array(local[best].x);
  result.params = to_params(result.log_params);
  result.objective = local[best].f;
  result.converged = converged > 0;
  result.start_index = best;
  result.iterations = local[best].iterations;
  result.gradient_norm = local[best].gradient_norm;
  result.starts_tried = starts.size();
  result.starts_converged = converged;
  return result;
}

std::array<double, 5> param_values(const ScalingLawParams& params) {
  return {params.E, params.A, params.alpha, params.B, params.beta};
}

std::vector<std::size_t> resample_indices(std::size_t n, std::uint64_t seed,
                                          std::uint64_t resample_index) {
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(resample_index)));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> out(n);
  for (auto& index : out) index = pick(rng);
  return out;
}

BootstrapResult bootstrap(const RunDataset& dataset, const FitConfig& config,
                          const BootstrapConfig& boot) {
  return bootstrap(dataset, config, boot, fit(dataset, config));
}

BootstrapResult bootstrap(const RunDataset& dataset, const FitConfig& config,
                          const BootstrapConfig& boot, const FitResult& point) {
  if (boot.n_resamples < 1) throw InputError("bootstrap needs at least one resample");
  if (!(boot.ci_level > 0.0 && boot.ci_level < 1.0)) {
    throw InputError("confidence level must lie in (0, 1)");
  }
  validate(dataset);

  FitConfig refit = config;
  refit.threads = 1;
  if (boot.warm_start) refit.starts = {point.log_params};

  const auto n = static_cast<std::size_t>(boot.n_resamples);
  std::vector<std::optional<ScalingLawParams>> fitted(n);
  detail::parallel_for(n, config.threads, [&](std::size_t r) {
    RunDataset sample;
    sample.runs.reserve(dataset.size());
    for (std::size_t index : resample_indices(dataset.size(), boot.seed, r)) {
      sample.runs.push_back(dataset.runs[index]);
    }
    try {
      fitted[r] = fit(sample, refit).params;
    } catch (const InputError&) {
    } catch (const NumericalError&) {
    }
  });

  BootstrapResult result;
  result.n_resamples = boot.n_resamples;
  result.seed = boot.seed;
  result.ci_level = boot.ci_level;
  for (const auto& sample : fitted) {
    if (sample) result.samples.push_back(*sample);
  }
  result.n_succeeded = static_cast<int>(result.samples.size());
  result.n_dropped = result.n_resamples - result.n_succeeded;
  result.flagged = result.n_dropped * 10 > result.n_resamples;
  result.degenerate = result.n_succeeded < 2;

  const auto estimate = param_values(point.params);
  const double lo_q = 0.5 * (1.0 - boot.ci_level);
  const double hi_q = 0.5 * (1.0 + boot.ci_level);
  for (std::size_t p = 0; p < 5; ++p) {
    ParamSummary& s = result.summary[p];
    s.estimate = estimate[p];
    if (result.degenerate) {
      s.standard_error = 0.0;
      s.lower = s.upper = s.estimate;
      continue;
    }
    std::vector<double> column;
    column.reserve(result.samples.size());
    for (const auto& sample : result.samples) column.push_back(param_values(sample)[p]);
    s.standard_error = sample_sd(column);
    s.lower = quantile(column, lo_q);
    s.upper = quantile(column, hi_q);
  }
  return result;
}

}  // namespace chinchilla
