#include "chinchilla/scaling_model.hpp"

#include <cmath>

#include "chinchilla/errors.hpp"
#include "chinchilla/numeric.hpp"

namespace chinchilla {
namespace {

void check_budget(const ScalingLawParams& params, double compute, const ComputeModel& model) {
  if (!(compute > 0.0)) throw InputError("compute budget must be positive");
  if (!(model.flops_per_param_token > 0.0)) {
    throw InputError("FLOPs-per-parameter-per-token coefficient must be positive");
  }
  if (params.alpha + params.beta == 0.0) {
    throw InputError("alpha + beta must be nonzero");
  }
}

}  // namespace

void validate(const ScalingLawParams& params) {
  if (!(params.E >= 0.0) || !(params.A > 0.0) || !(params.B > 0.0) || !(params.alpha > 0.0) ||
      !(params.beta > 0.0)) {
    throw InputError("scaling law parameters need E >= 0 and A, B, alpha, beta > 0");
  }
}

double eval_loss(const ScalingLawParams& params, double n_params, double d_tokens) {
  if (!(n_params > 0.0) || !(d_tokens > 0.0)) {
    throw InputError("eval_loss needs positive N and D");
  }
  return params.E + params.A * std::pow(n_params, -params.alpha) +
         params.B * std::pow(d_tokens, -params.beta);
}

OptimalAllocation optimal_allocation(const ScalingLawParams& params, double compute,
                                     const ComputeModel& model) {
  check_budget(params, compute, model);
  const double c = model.flops_per_param_token;
  const double sum = params.alpha + params.beta;
  // Work in logs so extreme budgets do not overflow the intermediate powers.
  const double log_n = (std::log(params.alpha * params.A) -
                        std::log(params.beta * params.B) - params.beta * std::log(c)) /
                           sum +
                       (params.beta / sum) * std::log(compute);
  OptimalAllocation out;
  out.n_opt = std::exp(log_n);
  out.d_opt = compute / (c * out.n_opt);
  out.ratio = out.d_opt / out.n_opt;
  return out;
}

double ratio_prefactor(const ScalingLawParams& params, const ComputeModel& model) {
  check_budget(params, 1.0, model);
  const double c = model.flops_per_param_token;
  const double sum = params.alpha + params.beta;
  const double log_k = -std::log(c) + (2.0 / sum) * (std::log(params.beta * params.B) +
                                                      params.beta * std::log(c) -
                                                      std::log(params.alpha * params.A));
  return std::exp(log_k);
}

double ratio_exponent(const ScalingLawParams& params) {
  const double sum = params.alpha + params.beta;
  if (sum == 0.0) throw InputError("alpha + beta must be nonzero");
  return (params.alpha - params.beta) / sum;
}

double tokens_per_param(const ScalingLawParams& params, double compute,
                        const ComputeModel& model) {
  check_budget(params, compute, model);
  const double c = model.flops_per_param_token;
  const double sum = params.alpha + params.beta;
  const double log_k = -std::log(c) + (2.0 / sum) * (std::log(params.beta * params.B) +
                                                      params.beta * std::log(c) -
                                                      std::log(params.alpha * params.A));
  return std::exp(log_k + ratio_exponent(params) * std::log(compute));
}

std::vector<double> default_compute_grid() { return logspace(18.0, 26.0, 50); }

std::vector<double> ratio_curve(const ScalingLawParams& params,
                                std::span<const double> compute_grid,
                                const ComputeModel& model) {
  std::vector<double> out;
  out.reserve(compute_grid.size());
  for (double compute : compute_grid) out.push_back(tokens_per_param(params, compute, model));
  return out;
}

double ratio_slope_per_decade(const ScalingLawParams& params, const ComputeModel& model,
                              std::span<const double> compute_grid) {
  std::vector<double> xs;
  xs.reserve(compute_grid.size());
  for (double compute : compute_grid) {
    if (!(compute > 0.0)) throw InputError("compute budgets must be positive");
    xs.push_back(std::log10(compute));
  }
  const std::vector<double> ys = ratio_curve(params, compute_grid, model);
  return ols(xs, ys).slope;
}

}  // namespace chinchilla
