#pragma once

#include <span>
#include <vector>

namespace chinchilla {

// L(N, D) = E + A / N^alpha + B / D^beta
struct ScalingLawParams {
  double E = 0.0;      // irreducible loss, nats
  double A = 0.0;      // parameter prefactor
  double alpha = 0.0;  // parameter exponent
  double B = 0.0;      // data prefactor
  double beta = 0.0;   // data exponent

  friend bool operator==(const ScalingLawParams&, const ScalingLawParams&) = default;
};

// Throws InputError unless E >= 0 and A, B, alpha, beta > 0.
void validate(const ScalingLawParams& params);

// Training compute C = flops_per_param_token * N * D.
struct ComputeModel {
  double flops_per_param_token = 6.0;
};

struct OptimalAllocation {
  double n_opt = 0.0;
  double d_opt = 0.0;
  double ratio = 0.0;  // d_opt / n_opt
};

// Throws InputError when n_params or d_tokens is not positive.
double eval_loss(const ScalingLawParams& params, double n_params, double d_tokens);

// Minimizes eval_loss subject to c*N*D = compute. Throws InputError for
// compute <= 0 or alpha + beta == 0.
OptimalAllocation optimal_allocation(const ScalingLawParams& params, double compute,
                                     const ComputeModel& model = {});

// K * C^((alpha - beta)/(alpha + beta)); same domain as optimal_allocation.
double tokens_per_param(const ScalingLawParams& params, double compute,
                        const ComputeModel& model = {});

// K = (1/c) * (beta*B*c^beta / (alpha*A))^(2/(alpha+beta)).
double ratio_prefactor(const ScalingLawParams& params, const ComputeModel& model = {});

// (alpha - beta)/(alpha + beta), the power of C in the optimal ratio.
double ratio_exponent(const ScalingLawParams& params);

// 50 log-spaced budgets over [1e18, 1e26] FLOPs.
std::vector<double> default_compute_grid();

std::vector<double> ratio_curve(const ScalingLawParams& params,
                                std::span<const double> compute_grid,
                                const ComputeModel& model = {});

// OLS slope of tokens_per_param against log10(C). Throws InputError when the
// grid has fewer than two distinct budgets.
double ratio_slope_per_decade(const ScalingLawParams& params, const ComputeModel& model,
                              std::span<const double> compute_grid);

}  // namespace chinchilla
