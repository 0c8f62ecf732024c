#pragma once

#include <cstdint>
#include <span>

#include "chinchilla/fit_engine.hpp"
#include "chinchilla/scaling_model.hpp"

namespace chinchilla {

// One run per (N, D) pair of the cartesian product, N-major. Losses are
// eval_loss(params, N, D) * exp(noise) with noise ~ Normal(0, log_noise^2)
// drawn from seed; log_noise = 0 gives exact losses.
RunDataset synthesize_runs(const ScalingLawParams& params, std::span<const double> n_params,
                           std::span<const double> d_tokens, double log_noise = 0.0,
                           std::uint64_t seed = 0);

}  // namespace chinchilla
