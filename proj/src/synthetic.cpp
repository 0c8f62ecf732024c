#include "chinchilla/synthetic.hpp"

#include <cmath>
#include <random>
#include <string>

#include "chinchilla/errors.hpp"

namespace chinchilla {

RunDataset synthesize_runs(const ScalingLawParams& params, std::span<const double> n_params,
                           std::span<const double> d_tokens, double log_noise,
                           std::uint64_t seed) {
  if (!(log_noise >= 0.0)) throw InputError("noise level must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RunDataset out;
  out.runs.reserve(n_params.size() * d_tokens.size());
  int id = 0;
  for (double n : n_params) {
    for (double d : d_tokens) {
      double loss = eval_loss(params, n, d);
      if (log_noise > 0.0) loss *= std::exp(log_noise * normal(rng));
      out.runs.push_back({n, d, loss, "run" + std::to_string(id++)});
    }
  }
  return out;
}

}  // namespace chinchilla
