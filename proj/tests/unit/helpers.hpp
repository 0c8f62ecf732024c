#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "chinchilla/fit_engine.hpp"
#include "chinchilla/numeric.hpp"
#include "chinchilla/scaling_model.hpp"
#include "chinchilla/synthetic.hpp"

namespace testing {

inline double rel_diff(double got, double want) { return std::abs(got - want) / std::abs(want); }

inline chinchilla::ScalingLawParams truth() { return {1.8, 500.0, 0.35, 1500.0, 0.35}; }

// Noiseless 6x6 grid over 1e7..1e10 params and 1e9..1e12 tokens.
inline chinchilla::RunDataset clean_grid(const chinchilla::ScalingLawParams& p = truth()) {
  const auto ns = chinchilla::logspace(7.0, 10.0, 6);
  const auto ds = chinchilla::logspace(9.0, 12.0, 6);
  return chinchilla::synthesize_runs(p, ns, ds);
}

inline std::string data_path(const std::string& name) {
  return std::string(CHINCHILLA_DATA_DIR) + "/" + name;
}

// Single local descent from a known point; enough for tests that do not
// exercise the lattice.
inline chinchilla::FitConfig local_config(const chinchilla::ScalingLawParams& start) {
  chinchilla::FitConfig cfg;
  cfg.starts = {chinchilla::to_log_params(start)};
  return cfg;
}

}  // namespace testing
