#include "chinchilla/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "chinchilla/errors.hpp"
#include "chinchilla/numeric.hpp"

namespace chinchilla {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::Multiplicative:
      return "multiplicative";
    case PerturbationKind::Additive:
      return "additive";
    case PerturbationKind::SystematicBias:
      return "systematic";
    case PerturbationKind::LogNormalNoise:
      return "lognormal";
  }
  return "unknown";
}

PerturbationKind parse_kind(std::string_view text) {
  if (text == "multiplicative") return PerturbationKind::Multiplicative;
  if (text == "additive") return PerturbationKind::Additive;
  if (text == "systematic") return PerturbationKind::SystematicBias;
  if (text == "lognormal") return PerturbationKind::LogNormalNoise;
  throw InputError("unknown perturbation kind '" + std::string(text) +
                   "' (expected multiplicative|additive|systematic|lognormal)");
}

PerturbationKind kind_of(const Perturbation& perturbation) {
  return static_cast<PerturbationKind>(perturbation.index());
}

double value_of(const Perturbation& perturbation) {
  return std::visit(Overloaded{[](const Multiplicative& p) { return p.factor; },
                               [](const Additive& p) { return p.offset; },
                               [](const SystematicBias& p) { return p.slope; },
                               [](const LogNormalNoise& p) { return p.sigma; }},
                    perturbation);
}

Perturbation make_perturbation(PerturbationKind kind, double value, std::uint64_t seed) {
  switch (kind) {
    case PerturbationKind::Multiplicative:
      return Multiplicative{value};
    case PerturbationKind::Additive:
      return Additive{value};
    case PerturbationKind::SystematicBias:
      return SystematicBias{value};
    case PerturbationKind::LogNormalNoise:
      return LogNormalNoise{value, seed};
  }
  throw InputError("unknown perturbation kind");
}

void validate(const Perturbation& perturbation) {
  std::visit(Overloaded{[](const Multiplicative& p) {
                          if (!(std::isfinite(p.factor) && p.factor > 0.0)) {
                            throw InputError("multiplicative factor must be positive");
                          }
                        },
                        [](const Additive& p) {
                          if (!std::isfinite(p.offset)) {
                            throw InputError("additive offset must be finite");
                          }
                        },
                        [](const SystematicBias& p) {
                          if (!(std::isfinite(p.slope) && p.slope > 0.0)) {
                            throw InputError("systematic bias slope must be positive");
                          }
                        },
                        [](const LogNormalNoise& p) {
                          if (!(std::isfinite(p.sigma) && p.sigma >= 0.0)) {
                            throw InputError("noise sigma must be nonnegative");
                          }
                        }},
             perturbation);
}

double geometric_mean(std::span<const double> counts) {
  if (counts.empty()) throw InputError("geometric mean of an empty list");
  double sum = 0.0;
  for (double n : counts) {
    if (!(n > 0.0)) throw InputError("geometric mean needs positive values");
    sum += std::log(n);
  }
  return std::exp(sum / static_cast<double>(counts.size()));
}

std::vector<double> apply(const Perturbation& perturbation, std::span<const double> counts) {
  validate(perturbation);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!(counts[i] > 0.0) || !std::isfinite(counts[i])) {
      throw InputError("parameter count at index " + std::to_string(i) +
                       " must be positive and finite");
    }
  }
  std::vector<double> out(counts.begin(), counts.end());
  std::visit(Overloaded{[&](const Multiplicative& p) {
                          for (double& n : out) n *= p.factor;
                        },
                        [&](const Additive& p) {
                          for (double& n : out) n += p.offset;
                        },
                        [&](const SystematicBias& p) {
                          // slope 1 is the identity; skip the round trip through mu.
                          if (p.slope == 1.0 || out.empty()) return;
                          const double mu = geometric_mean(counts);
                          for (double& n : out) n = mu * std::pow(n / mu, p.slope);
                        },
                        [&](const LogNormalNoise& p) {
                          if (p.sigma == 0.0) return;
                          std::mt19937_64 rng(p.seed);
                          std::normal_distribution<double> normal(0.0, 1.0);
                          for (double& n : out) n *= std::exp(p.sigma * normal(rng));
                        }},
             perturbation);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0) || !std::isfinite(out[i])) {
      throw InputError("perturbed parameter count at index " + std::to_string(i) +
                       " is not positive and finite (" + std::to_string(out[i]) + ")");
    }
  }
  return out;
}

void validate(const SweepGrid& grid) {
  if (grid.points.empty()) throw InputError("sweep grid is empty");
  for (const Perturbation& p : grid.points) {
    if (kind_of(p) != grid.kind) throw InputError("sweep grid mixes perturbation kinds");
  }
}

SweepGrid make_grid(PerturbationKind kind, std::span<const double> values,
                    std::uint64_t noise_seed) {
  SweepGrid grid;
  grid.kind = kind;
  for (double value : values) grid.points.push_back(make_perturbation(kind, value, noise_seed));
  return grid;
}

SweepGrid default_sweep(PerturbationKind kind, std::uint64_t noise_seed, int noise_points) {
  std::vector<double> values;
  switch (kind) {
    case PerturbationKind::Multiplicative:
      values = logspace(-3.0, 3.0, 11);
      break;
    case PerturbationKind::Additive: {
      const std::vector<double> magnitudes = logspace(6.6, 7.6, 5);
      for (auto it = magnitudes.rbegin(); it != magnitudes.rend(); ++it) values.push_back(-*it);
      values.push_back(0.0);
      values.insert(values.end(), magnitudes.begin(), magnitudes.end());
      break;
    }
    case PerturbationKind::SystematicBias:
      values = logspace(-0.5, 0.5, 11);
      break;
    case PerturbationKind::LogNormalNoise:
      values = logspace(-2.0, 2.0, noise_points);
      break;
  }
  return make_grid(kind, values, noise_seed);
}

}  // namespace chinchilla
