#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace chinchilla {

// N -> factor * N
struct Multiplicative {
  double factor = 1.0;
};

// N -> offset + N
struct Additive {
  double offset = 0.0;
};

// N -> mu * (N / mu)^slope, mu the geometric mean of the counts
struct SystematicBias {
  double slope = 1.0;
};

// N -> exp(delta) * N, delta ~ Normal(0, sigma^2) drawn from seed
struct LogNormalNoise {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

using Perturbation = std::variant<Multiplicative, Additive, SystematicBias, LogNormalNoise>;

enum class PerturbationKind { Multiplicative, Additive, SystematicBias, LogNormalNoise };

std::string_view to_string(PerturbationKind kind);
// Accepts "multiplicative", "additive", "systematic" and "lognormal".
PerturbationKind parse_kind(std::string_view text);

PerturbationKind kind_of(const Perturbation& perturbation);
// The swept scalar: factor, offset, slope or sigma.
double value_of(const Perturbation& perturbation);
Perturbation make_perturbation(PerturbationKind kind, double value, std::uint64_t seed = 0);

// Throws InputError unless factor > 0, slope > 0 and sigma >= 0 (all finite).
void validate(const Perturbation& perturbation);

// exp(mean(ln N)), which does not overflow for large tables.
double geometric_mean(std::span<const double> counts);

// Perturbs every count; output order matches input order. The noise variant
// draws one delta per element, so callers pass one entry per model. Throws
// InputError when any input is nonpositive or when a perturbed count is not
// positive (the message names the offending index).
std::vector<double> apply(const Perturbation& perturbation, std::span<const double> counts);

struct SweepGrid {
  PerturbationKind kind = PerturbationKind::Multiplicative;
  std::vector<Perturbation> points;
};

// Throws InputError for an empty grid or mixed variants.
void validate(const SweepGrid& grid);

// Grid of one kind from explicit values (noise points share noise_seed).
SweepGrid make_grid(PerturbationKind kind, std::span<const double> values,
                    std::uint64_t noise_seed = 0);

// Multiplicative: logspace(-3, 3, 11). Additive: -logspace(6.6, 7.6, 5),
// 0, logspace(6.6, 7.6, 5), ascending. SystematicBias: logspace(-0.5, 0.5,
// 11). LogNormalNoise: logspace(-2, 2, noise_points), all using noise_seed.
SweepGrid default_sweep(PerturbationKind kind, std::uint64_t noise_seed = 0,
                        int noise_points = 9);

}  // namespace chinchilla
