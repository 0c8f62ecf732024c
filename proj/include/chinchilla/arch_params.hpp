#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace chinchilla {

using ParamCount = std::int64_t;

// One row of an architecture table. reported_params is in raw units even
// though the published table prints millions.
struct ArchSpec {
  std::int64_t d_model = 0;
  std::int64_t ffw_size = 0;
  std::int64_t kv_size = 0;
  std::int64_t n_heads = 0;
  std::int64_t n_layers = 0;
  std::int64_t n_vocab = 0;
  ParamCount reported_params = 0;

  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

// Throws InputError unless every field is strictly positive.
void validate(const ArchSpec& arch);

enum class ParamInterpretation { Reported, StandardFormula, BestFitFormula };

std::string_view to_string(ParamInterpretation interpretation);
// Accepts "reported", "standard" and "bestfit".
ParamInterpretation parse_interpretation(std::string_view text);

// Tied embeddings, no gating:
//   n_vocab*d_model + n_layers*(4*d_model*kv_size*n_heads) + n_layers*(2*d_model*ffw_size)
// Exact 64-bit arithmetic; throws std::overflow_error if the count does not
// fit. Zero-sized fields are allowed here (n_layers = 0 gives the embedding
// count), negative ones are rejected.
ParamCount standard_param_count(const ArchSpec& arch);

// Same as standard_param_count with an attention coefficient of 5.
ParamCount bestfit_param_count(const ArchSpec& arch);

ParamCount param_count(const ArchSpec& arch, ParamInterpretation interpretation);

// Signed percent error 100*(reported - computed)/reported. Throws
// InputError when reported == 0.
double relative_error(double reported, double computed);

// A row counts as a mismatch when |relative error| exceeds this many percent.
inline constexpr double kMismatchThresholdPercent = 1.0;

struct RowComparison {
  ParamCount reported = 0;
  ParamCount computed = 0;
  double relative_error_percent = 0.0;  // signed
  bool mismatch = false;
};

struct ComparisonReport {
  ParamInterpretation interpretation = ParamInterpretation::Reported;
  std::vector<RowComparison> rows;
  int mismatch_count = 0;
  // Statistics over |relative error|.
  double mean_rel_error = 0.0;
  double max_rel_error = 0.0;
  double min_rel_error = 0.0;
  std::size_t max_row = 0;
  std::size_t min_row = 0;
};

// Throws InputError on an empty table.
ComparisonReport compare_table(std::span<const ArchSpec> table,
                               ParamInterpretation interpretation);

}  // namespace chinchilla
