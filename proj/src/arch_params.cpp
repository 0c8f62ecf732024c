#include "chinchilla/arch_params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "chinchilla/errors.hpp"

namespace chinchilla {
namespace {

std::int64_t checked_mul(std::int64_t lhs, std::int64_t rhs) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(lhs, rhs, &out)) {
    throw std::overflow_error("parameter count overflows 64-bit integer");
  }
  return out;
}

std::int64_t checked_add(std::int64_t lhs, std::int64_t rhs) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(lhs, rhs, &out)) {
    throw std::overflow_error("parameter count overflows 64-bit integer");
  }
  return out;
}

ParamCount formula_count(const ArchSpec& arch, std::int64_t attention_coefficient) {
  if (arch.d_model < 0 || arch.ffw_size < 0 || arch.kv_size < 0 || arch.n_heads < 0 ||
      arch.n_layers < 0 || arch.n_vocab < 0) {
    throw InputError("architecture fields must be nonnegative");
  }
  const std::int64_t embedding = checked_mul(arch.n_vocab, arch.d_model);
  const std::int64_t attention = checked_mul(
      arch.n_layers,
      checked_mul(checked_mul(checked_mul(attention_coefficient, arch.d_model), arch.kv_size),
                  arch.n_heads));
  const std::int64_t ffn =
      checked_mul(arch.n_layers, checked_mul(checked_mul(2, arch.d_model), arch.ffw_size));
  return checked_add(checked_add(embedding, attention), ffn);
}

}  // namespace

void validate(const ArchSpec& arch) {
  if (arch.d_model <= 0 || arch.ffw_size <= 0 || arch.kv_size <= 0 || arch.n_heads <= 0 ||
      arch.n_layers <= 0 || arch.n_vocab <= 0 || arch.reported_params <= 0) {
    throw InputError("architecture fields must all be strictly positive");
  }
}

std::string_view to_string(ParamInterpretation interpretation) {
  switch (interpretation) {
    case ParamInterpretation::Reported:
      return "reported";
    case ParamInterpretation::StandardFormula:
      return "standard";
    case ParamInterpretation::BestFitFormula:
      return "bestfit";
  }
  return "unknown";
}

ParamInterpretation parse_interpretation(std::string_view text) {
  if (text == "reported") return ParamInterpretation::Reported;
  if (text == "standard") return ParamInterpretation::StandardFormula;
  if (text == "bestfit") return ParamInterpretation::BestFitFormula;
  throw InputError("unknown parameter interpretation '" + std::string(text) +
                   "' (expected reported|standard|bestfit)");
}

ParamCount standard_param_count(const ArchSpec& arch) { return formula_count(arch, 4); }

ParamCount bestfit_param_count(const ArchSpec& arch) { return formula_count(arch, 5); }

ParamCount param_count(const ArchSpec& arch, ParamInterpretation interpretation) {
  switch (interpretation) {
    case ParamInterpretation::Reported:
      return arch.reported_params;
    case ParamInterpretation::StandardFormula:
      return standard_param_count(arch);
    case ParamInterpretation::BestFitFormula:
      return bestfit_param_count(arch);
  }
  throw InputError("unknown parameter interpretation");
}

double relative_error(double reported, double computed) {
  if (reported == 0.0) {
    throw InputError("relative error is undefined for a reported count of zero");
  }
  return 100.0 * (reported - computed) / reported;
}

ComparisonReport compare_table(std::span<const ArchSpec> table,
                               ParamInterpretation interpretation) {
  if (table.empty()) {
    throw InputError("cannot compare an empty architecture table");
  }
  ComparisonReport report;
  report.interpretation = interpretation;
  report.rows.reserve(table.size());

  double sum = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const ArchSpec& arch = table[i];
    RowComparison row;
    row.reported = arch.reported_params;
    row.computed = param_count(arch, interpretation);
    row.relative_error_percent = relative_error(static_cast<double>(row.reported),
                                                static_cast<double>(row.computed));
    const double magnitude = std::abs(row.relative_error_percent);
    row.mismatch = magnitude > kMismatchThresholdPercent;
    report.mismatch_count += row.mismatch ? 1 : 0;
    sum += magnitude;
    if (i == 0 || magnitude > report.max_rel_error) {
      report.max_rel_error = magnitude;
      report.max_row = i;
    }
    if (i == 0 || magnitude < report.min_rel_error) {
      report.min_rel_error = magnitude;
      report.min_row = i;
    }
    report.rows.push_back(row);
  }
  report.mean_rel_error = sum / static_cast<double>(table.size());
  return report;
}

}  // namespace chinchilla
