#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chinchilla/arch_params.hpp"
#include "chinchilla/fit_engine.hpp"

namespace chinchilla {

// Header plus rows of string cells. Parsing accepts LF or CRLF endings, a
// UTF-8 byte-order mark, and double-quoted cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or -1.
  int column(std::string_view name) const;
  friend bool operator==(const CsvTable&, const CsvTable&) = default;
};

CsvTable parse_csv(std::string_view text, std::string_view source = "<memory>");
std::string format_csv(const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

// Shortest decimal that round-trips through strtod; "nan", "inf", "-inf" for
// non-finite values.
std::string format_number(double value);
// Strict decimal parse (no thousands separators, no trailing text).
double parse_number(std::string_view cell, std::size_t row, std::string_view column);

// Writes header + rows. Throws InputError when there are no rows or the path
// is not writable.
void write_results_csv(const CsvTable& records, const std::filesystem::path& path);

// Run files: header reported_params,training_tokens,loss with optional
// run_id, in any column order. Errors name the 1-based data row.
RunDataset parse_runs(std::string_view text, std::string_view source = "<memory>");
RunDataset load_runs(const std::filesystem::path& path);
CsvTable runs_to_csv(const RunDataset& dataset);

// Architecture tables: d_model,ffw_size,kv_size,n_heads,n_layers,n_vocab,
// reported_params_millions.
std::string_view embedded_arch_csv();
std::vector<ArchSpec> embedded_arch_table();
std::vector<ArchSpec> parse_arch_table(std::string_view text,
                                       std::string_view source = "<memory>");
std::vector<ArchSpec> load_arch_table(const std::filesystem::path& path);
// "embedded" selects the built-in table, anything else is a path.
std::vector<ArchSpec> load_arch_source(std::string_view source);

// Looks up the computed counts of a model from its reported size, keyed by
// the reported count rounded to the nearest million.
class InterpretationMap {
 public:
  struct Entry {
    ParamCount reported = 0;
    ParamCount standard = 0;
    ParamCount bestfit = 0;

    ParamCount count(ParamInterpretation interpretation) const;
  };

  // Throws InputError when two rows share a key.
  explicit InterpretationMap(std::span<const ArchSpec> table);

  const Entry* find(double reported_params) const;
  std::size_t size() const { return by_million_.size(); }

 private:
  std::map<long long, Entry> by_million_;
};

// Replaces every run's n_params with the count under the interpretation.
// Runs already carrying an exact count of that interpretation are kept, so
// remapping twice equals remapping once. Throws InputError listing the
// counts that match no table row.
RunDataset remap_params(const RunDataset& dataset, ParamInterpretation interpretation,
                        std::span<const ArchSpec> table);

}  // namespace chinchilla
