#include "chinchilla/io_ingest.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "chinchilla/errors.hpp"

namespace chinchilla {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string at_row(std::string_view source, std::size_t row) {
  return std::string(source) + ": row " + std::to_string(row);
}

std::vector<std::string> split_line(std::string_view line, std::string_view source,
                                    std::size_t row) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  if (quoted) throw InputError(at_row(source, row) + ": unterminated quote");
  cells.push_back(std::move(cell));
  return cells;
}

std::string quote_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char ch : cell) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

long long parse_integer(std::string_view cell, std::string_view source, std::size_t row,
                        std::string_view column) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw InputError(at_row(source, row) + ": column '" + std::string(column) +
                     "' is not an integer ('" + std::string(cell) + "')");
  }
  return value;
}

}  // namespace

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable parse_csv(std::string_view text, std::string_view source) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  CsvTable table;
  bool have_header = false;
  std::size_t row = 0;
  while (!text.empty()) {
    const std::size_t end = text.find('\n');
    std::string_view line = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    if (line.ends_with('\r')) line.remove_suffix(1);
    if (line.empty()) continue;
    if (!have_header) {
      table.header = split_line(line, source, 0);
      have_header = true;
      continue;
    }
    ++row;
    auto cells = split_line(line, source, row);
    if (cells.size() != table.header.size()) {
      throw InputError(at_row(source, row) + ": expected " +
                       std::to_string(table.header.size()) + " cells, found " +
                       std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw InputError(std::string(source) + ": file is empty");
  return table;
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += quote_cell(cells[i]);
    }
    out.push_back('\n');
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_file(path), path.string());
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

double parse_number(std::string_view cell, std::size_t row, std::string_view column) {
  if (cell == "nan") return std::nan("");
  if (cell == "inf") return HUGE_VAL;
  if (cell == "-inf") return -HUGE_VAL;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw InputError("row " + std::to_string(row) + ": column '" + std::string(column) +
                     "' is not a number ('" + std::string(cell) + "')");
  }
  return value;
}

void write_results_csv(const CsvTable& records, const std::filesystem::path& path) {
  if (records.rows.empty()) throw InputError("refusing to write an empty record list");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << format_csv(records);
  if (!out) throw InputError("failed while writing '" + path.string() + "'");
}

RunDataset parse_runs(std::string_view text, std::string_view source) {
  const CsvTable table = parse_csv(text, source);
  const int n_col = table.column("reported_params");
  const int d_col = table.column("training_tokens");
  const int l_col = table.column("loss");
  const int id_col = table.column("run_id");
  for (const char* name : {"reported_params", "training_tokens", "loss"}) {
    if (table.column(name) < 0) {
      throw InputError(std::string(source) + ": missing column '" + name + "'");
    }
  }
  for (const std::string& name : table.header) {
    if (name != "reported_params" && name != "training_tokens" && name != "loss" &&
        name != "run_id") {
      throw InputError(std::string(source) + ": unexpected column '" + name + "'");
    }
  }
  RunDataset dataset;
  dataset.runs.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    const std::size_t row = r + 1;
    TrainingRun run;
    try {
      run.n_params = parse_number(cells[static_cast<std::size_t>(n_col)], row, "reported_params");
      run.d_tokens = parse_number(cells[static_cast<std::size_t>(d_col)], row, "training_tokens");
      run.loss = parse_number(cells[static_cast<std::size_t>(l_col)], row, "loss");
    } catch (const InputError& e) {
      throw InputError(std::string(source) + ": " + e.what());
    }
    for (double v : {run.n_params, run.d_tokens, run.loss}) {
      if (!std::isfinite(v) || !(v > 0.0)) {
        throw InputError(at_row(source, row) + ": values must be positive and finite");
      }
    }
    if (id_col >= 0) run.run_id = cells[static_cast<std::size_t>(id_col)];
    dataset.runs.push_back(std::move(run));
  }
  return dataset;
}

RunDataset load_runs(const std::filesystem::path& path) {
  return parse_runs(read_file(path), path.string());
}

CsvTable runs_to_csv(const RunDataset& dataset) {
  CsvTable table;
  table.header = {"reported_params", "training_tokens", "loss", "run_id"};
  for (const TrainingRun& run : dataset.runs) {
    table.rows.push_back({format_number(run.n_params), format_number(run.d_tokens),
                          format_number(run.loss), run.run_id});
  }
  return table;
}

std::vector<ArchSpec> embedded_arch_table() {
  return parse_arch_table(embedded_arch_csv(), "embedded Table A9");
}

std::vector<ArchSpec> parse_arch_table(std::string_view text, std::string_view source) {
  const CsvTable table = parse_csv(text, source);
  static const std::vector<std::string> kColumns{
      "d_model", "ffw_size", "kv_size", "n_heads", "n_layers", "n_vocab",
      "reported_params_millions"};
  if (table.header != kColumns) {
    throw InputError(std::string(source) +
                     ": expected header d_model,ffw_size,kv_size,n_heads,n_layers,n_vocab,"
                     "reported_params_millions");
  }
  if (table.rows.empty()) throw InputError(std::string(source) + ": table has no rows");
  std::vector<ArchSpec> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    const std::size_t row = r + 1;
    std::array<long long, 7> v{};
    for (std::size_t c = 0; c < 7; ++c) v[c] = parse_integer(cells[c], source, row, kColumns[c]);
    ArchSpec arch{v[0], v[1], v[2], v[3], v[4], v[5], 0};
    if (v[6] <= 0 || v[6] > 9'000'000'000'000LL) {
      throw InputError(at_row(source, row) + ": reported_params_millions out of range");
    }
    arch.reported_params = v[6] * 1'000'000;
    try {
      validate(arch);
    } catch (const InputError& e) {
      throw InputError(at_row(source, row) + ": " + e.what());
    }
    out.push_back(arch);
  }
  return out;
}

std::vector<ArchSpec> load_arch_table(const std::filesystem::path& path) {
  return parse_arch_table(read_file(path), path.string());
}

std::vector<ArchSpec> load_arch_source(std::string_view source) {
  if (source == "embedded") return embedded_arch_table();
  return load_arch_table(std::filesystem::path(std::string(source)));
}

ParamCount InterpretationMap::Entry::count(ParamInterpretation interpretation) const {
  switch (interpretation) {
    case ParamInterpretation::Reported:
      return reported;
    case ParamInterpretation::StandardFormula:
      return standard;
    case ParamInterpretation::BestFitFormula:
      return bestfit;
  }
  return reported;
}

InterpretationMap::InterpretationMap(std::span<const ArchSpec> table) {
  for (const ArchSpec& arch : table) {
    const long long key = std::llround(static_cast<double>(arch.reported_params) / 1e6);
    Entry entry{arch.reported_params, standard_param_count(arch), bestfit_param_count(arch)};
    if (!by_million_.emplace(key, entry).second) {
      throw InputError("architecture table has two rows reporting " + std::to_string(key) +
                       "M parameters");
    }
  }
}

const InterpretationMap::Entry* InterpretationMap::find(double reported_params) const {
  if (!std::isfinite(reported_params)) return nullptr;
  const auto it = by_million_.find(std::llround(reported_params / 1e6));
  return it == by_million_.end() ? nullptr : &it->second;
}

RunDataset remap_params(const RunDataset& dataset, ParamInterpretation interpretation,
                        std::span<const ArchSpec> table) {
  if (interpretation == ParamInterpretation::Reported) return dataset;
  const InterpretationMap map(table);
  std::set<double> targets;
  for (const ArchSpec& arch : table) {
    targets.insert(static_cast<double>(param_count(arch, interpretation)));
  }
  RunDataset out = dataset;
  std::set<double> orphans;
  for (TrainingRun& run : out.runs) {
    if (targets.contains(run.n_params)) continue;
    const auto* entry = map.find(run.n_params);
    if (entry == nullptr) {
      orphans.insert(run.n_params);
      continue;
    }
    run.n_params = static_cast<double>(entry->count(interpretation));
  }
  if (!orphans.empty()) {
    std::string list;
    for (double n : orphans) {
      if (!list.empty()) list += ", ";
      list += (n == std::floor(n) && n < 1e18) ? std::to_string(std::llround(n)) : format_number(n);
    }
    throw InputError("no architecture row matches parameter count(s): " + list);
  }
  return out;
}

}  // namespace chinchilla
