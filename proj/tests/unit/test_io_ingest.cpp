#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "chinchilla/errors.hpp"
#include "chinchilla/io_ingest.hpp"
#include "helpers.hpp"

using namespace chinchilla;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "chinchilla_unit";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("embedded architecture table") {
  const auto table = embedded_arch_table();
  REQUIRE(table.size() == 50);
  CHECK(table.front().d_model == 512);
  CHECK(table.back().d_model == 5120);
  for (const ArchSpec& a : table) CHECK(a.n_vocab == 32168);
  const long long millions = std::accumulate(
      table.begin(), table.end(), 0LL,
      [](long long s, const ArchSpec& a) { return s + a.reported_params / 1'000'000; });
  CHECK(millions == 146954);
  for (const ArchSpec& a : table) CHECK(a.reported_params % 1'000'000 == 0);

  CHECK(load_arch_table(testing::data_path("table_a9.csv")) == table);
  CHECK(load_arch_source("embedded") == table);
}

TEST_CASE("architecture table errors") {
  CHECK_THROWS_AS(parse_arch_table(""), InputError);
  const std::string header =
      "d_model,ffw_size,kv_size,n_heads,n_layers,n_vocab,reported_params_millions\n";
  CHECK_THROWS_AS(parse_arch_table(header), InputError);
  try {
    parse_arch_table(header + "512,2048,64,8,8,32168,44\n512,2048,x,8,8,32168,44\n", "t.csv");
    FAIL("expected a parse error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_arch_table(header + "512,2048,0,8,8,32168,44\n"), InputError);
  CHECK_THROWS_AS(load_arch_table(scratch("missing_table.csv")), InputError);
}

TEST_CASE("run files") {
  const std::string lf =
      "reported_params,training_tokens,loss\n44000000,1e9,3.5\n57000000,2e9,3.2\n"
      "74000000,3e9,3.1\n";
  const RunDataset d = parse_runs(lf);
  REQUIRE(d.size() == 3);
  CHECK(d.runs[1].n_params == 57e6);
  CHECK(d.runs[2].loss == 3.1);

  std::string crlf;
  for (char c : lf) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  CHECK(parse_runs(crlf) == d);
  CHECK(parse_runs("\xEF\xBB\xBF" + lf) == d);

  const RunDataset reordered =
      parse_runs("run_id,loss,training_tokens,reported_params\nx,3.5,1e9,44000000\n");
  CHECK(reordered.runs[0].run_id == "x");
  CHECK(reordered.runs[0].n_params == 44e6);
}

TEST_CASE("run file errors name the row") {
  const std::string head = "reported_params,training_tokens,loss\n";
  try {
    parse_runs(head + "44000000,1e9,3.5\n57000000,2e9,0\n", "runs.csv");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_runs(head + "44000000,1e9,abc\n"), InputError);
  CHECK_THROWS_AS(parse_runs(head + "44,000,000,1e9,3\n"), InputError);
  CHECK_THROWS_AS(parse_runs("reported_params,loss\n1,2\n"), InputError);
  CHECK_THROWS_AS(parse_runs(head + "44000000,1e9,3.5 extra\n"), InputError);
  CHECK_THROWS_AS(load_runs(scratch("nope.csv")), InputError);
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 146954.0}) {
    CHECK(parse_number(format_number(v), 1, "x") == v);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(NAN) == "nan");
  CHECK(format_number(INFINITY) == "inf");
  CHECK(format_number(-INFINITY) == "-inf");
}

TEST_CASE("csv round trip through a file") {
  const RunDataset fixture = load_runs(testing::data_path("fixture_runs.csv"));
  CHECK(fixture.size() == 60);
  const fs::path out = scratch("roundtrip.csv");
  write_results_csv(runs_to_csv(fixture), out);
  CHECK(load_runs(out) == fixture);

  const std::string first = slurp(out);
  write_results_csv(runs_to_csv(fixture), out);
  CHECK(slurp(out) == first);

  CsvTable quoted{{"name", "note"}, {{"a,b", "say \"hi\""}, {"plain", ""}}};
  CHECK(parse_csv(format_csv(quoted)) == quoted);

  CHECK_THROWS_AS(write_results_csv(CsvTable{{"a"}, {}}, scratch("empty.csv")), InputError);
  CHECK_THROWS_AS(write_results_csv(quoted, "/nonexistent_dir/x/y.csv"), InputError);
}

TEST_CASE("remapping between interpretations") {
  const auto table = embedded_arch_table();
  RunDataset d;
  d.runs.push_back({44e6, 1e9, 3.5, "a"});
  d.runs.push_back({16'183e6, 1e11, 2.1, "b"});

  CHECK(remap_params(d, ParamInterpretation::Reported, table) == d);
  const RunDataset standard = remap_params(d, ParamInterpretation::StandardFormula, table);
  CHECK(standard.runs[0].n_params == 41'635'840.0);
  CHECK(standard.runs[1].n_params == 14'949'621'760.0);
  CHECK(standard.runs[0].run_id == "a");
  const RunDataset bestfit = remap_params(d, ParamInterpretation::BestFitFormula, table);
  CHECK(bestfit.runs[0].n_params == 43'732'992.0);

  CHECK(remap_params(standard, ParamInterpretation::StandardFormula, table) == standard);
  CHECK(remap_params(bestfit, ParamInterpretation::BestFitFormula, table) == bestfit);

  RunDataset orphan = d;
  orphan.runs.push_back({999e6, 1e9, 3.0, ""});
  try {
    remap_params(orphan, ParamInterpretation::StandardFormula, table);
    FAIL("expected an orphan error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("999000000") != std::string::npos);
  }

  std::vector<ArchSpec> dup{table[0], table[0]};
  CHECK_THROWS_AS(InterpretationMap{dup}, InputError);
  const InterpretationMap map(table);
  CHECK(map.size() == 50);
  REQUIRE(map.find(44.2e6) != nullptr);
  CHECK(map.find(44.2e6)->standard == 41'635'840);
  CHECK(map.find(999e6) == nullptr);
}

TEST_CASE("shipped fixture matches the generator") {
  const fs::path out = scratch("fixture_regen.csv");
  const std::string cmd = std::string("\"") + CHINCHILLA_MAKE_FIXTURE + "\" \"" + out.string() + "\"";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(slurp(out) == slurp(testing::data_path("fixture_runs.csv")));
}
