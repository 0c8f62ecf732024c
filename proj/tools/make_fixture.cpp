// Regenerates data/fixture_runs.csv, the synthetic run set shipped for tests
// and demos. Usage: make_fixture OUT.csv
#include <cstdio>
#include <exception>
#include <vector>

#include "chinchilla/io_ingest.hpp"
#include "chinchilla/numeric.hpp"
#include "chinchilla/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s OUT.csv\n", argv[0]);
    return 2;
  }
  try {
    using namespace chinchilla;
    // Model sizes are reported counts of Table A9 so the fixture can be
    // remapped to the formula interpretations.
    const std::vector<ArchSpec> table = embedded_arch_table();
    std::vector<double> sizes;
    for (std::size_t row : {0, 4, 8, 12, 16, 20, 24, 28, 32, 38, 44, 49}) {
      sizes.push_back(static_cast<double>(table[row].reported_params));
    }
    const std::vector<double> tokens = logspace(9.7, 11.7, 5);
    const ScalingLawParams truth{1.8, 500.0, 0.35, 1500.0, 0.35};
    const RunDataset runs = synthesize_runs(truth, sizes, tokens, 5e-4, 20240917);
    write_results_csv(runs_to_csv(runs), argv[1]);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "make_fixture: %s\n", e.what());
    return 2;
  }
  return 0;
}
