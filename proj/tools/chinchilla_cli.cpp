// Command-line front end: parameter-count comparison, scaling-law fits,
// tokens-per-parameter curves and perturbation sweeps.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chinchilla/arch_params.hpp"
#include "chinchilla/errors.hpp"
#include "chinchilla/fit_engine.hpp"
#include "chinchilla/io_ingest.hpp"
#include "chinchilla/numeric.hpp"
#include "chinchilla/perturb.hpp"
#include "chinchilla/scaling_model.hpp"
#include "chinchilla/sensitivity.hpp"
#include "chinchilla/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace chinchilla;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

// Reference budgets reported per sweep point.
constexpr std::array<double, 3> kReferenceBudgets{1e21, 1e23, 1e25};
constexpr std::array<const char*, 3> kReferenceColumns{"ratio_1e21", "ratio_1e23", "ratio_1e25"};

struct Options {
  std::string runs;
  std::string arch = "embedded";
  std::vector<std::string> interpretations;
  std::uint64_t seed = 0;
  int bootstrap = 4000;
  double ci = 0.80;
  std::string out = "out";
  std::string kind;
  std::string grid;
  double compute_min = 1e18;
  double compute_max = 1e26;
  int compute_points = 50;
  double flops_per_param_token = 6.0;
};

std::vector<ParamInterpretation> interpretations(const Options& opt) {
  std::vector<ParamInterpretation> out;
  for (const std::string& name : opt.interpretations) {
    const ParamInterpretation interp = parse_interpretation(name);
    if (std::find(out.begin(), out.end(), interp) == out.end()) out.push_back(interp);
  }
  if (out.empty()) out.push_back(ParamInterpretation::Reported);
  return out;
}

std::vector<double> compute_grid(const Options& opt) {
  if (!(opt.compute_min > 0.0) || !(opt.compute_max > opt.compute_min) ||
      opt.compute_points < 2) {
    throw InputError("compute grid needs 0 < compute-min < compute-max and >= 2 points");
  }
  return logspace(std::log10(opt.compute_min), std::log10(opt.compute_max),
                  opt.compute_points);
}

ComputeModel compute_model(const Options& opt) {
  if (!(opt.flops_per_param_token > 0.0)) {
    throw InputError("--flops-per-param-token must be positive");
  }
  return {opt.flops_per_param_token};
}

std::optional<BootstrapConfig> bootstrap_config(const Options& opt) {
  if (opt.bootstrap < 0) throw InputError("--bootstrap must be nonnegative");
  if (!(opt.ci > 0.0 && opt.ci < 1.0)) throw InputError("--ci must lie in (0, 1)");
  if (opt.bootstrap == 0) return std::nullopt;
  BootstrapConfig boot;
  boot.n_resamples = opt.bootstrap;
  boot.seed = opt.seed;
  boot.ci_level = opt.ci;
  return boot;
}

FitConfig fit_config(const Options& opt) {
  FitConfig config;
  config.seed = opt.seed;
  return config;
}

RunDataset load_dataset(const Options& opt, ParamInterpretation interp) {
  if (opt.runs.empty()) throw InputError("--runs is required");
  RunDataset runs = load_runs(opt.runs);
  if (interp == ParamInterpretation::Reported) return runs;
  return remap_params(runs, interp, load_arch_source(opt.arch));
}

fs::path output_dir(const Options& opt) {
  const fs::path dir(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + opt.out + "'");
  return dir;
}

std::string flag(bool value) { return value ? "1" : "0"; }

bool finite_all(const ScalingLawParams& p) {
  const auto v = param_values(p);
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double parse_cell(const CsvTable& table, std::size_t row, const char* column) {
  const int index = table.column(column);
  if (index < 0) throw InputError(std::string("missing column '") + column + "'");
  return parse_number(table.rows[row][static_cast<std::size_t>(index)], row + 1, column);
}

std::string cell(const CsvTable& table, std::size_t row, const char* column) {
  const int index = table.column(column);
  if (index < 0) throw InputError(std::string("missing column '") + column + "'");
  return table.rows[row][static_cast<std::size_t>(index)];
}

// ---------------------------------------------------------------- rendering

// ratio.svg from ratio.csv: one line per interpretation, shaded CI if present.
void render_ratio(const CsvTable& table, const fs::path& path) {
  std::vector<Series> series;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string name = cell(table, r, "interpretation");
    auto [it, inserted] = index.emplace(name, series.size());
    if (inserted) {
      series.emplace_back();
      series.back().label = name;
    }
    Series& s = series[it->second];
    s.x.push_back(parse_cell(table, r, "compute"));
    s.y.push_back(parse_cell(table, r, "ratio"));
    s.lower.push_back(parse_cell(table, r, "ratio_lower"));
    s.upper.push_back(parse_cell(table, r, "ratio_upper"));
  }
  for (Series& s : series) {
    const bool any = std::any_of(s.lower.begin(), s.lower.end(),
                                 [](double v) { return std::isfinite(v); });
    if (!any) {
      s.lower.clear();
      s.upper.clear();
    }
  }
  PlotStyle style{"Compute-optimal tokens per parameter", "Compute (FLOPs)",
                  "Tokens per parameter", true, true};
  write_svg_plot(series, style, path);
}

// sweep_<kind>_params.svg and sweep_<kind>_ratio.svg from sweep_<kind>.csv.
void render_sweep(const CsvTable& table, const std::string& kind, const Options& opt,
                  const fs::path& dir) {
  const bool log_x = kind != "additive";
  std::vector<Panel> panels;
  for (std::size_t p = 0; p < kParamNames.size(); ++p) {
    const std::string name = kParamNames[p];
    Series s;
    s.label = name;
    s.markers = true;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const double value = parse_cell(table, r, "value");
      const double estimate = parse_cell(table, r, name.c_str());
      const double se = parse_cell(table, r, ("se_" + name).c_str());
      s.x.push_back(value);
      s.y.push_back(estimate);
      s.lower.push_back(estimate - se);
      s.upper.push_back(estimate + se);
    }
    const bool log_y = name == "A" || name == "B";
    panels.push_back(Panel{PlotStyle{"Fitted " + name + " (" + kind + ")", "perturbation value",
                                     name, log_x, log_y},
                           {s}});
  }
  write_svg_panels(panels, 3, dir / ("sweep_" + kind + "_params.svg"));

  const std::vector<double> budgets = compute_grid(opt);
  const ComputeModel model = compute_model(opt);
  std::vector<Series> curves;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const ScalingLawParams params{parse_cell(table, r, "E"), parse_cell(table, r, "A"),
                                  parse_cell(table, r, "alpha"), parse_cell(table, r, "B"),
                                  parse_cell(table, r, "beta")};
    Series s;
    s.label = kind + " = " + cell(table, r, "value");
    s.x = budgets;
    for (double c : budgets) {
      double ratio = std::nan("");
      try {
        ratio = tokens_per_param(params, c, model);
      } catch (const InputError&) {
      }
      s.y.push_back(ratio);
    }
    curves.push_back(std::move(s));
  }
  PlotStyle style{"Tokens per parameter under " + kind + " perturbation", "Compute (FLOPs)",
                  "Tokens per parameter", true, true};
  write_svg_plot(curves, style, dir / ("sweep_" + kind + "_ratio.svg"));
}

// ---------------------------------------------------------------- commands

int run_params_compare(const Options& opt) {
  const std::vector<ArchSpec> table = load_arch_source(opt.arch);
  const ComparisonReport standard = compare_table(table, ParamInterpretation::StandardFormula);
  const ComparisonReport bestfit = compare_table(table, ParamInterpretation::BestFitFormula);

  CsvTable csv;
  csv.header = {"row", "d_model", "ffw_size", "kv_size", "n_heads", "n_layers", "n_vocab",
                "reported_params", "standard_params", "bestfit_params",
                "standard_rel_error_pct", "bestfit_rel_error_pct", "standard_mismatch",
                "bestfit_mismatch"};
  for (std::size_t i = 0; i < table.size(); ++i) {
    const ArchSpec& a = table[i];
    csv.rows.push_back({std::to_string(i + 1), std::to_string(a.d_model),
                        std::to_string(a.ffw_size), std::to_string(a.kv_size),
                        std::to_string(a.n_heads), std::to_string(a.n_layers),
                        std::to_string(a.n_vocab), std::to_string(a.reported_params),
                        std::to_string(standard.rows[i].computed),
                        std::to_string(bestfit.rows[i].computed),
                        format_number(standard.rows[i].relative_error_percent),
                        format_number(bestfit.rows[i].relative_error_percent),
                        flag(standard.rows[i].mismatch), flag(bestfit.rows[i].mismatch)});
  }
  write_results_csv(csv, output_dir(opt) / "params_compare.csv");

  for (const ComparisonReport* report : {&standard, &bestfit}) {
    std::printf("%-8s mismatches %d/%zu  matches %zu/%zu  mean |rel err| %.3f%%  "
                "max %.3f%% (row %zu)  min %.3f%% (row %zu)\n",
                std::string(to_string(report->interpretation)).c_str(), report->mismatch_count,
                table.size(), table.size() - static_cast<std::size_t>(report->mismatch_count),
                table.size(), report->mean_rel_error, report->max_rel_error,
                report->max_row + 1, report->min_rel_error, report->min_row + 1);
  }
  return kExitOk;
}

int run_fit(const Options& opt) {
  const FitConfig config = fit_config(opt);
  const std::optional<BootstrapConfig> boot = bootstrap_config(opt);
  CsvTable fits;
  fits.header = {"interpretation", "E", "A", "alpha", "B", "beta", "log_A", "log_B", "log_E",
                 "objective", "converged", "start_index", "starts_converged", "starts_tried"};
  CsvTable boots;
  boots.header = {"interpretation", "param", "estimate", "se", "ci_lower", "ci_upper",
                  "ci_level", "n_resamples", "n_succeeded", "n_dropped", "flagged", "seed"};
  bool numerical_failure = false;
  for (ParamInterpretation interp : interpretations(opt)) {
    const RunDataset dataset = load_dataset(opt, interp);
    const FitResult result = fit(dataset, config);
    const std::string name(to_string(interp));
    const ScalingLawParams& p = result.params;
    fits.rows.push_back({name, format_number(p.E), format_number(p.A), format_number(p.alpha),
                         format_number(p.B), format_number(p.beta),
                         format_number(result.log_params.a), format_number(result.log_params.b),
                         format_number(result.log_params.e), format_number(result.objective),
                         flag(result.converged), std::to_string(result.start_index),
                         std::to_string(result.starts_converged),
                         std::to_string(result.starts_tried)});
    std::printf("%-8s E=%.4f A=%.4g alpha=%.4f B=%.4g beta=%.4f objective=%.4g%s\n",
                name.c_str(), p.E, p.A, p.alpha, p.B, p.beta, result.objective,
                result.converged ? "" : " (not converged)");
    numerical_failure |= !finite_all(p);
    if (boot) {
      const BootstrapResult b = bootstrap(dataset, config, *boot, result);
      for (std::size_t k = 0; k < 5; ++k) {
        const ParamSummary& s = b.summary[k];
        boots.rows.push_back({name, kParamNames[k], format_number(s.estimate),
                              format_number(s.standard_error), format_number(s.lower),
                              format_number(s.upper), format_number(b.ci_level),
                              std::to_string(b.n_resamples), std::to_string(b.n_succeeded),
                              std::to_string(b.n_dropped), flag(b.flagged),
                              std::to_string(b.seed)});
        std::printf("         %-5s se=%.4g  %.0f%% CI [%.4g, %.4g]\n", kParamNames[k],
                    s.standard_error, 100 * b.ci_level, s.lower, s.upper);
      }
      if (b.flagged) {
        std::printf("         warning: %d of %d resamples failed to fit\n", b.n_dropped,
                    b.n_resamples);
      }
    }
  }
  const fs::path dir = output_dir(opt);
  write_results_csv(fits, dir / "fit.csv");
  if (!boots.rows.empty()) write_results_csv(boots, dir / "bootstrap.csv");
  if (numerical_failure) {
    std::fprintf(stderr, "numerical failure: fitted parameters contain NaN/inf\n");
    return kExitNumerical;
  }
  return kExitOk;
}

int run_ratio(const Options& opt) {
  const FitConfig config = fit_config(opt);
  const std::optional<BootstrapConfig> boot = bootstrap_config(opt);
  const std::vector<double> budgets = compute_grid(opt);
  const ComputeModel model = compute_model(opt);
  CsvTable csv;
  csv.header = {"interpretation", "compute", "ratio", "ratio_lower", "ratio_upper"};
  std::size_t non_finite = 0;
  for (ParamInterpretation interp : interpretations(opt)) {
    const RunDataset dataset = load_dataset(opt, interp);
    const FitResult result = fit(dataset, config);
    const std::vector<double> curve = ratio_curve(result.params, budgets, model);
    std::vector<double> lower(budgets.size(), std::nan(""));
    std::vector<double> upper(budgets.size(), std::nan(""));
    if (boot) {
      const BootstrapResult b = bootstrap(dataset, config, *boot, result);
      for (std::size_t i = 0; i < budgets.size(); ++i) {
        std::vector<double> draws;
        for (const ScalingLawParams& sample : b.samples) {
          double r = std::nan("");
          try {
            r = tokens_per_param(sample, budgets[i], model);
          } catch (const InputError&) {
          }
          if (std::isfinite(r)) draws.push_back(r);
        }
        if (!draws.empty()) {
          lower[i] = quantile(draws, 0.5 * (1.0 - b.ci_level));
          upper[i] = quantile(draws, 0.5 * (1.0 + b.ci_level));
        }
      }
    }
    const std::string name(to_string(interp));
    for (std::size_t i = 0; i < budgets.size(); ++i) {
      non_finite += std::isfinite(curve[i]) ? 0 : 1;
      csv.rows.push_back({name, format_number(budgets[i]), format_number(curve[i]),
                          format_number(lower[i]), format_number(upper[i])});
    }
    const double slope = ratio_slope_per_decade(result.params, model, budgets);
    std::printf("%-8s tokens/param at 1e21=%.3f 1e24=%.3f  slope per decade=%.4f  "
                "exponent=%.4f\n",
                name.c_str(), tokens_per_param(result.params, 1e21, model),
                tokens_per_param(result.params, 1e24, model), slope,
                ratio_exponent(result.params));
  }
  const fs::path dir = output_dir(opt);
  write_results_csv(csv, dir / "ratio.csv");
  render_ratio(csv, dir / "ratio.svg");
  if (non_finite > 0) {
    std::fprintf(stderr, "numerical failure: %zu non-finite ratio values\n", non_finite);
    return kExitNumerical;
  }
  return kExitOk;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> values;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) values.push_back(parse_number(token, 1, "--grid"));
    token.clear();
  };
  for (char ch : text) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == ';') {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  if (values.empty()) throw InputError("--grid is empty");
  return values;
}

int run_sweep_command(const Options& opt) {
  const PerturbationKind kind = parse_kind(opt.kind);
  const ParamInterpretation interp = interpretations(opt).front();
  const RunDataset dataset = load_dataset(opt, interp);

  SweepGrid grid = opt.grid.empty() ? default_sweep(kind, opt.seed)
                                    : make_grid(kind, parse_grid(opt.grid), opt.seed);
  SweepOptions options;
  options.fit = fit_config(opt);
  options.bootstrap = bootstrap_config(opt);
  options.compute = compute_model(opt);
  options.compute_grid = compute_grid(opt);
  const SweepResult result = run_sweep(dataset, grid, options);

  const std::string name(to_string(kind));
  CsvTable csv;
  csv.header = {"kind", "value", "E", "A", "alpha", "B", "beta", "se_E", "se_A", "se_alpha",
                "se_B", "se_beta", kReferenceColumns[0], kReferenceColumns[1],
                kReferenceColumns[2], "slope_per_decade", "nan_flag"};
  std::vector<std::string> flagged;
  for (const SweepPointResult& point : result.points) {
    std::vector<std::string> row{name, format_number(point.value)};
    const double nan = std::nan("");
    const auto params = point.fit ? param_values(point.fit->params)
                                  : std::array<double, 5>{nan, nan, nan, nan, nan};
    for (double v : params) row.push_back(format_number(v));
    for (std::size_t k = 0; k < 5; ++k) {
      // Without bootstrap the SE columns are 0.
      row.push_back(format_number(point.bootstrap ? point.bootstrap->summary[k].standard_error
                                                  : (point.fit ? 0.0 : nan)));
    }
    for (double budget : kReferenceBudgets) {
      double r = nan;
      if (point.fit) {
        try {
          r = tokens_per_param(point.fit->params, budget, options.compute);
        } catch (const InputError&) {
        }
      }
      row.push_back(format_number(r));
    }
    row.push_back(format_number(point.slope_per_decade));
    row.push_back(flag(point.nan_flag));
    csv.rows.push_back(std::move(row));
    if (point.nan_flag) {
      flagged.push_back(format_number(point.value) +
                        (point.error.empty() ? "" : " (" + point.error + ")"));
    }
    std::printf("%s=%-12.6g alpha=%.4f A=%.4g E=%.4f slope/decade=%.4f%s\n", name.c_str(),
                point.value, params[2], params[1], params[0], point.slope_per_decade,
                point.nan_flag ? "  [nan]" : "");
  }
  const fs::path dir = output_dir(opt);
  write_results_csv(csv, dir / ("sweep_" + name + ".csv"));
  render_sweep(csv, name, opt, dir);
  if (!flagged.empty()) {
    std::fprintf(stderr, "numerical failure at %zu sweep point(s):\n", flagged.size());
    for (const std::string& f : flagged) std::fprintf(stderr, "  %s\n", f.c_str());
    return kExitNumerical;
  }
  return kExitOk;
}

int run_report(const Options& opt) {
  const fs::path dir(opt.out);
  if (!fs::is_directory(dir)) throw InputError("no such output directory '" + opt.out + "'");
  int found = 0;
  if (fs::exists(dir / "params_compare.csv")) {
    const CsvTable t = read_csv(dir / "params_compare.csv");
    int standard = 0;
    int bestfit = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      standard += cell(t, r, "standard_mismatch") == "1";
      bestfit += cell(t, r, "bestfit_mismatch") == "1";
    }
    std::printf("params_compare: standard %d/%zu, bestfit %d/%zu mismatches\n", standard,
                t.rows.size(), bestfit, t.rows.size());
    ++found;
  }
  if (fs::exists(dir / "fit.csv")) {
    const CsvTable t = read_csv(dir / "fit.csv");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      std::printf("fit %-8s E=%s A=%s alpha=%s B=%s beta=%s\n",
                  cell(t, r, "interpretation").c_str(), cell(t, r, "E").c_str(),
                  cell(t, r, "A").c_str(), cell(t, r, "alpha").c_str(), cell(t, r, "B").c_str(),
                  cell(t, r, "beta").c_str());
    }
    ++found;
  }
  if (fs::exists(dir / "bootstrap.csv")) {
    const CsvTable t = read_csv(dir / "bootstrap.csv");
    std::printf("bootstrap: %zu parameter summaries\n", t.rows.size());
    ++found;
  }
  if (fs::exists(dir / "ratio.csv")) {
    render_ratio(read_csv(dir / "ratio.csv"), dir / "ratio.svg");
    std::printf("ratio: wrote ratio.svg\n");
    ++found;
  }
  for (PerturbationKind kind :
       {PerturbationKind::Multiplicative, PerturbationKind::Additive,
        PerturbationKind::SystematicBias, PerturbationKind::LogNormalNoise}) {
    const std::string name(to_string(kind));
    const fs::path file = dir / ("sweep_" + name + ".csv");
    if (!fs::exists(file)) continue;
    render_sweep(read_csv(file), name, opt, dir);
    std::printf("sweep %s: wrote sweep_%s_params.svg and sweep_%s_ratio.svg\n", name.c_str(),
                name.c_str(), name.c_str());
    ++found;
  }
  if (found == 0) throw InputError("no result files found in '" + opt.out + "'");
  return kExitOk;
}

void add_common(CLI::App* cmd, Options& opt, bool with_runs) {
  if (with_runs) {
    cmd->add_option("--runs", opt.runs, "Run CSV (reported_params,training_tokens,loss)");
    cmd->add_option("--interpretation", opt.interpretations,
                    "reported|standard|bestfit (repeatable)")
        ->check(CLI::IsMember({"reported", "standard", "bestfit"}));
    cmd->add_option("--seed", opt.seed, "Seed for resampling and noise");
    cmd->add_option("--bootstrap", opt.bootstrap, "Bootstrap resamples (0 disables)");
    cmd->add_option("--ci", opt.ci, "Confidence level for percentile intervals");
  }
  cmd->add_option("--arch", opt.arch, "Architecture table CSV or 'embedded'");
  cmd->add_option("--out", opt.out, "Output directory");
}

void add_compute(CLI::App* cmd, Options& opt) {
  cmd->add_option("--compute-min", opt.compute_min, "Smallest compute budget (FLOPs)");
  cmd->add_option("--compute-max", opt.compute_max, "Largest compute budget (FLOPs)");
  cmd->add_option("--compute-points", opt.compute_points, "Number of log-spaced budgets");
  cmd->add_option("--flops-per-param-token", opt.flops_per_param_token,
                  "FLOPs per parameter per token (C = c N D)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chinchilla scaling-law workbench"};
  app.require_subcommand(1);
  Options opt;

  auto* compare = app.add_subcommand("params-compare", "Compare parameter-count formulas");
  add_common(compare, opt, false);
  auto* fit_cmd = app.add_subcommand("fit", "Fit the scaling law (+ bootstrap)");
  add_common(fit_cmd, opt, true);
  auto* ratio = app.add_subcommand("ratio", "Compute-optimal tokens-per-parameter curve");
  add_common(ratio, opt, true);
  add_compute(ratio, opt);
  auto* sweep = app.add_subcommand("sweep", "Perturb parameter counts and refit");
  add_common(sweep, opt, true);
  add_compute(sweep, opt);
  sweep->add_option("--kind", opt.kind, "multiplicative|additive|systematic|lognormal")
      ->required()
      ->check(CLI::IsMember({"multiplicative", "additive", "systematic", "lognormal"}));
  sweep->add_option("--grid", opt.grid, "Custom comma-separated perturbation values");
  auto* report = app.add_subcommand("report", "Regenerate figures from result CSVs");
  report->add_option("--out", opt.out, "Directory holding result CSVs");
  add_compute(report, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*compare) return run_params_compare(opt);
    if (*fit_cmd) return run_fit(opt);
    if (*ratio) return run_ratio(opt);
    if (*sweep) return run_sweep_command(opt);
    if (*report) return run_report(opt);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
  return kExitInput;
}
