#include "maxboot/error.hpp"
#include "maxboot/harness.hpp"
#include "maxboot/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace maxboot;

namespace {

struct Flags {
  std::string config;
  std::string design, marginal, format = "csv", out;
  std::optional<double> rho, budget;
  std::optional<int> n, d, b, trials, threads;
  std::optional<std::uint64_t> seed;
  std::optional<long long> aux_rows;
  std::vector<std::string> methods;
  std::vector<double> alphas;
  bool timing = false;
  bool with_prediction = false;
};

void add_experiment_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config mirroring ExperimentConfig; flags override it");
  app->add_option("--design", f.design, "copula-i | copula-ii | factor | iid-spherical");
  app->add_option("--rho", f.rho, "design correlation parameter");
  app->add_option("--n", f.n, "sample size");
  app->add_option("--d", f.d, "dimension");
  app->add_option("--marginal", f.marginal, "asym | sym");
  app->add_option("--method", f.methods, "gaussian | mammen | rademacher | beta:NU | empirical | double:NU,B2")
      ->take_all();
  app->add_option("--b", f.b, "first-level bootstrap replicates");
  app->add_option("--alpha", f.alphas, "nominal level (repeatable)")->take_all();
  app->add_option("--trials", f.trials, "Monte Carlo trials M");
  app->add_option("--seed", f.seed, "64-bit seed");
  app->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  app->add_option("--budget", f.budget, "refuse runs above this many projected multiply-adds");
  app->add_option("--aux-rows", f.aux_rows, "auxiliary rows for population moments of the copula designs");
  app->add_option("--out", f.out, "output path (default stdout)");
  app->add_option("--format", f.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
}

ExperimentConfig build_config(const Flags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) cfg = load_config(f.config, cfg);
  if (!f.design.empty()) cfg.design = parse_design(f.design);
  if (!f.marginal.empty()) cfg.marginal = parse_marginal(f.marginal);
  if (f.rho) cfg.rho = *f.rho;
  if (f.n) cfg.n = *f.n;
  if (f.d) cfg.d = *f.d;
  if (f.b) cfg.b = *f.b;
  if (f.trials) cfg.trials = *f.trials;
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  if (f.budget) cfg.budget = *f.budget;
  if (f.aux_rows) cfg.aux_rows = *f.aux_rows;
  if (!f.methods.empty()) cfg.methods = f.methods;
  if (!f.alphas.empty()) cfg.alphas = f.alphas;
  if (f.timing) cfg.timing = true;
  if (f.with_prediction) cfg.with_prediction = true;
  return cfg;
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wild and double bootstrap experiments for high-dimensional max statistics"};
  app.require_subcommand(1);
  Flags f;

  auto* simulate = app.add_subcommand("simulate", "run a rejection-rate experiment");
  add_experiment_flags(simulate, f);
  simulate->add_flag("--timing", f.timing, "record wall-clock seconds per method");
  simulate->add_flag("--predict", f.with_prediction, "attach expansion predictions where available");

  auto* pp = app.add_subcommand("ppcurve", "rejection rate over an alpha grid from shared replicates");
  add_experiment_flags(pp, f);
  pp->add_flag("--timing", f.timing, "record wall-clock seconds per method");

  auto* pred = app.add_subcommand("predict", "expansion-based rejection predictions");
  add_experiment_flags(pred, f);

  auto* verify = app.add_subcommand("verify", "run the numerical oracle suites");
  std::uint64_t verify_seed = 7;
  verify->add_option("--seed", verify_seed, "seed for the Monte Carlo moment checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) {
      int failed = 0;
      for (const auto& c : run_verification(verify_seed)) {
        std::printf("%-4s %-10s %-55s value=%.3g tol=%.3g\n", c.passed ? "PASS" : "FAIL", c.suite.c_str(),
                    c.name.c_str(), c.value, c.tolerance);
        failed += !c.passed;
      }
      std::printf("%d check(s) failed\n", failed);
      return failed == 0 ? 0 : 1;
    }
    const ExperimentConfig cfg = build_config(f);
    const ReportFormat format = parse_format(f.format);
    if (pred->parsed()) {
      write_text(format_predictions(cfg, predict(cfg), format), f.out);
      return 0;
    }
    const RejectionReport report = pp->parsed() ? pp_curve(cfg) : run_experiment(cfg);
    if (f.out.empty())
      std::cout << format_report(report, format);
    else
      emit_report(report, format, f.out);
    return 0;
  } catch (const CostRefusal& e) {
    std::fprintf(stderr, "cost refusal: %s\n", e.what());
    return 4;
  } catch (const CapabilityError& e) {
    std::fprintf(stderr, "capability error: %s\n", e.what());
    return 3;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
