#pragma once

#include "maxboot/bootstrap.hpp"
#include "maxboot/dgp.hpp"
#include "maxboot/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace maxboot {

/// copula-i: R equicorrelation(rho); copula-ii: R = (rho^|j-k|);
/// factor: sqrt(rho) U 1 + sqrt(1 - rho) V; iid-spherical: iid standardised coordinates.
enum class Design { copula_i, copula_ii, factor, iid_spherical };
enum class MarginalMode { asymmetric, symmetric };

std::string design_token(Design d);
Design parse_design(const std::string& token);
std::string marginal_token(MarginalMode m);
MarginalMode parse_marginal(const std::string& token);

struct ExperimentConfig {
  Design design = Design::copula_ii;
  double rho = 0.2;
  int n = 200;
  int d = 400;
  MarginalMode marginal = MarginalMode::asymmetric;
  /// Method tokens as accepted by parse_method; b and alpha of each entry are ignored.
  std::vector<std::string> methods{"gaussian"};
  int b = 499;
  std::vector<double> alphas{0.1};
  int trials = 2000;
  std::uint64_t seed = 1;
  /// 0 selects std::thread::hardware_concurrency().
  int threads = 0;
  /// Upper limit on projected fused multiply-adds.
  double budget = 1e12;
  /// Rows of the auxiliary sample used for population moments of the copula designs.
  long long aux_rows = 1'000'000;
  /// Record wall-clock seconds per method; off keeps reports byte-identical across runs.
  bool timing = false;
  /// Attach edgeworth predictions to the report rows where a prediction path exists.
  bool with_prediction = false;
  /// Replaces the generated data of trial t (test hook).
  std::function<DataSet(std::uint64_t trial)> fixed_data;

  /// Throws ValidationError.
  void validate() const;
  std::vector<BootstrapConfig> method_configs() const;
};

/// M * sum_methods (B1 + B1 B2 + 1) * n * d
double projected_cost(const ExperimentConfig& cfg);

/// Draws the data of one trial from substream (seed, trial, data).
DataSet generate_trial_data(const ExperimentConfig& cfg, std::uint64_t trial);

struct ReportRow {
  std::string design;
  double rho = 0.0;
  int n = 0;
  int d = 0;
  std::string method;
  double alpha = 0.0;
  double rate = 0.0;
  double mc_se = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
  std::optional<double> predicted;
  double seconds = 0.0;
};

struct RejectionReport {
  std::string marginal;
  std::vector<std::string> notes;
  std::vector<ReportRow> rows;
};

/// sqrt(r (1 - r) / M)
double mc_standard_error(double rate, int trials);

/// Throws CostRefusal when projected_cost exceeds cfg.budget.  Reports are
/// independent of the thread count.
RejectionReport run_experiment(const ExperimentConfig& cfg);

/// run_experiment over a strictly increasing alpha grid; every alpha is
/// decided from the same replicate sets.
RejectionReport pp_curve(const ExperimentConfig& cfg);

struct PredictionRow {
  std::string method;
  double alpha = 0.0;
  double gamma = 0.0;
  double predicted = 0.0;
  double q_term = 0.0;
  double r_term = 0.0;
};

/// Throws CapabilityError when no prediction path exists for the design.
std::vector<PredictionRow> predict(const ExperimentConfig& cfg);

enum class ReportFormat { csv, json };
ReportFormat parse_format(const std::string& token);

std::string format_report(const RejectionReport& report, ReportFormat format);
RejectionReport parse_report(const std::string& text, ReportFormat format);
/// Throws IoError with the path in the message.
void emit_report(const RejectionReport& report, ReportFormat format, const std::string& path);
RejectionReport read_report(const std::string& path, ReportFormat format);

std::string format_predictions(const ExperimentConfig& cfg, const std::vector<PredictionRow>& rows, ReportFormat format);

/// Fields of a JSON document mirroring ExperimentConfig; absent keys keep `base`.
ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

}  // namespace maxboot
