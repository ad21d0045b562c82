#pragma once

#include "maxboot/model.hpp"
#include "maxboot/random.hpp"

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace maxboot {

/// Data with cached column means and centred rows X_i - X-bar.
class CenteredData {
 public:
  explicit CenteredData(const DataSet& data);

  int n() const { return static_cast<int>(centered_.rows()); }
  int d() const { return static_cast<int>(centered_.cols()); }
  const RowMatrix& centered() const { return centered_; }
  const Eigen::RowVectorXd& mean() const { return mean_; }
  /// T_n of the original (uncentred) data.
  double t_n() const { return t_n_; }

 private:
  RowMatrix centered_;
  Eigen::RowVectorXd mean_;
  double t_n_;
};

/// max_j n^{-1/2} sum_i X_ij
double t_stat(const DataSet& data);

/// max_j n^{-1/2} sum_i w_i (X_ij - X-bar_j)
double wild_replicate(const CenteredData& data, std::span<const double> weights);
double wild_replicate(const DataSet& data, std::span<const double> weights);

/// One empirical-bootstrap replicate, centred at X-bar.
double empirical_replicate(const CenteredData& data, Rng& rng);
double empirical_replicate(const DataSet& data, Rng& rng);

/// Sorted bootstrap replicates.
class ReplicateSet {
 public:
  explicit ReplicateSet(std::vector<double> values);
  const std::vector<double>& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  std::vector<double> values_;
};

/// k-th order statistic with k = ceil(p (b + 1)) clamped to [1, b].
double bootstrap_quantile(const ReplicateSet& reps, double p);
int quantile_rank(int b, double p);

/// (#{reps >= t_n} + 1) / (b + 1)
double first_level_pvalue(double t_n, const ReplicateSet& reps);

/// b wild replicates in draw order; weights are consumed row by row from `rng`.
std::vector<double> wild_replicates(const CenteredData& data, const WeightLaw& law, int b, Rng& rng);
/// b empirical replicates in draw order.
std::vector<double> empirical_replicates(const CenteredData& data, int b, Rng& rng);

struct WildTestResult {
  bool reject = false;
  double c_hat = 0.0;
  double t_n = 0.0;
};

WildTestResult wild_test(const DataSet& data, const WeightLaw& law, int b, double alpha, const StreamKey& key);

struct DoubleWildResult {
  bool reject = false;
  double prepivot_pvalue = 1.0;
  double first_level_pvalue = 1.0;
};

/// Prepivoted p-value of the nested double wild bootstrap.  First-level weights
/// come from `key`; the second level for replicate b uses purpose level2 and
/// lane (key.lane << 20) | b.
DoubleWildResult double_wild_pvalue(const CenteredData& data, const WeightLaw& w_law, const WeightLaw& v_law, int b1,
                                    int b2, const StreamKey& key);
DoubleWildResult double_wild_test(const DataSet& data, const WeightLaw& w_law, const WeightLaw& v_law, int b1, int b2,
                                  double alpha, const StreamKey& key);

struct WildMethod {
  WeightLaw law;
};
struct EmpiricalMethod {};
struct DoubleWildMethod {
  WeightLaw w_law;
  WeightLaw v_law;
  int b2 = 49;
};

using BootstrapMethod = std::variant<WildMethod, EmpiricalMethod, DoubleWildMethod>;

struct BootstrapConfig {
  BootstrapMethod method = WildMethod{WeightLaw::gaussian()};
  int b = 499;
  double alpha = 0.1;

  /// Throws ValidationError on hard violations; returns advisory warnings.
  std::vector<std::string> validate() const;
  /// E[w^3] of the first-level multiplier (1 for the empirical bootstrap).
  double gamma() const;
  /// Canonical token: gaussian | mammen | rademacher | beta:NU | empirical | double:NU,B2
  std::string label() const;
};

/// Parses the CLI method token.
BootstrapConfig parse_method(const std::string& token, int b = 499, double alpha = 0.1);

}  // namespace maxboot
