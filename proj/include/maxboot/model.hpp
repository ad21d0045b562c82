#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <variant>

namespace maxboot {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct IdentityScaled {
  double sigma = 1.0;
};

/// sigma^2 * (rho 1 1^T + (1 - rho) I)
struct Equicorrelation {
  double rho = 0.0;
  double sigma = 1.0;
};

/// entry (j, k) = rho^|j - k|
struct Ar1 {
  double rho = 0.0;
};

struct DenseCovariance {
  Eigen::MatrixXd matrix;
};

/// Structured description of a covariance matrix Sigma.  The structure
/// selects closed-form, quadrature or Monte Carlo code paths downstream.
/// Instances are validated on construction and immutable afterwards.
class CovarianceSpec {
 public:
  using Variant = std::variant<IdentityScaled, Equicorrelation, Ar1, DenseCovariance>;

  static CovarianceSpec identity(int d, double sigma = 1.0);
  static CovarianceSpec equicorrelation(int d, double rho, double sigma = 1.0);
  static CovarianceSpec ar1(int d, double rho);
  /// Throws ValidationError if the matrix is asymmetric, has a nonpositive
  /// diagonal entry, or fails the pivoted positive-definiteness check.
  static CovarianceSpec dense(Eigen::MatrixXd matrix);

  int dim() const { return dim_; }
  const Variant& variant() const { return variant_; }

  /// Identity or equicorrelation: every coordinate permutation leaves Sigma unchanged.
  bool is_exchangeable() const;
  double entry(int j, int k) const;
  Eigen::MatrixXd materialize() const;

  /// Sigma -> c^2 Sigma.
  CovarianceSpec scaled(double c) const;

  std::string describe() const;

 private:
  CovarianceSpec(int dim, Variant v) : dim_(dim), variant_(std::move(v)) {}

  int dim_;
  Variant variant_;
};

Eigen::MatrixXd materialize_cov(const CovarianceSpec& spec);

/// Smallest pivot of a pivoted LDL^T factorisation; Dense specs must exceed 1e-10.
double smallest_pivot(const Eigen::MatrixXd& m);

/// n x d matrix of observations, row i = X_i.  Row-major so the bootstrap
/// inner loops stream rows.
class DataSet {
 public:
  explicit DataSet(RowMatrix values);

  int n() const { return static_cast<int>(values_.rows()); }
  int d() const { return static_cast<int>(values_.cols()); }
  const RowMatrix& values() const { return values_; }
  double operator()(int i, int j) const { return values_(i, j); }

  DataSet scaled(double c) const;

 private:
  RowMatrix values_;
};

/// Sums of empirical third moments grouped by index multiplicity:
///   s1 = sum_j E[X_j^3], s2 = sum_{j != k} E[X_j^2 X_k],
///   s3 = sum_{j,k,l distinct} E[X_j X_k X_l].
/// Enough to contract E[X^{(x)3}] against any exchangeable symmetric tensor.
struct ThirdMomentSummary {
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  long long n = 0;
  int d = 0;

  /// E[(sum_j X_j)^3] = s1 + 3 s2 + s3
  double cube_of_sum() const { return s1 + 3.0 * s2 + s3; }
  bool is_zero() const { return s1 == 0.0 && s2 == 0.0 && s3 == 0.0; }
};

ThirdMomentSummary third_moment_summary(const DataSet& data);

/// Empirical second moments in the same pattern form:
///   diag = sum_j E[X_j^2], square_of_sum = E[(sum_j X_j)^2].
struct SecondMomentSummary {
  double diag = 0.0;
  double square_of_sum = 0.0;
  long long n = 0;
  int d = 0;
};

SecondMomentSummary second_moment_summary(const DataSet& data);

/// Streaming accumulator for the two summaries above; rows can be fed in
/// chunks so that very large auxiliary samples never need to be stored.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(int d) : d_(d) {}
  void add(const RowMatrix& rows);
  ThirdMomentSummary third() const;
  SecondMomentSummary second() const;
  long long rows() const { return n_; }

 private:
  int d_;
  long long n_ = 0;
  double sum_cube_ = 0.0;       // sum_i sum_j x_ij^3
  double sum_sq_times_s_ = 0.0;  // sum_i (sum_j x_ij^2) s_i
  double sum_s_cube_ = 0.0;      // sum_i s_i^3
  double sum_sq_ = 0.0;          // sum_i sum_j x_ij^2
  double sum_s_sq_ = 0.0;        // sum_i s_i^2
};

}  // namespace maxboot
