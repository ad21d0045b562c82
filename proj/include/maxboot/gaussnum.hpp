#pragma once

#include "maxboot/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace maxboot {

inline constexpr int kHermiteMaxOrder = 20;
/// Largest d handled by the dense rectangle-integral path.
inline constexpr int kDenseMaxDim = 6;

/// Probabilists' Hermite polynomial He_m(t).
double hermite(int m, double t);
/// m-th derivative of the standard normal density.
double phi_derivative(int m, double t);

enum class IntegralMethod { automatic, closed_form, pattern, dense, conditional_mc };

/// Monte Carlo and root-finding controls shared by the Gaussian analytics.
struct Precision {
  long long mc_draws = 200000;
  /// Draws for conditional Monte Carlo integrals, which cost O(d^2) or O(d^3) per draw.
  long long cond_mc_draws = 2000;
  std::uint64_t seed = 0x5eed;
  double root_tol = 1e-12;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Integral over A(t) = (-inf, t]^d of the order-r derivative tensor of phi_Sigma.
class RectGradTensor {
 public:
  enum class Representation { pattern, dense };

  /// Pattern values: order 1 {v}; order 2 {diag, off}; order 3 {all_same, two_same, all_distinct}.
  static RectGradTensor pattern(int order, int d, double t, std::array<double, 3> values);
  static RectGradTensor dense(int order, int d, double t, std::vector<double> values);

  int order() const { return order_; }
  int dim() const { return d_; }
  double threshold() const { return t_; }
  Representation representation() const { return rep_; }
  const std::array<double, 3>& pattern_values() const { return pattern_; }

  double at(int j) const;
  double at(int j, int k) const;
  double at(int j, int k, int l) const;

  /// Full d x d matrix (order 2 only).
  Eigen::MatrixXd matrix() const;
  /// Full d^r array in row-major index order.
  std::vector<double> to_dense() const;
  /// <1^{(x)r}, T>.
  double contract_ones() const;

 private:
  RectGradTensor() = default;
  int order_ = 0;
  int d_ = 0;
  double t_ = 0.0;
  Representation rep_ = Representation::pattern;
  std::array<double, 3> pattern_{};
  std::vector<double> dense_;
};

RectGradTensor rect_grad_integral(const CovarianceSpec& spec, double t, int r,
                                  IntegralMethod method = IntegralMethod::automatic, const Precision& prec = {});

/// P(max_j Z_j <= t), Z ~ N(0, Sigma).  Monte Carlo (with standard error) for large dense specs.
McEstimate gmax_cdf_estimate(const CovarianceSpec& spec, double t, const Precision& prec = {});
double gmax_cdf(const CovarianceSpec& spec, double t, const Precision& prec = {});

McEstimate gmax_quantile_estimate(const CovarianceSpec& spec, double p, const Precision& prec = {});
double gmax_quantile(const CovarianceSpec& spec, double p, const Precision& prec = {});

/// f_Sigma (r = 0) or its derivative (r = 1).
double gmax_density(const CovarianceSpec& spec, double t, int r = 0, const Precision& prec = {});

struct GmaxDiagnostics {
  double sigma_star = 0.0;
  double var_max = 0.0;
  double var_max_se = 0.0;
  double varsigma_d = 0.0;
  double sigma_bar = 0.0;    // max_j sqrt(Sigma_jj)
  double sigma_under = 0.0;  // min_j sqrt(Sigma_jj)
  int d = 0;

  /// (1 / (4 sqrt(var_max))) min{p / sqrt2, (1 - p)^{3/2}}
  double density_floor(double p) const;
  /// varsigma_d^3 / sigma_*^3 * log^3(d n) / n * log n
  double condition_lhs(long long n) const;
};

GmaxDiagnostics gmax_diagnostics(const CovarianceSpec& spec, long long mc_draws = 200000,
                                 std::uint64_t seed = 0x5eed);

namespace detail {

/// Bivariate normal CDF P(X <= h, Y <= k) with unit variances and correlation r.
double bvn_cdf(double h, double k, double r);

/// P(Z <= b) for Z ~ N(0, C), small dimension.
double mvn_orthant(const Eigen::MatrixXd& c, const Eigen::VectorXd& b);

/// d^alpha P(Z <= b) for a multi-index alpha of length <= 3 (repeated indices allowed).
double mvn_cdf_derivative(const Eigen::MatrixXd& c, const Eigen::VectorXd& b, const std::vector<int>& alpha);

RectGradTensor rect_grad_dense(const Eigen::MatrixXd& sigma, double t, int r);

/// Conditional Monte Carlo estimates for large dense Sigma at threshold t.
struct ConditionalMc {
  Eigen::VectorXd grad;     // order-1 integrals
  Eigen::MatrixXd hessian;  // order-2 integrals (empty unless requested)
  double density = 0.0;
  double density_se = 0.0;
};

ConditionalMc conditional_mc(const CovarianceSpec& spec, double t, bool want_hessian, const Precision& prec);

/// Raw draws of max_j Z_j.
std::vector<double> sample_gmax(const CovarianceSpec& spec, long long draws, std::uint64_t seed);

}  // namespace detail

}  // namespace maxboot
