#pragma once

#include "maxboot/model.hpp"
#include "maxboot/random.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>

namespace maxboot {

/// Gaussian copula with gamma marginals.  The parameter matrix R is `corr`.
struct CopulaConfig {
  CovarianceSpec corr = CovarianceSpec::identity(1);
  double marginal_shape = 1.0;
  double marginal_scale = 1.0;
  bool symmetrize = false;
  int n = 1;

  int d() const { return corr.dim(); }
  void validate() const;
};

/// Standardised scalar laws (mean 0, variance 1) used by the factor and iid designs.
struct ScalarLaw {
  enum class Kind { normal, std_gamma, sym_gamma };
  Kind kind = Kind::normal;
  double shape = 1.0;

  static ScalarLaw normal() { return {Kind::normal, 1.0}; }
  /// (G - shape) / sqrt(shape), G ~ Gamma(shape, 1).
  static ScalarLaw std_gamma(double shape) { return {Kind::std_gamma, shape}; }
  /// (G - G') / sqrt(2 shape).
  static ScalarLaw sym_gamma(double shape) { return {Kind::sym_gamma, shape}; }

  double third_moment() const;
  double sample(Rng& rng) const;
};

struct FactorConfig {
  double rho = 0.0;
  int d = 1;
  int n = 1;
  ScalarLaw u_law = ScalarLaw::std_gamma(1.0);
  ScalarLaw v_law = ScalarLaw::normal();

  void validate() const;
};

/// Draws Z ~ N(0, R) for a unit-diagonal spec.  Dense specs are factorised
/// once at construction; equicorrelation and AR(1) draws are O(d).
class CorrGaussianSampler {
 public:
  explicit CorrGaussianSampler(const CovarianceSpec& corr);
  int dim() const { return d_; }
  void draw(Rng& rng, std::span<double> out) const;

 private:
  CovarianceSpec spec_;
  int d_;
  Eigen::MatrixXd chol_;
  mutable Eigen::VectorXd scratch_;
};

Eigen::VectorXd sample_corr_gaussian(const CovarianceSpec& corr, Rng& rng);

/// Gamma(shape, 1) quantile.
double gamma_quantile(double shape, double p);
/// Gamma(shape, 1) quantile at 1 - q, accurate for small q.
double gamma_quantile_upper(double shape, double q);
double gamma_cdf(double shape, double x);
/// F^{-1}(Phi(z)) for Gamma(shape, 1), using whichever tail keeps precision.
double gamma_from_latent(double shape, double z);

DataSet gen_copula(const CopulaConfig& cfg, Rng& rng);
/// Asymmetric-mode transform of a given latent matrix (test hook).
DataSet copula_from_latent(const CopulaConfig& cfg, const RowMatrix& z);
/// Symmetric-mode transform of two given latent matrices.
DataSet copula_from_latent(const CopulaConfig& cfg, const RowMatrix& z, const RowMatrix& z_prime);

DataSet gen_factor(const FactorConfig& cfg, Rng& rng);
/// n x d matrix of iid draws from a standardised scalar law.
DataSet gen_iid(const ScalarLaw& law, int n, int d, Rng& rng);

/// Cov(U_j, U_k) for one gamma-marginal coordinate pair whose latent correlation is r.
double copula_marginal_cov(double shape, double scale, double r);

/// Population covariance of the copula rows (doubled in symmetric mode).
CovarianceSpec copula_population_cov(const CopulaConfig& cfg);

}  // namespace maxboot
