#include "maxboot/normal.hpp"

#include "maxboot/error.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>

namespace maxboot {

double norm_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

double norm_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

double norm_sf(double t) { return 0.5 * std::erfc(t / std::sqrt(2.0)); }

double norm_logcdf(double t) {
  if (t > -20.0) return std::log(norm_cdf(t));
  // Mills-ratio asymptotic series
  const double z2 = 1.0 / (t * t);
  const double series = 1.0 - z2 * (1.0 - 3.0 * z2 * (1.0 - 5.0 * z2 * (1.0 - 7.0 * z2)));
  return -0.5 * t * t - std::log(-t) - 0.5 * std::log(2.0 * M_PI) + std::log(series);
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile requires p in (0,1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double norm_quantile_upper(double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("normal quantile requires q in (0,1)");
  return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * q);
}

}  // namespace maxboot

#include <Eigen/Dense>

namespace maxboot {

GaussRule gauss_hermite_normal(int m) {
  if (m < 1) throw DomainError("Gauss-Hermite rule needs at least one node");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
  for (int k = 1; k < m; ++k) jac(k, k - 1) = jac(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  GaussRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int k = 0; k < m; ++k) {
    rule.nodes[k] = es.eigenvalues()(k);
    const double v = es.eigenvectors()(0, k);
    rule.weights[k] = v * v;
  }
  return rule;
}

}  // namespace maxboot
