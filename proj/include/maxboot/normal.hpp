#pragma once

namespace maxboot {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double norm_pdf(double t);
double norm_cdf(double t);
/// Phi(-t) without cancellation.
double norm_sf(double t);
/// log Phi(t), accurate for very negative t.
double norm_logcdf(double t);
/// Phi^{-1}(p); throws DomainError outside (0,1).
double norm_quantile(double p);
/// Phi^{-1}(1 - q), accurate for small q.
double norm_quantile_upper(double q);

}  // namespace maxboot

#include <vector>

namespace maxboot {

/// Gauss-Hermite rule for the standard normal weight: sum_k w_k g(x_k) ~ E g(Z).
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_hermite_normal(int m);

}  // namespace maxboot
