#pragma once

#include "maxboot/random.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace maxboot {

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool compact() const { return std::isfinite(lo) && std::isfinite(hi); }
};

/// Dense-coefficient polynomial, c[k] multiplies x^k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);
  static Polynomial monomial(int k);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coeffs() const { return c_; }
  double operator()(double x) const;
  Polynomial derivative() const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;

 private:
  std::vector<double> c_{0.0};
};

/// Univariate Stein kernel tau of a law with density f on `support`.
class UnivariateKernel {
 public:
  UnivariateKernel(std::function<double(double)> tau, std::function<double(double)> tau_density, Interval support,
                   std::optional<double> bound);

  double operator()(double x) const { return tau_(x); }
  /// tau(x) f(x), evaluated without dividing by f.
  double tau_times_density(double x) const { return tau_density_(x); }
  const Interval& support() const { return support_; }
  const std::optional<double>& bound() const { return bound_; }

 private:
  std::function<double(double)> tau_;
  std::function<double(double)> tau_density_;
  Interval support_;
  std::optional<double> bound_;
};

/// tau(x) = [int_x^sup (u - mean) f(u) du] / f(x), by adaptive quadrature.
UnivariateKernel kernel_from_density(std::function<double(double)> density, double mean, Interval support);

/// A law given by a density (quadrature path).
struct DensityLaw {
  std::function<double(double)> density;
  Interval support;
  double mean = 0.0;
  /// Optional f(x, x - lo, hi - x); used by quadrature when the density is
  /// singular at an endpoint and x alone loses the distance to it.
  std::function<double(double, double, double)> endpoint_density;
};

/// kernel_from_density using the law's endpoint-aware density when present.
UnivariateKernel kernel_from_law(const DensityLaw& law);

/// A law given by exact raw moments raw[k] = E[xi^k] (exact-moment path).
struct MomentLaw {
  std::vector<double> raw;
  double mean() const { return raw.size() > 1 ? raw[1] : 0.0; }
};

MomentLaw normal_moments(int max_order);
MomentLaw beta_moments(double a, double b, int max_order);
/// Moments of (eta - mu) / sd for eta ~ Beta(a, b) of a standardised-beta weight law.
MomentLaw std_beta_moments(const WeightLaw& law, int max_order);

/// Stein kernel of the standardised beta as a polynomial in w.
Polynomial std_beta_kernel_polynomial(const WeightLaw& law);
/// tau(x) = x (1 - x) / (a + b)
Polynomial beta_kernel_polynomial(double a, double b);
DensityLaw beta_law(double a, double b);
DensityLaw std_beta_law(const WeightLaw& law);

/// |E[(xi - mu) h'(xi)] - E[tau(xi) h''(xi)]| from exact moments; tau must be polynomial.
double stein_identity_residual(const MomentLaw& law, const Polynomial& tau, const Polynomial& h);
/// Same residual by quadrature.
double stein_identity_residual(const DensityLaw& law, const UnivariateKernel& kernel, const Polynomial& h);

struct KernelBound {
  double b_w = 0.0;             // max(support radius, sqrt(sup |tau*|))
  double support_radius = 0.0;  // sup |w|
  double tau_sup = 0.0;         // sup |tau*|, grid search on the standardised law
  double tau_sup_scaled = 0.0;  // sup tau_beta / Var(eta)
  bool ok = false;
};

/// Throws CapabilityError for laws without a bounded Stein kernel.
KernelBound kernel_bound_check(const WeightLaw& law);

}  // namespace maxboot
