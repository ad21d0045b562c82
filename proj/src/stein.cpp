#include "maxboot/stein.hpp"

#include "maxboot/error.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <memory>

namespace maxboot {

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) c_.push_back(0.0);
}

Polynomial Polynomial::monomial(int k) {
  if (k < 0) throw DomainError("monomial degree must be nonnegative");
  std::vector<double> c(k + 1, 0.0);
  c[k] = 1.0;
  return Polynomial(std::move(c));
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return Polynomial({0.0});
  std::vector<double> out(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) out[k - 1] = k * c_[k];
  return Polynomial(std::move(out));
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  std::vector<double> out(c_.size() + o.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = 0; j < o.c_.size(); ++j) out[i + j] += c_[i] * o.c_[j];
  return Polynomial(std::move(out));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<double> out(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) out[i] += c_[i];
  for (std::size_t i = 0; i < o.c_.size(); ++i) out[i] += o.c_[i];
  return Polynomial(std::move(out));
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  std::vector<double> neg(o.c_);
  for (double& v : neg) v = -v;
  return *this + Polynomial(std::move(neg));
}

// ---------------------------------------------------------------------------
// Kernels

UnivariateKernel::UnivariateKernel(std::function<double(double)> tau, std::function<double(double)> tau_density,
                                   Interval support, std::optional<double> bound)
    : tau_(std::move(tau)), tau_density_(std::move(tau_density)), support_(support), bound_(bound) {}

namespace {

constexpr double kQuadTol = 1e-13;
// Distance from a finite endpoint below which the integral is taken from the
// local power law f(s) ~ C s^k instead of by quadrature.
constexpr double kTailCut = 1e-200;

/// Density evaluated from (x, distance to lo, distance to hi) so endpoint
/// singularities keep full relative precision.
using EndpointDensity = std::function<double(double, double, double)>;
using Weight = std::function<double(double)>;

EndpointDensity lift(std::function<double(double)> f) {
  return [f = std::move(f)](double x, double, double) { return f(x); };
}

/// A point of the support together with its exact distances to both ends.
struct Point {
  double x;
  double dlo;
  double dhi;
};

Point at(const Interval& sup, double x) { return {x, x - sup.lo, sup.hi - x}; }
Point lower_end(const Interval& sup) { return {sup.lo, 0.0, sup.hi - sup.lo}; }
Point upper_end(const Interval& sup) { return {sup.hi, sup.hi - sup.lo, 0.0}; }

double guarded(double gx, double fx) { return fx == 0.0 ? 0.0 : gx * fx; }

/// int_0^{cut} g(end) f(s) ds for f(s) ~ C s^k near the endpoint.
double endpoint_tail(const std::function<double(double)>& f_of_s, double g_end) {
  const double f1 = f_of_s(kTailCut);
  if (!(f1 > 0.0)) return 0.0;
  const double f2 = f_of_s(0.5 * kTailCut);
  const double k = -std::log2(f2 / f1);
  if (!(k > -1.0)) throw DomainError("density is not integrable at a support endpoint");
  return g_end * f1 * kTailCut / (1.0 + k);
}

class Integrator {
 public:
  Integrator(const EndpointDensity& f, const Interval& sup, double tol = kQuadTol) : f_(f), sup_(sup), tol_(tol) {}

  /// int_A^B g(u) f(u) du.
  double operator()(const Point& a, const Point& b, const Weight& g) const {
    if (!(b.x > a.x) && !(a.dlo < b.dlo)) return 0.0;
    const bool lo_fin = std::isfinite(sup_.lo), hi_fin = std::isfinite(sup_.hi);
    if (lo_fin && hi_fin) {
      const double width = sup_.hi - sup_.lo;
      // Split at the support midpoint so each piece sees one endpoint only.
      const double s_mid = std::clamp(0.5 * width, a.dlo, width - b.dhi);
      return from_lower(a.dlo, s_mid, g) + from_upper(b.dhi, width - s_mid, g);
    }
    if (lo_fin) {
      if (std::isfinite(b.x)) return from_lower(a.dlo, b.dlo, g);
      static thread_local boost::math::quadrature::exp_sinh<double> es;
      const double s0 = std::max(a.dlo, kTailCut);
      double v = es.integrate([&](double s) { return guarded(g(sup_.lo + s), f_(sup_.lo + s, s, INFINITY)); }, s0,
                              INFINITY, tol_);
      if (a.dlo == 0.0) v += tail_lower(g);
      return v;
    }
    if (hi_fin) {
      if (std::isfinite(a.x)) return from_upper(b.dhi, a.dhi, g);
      static thread_local boost::math::quadrature::exp_sinh<double> es;
      const double t0 = std::max(b.dhi, kTailCut);
      double v = es.integrate([&](double t) { return guarded(g(sup_.hi - t), f_(sup_.hi - t, INFINITY, t)); }, t0,
                              INFINITY, tol_);
      if (b.dhi == 0.0) v += tail_upper(g);
      return v;
    }
    const auto h = [&](double x) { return guarded(g(x), f_(x, INFINITY, INFINITY)); };
    if (std::isfinite(a.x) && std::isfinite(b.x)) {
      static thread_local boost::math::quadrature::tanh_sinh<double> ts;
      return ts.integrate(h, a.x, b.x, tol_);
    }
    if (std::isfinite(a.x) || std::isfinite(b.x)) {
      static thread_local boost::math::quadrature::exp_sinh<double> es;
      return es.integrate(h, a.x, b.x, tol_);
    }
    static thread_local boost::math::quadrature::sinh_sinh<double> ss;
    return ss.integrate(h, tol_);
  }

 private:
  // s = distance to lo over [s0, s1] on a compact support, integrated in
  // y = log s so that power-law endpoint behaviour becomes exponential.
  double from_lower(double s0, double s1, const Weight& g) const {
    const double width = sup_.hi - sup_.lo;
    double v = log_scale(s0, s1, [&](double ds) { return guarded(g(sup_.lo + ds), f_(sup_.lo + ds, ds, width - ds)); });
    if (s0 == 0.0) v += tail_lower(g);
    return v;
  }

  double from_upper(double t0, double t1, const Weight& g) const {
    const double width = sup_.hi - sup_.lo;
    double v = log_scale(t0, t1, [&](double dt) { return guarded(g(sup_.hi - dt), f_(sup_.hi - dt, width - dt, dt)); });
    if (t0 == 0.0) v += tail_upper(g);
    return v;
  }

  template <class F>
  double log_scale(double s0, double s1, F&& h) const {
    const double a = std::max(s0, kTailCut);
    if (!(s1 > a)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double y) {
          const double ds = std::exp(y);
          return h(ds) * ds;
        },
        std::log(a), std::log(s1), 12, tol_);
  }

  double tail_lower(const Weight& g) const {
    const double w = sup_.hi - sup_.lo;
    return endpoint_tail([&](double s) { return f_(sup_.lo + s, s, w - s); }, g(sup_.lo));
  }
  double tail_upper(const Weight& g) const {
    const double w = sup_.hi - sup_.lo;
    return endpoint_tail([&](double t) { return f_(sup_.hi - t, w - t, t); }, g(sup_.hi));
  }

  const EndpointDensity& f_;
  const Interval& sup_;
  double tol_;
};

struct KernelCore {
  EndpointDensity density;
  double mean;
  Interval support;

  double tau_density(const Point& p) const {
    if (!(p.dlo > 0.0 && p.dhi > 0.0)) return 0.0;
    const Integrator integ(density, support);
    const double m = mean;
    if (p.x >= mean) return integ(p, upper_end(support), [m](double u) { return u - m; });
    return integ(lower_end(support), p, [m](double u) { return m - u; });
  }

  double tau(double x) const {
    if (!(x > support.lo && x < support.hi)) throw DomainError("Stein kernel evaluated outside the open support");
    const Point p = at(support, x);
    const double fx = density(x, p.dlo, p.dhi);
    if (!(fx > 0.0)) throw DomainError("Stein kernel singular: density vanishes at the evaluation point");
    return tau_density(p) / fx;
  }
};

/// Grid search of |g| on the open interval followed by Brent refinement.
double sup_abs(const std::function<double(double)>& g, double lo, double hi, int grid = 200) {
  double best_x = lo, best = -1.0;
  const double h = (hi - lo) / grid;
  for (int i = 1; i < grid; ++i) {
    const double x = lo + i * h;
    const double v = std::abs(g(x));
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  const double a = std::max(lo + 1e-12 * (hi - lo), best_x - h);
  const double b = std::min(hi - 1e-12 * (hi - lo), best_x + h);
  const auto r = boost::math::tools::brent_find_minima([&](double x) { return -std::abs(g(x)); }, a, b, 40);
  return std::max(best, -r.second);
}

UnivariateKernel make_kernel(EndpointDensity density, double mean, Interval support) {
  if (!(support.lo < support.hi)) throw ValidationError("kernel support must be a nonempty interval");
  if (!(mean > support.lo && mean < support.hi)) throw ValidationError("mean must lie inside the support");
  auto core = std::make_shared<KernelCore>(KernelCore{std::move(density), mean, support});
  std::function<double(double)> tau = [core](double x) { return core->tau(x); };
  std::function<double(double)> tau_f = [core](double x) { return core->tau_density(at(core->support, x)); };
  std::optional<double> bound;
  if (support.compact()) bound = sup_abs(tau, support.lo, support.hi);
  return UnivariateKernel(std::move(tau), std::move(tau_f), support, bound);
}

EndpointDensity beta_endpoint_density(double a, double b) {
  const double log_norm = -std::log(boost::math::beta(a, b));
  return [a, b, log_norm](double, double dlo, double dhi) {
    if (!(dlo > 0.0) || !(dhi > 0.0)) return 0.0;
    return std::exp(log_norm + (a - 1.0) * std::log(dlo) + (b - 1.0) * std::log(dhi));
  };
}

EndpointDensity std_beta_endpoint_density(const WeightLaw& law) {
  const auto f = beta_endpoint_density(law.a(), law.b());
  const double sd = law.beta_sd();
  return [f, sd](double, double dlo, double dhi) { return sd * f(0.0, sd * dlo, sd * dhi); };
}

Interval std_beta_support(const WeightLaw& law) {
  return {-law.beta_mean() / law.beta_sd(), (1.0 - law.beta_mean()) / law.beta_sd()};
}

EndpointDensity law_density(const DensityLaw& law) {
  return law.endpoint_density ? law.endpoint_density : lift(law.density);
}

}  // namespace

UnivariateKernel kernel_from_density(std::function<double(double)> density, double mean, Interval support) {
  return make_kernel(lift(std::move(density)), mean, support);
}

UnivariateKernel kernel_from_law(const DensityLaw& law) { return make_kernel(law_density(law), law.mean, law.support); }

// ---------------------------------------------------------------------------
// Laws and moments

MomentLaw normal_moments(int max_order) {
  MomentLaw m;
  m.raw.assign(max_order + 1, 0.0);
  m.raw[0] = 1.0;
  for (int k = 2; k <= max_order; k += 2) m.raw[k] = m.raw[k - 2] * (k - 1);
  return m;
}

MomentLaw beta_moments(double a, double b, int max_order) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta shapes must be positive");
  MomentLaw m;
  m.raw.assign(max_order + 1, 1.0);
  for (int k = 1; k <= max_order; ++k) m.raw[k] = m.raw[k - 1] * (a + k - 1.0) / (a + b + k - 1.0);
  return m;
}

MomentLaw std_beta_moments(const WeightLaw& law, int max_order) {
  if (law.kind() != WeightLaw::Kind::std_beta) throw ValidationError("std_beta_moments needs a standardised-beta law");
  std::vector<long double> raw(max_order + 1, 1.0L);
  const long double a = law.a(), b = law.b();
  for (int k = 1; k <= max_order; ++k) raw[k] = raw[k - 1] * (a + k - 1.0L) / (a + b + k - 1.0L);
  const long double mu = a / (a + b);
  const long double sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0L)));
  MomentLaw m;
  m.raw.assign(max_order + 1, 0.0);
  for (int k = 0; k <= max_order; ++k) {
    long double acc = 0.0L, binom = 1.0L;
    for (int j = 0; j <= k; ++j) {
      acc += binom * raw[j] * std::pow(-mu, static_cast<long double>(k - j));
      binom = binom * (k - j) / (j + 1);
    }
    m.raw[k] = static_cast<double>(acc / std::pow(sd, static_cast<long double>(k)));
  }
  return m;
}

Polynomial beta_kernel_polynomial(double a, double b) {
  const double s = a + b;
  return Polynomial({0.0, 1.0 / s, -1.0 / s});
}

Polynomial std_beta_kernel_polynomial(const WeightLaw& law) {
  if (law.kind() != WeightLaw::Kind::std_beta) throw ValidationError("std_beta_kernel_polynomial needs a standardised-beta law");
  const double mu = law.beta_mean(), sd = law.beta_sd(), s = law.a() + law.b();
  const double scale = 1.0 / (s * sd * sd);
  return Polynomial({mu * (1.0 - mu) * scale, sd * (1.0 - 2.0 * mu) * scale, -sd * sd * scale});
}

DensityLaw beta_law(double a, double b) {
  const auto f = beta_endpoint_density(a, b);
  return {[f](double x) { return f(x, x, 1.0 - x); }, Interval{0.0, 1.0}, a / (a + b), f};
}

DensityLaw std_beta_law(const WeightLaw& law) {
  const auto f = std_beta_endpoint_density(law);
  const Interval sup = std_beta_support(law);
  return {[f, sup](double x) { return f(x, x - sup.lo, sup.hi - x); }, sup, 0.0, f};
}

double stein_identity_residual(const MomentLaw& law, const Polynomial& tau, const Polynomial& h) {
  const Polynomial h1 = h.derivative();
  const Polynomial h2 = h1.derivative();
  const Polynomial p = Polynomial({-law.mean(), 1.0}) * h1 - tau * h2;
  if (p.degree() >= static_cast<int>(law.raw.size()))
    throw ValidationError("not enough exact moments for this polynomial degree");
  long double acc = 0.0L;
  for (int k = 0; k <= p.degree(); ++k) acc += static_cast<long double>(p.coeffs()[k]) * law.raw[k];
  return std::abs(static_cast<double>(acc));
}

double stein_identity_residual(const DensityLaw& law, const UnivariateKernel& kernel, const Polynomial& h) {
  if (h.degree() > 6) throw ValidationError("test polynomial degree must be <= 6");
  const Polynomial h1 = h.derivative();
  const Polynomial h2 = h1.derivative();
  const EndpointDensity f = law_density(law);
  const double mu = law.mean;
  const Point a = lower_end(law.support), b = upper_end(law.support);
  const double lhs = Integrator(f, law.support)(a, b, [&](double x) { return (x - mu) * h1(x); });
  // tau f is bounded, so plain x coordinates are accurate enough here; the
  // outer tolerance sits above the noise of the inner quadrature.
  const EndpointDensity one = [](double, double, double) { return 1.0; };
  const double rhs =
      Integrator(one, law.support, 1e-11)(a, b, [&](double x) { return guarded(h2(x), kernel.tau_times_density(x)); });
  return std::abs(lhs - rhs);
}

KernelBound kernel_bound_check(const WeightLaw& law) {
  switch (law.kind()) {
    case WeightLaw::Kind::gaussian:
      throw CapabilityError(
          "Gaussian weights are unbounded, so the bounded-kernel condition does not apply; use the Gaussian-weight "
          "condition instead (w_1 ~ N(0,1), b_w = 1)");
    case WeightLaw::Kind::rademacher:
    case WeightLaw::Kind::mammen:
      throw CapabilityError("two-point distributions do not admit Stein kernels (" + law.name() + ")");
    case WeightLaw::Kind::std_beta: break;
  }
  KernelBound out;
  const Interval sup = std_beta_support(law);
  out.support_radius = std::max(std::abs(sup.lo), std::abs(sup.hi));
  const auto direct = make_kernel(std_beta_endpoint_density(law), 0.0, sup);
  out.tau_sup = *direct.bound();
  const auto beta_kernel = make_kernel(beta_endpoint_density(law.a(), law.b()), law.beta_mean(), Interval{0.0, 1.0});
  out.tau_sup_scaled = *beta_kernel.bound() / (law.beta_sd() * law.beta_sd());
  out.b_w = std::max(out.support_radius, std::sqrt(out.tau_sup));
  out.ok = std::isfinite(out.b_w);
  return out;
}

}  // namespace maxboot
