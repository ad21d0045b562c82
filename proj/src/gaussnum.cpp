#include "maxboot/gaussnum.hpp"

#include "maxboot/error.hpp"
#include "maxboot/normal.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <variant>

namespace maxboot {

double hermite(int m, double t) {
  if (m < 0) throw DomainError("Hermite order must be nonnegative");
  if (m > kHermiteMaxOrder) throw CapabilityError("Hermite order above the supported cap of 20");
  double h0 = 1.0;
  if (m == 0) return h0;
  double h1 = t;
  for (int k = 1; k < m; ++k) {
    const double h2 = t * h1 - k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double phi_derivative(int m, double t) {
  const double h = hermite(m, t);
  return ((m % 2) ? -h : h) * norm_pdf(t);
}

// ---------------------------------------------------------------------------
// RectGradTensor

RectGradTensor RectGradTensor::pattern(int order, int d, double t, std::array<double, 3> values) {
  if (order < 1 || order > 3) throw DomainError("rectangle integral order must be 1, 2 or 3");
  RectGradTensor out;
  out.order_ = order;
  out.d_ = d;
  out.t_ = t;
  out.rep_ = Representation::pattern;
  out.pattern_ = values;
  if (order == 1 || d < 2) out.pattern_[1] = 0.0;
  if (order <= 2 || d < 3) out.pattern_[2] = 0.0;
  return out;
}

RectGradTensor RectGradTensor::dense(int order, int d, double t, std::vector<double> values) {
  if (order < 1 || order > 3) throw DomainError("rectangle integral order must be 1, 2 or 3");
  std::size_t expect = 1;
  for (int i = 0; i < order; ++i) expect *= static_cast<std::size_t>(d);
  if (values.size() != expect) throw ValidationError("dense tensor has the wrong number of entries");
  RectGradTensor out;
  out.order_ = order;
  out.d_ = d;
  out.t_ = t;
  out.rep_ = Representation::dense;
  out.dense_ = std::move(values);
  return out;
}

double RectGradTensor::at(int j) const {
  if (order_ != 1) throw ValidationError("tensor order mismatch");
  return rep_ == Representation::pattern ? pattern_[0] : dense_[j];
}

double RectGradTensor::at(int j, int k) const {
  if (order_ != 2) throw ValidationError("tensor order mismatch");
  if (rep_ == Representation::pattern) return j == k ? pattern_[0] : pattern_[1];
  return dense_[static_cast<std::size_t>(j) * d_ + k];
}

double RectGradTensor::at(int j, int k, int l) const {
  if (order_ != 3) throw ValidationError("tensor order mismatch");
  if (rep_ == Representation::pattern) {
    if (j == k && k == l) return pattern_[0];
    if (j == k || k == l || j == l) return pattern_[1];
    return pattern_[2];
  }
  return dense_[(static_cast<std::size_t>(j) * d_ + k) * d_ + l];
}

Eigen::MatrixXd RectGradTensor::matrix() const {
  if (order_ != 2) throw ValidationError("matrix() requires an order-2 tensor");
  Eigen::MatrixXd m(d_, d_);
  for (int j = 0; j < d_; ++j)
    for (int k = 0; k < d_; ++k) m(j, k) = at(j, k);
  return m;
}

std::vector<double> RectGradTensor::to_dense() const {
  if (rep_ == Representation::dense) return dense_;
  std::vector<double> out;
  if (order_ == 1) {
    out.assign(d_, pattern_[0]);
  } else if (order_ == 2) {
    out.resize(static_cast<std::size_t>(d_) * d_);
    for (int j = 0; j < d_; ++j)
      for (int k = 0; k < d_; ++k) out[static_cast<std::size_t>(j) * d_ + k] = at(j, k);
  } else {
    out.resize(static_cast<std::size_t>(d_) * d_ * d_);
    for (int j = 0; j < d_; ++j)
      for (int k = 0; k < d_; ++k)
        for (int l = 0; l < d_; ++l) out[(static_cast<std::size_t>(j) * d_ + k) * d_ + l] = at(j, k, l);
  }
  return out;
}

double RectGradTensor::contract_ones() const {
  if (rep_ == Representation::dense) {
    double s = 0.0;
    for (double v : dense_) s += v;
    return s;
  }
  const double d = d_;
  switch (order_) {
    case 1: return d * pattern_[0];
    case 2: return d * pattern_[0] + d * (d - 1.0) * pattern_[1];
    default: return d * pattern_[0] + 3.0 * d * (d - 1.0) * pattern_[1] + d * (d - 1.0) * (d - 2.0) * pattern_[2];
  }
}

// ---------------------------------------------------------------------------
// Structured paths

namespace {

constexpr double kTailCutoff = 40.0;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double pow_cdf(double log_cdf, double k) { return k == 0.0 ? 1.0 : std::exp(k * log_cdf); }

/// Pattern values at unit scale for Sigma = I.
std::array<double, 3> identity_pattern(int d, double u, int r) {
  const double L = norm_logcdf(u);
  const double ph = norm_pdf(u);
  switch (r) {
    case 1: return {ph * pow_cdf(L, d - 1.0), 0.0, 0.0};
    case 2: return {-u * ph * pow_cdf(L, d - 1.0), d >= 2 ? ph * ph * pow_cdf(L, d - 2.0) : 0.0, 0.0};
    default:
      return {(u * u - 1.0) * ph * pow_cdf(L, d - 1.0), d >= 2 ? -u * ph * ph * pow_cdf(L, d - 2.0) : 0.0,
              d >= 3 ? ph * ph * ph * pow_cdf(L, d - 3.0) : 0.0};
  }
}

/// E over the factor zeta ~ N(0,1) of g(u, log Phi(u)) with u = (t - sqrt(rho) zeta) / sqrt(1 - rho).
template <class G>
double factor_expectation(double rho, int d, double t, G&& g) {
  const double sr = std::sqrt(rho);
  const double s = std::sqrt(1.0 - rho);
  const auto integrand = [&](double zeta) {
    const double u = (t - sr * zeta) / s;
    return norm_pdf(zeta) * g(u, norm_logcdf(u));
  };
  const double u_med = norm_quantile(std::pow(0.5, 1.0 / d));
  const double zeta_star = (t - s * u_med) / sr;
  const double w = s / sr;
  std::vector<double> cuts = {-kTailCutoff, -10.0, -5.0, 0.0, 5.0, 10.0, kTailCutoff};
  for (double k : {-16.0, -4.0, -1.0, 0.0, 1.0, 4.0, 16.0}) {
    const double c = zeta_star + k * w;
    if (c > -kTailCutoff && c < kTailCutoff) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] < 1e-14) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, cuts[i], cuts[i + 1], 15, 1e-13);
  }
  return total;
}

/// Pattern values at unit scale for the equicorrelation matrix with parameter rho.
std::array<double, 3> equi_pattern(double rho, int d, double t, int r) {
  if (rho == 0.0) return identity_pattern(d, t, r);
  const double s = std::sqrt(1.0 - rho);
  const double dd = d;
  switch (r) {
    case 1:
      return {factor_expectation(rho, d, t, [&](double u, double L) { return norm_pdf(u) * pow_cdf(L, dd - 1.0); }) / s,
              0.0, 0.0};
    case 2: {
      const double diag =
          factor_expectation(rho, d, t, [&](double u, double L) { return -u * norm_pdf(u) * pow_cdf(L, dd - 1.0); });
      const double off = d >= 2 ? factor_expectation(rho, d, t,
                                                     [&](double u, double L) {
                                                       const double p = norm_pdf(u);
                                                       return p * p * pow_cdf(L, dd - 2.0);
                                                     })
                                : 0.0;
      return {diag / (s * s), off / (s * s), 0.0};
    }
    default: {
      const double s3 = s * s * s;
      const double same = factor_expectation(
          rho, d, t, [&](double u, double L) { return (u * u - 1.0) * norm_pdf(u) * pow_cdf(L, dd - 1.0); });
      const double two = d >= 2 ? factor_expectation(rho, d, t,
                                                     [&](double u, double L) {
                                                       const double p = norm_pdf(u);
                                                       return -u * p * p * pow_cdf(L, dd - 2.0);
                                                     })
                                : 0.0;
      const double dist = d >= 3 ? factor_expectation(rho, d, t,
                                                      [&](double u, double L) {
                                                        const double p = norm_pdf(u);
                                                        return p * p * p * pow_cdf(L, dd - 3.0);
                                                      })
                                 : 0.0;
      return {same / s3, two / s3, dist / s3};
    }
  }
}

double max_sd(const CovarianceSpec& spec) {
  return std::visit(overloaded{
                        [](const IdentityScaled& s) { return s.sigma; },
                        [](const Equicorrelation& s) { return s.sigma; },
                        [](const Ar1&) { return 1.0; },
                        [](const DenseCovariance& s) { return std::sqrt(s.matrix.diagonal().maxCoeff()); },
                    },
                    spec.variant());
}

double min_sd(const CovarianceSpec& spec) {
  return std::visit(overloaded{
                        [](const IdentityScaled& s) { return s.sigma; },
                        [](const Equicorrelation& s) { return s.sigma; },
                        [](const Ar1&) { return 1.0; },
                        [](const DenseCovariance& s) { return std::sqrt(s.matrix.diagonal().minCoeff()); },
                    },
                    spec.variant());
}

/// Scale and unit-scale correlation of an exchangeable spec.
void exchangeable_parts(const CovarianceSpec& spec, double& sigma, double& rho) {
  if (const auto* s = std::get_if<IdentityScaled>(&spec.variant())) {
    sigma = s->sigma;
    rho = 0.0;
  } else {
    const auto& e = std::get<Equicorrelation>(spec.variant());
    sigma = e.sigma;
    rho = e.rho;
  }
}

RectGradTensor zero_tensor(int r, int d, double t, bool dense) {
  if (!dense) return RectGradTensor::pattern(r, d, t, {0.0, 0.0, 0.0});
  std::size_t n = 1;
  for (int i = 0; i < r; ++i) n *= static_cast<std::size_t>(d);
  return RectGradTensor::dense(r, d, t, std::vector<double>(n, 0.0));
}

}  // namespace

RectGradTensor rect_grad_integral(const CovarianceSpec& spec, double t, int r, IntegralMethod method,
                                  const Precision& prec) {
  if (r < 1 || r > 3) throw DomainError("rectangle integral order must be 1, 2 or 3");
  if (!std::isfinite(t)) throw DomainError("rectangle integral threshold must be finite");
  const int d = spec.dim();
  const bool exch = spec.is_exchangeable();
  const bool identity = std::holds_alternative<IdentityScaled>(spec.variant());

  if (method == IntegralMethod::automatic) {
    if (identity) method = IntegralMethod::closed_form;
    else if (exch) method = IntegralMethod::pattern;
    else if (d <= kDenseMaxDim) method = IntegralMethod::dense;
    else if (r <= 2) method = IntegralMethod::conditional_mc;
    else {
      std::ostringstream os;
      os << "no order-3 rectangle integral path for " << spec.describe() << " (dense path requires d <= " << kDenseMaxDim
         << ")";
      throw CapabilityError(os.str());
    }
  }

  const bool dense_out = method == IntegralMethod::dense || method == IntegralMethod::conditional_mc;
  if (std::abs(t) >= kTailCutoff * max_sd(spec) && method != IntegralMethod::conditional_mc) {
    if (method == IntegralMethod::dense && d > kDenseMaxDim)
      throw CapabilityError("dense rectangle integrals require d <= 6");
    return zero_tensor(r, d, t, dense_out);
  }

  switch (method) {
    case IntegralMethod::closed_form:
    case IntegralMethod::pattern: {
      if (!exch) throw CapabilityError("pattern rectangle integrals require an exchangeable covariance");
      double sigma, rho;
      exchangeable_parts(spec, sigma, rho);
      if (method == IntegralMethod::closed_form && rho != 0.0)
        throw CapabilityError("closed-form rectangle integrals require Sigma = sigma^2 I");
      auto v = equi_pattern(rho, d, t / sigma, r);
      const double scale = std::pow(sigma, -r);
      for (double& x : v) x *= scale;
      return RectGradTensor::pattern(r, d, t, v);
    }
    case IntegralMethod::dense: {
      if (d > kDenseMaxDim) {
        std::ostringstream os;
        os << "dense rectangle integrals require d <= " << kDenseMaxDim << " (got d = " << d << ")";
        throw CapabilityError(os.str());
      }
      return detail::rect_grad_dense(spec.materialize(), t, r);
    }
    case IntegralMethod::conditional_mc: {
      if (r > 2) throw CapabilityError("conditional Monte Carlo rectangle integrals support orders 1 and 2 only");
      const auto mc = detail::conditional_mc(spec, t, r == 2, prec);
      if (r == 1) return RectGradTensor::dense(1, d, t, std::vector<double>(mc.grad.data(), mc.grad.data() + d));
      std::vector<double> vals(static_cast<std::size_t>(d) * d);
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) vals[static_cast<std::size_t>(j) * d + k] = mc.hessian(j, k);
      return RectGradTensor::dense(2, d, t, std::move(vals));
    }
    default: break;
  }
  throw CapabilityError("unsupported rectangle integral method");
}

// ---------------------------------------------------------------------------
// CDF, quantile, density

McEstimate gmax_cdf_estimate(const CovarianceSpec& spec, double t, const Precision& prec) {
  if (std::isnan(t)) throw DomainError("gmax_cdf: t is NaN");
  const int d = spec.dim();
  const double hi_sd = max_sd(spec);
  if (t <= -kTailCutoff * hi_sd) return {0.0, 0.0};
  if (t >= kTailCutoff * hi_sd) return {1.0, 0.0};
  if (spec.is_exchangeable()) {
    double sigma, rho;
    exchangeable_parts(spec, sigma, rho);
    const double u = t / sigma;
    if (rho == 0.0) return {std::exp(d * norm_logcdf(u)), 0.0};
    const double v = factor_expectation(rho, d, u, [&](double, double L) { return std::exp(d * L); });
    return {std::clamp(v, 0.0, 1.0), 0.0};
  }
  if (d <= kDenseMaxDim) {
    const Eigen::MatrixXd sigma = spec.materialize();
    return {std::clamp(detail::mvn_orthant(sigma, Eigen::VectorXd::Constant(d, t)), 0.0, 1.0), 0.0};
  }
  const auto draws = detail::sample_gmax(spec, prec.mc_draws, prec.seed);
  long long hits = 0;
  for (double m : draws) hits += (m <= t);
  const double n = static_cast<double>(draws.size());
  const double p = hits / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

double gmax_cdf(const CovarianceSpec& spec, double t, const Precision& prec) {
  return gmax_cdf_estimate(spec, t, prec).value;
}

McEstimate gmax_quantile_estimate(const CovarianceSpec& spec, double p, const Precision& prec) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("gmax_quantile requires p in (0,1)");
  const int d = spec.dim();
  if (const auto* s = std::get_if<IdentityScaled>(&spec.variant())) {
    const double q = -std::expm1(std::log(p) / d);
    return {s->sigma * norm_quantile_upper(q), 0.0};
  }
  if (spec.is_exchangeable() || d <= kDenseMaxDim) {
    const double lo_sd = min_sd(spec);
    const double hi_sd = max_sd(spec);
    double lo = lo_sd * norm_quantile(p);
    double hi = hi_sd * norm_quantile_upper((1.0 - p) / d);
    lo -= 1e-6 * (1.0 + std::abs(lo));
    hi += 1e-6 * (1.0 + std::abs(hi));
    const auto f = [&](double t) { return gmax_cdf(spec, t, prec) - p; };
    double flo = f(lo), fhi = f(hi);
    for (int i = 0; i < 60 && flo > 0.0; ++i) {
      lo -= 1.0;
      flo = f(lo);
    }
    for (int i = 0; i < 60 && fhi < 0.0; ++i) {
      hi += 1.0;
      fhi = f(hi);
    }
    if (flo == 0.0) return {lo, 0.0};
    if (fhi == 0.0) return {hi, 0.0};
    const double tol = prec.root_tol;
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(
        f, lo, hi, flo, fhi, [tol](double a, double b) { return std::abs(b - a) <= tol; }, iters);
    return {0.5 * (r.first + r.second), 0.0};
  }
  auto draws = detail::sample_gmax(spec, prec.mc_draws, prec.seed);
  std::sort(draws.begin(), draws.end());
  const long long n = static_cast<long long>(draws.size());
  long long k = static_cast<long long>(std::ceil(p * n - 1e-9));
  k = std::clamp<long long>(k, 1, n);
  const long long h = std::max<long long>(1, static_cast<long long>(std::sqrt(static_cast<double>(n))));
  const long long lo = std::max<long long>(1, k - h);
  const long long hi = std::min<long long>(n, k + h);
  const double inv_density = hi > lo ? (draws[hi - 1] - draws[lo - 1]) * n / static_cast<double>(hi - lo) : 0.0;
  return {draws[k - 1], std::sqrt(p * (1.0 - p) / n) * inv_density};
}

double gmax_quantile(const CovarianceSpec& spec, double p, const Precision& prec) {
  return gmax_quantile_estimate(spec, p, prec).value;
}

double gmax_density(const CovarianceSpec& spec, double t, int r, const Precision& prec) {
  if (r != 0 && r != 1) throw DomainError("gmax_density order must be 0 or 1");
  const int d = spec.dim();
  if (std::abs(t) >= kTailCutoff * max_sd(spec)) return 0.0;
  if (const auto* s = std::get_if<IdentityScaled>(&spec.variant())) {
    const double u = t / s->sigma;
    const double L = norm_logcdf(u);
    const double ph = norm_pdf(u);
    if (r == 0) return d * ph * pow_cdf(L, d - 1.0) / s->sigma;
    const double off = d >= 2 ? (d - 1.0) * ph * ph * pow_cdf(L, d - 2.0) : 0.0;
    return d * (-u * ph * pow_cdf(L, d - 1.0) + off) / (s->sigma * s->sigma);
  }
  if (spec.is_exchangeable() || d <= kDenseMaxDim) return rect_grad_integral(spec, t, r + 1).contract_ones();
  const auto mc = detail::conditional_mc(spec, t, r == 1, prec);
  return r == 0 ? mc.density : mc.hessian.sum();
}

// ---------------------------------------------------------------------------
// Diagnostics

double GmaxDiagnostics::density_floor(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("density_floor requires p in (0,1)");
  return std::min(p / std::sqrt(2.0), std::pow(1.0 - p, 1.5)) / (4.0 * std::sqrt(var_max));
}

double GmaxDiagnostics::condition_lhs(long long n) const {
  if (n < 1) throw DomainError("condition_lhs requires n >= 1");
  const double ratio = varsigma_d / sigma_star;
  const double l = std::log(static_cast<double>(d) * static_cast<double>(n));
  return ratio * ratio * ratio * l * l * l / static_cast<double>(n) * std::log(static_cast<double>(n));
}

GmaxDiagnostics gmax_diagnostics(const CovarianceSpec& spec, long long mc_draws, std::uint64_t seed) {
  if (mc_draws < 2) throw ValidationError("gmax_diagnostics needs at least two draws");
  GmaxDiagnostics g;
  g.d = spec.dim();
  g.sigma_bar = max_sd(spec);
  g.sigma_under = min_sd(spec);
  g.sigma_star = std::visit(overloaded{
                                [](const IdentityScaled& s) { return s.sigma; },
                                [](const Equicorrelation& s) { return s.sigma * std::sqrt(1.0 - s.rho); },
                                [&](const auto&) {
                                  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec.materialize(),
                                                                                    Eigen::EigenvaluesOnly);
                                  return std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
                                },
                            },
                            spec.variant());
  if (std::holds_alternative<Equicorrelation>(spec.variant()) && spec.dim() == 1) g.sigma_star = g.sigma_bar;
  const auto draws = detail::sample_gmax(spec, mc_draws, seed);
  const double n = static_cast<double>(draws.size());
  double mean = 0.0;
  for (double x : draws) mean += x;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : draws) {
    const double c = (x - mean) * (x - mean);
    m2 += c;
    m4 += c * c;
  }
  g.var_max = m2 / (n - 1.0);
  m4 /= n;
  g.var_max_se = std::sqrt(std::max(0.0, m4 - g.var_max * g.var_max) / n);
  g.varsigma_d = std::sqrt(g.var_max * std::log(static_cast<double>(g.d)));
  return g;
}

}  // namespace maxboot
