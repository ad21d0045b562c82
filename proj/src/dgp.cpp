#include "maxboot/dgp.hpp"

#include "maxboot/error.hpp"
#include "maxboot/normal.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <variant>

namespace maxboot {

namespace {

bool unit_diagonal(const CovarianceSpec& spec) {
  if (const auto* s = std::get_if<IdentityScaled>(&spec.variant())) return s->sigma == 1.0;
  if (const auto* s = std::get_if<Equicorrelation>(&spec.variant())) return s->sigma == 1.0;
  if (std::holds_alternative<Ar1>(spec.variant())) return true;
  const auto& m = std::get<DenseCovariance>(spec.variant()).matrix;
  return ((m.diagonal().array() - 1.0).abs() < 1e-12).all();
}

}  // namespace

void CopulaConfig::validate() const {
  if (!unit_diagonal(corr)) throw ValidationError("copula correlation matrix must have unit diagonal");
  if (!(marginal_shape > 0.0)) throw ValidationError("copula marginal shape must be positive");
  if (!(marginal_scale > 0.0)) throw ValidationError("copula marginal scale must be positive");
  if (n < 1) throw ValidationError("copula n must be >= 1");
}

void FactorConfig::validate() const {
  if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("factor rho must lie in [0, 1)");
  if (n < 1 || d < 1) throw ValidationError("factor n and d must be >= 1");
  if (u_law.kind != ScalarLaw::Kind::normal && !(u_law.shape > 0.0)) throw ValidationError("factor U shape must be positive");
  if (v_law.kind != ScalarLaw::Kind::normal && !(v_law.shape > 0.0)) throw ValidationError("factor V shape must be positive");
}

double ScalarLaw::third_moment() const {
  switch (kind) {
    case Kind::normal:
    case Kind::sym_gamma: return 0.0;
    case Kind::std_gamma: return 2.0 / std::sqrt(shape);
  }
  return 0.0;
}

double ScalarLaw::sample(Rng& rng) const {
  switch (kind) {
    case Kind::normal: return rng.normal();
    case Kind::std_gamma:
      if (shape == 1.0) return rng.exponential() - 1.0;
      return (sample_gamma(shape, 1.0, rng) - shape) / std::sqrt(shape);
    case Kind::sym_gamma:
      return (sample_gamma(shape, 1.0, rng) - sample_gamma(shape, 1.0, rng)) / std::sqrt(2.0 * shape);
  }
  return 0.0;
}

CorrGaussianSampler::CorrGaussianSampler(const CovarianceSpec& corr) : spec_(corr), d_(corr.dim()) {
  if (!unit_diagonal(corr)) throw ValidationError("latent Gaussian spec must have unit diagonal");
  if (const auto* dense = std::get_if<DenseCovariance>(&spec_.variant())) {
    Eigen::LLT<Eigen::MatrixXd> llt(dense->matrix);
    if (llt.info() != Eigen::Success) throw ValidationError("dense correlation matrix is not positive definite");
    chol_ = llt.matrixL();
    scratch_.resize(d_);
  }
}

void CorrGaussianSampler::draw(Rng& rng, std::span<double> out) const {
  if (static_cast<int>(out.size()) != d_) throw ValidationError("latent draw buffer has wrong length");
  const auto& v = spec_.variant();
  if (std::holds_alternative<IdentityScaled>(v)) {
    for (double& z : out) z = rng.normal();
  } else if (const auto* e = std::get_if<Equicorrelation>(&v)) {
    const double a = std::sqrt(e->rho);
    const double b = std::sqrt(1.0 - e->rho);
    const double common = a * rng.normal();
    for (double& z : out) z = common + b * rng.normal();
  } else if (const auto* r = std::get_if<Ar1>(&v)) {
    const double b = std::sqrt(1.0 - r->rho * r->rho);
    out[0] = rng.normal();
    for (int j = 1; j < d_; ++j) out[j] = r->rho * out[j - 1] + b * rng.normal();
  } else {
    Eigen::VectorXd eps(d_);
    for (int j = 0; j < d_; ++j) eps[j] = rng.normal();
    Eigen::Map<Eigen::VectorXd>(out.data(), d_).noalias() = chol_.triangularView<Eigen::Lower>() * eps;
  }
}

Eigen::VectorXd sample_corr_gaussian(const CovarianceSpec& corr, Rng& rng) {
  CorrGaussianSampler s(corr);
  Eigen::VectorXd z(corr.dim());
  s.draw(rng, std::span<double>(z.data(), z.size()));
  return z;
}

double gamma_quantile(double shape, double p) {
  if (!(shape > 0.0)) throw DomainError("gamma shape must be positive");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("gamma_quantile requires p in (0,1)");
  if (shape == 1.0) return -std::log1p(-p);
  if (shape == 0.5) {
    const double x = norm_quantile(0.5 + 0.5 * p);
    return 0.5 * x * x;
  }
  return boost::math::gamma_p_inv(shape, p);
}

double gamma_quantile_upper(double shape, double q) {
  if (!(shape > 0.0)) throw DomainError("gamma shape must be positive");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("gamma_quantile_upper requires q in (0,1)");
  if (shape == 1.0) return -std::log(q);
  if (shape == 0.5) {
    const double x = norm_quantile_upper(0.5 * q);
    return 0.5 * x * x;
  }
  return boost::math::gamma_q_inv(shape, q);
}

double gamma_cdf(double shape, double x) {
  if (!(shape > 0.0)) throw DomainError("gamma shape must be positive");
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(shape, x);
}

double gamma_from_latent(double shape, double z) {
  if (z > 0.0) return gamma_quantile_upper(shape, norm_sf(z));
  return gamma_quantile(shape, norm_cdf(z));
}

DataSet copula_from_latent(const CopulaConfig& cfg, const RowMatrix& z) {
  if (z.cols() != cfg.d()) throw ValidationError("latent matrix has wrong column count");
  const double shift = cfg.marginal_shape * cfg.marginal_scale;
  RowMatrix x(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      x(i, j) = cfg.marginal_scale * gamma_from_latent(cfg.marginal_shape, z(i, j)) - shift;
  return DataSet(std::move(x));
}

DataSet copula_from_latent(const CopulaConfig& cfg, const RowMatrix& z, const RowMatrix& z_prime) {
  if (z.cols() != cfg.d() || z_prime.cols() != cfg.d() || z.rows() != z_prime.rows())
    throw ValidationError("latent matrices have mismatched shapes");
  RowMatrix x(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      x(i, j) = cfg.marginal_scale * (gamma_from_latent(cfg.marginal_shape, z(i, j)) -
                                      gamma_from_latent(cfg.marginal_shape, z_prime(i, j)));
  return DataSet(std::move(x));
}

DataSet gen_copula(const CopulaConfig& cfg, Rng& rng) {
  cfg.validate();
  const int d = cfg.d();
  CorrGaussianSampler sampler(cfg.corr);
  RowMatrix z(cfg.n, d);
  for (int i = 0; i < cfg.n; ++i) sampler.draw(rng, std::span<double>(z.row(i).data(), d));
  if (!cfg.symmetrize) return copula_from_latent(cfg, z);
  RowMatrix zp(cfg.n, d);
  for (int i = 0; i < cfg.n; ++i) sampler.draw(rng, std::span<double>(zp.row(i).data(), d));
  return copula_from_latent(cfg, z, zp);
}

DataSet gen_factor(const FactorConfig& cfg, Rng& rng) {
  cfg.validate();
  const double a = std::sqrt(cfg.rho);
  const double b = std::sqrt(1.0 - cfg.rho);
  RowMatrix x(cfg.n, cfg.d);
  for (int i = 0; i < cfg.n; ++i) {
    const double u = a * cfg.u_law.sample(rng);
    for (int j = 0; j < cfg.d; ++j) x(i, j) = u + b * cfg.v_law.sample(rng);
  }
  return DataSet(std::move(x));
}

DataSet gen_iid(const ScalarLaw& law, int n, int d, Rng& rng) {
  if (n < 1 || d < 1) throw ValidationError("gen_iid requires n, d >= 1");
  RowMatrix x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = law.sample(rng);
  return DataSet(std::move(x));
}

double copula_marginal_cov(double shape, double scale, double r) {
  if (!(r >= -1.0 && r <= 1.0)) throw DomainError("latent correlation must lie in [-1, 1]");
  static const GaussRule rule = gauss_hermite_normal(96);
  const std::size_t m = rule.nodes.size();
  std::vector<double> g(m);
  for (std::size_t k = 0; k < m; ++k) g[k] = gamma_from_latent(shape, rule.nodes[k]) - shape;
  if (r == 0.0) return 0.0;
  if (r == 1.0 || r == -1.0) {
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double other = r > 0 ? g[k] : gamma_from_latent(shape, -rule.nodes[k]) - shape;
      acc += rule.weights[k] * g[k] * other;
    }
    return scale * scale * acc;
  }
  const double s = std::sqrt(1.0 - r * r);
  double acc = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double inner = 0.0;
    for (std::size_t l = 0; l < m; ++l)
      inner += rule.weights[l] * (gamma_from_latent(shape, r * rule.nodes[k] + s * rule.nodes[l]) - shape);
    acc += rule.weights[k] * g[k] * inner;
  }
  return scale * scale * acc;
}

CovarianceSpec copula_population_cov(const CopulaConfig& cfg) {
  cfg.validate();
  const double factor = cfg.symmetrize ? 2.0 : 1.0;
  const double var = factor * cfg.marginal_shape * cfg.marginal_scale * cfg.marginal_scale;
  const auto cov = [&](double r) {
    return factor * copula_marginal_cov(cfg.marginal_shape, cfg.marginal_scale, r);
  };
  const int d = cfg.d();
  const auto& v = cfg.corr.variant();
  if (std::holds_alternative<IdentityScaled>(v)) return CovarianceSpec::identity(d, std::sqrt(var));
  if (const auto* e = std::get_if<Equicorrelation>(&v)) {
    const double c = e->rho == 0.0 ? 0.0 : cov(e->rho);
    return CovarianceSpec::equicorrelation(d, c / var, std::sqrt(var));
  }
  Eigen::MatrixXd m(d, d);
  if (const auto* a = std::get_if<Ar1>(&v)) {
    std::vector<double> lag(d);
    lag[0] = var;
    for (int k = 1; k < d; ++k) lag[k] = cov(std::pow(a->rho, k));
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) m(j, k) = lag[std::abs(j - k)];
  } else {
    const auto& r = std::get<DenseCovariance>(v).matrix;
    for (int j = 0; j < d; ++j) {
      m(j, j) = var;
      for (int k = j + 1; k < d; ++k) m(j, k) = m(k, j) = cov(r(j, k));
    }
  }
  return CovarianceSpec::dense(std::move(m));
}

}  // namespace maxboot
