#include "maxboot/error.hpp"
#include "maxboot/gaussnum.hpp"
#include "maxboot/normal.hpp"
#include "maxboot/random.hpp"

#include <cmath>
#include <variant>

namespace maxboot::detail {

namespace {

// Row draws of N(0, Sigma) for any spec.
class RowSampler {
 public:
  explicit RowSampler(const CovarianceSpec& spec) : spec_(spec), d_(spec.dim()) {
    if (const auto* dense = std::get_if<DenseCovariance>(&spec.variant())) {
      Eigen::LLT<Eigen::MatrixXd> llt(dense->matrix);
      if (llt.info() != Eigen::Success) throw ValidationError("covariance is not positive definite");
      chol_ = llt.matrixL();
    }
  }

  void fill(Rng& rng, RowMatrix& out) const {
    const auto rows = out.rows();
    const auto& v = spec_.variant();
    if (const auto* s = std::get_if<IdentityScaled>(&v)) {
      for (Eigen::Index i = 0; i < rows; ++i)
        for (int j = 0; j < d_; ++j) out(i, j) = s->sigma * rng.normal();
    } else if (const auto* e = std::get_if<Equicorrelation>(&v)) {
      const double a = e->sigma * std::sqrt(e->rho), b = e->sigma * std::sqrt(1.0 - e->rho);
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double common = a * rng.normal();
        for (int j = 0; j < d_; ++j) out(i, j) = common + b * rng.normal();
      }
    } else if (const auto* r = std::get_if<Ar1>(&v)) {
      const double b = std::sqrt(1.0 - r->rho * r->rho);
      for (Eigen::Index i = 0; i < rows; ++i) {
        out(i, 0) = rng.normal();
        for (int j = 1; j < d_; ++j) out(i, j) = r->rho * out(i, j - 1) + b * rng.normal();
      }
    } else {
      RowMatrix eps(rows, d_);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (int j = 0; j < d_; ++j) eps(i, j) = rng.normal();
      out.noalias() = eps * chol_.transpose();
    }
  }

 private:
  CovarianceSpec spec_;
  int d_;
  Eigen::MatrixXd chol_;
};

constexpr long long kChunk = 4096;

}  // namespace

std::vector<double> sample_gmax(const CovarianceSpec& spec, long long draws, std::uint64_t seed) {
  if (draws < 1) throw ValidationError("Monte Carlo draw count must be >= 1");
  RowSampler sampler(spec);
  Rng rng(StreamKey{seed, 0, StreamPurpose::gaussian_ref, 0});
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(draws));
  RowMatrix z;
  for (long long done = 0; done < draws; done += kChunk) {
    const long long m = std::min(kChunk, draws - done);
    z.resize(m, spec.dim());
    sampler.fill(rng, z);
    for (long long i = 0; i < m; ++i) out.push_back(z.row(i).maxCoeff());
  }
  return out;
}

ConditionalMc conditional_mc(const CovarianceSpec& spec, double t, bool want_hessian, const Precision& prec) {
  const long long n = prec.cond_mc_draws;
  if (n < 2) throw ValidationError("conditional Monte Carlo needs at least two draws");
  const int d = spec.dim();
  const Eigen::MatrixXd sigma = spec.materialize();
  RowSampler sampler(spec);
  Rng rng(StreamKey{prec.seed, 1, StreamPurpose::gaussian_ref, 0});
  RowMatrix z(n, d);
  sampler.fill(rng, z);

  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  Eigen::VectorXd phi_marg(d);
  for (int j = 0; j < d; ++j) {
    const double sd = std::sqrt(sigma(j, j));
    phi_marg[j] = norm_pdf(t / sd) / sd;
  }

  ConditionalMc out;
  out.grad = Eigen::VectorXd::Zero(d);
  if (want_hessian) out.hessian = Eigen::MatrixXd::Zero(d, d);
  RowMatrix pz;
  if (want_hessian) pz = z * sigma.llt().solve(Eigen::MatrixXd::Identity(d, d));

  Eigen::VectorXd per_draw = Eigen::VectorXd::Zero(n);
  RowMatrix zj(n, d);
  Eigen::VectorXd g(d);
  for (int j = 0; j < d; ++j) {
    const double sjj = sigma(j, j);
    for (long long i = 0; i < n; ++i) {
      const double delta = (t - z(i, j)) / sjj;
      for (int k = 0; k < d; ++k) zj(i, k) = z(i, k) + sigma(k, j) * delta;
    }
    long long hits = 0;
    double diag_acc = 0.0;
    for (long long i = 0; i < n; ++i) {
      if (zj.row(i).maxCoeff() <= t + tol) {
        ++hits;
        per_draw[i] += phi_marg[j];
        if (want_hessian) diag_acc += pz(i, j) + (t - z(i, j)) / sjj;
      }
    }
    out.grad[j] = phi_marg[j] * static_cast<double>(hits) / n;
    if (!want_hessian) continue;
    out.hessian(j, j) = -phi_marg[j] * diag_acc / n;
    for (int l = j + 1; l < d; ++l) {
      const double cll = sigma(l, l) - sigma(l, j) * sigma(l, j) / sjj;
      for (int k = 0; k < d; ++k) g[k] = (sigma(k, l) - sigma(k, j) * sigma(j, l) / sjj) / cll;
      long long pair_hits = 0;
      for (long long i = 0; i < n; ++i) {
        const double delta = t - zj(i, l);
        const double* row = zj.row(i).data();
        double m = -INFINITY;
        for (int k = 0; k < d; ++k) m = std::max(m, row[k] + g[k] * delta);
        pair_hits += (m <= t + tol);
      }
      const double det = sjj * sigma(l, l) - sigma(j, l) * sigma(j, l);
      const double quad = t * t * (sjj + sigma(l, l) - 2.0 * sigma(j, l)) / det;
      const double dens = std::exp(-0.5 * quad) / (2.0 * M_PI * std::sqrt(det));
      out.hessian(j, l) = out.hessian(l, j) = dens * static_cast<double>(pair_hits) / n;
    }
  }
  out.density = per_draw.mean();
  const double var = (per_draw.array() - out.density).square().sum() / (n - 1.0);
  out.density_se = std::sqrt(var / n);
  return out;
}

}  // namespace maxboot::detail
