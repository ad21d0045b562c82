#include "maxboot/model.hpp"

#include "maxboot/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace maxboot {

namespace {

void require_dim(int d) {
  if (d < 1) throw ValidationError("covariance dimension must be >= 1");
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

CovarianceSpec CovarianceSpec::identity(int d, double sigma) {
  require_dim(d);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("IdentityScaled: sigma must be positive");
  return CovarianceSpec(d, IdentityScaled{sigma});
}

CovarianceSpec CovarianceSpec::equicorrelation(int d, double rho, double sigma) {
  require_dim(d);
  if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("Equicorrelation: rho must lie in [0, 1)");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("Equicorrelation: sigma must be positive");
  return CovarianceSpec(d, Equicorrelation{rho, sigma});
}

CovarianceSpec CovarianceSpec::ar1(int d, double rho) {
  require_dim(d);
  if (!(rho > -1.0 && rho < 1.0)) throw ValidationError("AR1: rho must lie in (-1, 1)");
  return CovarianceSpec(d, Ar1{rho});
}

CovarianceSpec CovarianceSpec::dense(Eigen::MatrixXd matrix) {
  const auto d = matrix.rows();
  if (d < 1 || matrix.cols() != d) throw ValidationError("Dense covariance must be a nonempty square matrix");
  if (!matrix.allFinite()) throw ValidationError("Dense covariance has non-finite entries");
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(matrix(j, j) > 0.0)) throw ValidationError("Dense covariance has a nonpositive diagonal entry");
    for (Eigen::Index k = j + 1; k < d; ++k) {
      const double a = matrix(j, k);
      const double b = matrix(k, j);
      if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
        throw ValidationError("Dense covariance is not symmetric");
    }
  }
  const double pivot = smallest_pivot(matrix);
  if (!(pivot > 1e-10)) {
    std::ostringstream os;
    os << "Dense covariance is not positive definite (smallest pivot " << pivot << ")";
    throw ValidationError(os.str());
  }
  Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  return CovarianceSpec(static_cast<int>(d), DenseCovariance{std::move(sym)});
}

double smallest_pivot(const Eigen::MatrixXd& m) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  if (ldlt.info() != Eigen::Success) return -1.0;
  return ldlt.vectorD().minCoeff();
}

bool CovarianceSpec::is_exchangeable() const {
  return std::holds_alternative<IdentityScaled>(variant_) || std::holds_alternative<Equicorrelation>(variant_);
}

double CovarianceSpec::entry(int j, int k) const {
  return std::visit(overloaded{
                        [&](const IdentityScaled& s) { return j == k ? s.sigma * s.sigma : 0.0; },
                        [&](const Equicorrelation& s) { return s.sigma * s.sigma * (j == k ? 1.0 : s.rho); },
                        [&](const Ar1& s) { return std::pow(s.rho, std::abs(j - k)); },
                        [&](const DenseCovariance& s) { return s.matrix(j, k); },
                    },
                    variant_);
}

Eigen::MatrixXd CovarianceSpec::materialize() const {
  if (const auto* dense = std::get_if<DenseCovariance>(&variant_)) return dense->matrix;
  Eigen::MatrixXd m(dim_, dim_);
  for (int j = 0; j < dim_; ++j)
    for (int k = 0; k < dim_; ++k) m(j, k) = entry(j, k);
  return m;
}

Eigen::MatrixXd materialize_cov(const CovarianceSpec& spec) { return spec.materialize(); }

CovarianceSpec CovarianceSpec::scaled(double c) const {
  if (!(c > 0.0)) throw ValidationError("scale factor must be positive");
  return std::visit(overloaded{
                        [&](const IdentityScaled& s) { return identity(dim_, c * s.sigma); },
                        [&](const Equicorrelation& s) { return equicorrelation(dim_, s.rho, c * s.sigma); },
                        [&](const Ar1&) { return dense(c * c * materialize()); },
                        [&](const DenseCovariance& s) { return dense(c * c * s.matrix); },
                    },
                    variant_);
}

std::string CovarianceSpec::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const IdentityScaled& s) { os << "identity(d=" << dim_ << ", sigma=" << s.sigma << ")"; },
                 [&](const Equicorrelation& s) {
                   os << "equicorrelation(d=" << dim_ << ", rho=" << s.rho << ", sigma=" << s.sigma << ")";
                 },
                 [&](const Ar1& s) { os << "ar1(d=" << dim_ << ", rho=" << s.rho << ")"; },
                 [&](const DenseCovariance&) { os << "dense(d=" << dim_ << ")"; },
             },
             variant_);
  return os.str();
}

DataSet::DataSet(RowMatrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) throw ValidationError("DataSet requires n >= 1 and d >= 1");
  if (!values_.allFinite()) throw ValidationError("DataSet contains non-finite entries");
}

DataSet DataSet::scaled(double c) const { return DataSet(c * values_); }

void MomentAccumulator::add(const RowMatrix& rows) {
  if (rows.cols() != d_) throw ValidationError("MomentAccumulator: column count mismatch");
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double s = 0.0, sq = 0.0, cube = 0.0;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      const double x = rows(i, j);
      s += x;
      sq += x * x;
      cube += x * x * x;
    }
    sum_cube_ += cube;
    sum_sq_times_s_ += sq * s;
    sum_s_cube_ += s * s * s;
    sum_sq_ += sq;
    sum_s_sq_ += s * s;
  }
  n_ += rows.rows();
}

ThirdMomentSummary MomentAccumulator::third() const {
  ThirdMomentSummary out;
  out.n = n_;
  out.d = d_;
  if (n_ == 0) return out;
  const double inv = 1.0 / static_cast<double>(n_);
  out.s1 = sum_cube_ * inv;
  out.s2 = sum_sq_times_s_ * inv - out.s1;
  out.s3 = sum_s_cube_ * inv - 3.0 * out.s2 - out.s1;
  return out;
}

SecondMomentSummary MomentAccumulator::second() const {
  SecondMomentSummary out;
  out.n = n_;
  out.d = d_;
  if (n_ == 0) return out;
  const double inv = 1.0 / static_cast<double>(n_);
  out.diag = sum_sq_ * inv;
  out.square_of_sum = sum_s_sq_ * inv;
  return out;
}

ThirdMomentSummary third_moment_summary(const DataSet& data) {
  MomentAccumulator acc(data.d());
  acc.add(data.values());
  return acc.third();
}

SecondMomentSummary second_moment_summary(const DataSet& data) {
  MomentAccumulator acc(data.d());
  acc.add(data.values());
  return acc.second();
}

}  // namespace maxboot
