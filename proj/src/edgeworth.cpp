#include "maxboot/edgeworth.hpp"

#include "maxboot/error.hpp"
#include "maxboot/normal.hpp"

#include <cmath>
#include <sstream>

namespace maxboot {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int source_dim(const ThirdMomentSource& src) {
  return std::visit(overloaded{
                        [](const ThirdMomentSummary& s) { return s.d; },
                        [](const DenseThirdMoments& m) { return m.d; },
                        [](const std::shared_ptr<const DataSet>& p) { return p ? p->d() : 0; },
                    },
                    src);
}

bool is_pattern(const RectGradTensor& t) { return t.representation() == RectGradTensor::Representation::pattern; }

double contract_summary3(const std::array<double, 3>& v, const ThirdMomentSummary& s) {
  return v[0] * s.s1 + 3.0 * v[1] * s.s2 + v[2] * s.s3;
}

double pattern_psi_pair(double a, double b, int d, const ThirdMomentSummary& s) {
  return (a + (d - 1.0) * b) * ((a - b) * (s.s1 + s.s2) + b * (s.s1 + 3.0 * s.s2 + s.s3));
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
}

}  // namespace

void ExpansionInputs::validate() const {
  if (n < 1) throw ValidationError("expansion sample size must be >= 1");
  if (!(gamma >= -2.0 && gamma <= 2.0)) throw ValidationError("weight third moment gamma outside [-2, 2]");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ValidationError("epsilon must lie in (0, 0.5)");
  if (const auto* p = std::get_if<std::shared_ptr<const DataSet>>(&third_moments); p && !*p)
    throw ValidationError("third-moment data pointer is null");
  if (const auto* m = std::get_if<DenseThirdMoments>(&third_moments)) {
    const auto d = static_cast<std::size_t>(m->d);
    if (m->values.size() != d * d * d) throw ValidationError("dense third-moment tensor has the wrong size");
  }
  if (source_dim(third_moments) != sigma.dim()) throw ValidationError("third-moment dimension does not match Sigma");
}

bool third_moments_vanish(const ThirdMomentSource& src) {
  return std::visit(overloaded{
                        [](const ThirdMomentSummary& s) { return s.is_zero(); },
                        [](const DenseThirdMoments& m) {
                          for (double v : m.values)
                            if (v != 0.0) return false;
                          return true;
                        },
                        [](const std::shared_ptr<const DataSet>& p) { return p->values().isZero(0.0); },
                    },
                    src);
}

double contract_third(const RectGradTensor& t3, const ThirdMomentSource& src) {
  if (t3.order() != 3) throw ValidationError("contract_third needs an order-3 tensor");
  const int d = t3.dim();
  if (source_dim(src) != d) throw ValidationError("third-moment dimension mismatch");
  if (is_pattern(t3)) {
    return std::visit(overloaded{
                          [&](const ThirdMomentSummary& s) { return contract_summary3(t3.pattern_values(), s); },
                          [&](const DenseThirdMoments& m) {
                            const auto dense = t3.to_dense();
                            double acc = 0.0;
                            for (std::size_t i = 0; i < dense.size(); ++i) acc += dense[i] * m.values[i];
                            return acc;
                          },
                          [&](const std::shared_ptr<const DataSet>& p) {
                            return contract_summary3(t3.pattern_values(), third_moment_summary(*p));
                          },
                      },
                      src);
  }
  const auto dense = t3.to_dense();
  return std::visit(overloaded{
                        [&](const ThirdMomentSummary&) -> double {
                          throw CapabilityError(
                              "an exchangeable third-moment summary cannot be contracted against a non-exchangeable "
                              "tensor; supply a dense tensor or data");
                        },
                        [&](const DenseThirdMoments& m) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i < dense.size(); ++i) acc += dense[i] * m.values[i];
                          return acc;
                        },
                        [&](const std::shared_ptr<const DataSet>& p) {
                          const auto& x = p->values();
                          double acc = 0.0;
                          for (Eigen::Index i = 0; i < x.rows(); ++i)
                            for (int j = 0; j < d; ++j)
                              for (int k = 0; k < d; ++k) {
                                const double xjk = x(i, j) * x(i, k);
                                const double* row = &dense[(static_cast<std::size_t>(j) * d + k) * d];
                                for (int l = 0; l < d; ++l) acc += xjk * x(i, l) * row[l];
                              }
                          return acc / static_cast<double>(x.rows());
                        },
                    },
                    src);
}

double contract_psi_pair(const RectGradTensor& psi, const ThirdMomentSource& src) {
  if (psi.order() != 2) throw ValidationError("contract_psi_pair needs an order-2 tensor");
  const int d = psi.dim();
  if (source_dim(src) != d) throw ValidationError("third-moment dimension mismatch");
  if (is_pattern(psi)) {
    const double a = psi.pattern_values()[0], b = psi.pattern_values()[1];
    if (const auto* s = std::get_if<ThirdMomentSummary>(&src)) return pattern_psi_pair(a, b, d, *s);
    if (const auto* p = std::get_if<std::shared_ptr<const DataSet>>(&src))
      return pattern_psi_pair(a, b, d, third_moment_summary(**p));
  } else if (std::holds_alternative<ThirdMomentSummary>(src)) {
    throw CapabilityError(
        "an exchangeable third-moment summary cannot be contracted against a non-exchangeable Psi; supply a dense "
        "tensor or data");
  }
  const Eigen::MatrixXd m = psi.matrix();
  const Eigen::VectorXd v = m.rowwise().sum();
  if (const auto* t = std::get_if<DenseThirdMoments>(&src)) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) acc += t->values[(static_cast<std::size_t>(j) * d + k) * d + l] * m(j, k) * v[l];
    return acc;
  }
  const auto& x = std::get<std::shared_ptr<const DataSet>>(src)->values();
  constexpr Eigen::Index kChunk = 2048;
  double acc = 0.0;
  for (Eigen::Index start = 0; start < x.rows(); start += kChunk) {
    const Eigen::Index rows = std::min(kChunk, x.rows() - start);
    const auto block = x.middleRows(start, rows);
    const RowMatrix y = block * m;
    const Eigen::VectorXd quad = (y.array() * block.array()).rowwise().sum();
    const Eigen::VectorXd lin = block * v;
    acc += quad.dot(lin);
  }
  return acc / static_cast<double>(x.rows());
}

double q_n(const ExpansionInputs& in, double t) {
  in.validate();
  if (third_moments_vanish(in.third_moments)) return 0.0;
  const auto t3 = rect_grad_integral(in.sigma, t, 3, in.method, in.precision);
  return -contract_third(t3, in.third_moments) / (6.0 * std::sqrt(static_cast<double>(in.n)));
}

RectGradTensor psi_alpha(const CovarianceSpec& sigma, double alpha, IntegralMethod method, const Precision& prec) {
  check_alpha(alpha);
  const double c = gmax_quantile(sigma, 1.0 - alpha, prec);
  return rect_grad_integral(sigma, c, 2, method, prec);
}

namespace {

double r_n_at(const ExpansionInputs& in, double c) {
  const auto psi = rect_grad_integral(in.sigma, c, 2, in.method, in.precision);
  const double f = gmax_density(in.sigma, c, 0, in.precision);
  if (!(f > 0.0)) throw CapabilityError("Gaussian max density vanished at the quantile");
  return contract_psi_pair(psi, in.third_moments) / (2.0 * std::sqrt(static_cast<double>(in.n)) * f);
}

}  // namespace

double r_n(const ExpansionInputs& in, double alpha) {
  in.validate();
  check_alpha(alpha);
  if (third_moments_vanish(in.third_moments)) return 0.0;
  return r_n_at(in, gmax_quantile(in.sigma, 1.0 - alpha, in.precision));
}

CoveragePrediction predicted_rejection(const ExpansionInputs& in, double alpha) {
  in.validate();
  if (!(alpha > in.epsilon && alpha < 1.0 - in.epsilon)) {
    std::ostringstream os;
    os << "alpha = " << alpha << " outside the admissible window (" << in.epsilon << ", " << 1.0 - in.epsilon << ")";
    throw DomainError(os.str());
  }
  CoveragePrediction out;
  out.alpha = alpha;
  out.c_g = gmax_quantile(in.sigma, 1.0 - alpha, in.precision);
  if (!third_moments_vanish(in.third_moments)) {
    if (in.gamma != 1.0) {
      const auto t3 = rect_grad_integral(in.sigma, out.c_g, 3, in.method, in.precision);
      const double q = -contract_third(t3, in.third_moments) / (6.0 * std::sqrt(static_cast<double>(in.n)));
      out.q_term = (1.0 - in.gamma) * q;
    }
    out.r_term = r_n_at(in, out.c_g);
  }
  out.predicted = alpha - out.q_term - out.r_term;
  return out;
}

double cornish_fisher_quantile(const ExpansionInputs& in, const DataSet& sample, double p) {
  in.validate();
  if (!(p > in.epsilon && p < 1.0 - in.epsilon)) throw DomainError("p outside the admissible window");
  if (sample.d() != in.sigma.dim()) throw ValidationError("sample dimension does not match Sigma");
  const double c = gmax_quantile(in.sigma, p, in.precision);
  const double f = gmax_density(in.sigma, c, 0, in.precision);
  if (!(f > 0.0)) throw CapabilityError("Gaussian max density vanished at the quantile");

  const auto t2 = rect_grad_integral(in.sigma, c, 2, in.method, in.precision);
  double second;
  if (is_pattern(t2)) {
    const auto sm = second_moment_summary(sample);
    const double a = t2.pattern_values()[0], b = t2.pattern_values()[1];
    const Eigen::MatrixXd s = in.sigma.materialize();
    const double tr = sm.diag - s.trace();
    const double all = sm.square_of_sum - s.sum();
    second = (a - b) * tr + b * all;
  } else {
    const auto& x = sample.values();
    const Eigen::MatrixXd m2 = (x.transpose() * x) / static_cast<double>(sample.n()) - in.sigma.materialize();
    second = (m2.array() * t2.matrix().array()).sum();
  }
  double third = 0.0;
  if (in.gamma != 0.0) {
    const auto t3 = rect_grad_integral(in.sigma, c, 3, in.method, in.precision);
    third = contract_third(t3, std::make_shared<const DataSet>(sample));
  }
  const double qhat = 0.5 * second - in.gamma * third / (6.0 * std::sqrt(static_cast<double>(in.n)));
  return c - qhat / f;
}

double spherical_limit(double gamma_x, double alpha, double w3) {
  check_alpha(alpha);
  return -(1.0 - w3) * (std::sqrt(2.0) / 3.0) * gamma_x * std::log1p(-alpha);
}

double factor_expansion_leading(double eu3, double gamma, double alpha, long long n) {
  check_alpha(alpha);
  if (n < 1) throw DomainError("n must be >= 1");
  const double z = norm_quantile(alpha);
  return eu3 / std::sqrt(static_cast<double>(n)) * ((gamma - 1.0) / 6.0 * (z * z - 1.0) + 0.5 * z * z) * norm_pdf(z);
}

}  // namespace maxboot
