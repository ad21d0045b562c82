#pragma once

#include "maxboot/gaussnum.hpp"
#include "maxboot/model.hpp"

#include <memory>
#include <variant>
#include <vector>

namespace maxboot {

/// Full third-moment tensor E[X^{(x)3}] in row-major order (small d only).
struct DenseThirdMoments {
  int d = 0;
  std::vector<double> values;
};

/// Where E[X-bar^3] comes from: an exchangeable summary, a dense tensor, or data
/// whose empirical moments are contracted on the fly.
using ThirdMomentSource = std::variant<ThirdMomentSummary, DenseThirdMoments, std::shared_ptr<const DataSet>>;

struct ExpansionInputs {
  CovarianceSpec sigma = CovarianceSpec::identity(1);
  long long n = 1;
  double gamma = 0.0;
  ThirdMomentSource third_moments = ThirdMomentSummary{};
  IntegralMethod method = IntegralMethod::automatic;
  Precision precision{};
  double epsilon = 0.01;

  void validate() const;
};

struct CoveragePrediction {
  double alpha = 0.0;
  double predicted = 0.0;
  double q_term = 0.0;  // (1 - gamma) Q_n(c_g)
  double r_term = 0.0;  // E[R_n(alpha)]
  double c_g = 0.0;
};

/// <E X^{(x)3}, T> for an order-3 tensor.
double contract_third(const RectGradTensor& t3, const ThirdMomentSource& src);
/// <E X^{(x)3} (x) 1, Psi (x) Psi> = E[(X'Psi X)(X'Psi 1)].
double contract_psi_pair(const RectGradTensor& psi, const ThirdMomentSource& src);
bool third_moments_vanish(const ThirdMomentSource& src);

double q_n(const ExpansionInputs& in, double t);
RectGradTensor psi_alpha(const CovarianceSpec& sigma, double alpha, IntegralMethod method = IntegralMethod::automatic,
                         const Precision& prec = {});
double r_n(const ExpansionInputs& in, double alpha);
CoveragePrediction predicted_rejection(const ExpansionInputs& in, double alpha);

/// c_p^G - Q-hat_{n,gamma}(c_p^G) / f_Sigma(c_p^G) with raw sample moments of `sample`.
double cornish_fisher_quantile(const ExpansionInputs& in, const DataSet& sample, double p);

/// -(1 - w3) (sqrt2 / 3) gamma_x log(1 - alpha)
double spherical_limit(double gamma_x, double alpha, double w3);

/// (EU3 / sqrt n) ((gamma - 1)/6 (z^2 - 1) + z^2 / 2) phi(z), z = Phi^{-1}(alpha)
double factor_expansion_leading(double eu3, double gamma, double alpha, long long n);

}  // namespace maxboot
