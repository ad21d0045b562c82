#include "maxboot/verify.hpp"

#include "maxboot/gaussnum.hpp"
#include "maxboot/normal.hpp"
#include "maxboot/random.hpp"
#include "maxboot/stein.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace maxboot {

namespace {

VerifyCheck check(std::string suite, std::string name, double value, double tol) {
  return {std::move(suite), std::move(name), value, tol, value <= tol};
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace

std::vector<VerifyCheck> verify_stein() {
  std::vector<VerifyCheck> out;
  const auto normal = kernel_from_density([](double x) { return norm_pdf(x); }, 0.0, Interval{});
  double err = 0.0;
  for (double x = -4.0; x <= 4.0; x += 0.25) err = std::max(err, std::abs(normal(x) - 1.0));
  out.push_back(check("stein", "normal kernel == 1 on [-4,4]", err, 1e-8));

  const auto expo = kernel_from_density([](double x) { return std::exp(-(x + 1.0)); }, 0.0, Interval{-1.0, INFINITY});
  for (double x : {-0.5, 0.0, 2.0})
    out.push_back(check("stein", fmt("centered exponential kernel at x=%g", x), std::abs(expo(x) - (x + 1.0)), 1e-8));

  const auto w = WeightLaw::std_beta(0.1);
  const auto beta = kernel_from_law(beta_law(w.a(), w.b()));
  for (double x : {0.25, 0.5, 0.75})
    out.push_back(check("stein", fmt("beta kernel at x=%g", x),
                        std::abs(beta(x) - x * (1.0 - x) / (w.a() + w.b())), 1e-8));

  const auto law = std_beta_law(w);
  const auto kernel = kernel_from_law(law);
  const auto moments = std_beta_moments(w, 8);
  const auto tau = std_beta_kernel_polynomial(w);
  for (int k = 0; k <= 4; ++k) {
    const auto h = Polynomial::monomial(k);
    out.push_back(check("stein", fmt("std-beta(0.1) quadrature residual, h = x^%g", k),
                        stein_identity_residual(law, kernel, h), 1e-8));
    out.push_back(check("stein", fmt("std-beta(0.1) exact-moment residual, h = x^%g", k),
                        stein_identity_residual(moments, tau, h), 1e-10));
  }
  const auto bound = kernel_bound_check(w);
  out.push_back(check("stein", "std-beta(0.1) sup tau* direct vs rescaled",
                      std::abs(bound.tau_sup - bound.tau_sup_scaled), 1e-8));
  return out;
}

std::vector<VerifyCheck> verify_integrals() {
  std::vector<VerifyCheck> out;
  for (int d = 1; d <= 3; ++d) {
    for (double rho : {0.0, 0.2, 0.8}) {
      const auto spec = rho == 0.0 ? CovarianceSpec::identity(d) : CovarianceSpec::equicorrelation(d, rho);
      const auto fast_method = rho == 0.0 ? IntegralMethod::closed_form : IntegralMethod::pattern;
      double worst = 0.0;
      for (int r = 1; r <= 3; ++r) {
        for (double t : {-2.0, 0.0, 1.0, 3.0}) {
          const auto a = rect_grad_integral(spec, t, r, fast_method).to_dense();
          const auto b = rect_grad_integral(spec, t, r, IntegralMethod::dense).to_dense();
          for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
        }
      }
      out.push_back(check("integrals", fmt("d=%g rho=%g structured vs dense, r in 1..3", d, rho), worst, 1e-5));
    }
  }
  return out;
}

std::vector<VerifyCheck> verify_weights(long long draws, std::uint64_t seed) {
  std::vector<VerifyCheck> out;
  const auto p = std_beta_params(0.1);
  out.push_back(check("weights", "std_beta_params(0.1).a == 0.0276190", std::abs(p.a - 0.0276190), 5e-8));
  out.push_back(check("weights", "std_beta_params(0.1).b == 0.0723810", std::abs(p.b - 0.0723810), 5e-8));

  std::vector<WeightLaw> laws{WeightLaw::gaussian(), WeightLaw::rademacher(), WeightLaw::mammen(),
                              WeightLaw::std_beta(0.05), WeightLaw::std_beta(0.1), WeightLaw::std_beta(1.0)};
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const auto& law = laws[i];
    const auto m = weight_moments(law);
    const double m3_target = (law.kind() == WeightLaw::Kind::gaussian || law.kind() == WeightLaw::Kind::rademacher)
                                 ? 0.0
                                 : 1.0;
    const double analytic = std::max({std::abs(m.m1), std::abs(m.m2 - 1.0), std::abs(m.m3 - m3_target)});
    out.push_back(check("weights", law.name() + " analytic (m1, m2, m3)", analytic, 1e-12));

    Rng rng(StreamKey{seed, i, StreamPurpose::level1, 0});
    double s[7] = {};
    for (long long k = 0; k < draws; ++k) {
      const double w = sample_weight(law, rng);
      double pw = 1.0;
      for (int j = 1; j <= 6; ++j) s[j] += (pw *= w);
    }
    for (double& v : s) v /= static_cast<double>(draws);
    const double target[4] = {0.0, 0.0, 1.0, m3_target};
    double worst_z = 0.0;
    for (int j = 1; j <= 3; ++j) {
      const double var = std::max(s[2 * j] - s[j] * s[j], 1e-300);
      worst_z = std::max(worst_z, std::abs(s[j] - target[j]) / std::sqrt(var / static_cast<double>(draws)));
    }
    out.push_back(check("weights", law.name() + " Monte Carlo moments, max |z|", worst_z, 4.0));
  }
  return out;
}

std::vector<VerifyCheck> run_verification(std::uint64_t seed) {
  auto out = verify_stein();
  const auto a = verify_integrals();
  const auto b = verify_weights(1'000'000, seed);
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace maxboot
