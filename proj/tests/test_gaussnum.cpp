#include "catch_amalgamated.hpp"

#include "maxboot/error.hpp"
#include "maxboot/gaussnum.hpp"
#include "maxboot/normal.hpp"

#include <cmath>
#include <vector>

using namespace maxboot;
using Catch::Approx;

namespace {

const double kPhi0 = 0.3989422804014327;

std::vector<CovarianceSpec> structured_specs(int d) {
  return {CovarianceSpec::identity(d), CovarianceSpec::identity(d, 1.7), CovarianceSpec::equicorrelation(d, 0.2),
          CovarianceSpec::equicorrelation(d, 0.8), CovarianceSpec::equicorrelation(d, 0.5, 0.6)};
}

// Integral of phi'' against a 1-d grid by Simpson's rule on [-40, t].
double simpson(double (*f)(double), double a, double b, int m) {
  const double h = (b - a) / m;
  double s = f(a) + f(b);
  for (int k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

double phi2(double t) { return (t * t - 1.0) * std::exp(-0.5 * t * t) * 0.3989422804014327; }

}  // namespace

TEST_CASE("hermite recurrence values") {
  CHECK(hermite(0, 3.7) == 1.0);
  CHECK(hermite(2, 0.0) == Approx(-1.0).margin(1e-15));
  CHECK(hermite(3, 2.0) == Approx(2.0).margin(1e-14));
  for (double t : {-2.5, -0.3, 0.0, 1.1, 4.0}) {
    CHECK(hermite(4, t) == Approx(t * t * t * t - 6 * t * t + 3).margin(1e-12));
    CHECK(hermite(5, t) == Approx(t * t * t * t * t - 10 * t * t * t + 15 * t).margin(1e-11));
  }
  CHECK_THROWS_AS(hermite(21, 0.0), CapabilityError);
  CHECK_THROWS_AS(phi_derivative(21, 0.0), CapabilityError);
}

TEST_CASE("normal density derivatives") {
  CHECK(phi_derivative(0, 0.0) == Approx(0.3989423).epsilon(1e-7));
  CHECK(phi_derivative(1, 0.0) == Approx(0.0).margin(1e-16));
  CHECK(phi_derivative(2, 0.0) == Approx(-0.3989423).epsilon(1e-7));
  // central differences of phi^(m-1)
  const double h = 1e-5;
  for (int m = 1; m <= 6; ++m)
    for (double t : {-1.7, 0.4, 2.2}) {
      const double fd = (phi_derivative(m - 1, t + h) - phi_derivative(m - 1, t - h)) / (2 * h);
      CHECK(phi_derivative(m, t) == Approx(fd).margin(1e-8));
    }
}

TEST_CASE("univariate order-2 integral is phi'(t)") {
  const auto spec = CovarianceSpec::identity(1);
  const auto t2 = rect_grad_integral(spec, 1.2816, 2);
  CHECK(t2.at(0, 0) == Approx(-0.22490470139115892).epsilon(1e-12));
  CHECK(t2.at(0, 0) == Approx(-1.2816 * kPhi0 * std::exp(-0.5 * 1.2816 * 1.2816)).epsilon(1e-12));
  // independent 1-d quadrature
  CHECK(t2.at(0, 0) == Approx(simpson(phi2, -40.0, 1.2816, 20000)).margin(1e-10));
}

TEST_CASE("identity closed form pattern values") {
  const double t = 0.7;
  const int d = 5;
  const double p = norm_cdf(t), f = norm_pdf(t);
  const auto t2 = rect_grad_integral(CovarianceSpec::identity(d), t, 2);
  CHECK(t2.at(1, 1) == Approx(-t * f * std::pow(p, d - 1)).epsilon(1e-12));
  CHECK(t2.at(0, 3) == Approx(f * f * std::pow(p, d - 2)).epsilon(1e-12));
  const auto t3 = rect_grad_integral(CovarianceSpec::identity(d), t, 3);
  CHECK(t3.at(2, 2, 2) == Approx((t * t - 1) * f * std::pow(p, d - 1)).epsilon(1e-12));
  CHECK(t3.at(2, 2, 4) == Approx(-t * f * f * std::pow(p, d - 2)).epsilon(1e-12));
  CHECK(t3.at(0, 1, 4) == Approx(f * f * f * std::pow(p, d - 3)).epsilon(1e-12));

  // scaling: sigma^{-r} times the unit-variance value at t / sigma
  const double s = 1.9;
  const auto u3 = rect_grad_integral(CovarianceSpec::identity(d, s), t, 3);
  const auto v3 = rect_grad_integral(CovarianceSpec::identity(d), t / s, 3);
  CHECK(u3.at(0, 0, 1) == Approx(v3.at(0, 0, 1) / (s * s * s)).epsilon(1e-12));
}

TEST_CASE("rectangle integrals vanish far in the upper tail") {
  for (int d : {1, 3, 10, 400})
    for (const auto& spec : structured_specs(d))
      for (int r : {2, 3}) {
        const auto tensor = rect_grad_integral(spec, 12.0 * (spec.entry(0, 0) > 1 ? 2.0 : 1.0), r);
        for (double v : tensor.pattern_values()) CHECK(std::abs(v) <= 1e-10);
      }
  const auto dense = rect_grad_integral(CovarianceSpec::ar1(4, 0.5), 12.0, 2);
  for (double v : dense.to_dense()) CHECK(std::abs(v) <= 1e-10);
}

TEST_CASE("pattern and dense representations agree for d <= 6") {
  for (int d : {2, 3, 4, 6})
    for (double rho : {0.0, 0.2, 0.8})
      for (double t : {-1.0, 0.5, 2.0})
        for (int r : {1, 2, 3}) {
          if (d == 6 && r == 3 && t != 0.5) continue;
          const auto spec = CovarianceSpec::equicorrelation(d, rho);
          const auto pat = rect_grad_integral(spec, t, r, IntegralMethod::pattern);
          const auto den = rect_grad_integral(spec, t, r, IntegralMethod::dense);
          CHECK(den.representation() == RectGradTensor::Representation::dense);
          const auto a = pat.to_dense();
          const auto b = den.to_dense();
          REQUIRE(a.size() == b.size());
          double worst = 0.0;
          for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
          INFO("d=" << d << " rho=" << rho << " t=" << t << " r=" << r);
          CHECK(worst <= 1e-6);
        }
}

TEST_CASE("equicorrelation d=3 order-3 pattern values match dense quadrature") {
  const auto spec = CovarianceSpec::equicorrelation(3, 0.2);
  const auto pat = rect_grad_integral(spec, 1.0, 3, IntegralMethod::pattern);
  const auto den = rect_grad_integral(spec, 1.0, 3, IntegralMethod::dense);
  CHECK(pat.at(0, 0, 0) == Approx(den.at(0, 0, 0)).margin(1e-6));
  CHECK(pat.at(0, 0, 1) == Approx(den.at(0, 0, 1)).margin(1e-6));
  CHECK(pat.at(0, 1, 2) == Approx(den.at(0, 1, 2)).margin(1e-6));
}

TEST_CASE("dense tensors are symmetric") {
  Eigen::MatrixXd m(3, 3);
  m << 1.0, 0.3, -0.2, 0.3, 2.0, 0.5, -0.2, 0.5, 1.5;
  const auto t3 = rect_grad_integral(CovarianceSpec::dense(m), 0.8, 3);
  CHECK(t3.at(0, 1, 2) == Approx(t3.at(2, 0, 1)).margin(1e-12));
  CHECK(t3.at(0, 0, 1) == Approx(t3.at(1, 0, 0)).margin(1e-12));
  const auto t2 = rect_grad_integral(CovarianceSpec::dense(m), 0.8, 2);
  CHECK(t2.at(0, 2) == Approx(t2.at(2, 0)).margin(1e-12));
}

TEST_CASE("unsupported integral paths raise capability errors") {
  CHECK_THROWS_AS(rect_grad_integral(CovarianceSpec::ar1(50, 0.3), 1.0, 3), CapabilityError);
  CHECK_THROWS_AS(rect_grad_integral(CovarianceSpec::ar1(3, 0.3), 1.0, 2, IntegralMethod::pattern), CapabilityError);
}

TEST_CASE("gaussian max cdf") {
  // Phi(3.4738)^400 and Phi^{-1}(0.9^{1/400}), evaluated with scipy
  CHECK(gmax_cdf(CovarianceSpec::identity(400), 3.4738) == Approx(0.9024501359601415).epsilon(1e-10));
  CHECK(gmax_cdf(CovarianceSpec::identity(400), 3.4667798001256123) == Approx(0.9).epsilon(1e-10));
  for (const auto& spec : structured_specs(20)) CHECK(gmax_cdf(spec, -50.0) <= 1e-12);
  CHECK(gmax_cdf(CovarianceSpec::ar1(30, 0.4), -50.0) <= 1e-12);
  CHECK(gmax_cdf(CovarianceSpec::equicorrelation(50, 0.9999), 1.2816) == Approx(0.9).margin(0.005));
  // d=2 equicorrelation equals the bivariate normal cdf
  CHECK(gmax_cdf(CovarianceSpec::equicorrelation(2, 0.4), 0.3) == Approx(detail::bvn_cdf(0.3, 0.3, 0.4)).margin(1e-10));
}

TEST_CASE("gaussian max quantile") {
  CHECK(gmax_quantile(CovarianceSpec::identity(1), 0.9) == Approx(1.281552).margin(1e-6));
  const double c400 = gmax_quantile(CovarianceSpec::identity(400), 0.9);
  CHECK(c400 == Approx(norm_quantile(std::pow(0.9, 1.0 / 400))).epsilon(1e-14));
  CHECK(c400 == Approx(3.4667798001256123).epsilon(1e-12));
  for (const auto& spec : structured_specs(40)) {
    const double lo = gmax_quantile(spec, 0.5);
    const double hi = gmax_quantile(spec, 0.9);
    CHECK(lo < hi);
    for (double p : {0.05, 0.5, 0.95}) CHECK(gmax_cdf(spec, gmax_quantile(spec, p)) == Approx(p).margin(1e-8));
  }
  Precision prec;
  prec.mc_draws = 100000;
  const auto ar = CovarianceSpec::ar1(30, 0.5);
  const auto q5 = gmax_quantile_estimate(ar, 0.5, prec);
  const auto q9 = gmax_quantile_estimate(ar, 0.9, prec);
  CHECK(q5.value < q9.value);
  const auto back = gmax_cdf_estimate(ar, q9.value, prec);
  CHECK(std::abs(back.value - 0.9) <= 3 * back.std_error + 1e-3);
}

TEST_CASE("gaussian max density") {
  CHECK(gmax_density(CovarianceSpec::identity(2), 0.0) == Approx(0.398942).margin(1e-6));
  for (double t : {-3.0, -0.5, 0.0, 1.2, 3.3}) CHECK(gmax_density(CovarianceSpec::identity(1), t) == Approx(phi_derivative(0, t)).epsilon(1e-12));

  for (const auto& spec : structured_specs(25)) {
    // trapezoid over [-10, c_{0.999999} + 10]
    const double hi = gmax_quantile(spec, 0.999999) + 10.0;
    const int m = 4000;
    const double h = (hi + 10.0) / m;
    double integral = 0.5 * (gmax_density(spec, -10.0) + gmax_density(spec, hi));
    for (int k = 1; k < m; ++k) integral += gmax_density(spec, -10.0 + k * h);
    integral *= h;
    CHECK(integral == Approx(1.0).margin(1e-3));

    for (double t : {0.5, 1.5, 2.5}) {
      const double step = 1e-4;
      const double fd = (gmax_cdf(spec, t + step) - gmax_cdf(spec, t - step)) / (2 * step);
      CHECK(gmax_density(spec, t) == Approx(fd).margin(1e-6));
      const double fd1 = (gmax_density(spec, t + step) - gmax_density(spec, t - step)) / (2 * step);
      CHECK(gmax_density(spec, t, 1) == Approx(fd1).margin(1e-6));
    }
  }
}

TEST_CASE("density floor holds at gaussian max quantiles") {
  for (const auto& spec : {CovarianceSpec::identity(400), CovarianceSpec::equicorrelation(400, 0.2),
                           CovarianceSpec::equicorrelation(400, 0.8)}) {
    const auto diag = gmax_diagnostics(spec, 200000, 11);
    for (int k = 1; k <= 19; ++k) {
      const double p = 0.05 * k;
      CHECK(gmax_density(spec, gmax_quantile(spec, p)) >= diag.density_floor(p));
    }
  }
}

TEST_CASE("gaussian max diagnostics") {
  const auto id = gmax_diagnostics(CovarianceSpec::identity(400, 1.3), 100000, 3);
  CHECK(id.sigma_star == 1.3);
  const auto eq = gmax_diagnostics(CovarianceSpec::equicorrelation(37, 0.8), 100000, 3);
  CHECK(eq.sigma_star == Approx(std::sqrt(0.2)).epsilon(1e-12));
  const auto unit = gmax_diagnostics(CovarianceSpec::identity(400), 200000, 5);
  CHECK(unit.var_max + 3 * unit.var_max_se < 1.05);
  CHECK(unit.varsigma_d == Approx(std::sqrt(unit.var_max * std::log(400.0))).epsilon(1e-12));
  CHECK(unit.density_floor(0.3) ==
        Approx(std::min(0.3 / std::sqrt(2.0), std::pow(0.7, 1.5)) / (4 * std::sqrt(unit.var_max))).epsilon(1e-12));
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 0.6, 0.6, 1.0;
  const auto dn = gmax_diagnostics(CovarianceSpec::dense(m), 10000, 3);
  const double lmin = 1.5 - std::sqrt(0.25 + 0.36);
  CHECK(dn.sigma_star == Approx(std::sqrt(lmin)).epsilon(1e-10));
  CHECK(dn.sigma_bar == Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(dn.sigma_under == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("bivariate normal cdf against independent limits") {
  CHECK(detail::bvn_cdf(0.0, 0.0, 0.0) == Approx(0.25).margin(1e-14));
  // P(X<=0, Y<=0) = 1/4 + asin(r) / (2 pi)
  for (double r : {-0.7, 0.3, 0.95})
    CHECK(detail::bvn_cdf(0.0, 0.0, r) == Approx(0.25 + std::asin(r) / (2 * M_PI)).margin(1e-12));
  CHECK(detail::bvn_cdf(0.4, 1.1, 0.0) == Approx(norm_cdf(0.4) * norm_cdf(1.1)).margin(1e-14));
}
