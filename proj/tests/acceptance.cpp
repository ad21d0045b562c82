// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance                 run every criterion
//   acceptance --criterion N   run criterion N only

#include "maxboot/edgeworth.hpp"
#include "maxboot/error.hpp"
#include "maxboot/gaussnum.hpp"
#include "maxboot/harness.hpp"
#include "maxboot/normal.hpp"
#include "maxboot/random.hpp"
#include "maxboot/stein.hpp"
#include "maxboot/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace maxboot;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentConfig base(Design design, double rho, int n, int d, MarginalMode marginal, std::vector<std::string> methods,
                      int b, int trials) {
  ExperimentConfig cfg;
  cfg.design = design;
  cfg.rho = rho;
  cfg.n = n;
  cfg.d = d;
  cfg.marginal = marginal;
  cfg.methods = std::move(methods);
  cfg.b = b;
  cfg.alphas = {0.1};
  cfg.trials = trials;
  cfg.seed = 20240601;
  cfg.threads = 0;
  return cfg;
}

const ReportRow& row_for(const RejectionReport& r, const std::string& method) {
  for (const auto& row : r.rows)
    if (row.method == method) return row;
  throw std::runtime_error("missing row " + method);
}

Outcome c1() {
  const auto r = run_experiment(base(Design::copula_ii, 0.2, 200, 400, MarginalMode::asymmetric,
                                     {"gaussian", "beta:0.1"}, 499, 2000));
  const double gb = row_for(r, "gaussian").rate, bb = row_for(r, "beta:0.1").rate;
  const bool ok = std::abs(gb - 0.146) <= 0.02 && std::abs(bb - 0.091) <= 0.02;
  return {ok, fmt("GB=%.4f (target 0.146+-0.02) BB=%.4f (target 0.091+-0.02)", gb, bb)};
}

Outcome c2() {
  const auto r = run_experiment(base(Design::copula_i, 0.8, 400, 400, MarginalMode::asymmetric,
                                     {"gaussian", "beta:0.1"}, 499, 2000));
  const double gb = row_for(r, "gaussian").rate, bb = row_for(r, "beta:0.1").rate;
  const bool ok = std::abs(gb - 0.095) <= 0.02 && std::abs(bb - 0.080) <= 0.02 && gb > bb;
  return {ok, fmt("GB=%.4f (target 0.095+-0.02) BB=%.4f (target 0.080+-0.02) GB>BB=%s", gb, bb,
                  gb > bb ? "yes" : "no")};
}

Outcome c3() {
  const auto r = run_experiment(base(Design::copula_i, 0.2, 400, 400, MarginalMode::symmetric, {"gaussian"}, 499, 2000));
  const double gb = row_for(r, "gaussian").rate;
  return {std::abs(gb - 0.088) <= 0.02, fmt("GB=%.4f (target 0.088+-0.02)", gb)};
}

Outcome c4() {
  double worst = 0.0;
  double at_g1 = 0.0, at_g0 = 0.0;
  for (double gamma : {0.0, 1.0}) {
    ExpansionInputs in;
    in.sigma = CovarianceSpec::identity(1);
    in.n = 100;
    in.gamma = gamma;
    ThirdMomentSummary s;
    s.s1 = 2.0;
    s.d = 1;
    in.third_moments = s;
    for (int k = 1; k <= 19; ++k) {
      const double a = 0.05 * k;
      const double c = norm_quantile(1 - a);
      const double closed = gamma == 1.0 ? a - 2.0 / (2 * 10.0) * c * c * norm_pdf(c)
                                         : a - 2.0 / (6 * 10.0) * (2 * c * c + 1) * norm_pdf(c);
      const double got = predicted_rejection(in, a).predicted;
      worst = std::max(worst, std::abs(got - closed));
      if (k == 2) (gamma == 1.0 ? at_g1 : at_g0) = got;
    }
  }
  const bool ok = worst <= 1e-10 && std::abs(at_g1 - 0.071171) <= 1e-5 && std::abs(at_g0 - 0.074936) <= 1e-5;
  return {ok, fmt("max |pipeline - closed form| = %.2e (tol 1e-10); gamma=1: %.6f, gamma=0: %.6f", worst, at_g1, at_g0)};
}

Outcome c5() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int d = 1; d <= 3; ++d)
    for (double rho : {0.0, 0.2, 0.8}) {
      const auto spec = rho == 0.0 ? CovarianceSpec::identity(d) : CovarianceSpec::equicorrelation(d, rho);
      const auto m = rho == 0.0 ? IntegralMethod::closed_form : IntegralMethod::pattern;
      for (int r = 1; r <= 3; ++r)
        for (double t : {-2.0, 0.0, 1.0, 3.0}) {
          const auto a = rect_grad_integral(spec, t, r, m).to_dense();
          const auto b = rect_grad_integral(spec, t, r, IntegralMethod::dense).to_dense();
          for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
        }
      for (double alpha : {0.05, 0.1, 0.5}) {
        const auto a = psi_alpha(spec, alpha, m).to_dense();
        const auto b = psi_alpha(spec, alpha, IntegralMethod::dense).to_dense();
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
      }
    }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-5 && secs < 60.0, fmt("max entry difference %.2e (tol 1e-5), %.1f s (limit 60 s)", worst, secs)};
}

Outcome c6() {
  bool ok = true;
  std::string detail;
  std::vector<WeightLaw> laws{WeightLaw::mammen(), WeightLaw::std_beta(0.05), WeightLaw::std_beta(0.1),
                              WeightLaw::std_beta(1.0)};
  double worst_exact = 0.0, worst_z = 0.0;
  for (std::size_t k = 0; k < laws.size(); ++k) {
    const auto m = weight_moments(laws[k]);
    worst_exact = std::max({worst_exact, std::abs(m.m1), std::abs(m.m2 - 1), std::abs(m.m3 - 1)});
    Rng rng(StreamKey{99, k, StreamPurpose::level1, 0});
    const long long n = 1000000;
    double s[7] = {};
    for (long long i = 0; i < n; ++i) {
      const double w = sample_weight(laws[k], rng);
      double p = 1.0;
      for (int j = 1; j <= 6; ++j) s[j] += (p *= w);
    }
    for (int j = 1; j <= 6; ++j) s[j] /= n;
    const double target[4] = {0.0, 0.0, 1.0, 1.0};
    for (int j = 1; j <= 3; ++j) {
      const double var = s[2 * j] - s[j] * s[j];
      worst_z = std::max(worst_z, std::abs(s[j] - target[j]) / std::sqrt(var / n));
    }
  }
  const auto p = std_beta_params(0.1);
  const bool params = std::abs(p.a - 0.0276190) <= 5e-8 && std::abs(p.b - 0.0723810) <= 5e-8;
  ok = worst_exact <= 1e-12 && worst_z <= 4.0 && params;
  detail = fmt("analytic max error %.1e (tol 1e-12), MC max |z| %.2f (tol 4), params (%.7f, %.7f)", worst_exact,
               worst_z, p.a, p.b);
  return {ok, detail};
}

Outcome c7() {
  double worst_residual = 0.0, worst_kernel = 0.0;
  for (const auto& c : verify_stein()) {
    if (c.name.find("residual") != std::string::npos && c.name.find("quadrature") != std::string::npos)
      worst_residual = std::max(worst_residual, c.value);
    else if (c.name.find("exact-moment") != std::string::npos)
      worst_residual = std::max(worst_residual, c.value);
    else if (c.name.find("kernel") != std::string::npos)
      worst_kernel = std::max(worst_kernel, c.value);
  }
  return {worst_residual <= 1e-8 && worst_kernel <= 1e-8,
          fmt("max identity residual %.2e (tol 1e-8), max closed-form kernel error %.2e (tol 1e-8)", worst_residual,
              worst_kernel)};
}

Outcome c8() {
  const auto id = CovarianceSpec::identity(400);
  const double closed = norm_quantile(std::pow(0.9, 1.0 / 400.0));
  const double got = gmax_quantile(id, 0.9);
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(400, 400);
  Precision prec;
  prec.mc_draws = 1000000;
  prec.seed = 8;
  const auto mc = gmax_quantile_estimate(CovarianceSpec::dense(eye), 0.9, prec);
  const bool mc_ok = std::abs(mc.value - closed) <= 3 * mc.std_error;
  bool floor_ok = true;
  double worst_ratio = 1e300;
  for (const auto& spec : {id, CovarianceSpec::equicorrelation(400, 0.2), CovarianceSpec::equicorrelation(400, 0.8)}) {
    const auto diag = gmax_diagnostics(spec, 200000, 8);
    for (int k = 1; k <= 19; ++k) {
      const double p = 0.05 * k;
      const double f = gmax_density(spec, gmax_quantile(spec, p));
      worst_ratio = std::min(worst_ratio, f / diag.density_floor(p));
      floor_ok = floor_ok && f >= diag.density_floor(p);
    }
  }
  const bool ok = std::abs(got - closed) <= 1e-12 * closed && mc_ok && floor_ok;
  return {ok, fmt("closed form |diff| %.1e (tol 1e-12 relative); dense MC %.5f +- %.5f (|diff|/se = %.2f, tol 3); min f/floor = %.2f",
                  std::abs(got - closed), mc.value, mc.std_error, std::abs(mc.value - closed) / mc.std_error, worst_ratio)};
}

Outcome c9() {
  auto cfg = base(Design::iid_spherical, 0.0, 5000, 200, MarginalMode::asymmetric, {"gaussian", "beta:0.1"}, 499, 4000);
  cfg.budget = 5e12;
  const auto r = run_experiment(cfg);
  const double target = std::sqrt(std::pow(std::log(200.0), 3) / 5000.0) * 0.099327;
  const double eg = row_for(r, "gaussian").rate - 0.1;
  const double eb = row_for(r, "beta:0.1").rate - 0.1;
  const bool ok = eg > 0.0 && eg >= 0.3 * target && eg <= 3.0 * target && std::abs(eb) < std::abs(eg);
  return {ok, fmt("Gaussian excess %.4f (leading order %.4f, window [%.4f, %.4f]); beta excess %.4f", eg, target,
                  0.3 * target, 3.0 * target, eb)};
}

Outcome c10() {
  const auto r = run_experiment(base(Design::copula_ii, 0.2, 100, 100, MarginalMode::asymmetric,
                                     {"gaussian", "double:0.1,49"}, 199, 1000));
  const double gb = row_for(r, "gaussian").rate, db = row_for(r, "double:0.1,49").rate;
  const bool ok = std::abs(db - 0.1) <= 0.04 && std::abs(db - 0.1) < std::abs(gb - 0.1);
  return {ok, fmt("double=%.4f (target 0.10+-0.04), Gaussian wild=%.4f", db, gb)};
}

Outcome c11() {
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = base(Design::copula_ii, 0.2, 60, 80, MarginalMode::asymmetric,
                  {"gaussian", "beta:0.1", "mammen", "empirical", "double:0.1,19"}, 99, 50);
  bool same = true;
  std::string csv1, json1;
  for (int threads : {1, 4, 8}) {
    cfg.threads = threads;
    const auto r = run_experiment(cfg);
    const auto csv = format_report(r, ReportFormat::csv);
    const auto json = format_report(r, ReportFormat::json);
    if (threads == 1) {
      csv1 = csv;
      json1 = json;
    }
    same = same && csv == csv1 && json == json1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {same && secs < 60.0, fmt("reports for threads {1,4,8} %s, %.1f s (limit 60 s)",
                                   same ? "byte-identical" : "DIFFER", secs)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
      {"copula-ii asymmetric cell, n=200 d=400 rho=0.2", c1},
      {"copula-i contrast, n=400 d=400 rho=0.8", c2},
      {"symmetric copula-i, n=400 rho=0.2", c3},
      {"univariate reduction identity", c4},
      {"small-d integral oracle", c5},
      {"weight-law exactness", c6},
      {"Stein identity suite", c7},
      {"Gaussian-max analytics", c8},
      {"spherical-limit direction, d=200 n=5000", c9},
      {"double bootstrap sanity, d=n=100", c10},
      {"determinism and thread invariance", c11},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  const auto& list = criteria();
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (only && static_cast<int>(k) + 1 != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = list[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s C%zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", k + 1, list[k].first.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
