#include "catch_amalgamated.hpp"

#include "maxboot/bootstrap.hpp"
#include "maxboot/dgp.hpp"
#include "maxboot/error.hpp"

#include <cmath>
#include <numeric>
#include <vector>

using namespace maxboot;
using Catch::Approx;

namespace {

DataSet rows(std::initializer_list<std::initializer_list<double>> r) {
  RowMatrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  int i = 0;
  for (const auto& row : r) {
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return DataSet(std::move(m));
}

DataSet gaussian_data(int n, int d, std::uint64_t seed) {
  Rng rng(StreamKey{seed, 0, StreamPurpose::data, 0});
  RowMatrix m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
  return DataSet(std::move(m));
}

DataSet skewed_data(int n, int d, std::uint64_t seed) {
  Rng rng(StreamKey{seed, 0, StreamPurpose::data, 0});
  RowMatrix m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.exponential() - 1.0 + 0.05 * j;
  return DataSet(std::move(m));
}

ReplicateSet iota_set(int b) {
  std::vector<double> v(b);
  std::iota(v.begin(), v.end(), 1.0);
  return ReplicateSet(v);
}

}  // namespace

TEST_CASE("max statistic") {
  CHECK(t_stat(rows({{-1, 0.5, 2}})) == 2.0);
  CHECK(t_stat(rows({{1}, {1}, {1}, {1}})) == Approx(2.0).epsilon(1e-15));
  const auto a = rows({{0.3, -1.0, 2.0}, {1.0, 0.4, -0.5}});
  const auto b = rows({{2.0, 0.3, -1.0}, {-0.5, 1.0, 0.4}});
  CHECK(t_stat(a) == t_stat(b));
}

TEST_CASE("wild replicate arithmetic") {
  const auto one = rows({{3.0, -2.0}});
  const std::vector<double> w1{1.7};
  CHECK(wild_replicate(one, w1) == 0.0);
  const auto two = rows({{-1}, {1}});
  CHECK(wild_replicate(two, std::vector<double>{1, 1}) == 0.0);
  CHECK(wild_replicate(two, std::vector<double>{1, -1}) == Approx(-1.414214).margin(1e-6));
  CHECK_THROWS_AS(wild_replicate(two, std::vector<double>{1, 2, 3}), ValidationError);
}

TEST_CASE("empirical replicate") {
  Rng rng(StreamKey{1, 0, StreamPurpose::level1, 0});
  const auto one = rows({{3.0, -2.0}});
  for (int k = 0; k < 20; ++k) CHECK(empirical_replicate(one, rng) == 0.0);

  const auto constant = rows({{5.0, -1.0}, {5.0, 1.0}, {5.0, 0.0}});
  const CenteredData cc(constant);
  for (int k = 0; k < 50; ++k) CHECK(empirical_replicate(cc, rng) >= 0.0);

  // X = (-1, 1): replicates -sqrt2, 0, sqrt2 with probabilities 1/4, 1/2, 1/4
  const CenteredData two(rows({{-1}, {1}}));
  const int draws = 100000;
  int lo = 0, mid = 0, hi = 0;
  for (int k = 0; k < draws; ++k) {
    const double r = empirical_replicate(two, rng);
    if (std::abs(r + std::sqrt(2.0)) < 1e-12) ++lo;
    else if (std::abs(r) < 1e-12) ++mid;
    else if (std::abs(r - std::sqrt(2.0)) < 1e-12) ++hi;
  }
  CHECK(lo + mid + hi == draws);
  const double sd_q = std::sqrt(draws * 0.25 * 0.75), sd_h = std::sqrt(draws * 0.25);
  CHECK(std::abs(lo - 0.25 * draws) <= 3 * sd_q);
  CHECK(std::abs(hi - 0.25 * draws) <= 3 * sd_q);
  CHECK(std::abs(mid - 0.5 * draws) <= 3 * sd_h);
}

TEST_CASE("bootstrap quantile order-statistic rule") {
  CHECK(bootstrap_quantile(ReplicateSet({5, 3, 1, 4, 2}), 0.5) == 3.0);
  CHECK(bootstrap_quantile(iota_set(499), 0.9) == 450.0);
  CHECK(quantile_rank(499, 0.9) == 450);
  CHECK(bootstrap_quantile(iota_set(5), 0.999) == 5.0);
  const auto reps = ReplicateSet({0.3, -1.0, 2.5, 0.7, 1.1, 0.0, 4.0});
  double prev = -1e300;
  for (int k = 1; k < 100; ++k) {
    const double q = bootstrap_quantile(reps, k / 100.0);
    CHECK(q >= prev);
    prev = q;
  }
  CHECK_THROWS_AS(ReplicateSet(std::vector<double>{}), ValidationError);
}

TEST_CASE("first-level p-value") {
  const auto reps = iota_set(99);
  CHECK(first_level_pvalue(0.0, reps) == 1.0);
  CHECK(first_level_pvalue(1000.0, reps) == 0.01);
  CHECK(first_level_pvalue(7.0, ReplicateSet({7.0})) == 1.0);
  double prev = 2.0;
  for (double t = -1; t < 101; t += 0.5) {
    const double p = first_level_pvalue(t, reps);
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
    CHECK(p <= prev);
    prev = p;
  }
}

TEST_CASE("wild test degenerate and deterministic") {
  const DataSet zeros(RowMatrix::Zero(10, 4));
  const StreamKey key{42, 3, StreamPurpose::level1, 0};
  const auto z = wild_test(zeros, WeightLaw::gaussian(), 99, 0.1, key);
  CHECK(z.t_n == 0.0);
  CHECK(z.c_hat == 0.0);
  CHECK(z.reject);

  const auto data = skewed_data(30, 20, 5);
  for (const auto& law : {WeightLaw::gaussian(), WeightLaw::mammen(), WeightLaw::std_beta(0.1)}) {
    const auto a = wild_test(data, law, 199, 0.1, key);
    const auto b = wild_test(data, law, 199, 0.1, key);
    CHECK(a.reject == b.reject);
    CHECK(a.c_hat == b.c_hat);
  }
}

TEST_CASE("replicates are invariant to row shifts and covariant to scaling") {
  const auto data = skewed_data(25, 12, 8);
  RowMatrix shifted = data.values();
  for (int j = 0; j < shifted.cols(); ++j) shifted.col(j).array() += 0.37 * (j - 5);
  const CenteredData a(data), b((DataSet(shifted)));
  Rng r1(StreamKey{1, 1, StreamPurpose::level1, 0}), r2(StreamKey{1, 1, StreamPurpose::level1, 0});
  const auto ra = wild_replicates(a, WeightLaw::gaussian(), 50, r1);
  const auto rb = wild_replicates(b, WeightLaw::gaussian(), 50, r2);
  for (int k = 0; k < 50; ++k) CHECK(ra[k] == Approx(rb[k]).margin(1e-12));
  Rng r3(StreamKey{1, 1, StreamPurpose::level1, 1}), r4(StreamKey{1, 1, StreamPurpose::level1, 1});
  const auto ea = empirical_replicates(a, 50, r3);
  const auto eb = empirical_replicates(b, 50, r4);
  for (int k = 0; k < 50; ++k) CHECK(ea[k] == Approx(eb[k]).margin(1e-12));

  const double lambda = 2.5;
  const StreamKey key{9, 2, StreamPurpose::level1, 0};
  for (double alpha : {0.05, 0.1, 0.3, 0.5}) {
    const auto x = wild_test(data, WeightLaw::mammen(), 199, alpha, key);
    const auto y = wild_test(data.scaled(lambda), WeightLaw::mammen(), 199, alpha, key);
    CHECK(y.t_n == Approx(lambda * x.t_n).epsilon(1e-12));
    CHECK(y.c_hat == Approx(lambda * x.c_hat).epsilon(1e-12));
    CHECK(y.reject == x.reject);
  }
}

TEST_CASE("gaussian multiplier replicates have the sample covariance") {
  const auto data = rows({{0.3, -1.2}, {1.5, 0.4}, {-0.8, 2.0}});
  const CenteredData cd(data);
  const Eigen::MatrixXd xc = cd.centered();
  const Eigen::MatrixXd sigma_hat = xc.transpose() * xc / 3.0;
  Rng rng(StreamKey{5, 0, StreamPurpose::level1, 0});
  const int draws = 100000;
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  std::vector<double> w(3);
  for (int k = 0; k < draws; ++k) {
    fill_weights(WeightLaw::gaussian(), rng, w);
    Eigen::Vector2d s = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i) s += w[i] * xc.row(i).transpose();
    s /= std::sqrt(3.0);
    acc += s * s.transpose();
  }
  acc /= draws;
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      const double se = std::sqrt((sigma_hat(j, j) * sigma_hat(k, k) + sigma_hat(j, k) * sigma_hat(j, k)) / draws);
      CHECK(std::abs(acc(j, k) - sigma_hat(j, k)) <= 3 * se);
    }
}

TEST_CASE("gaussian wild test is close to nominal under gaussian data") {
  const int trials = 2000;
  int rejections = 0;
  for (int t = 1; t <= trials; ++t) {
    const auto data = gaussian_data(50, 50, 1000 + t);
    rejections += wild_test(data, WeightLaw::gaussian(), 199, 0.1, StreamKey{77, static_cast<std::uint64_t>(t), StreamPurpose::level1, 0}).reject;
  }
  CHECK(std::abs(rejections / double(trials) - 0.1) <= 0.03);
}

TEST_CASE("double wild bootstrap") {
  const DataSet zeros(RowMatrix::Zero(8, 3));
  const StreamKey key{3, 1, StreamPurpose::level1, 2};
  const auto z = double_wild_test(zeros, WeightLaw::std_beta(0.1), WeightLaw::std_beta(0.1), 19, 9, 0.5, key);
  CHECK(z.first_level_pvalue == 1.0);
  CHECK(z.prepivot_pvalue == 1.0);
  CHECK_FALSE(z.reject);

  const auto data = skewed_data(20, 10, 4);
  const auto a = double_wild_test(data, WeightLaw::mammen(), WeightLaw::mammen(), 49, 19, 0.1, key);
  const auto b = double_wild_test(data, WeightLaw::mammen(), WeightLaw::mammen(), 49, 19, 0.1, key);
  CHECK(a.reject == b.reject);
  CHECK(a.prepivot_pvalue == b.prepivot_pvalue);
  CHECK(a.prepivot_pvalue > 0.0);
  CHECK(a.prepivot_pvalue <= 1.0);
}

TEST_CASE("double wild bootstrap against a direct nested loop") {
  const auto data = skewed_data(6, 3, 12);
  const CenteredData cd(data);
  const auto law = WeightLaw::std_beta(0.3);
  const StreamKey key{11, 4, StreamPurpose::level1, 1};
  const int b1 = 15, b2 = 7;
  const auto got = double_wild_pvalue(cd, law, law, b1, b2, key);

  const int n = 6;
  const RowMatrix& xc = cd.centered();
  Rng rng(key);
  std::vector<std::vector<double>> w(b1, std::vector<double>(n));
  std::vector<double> tstar(b1);
  for (int b = 0; b < b1; ++b) {
    fill_weights(law, rng, w[b]);
    tstar[b] = wild_replicate(cd, w[b]);
  }
  const double p_hat = first_level_pvalue(cd.t_n(), ReplicateSet(tstar));
  int below = 0;
  for (int b = 0; b < b1; ++b) {
    RowMatrix xs(n, 3);
    for (int i = 0; i < n; ++i) xs.row(i) = w[b][i] * xc.row(i);
    const CenteredData second((DataSet(xs)));
    Rng r2(StreamKey{key.seed, key.trial, StreamPurpose::level2, (key.lane << 20) | static_cast<std::uint32_t>(b)});
    std::vector<double> v(n);
    int ge = 0;
    for (int k = 0; k < b2; ++k) {
      fill_weights(law, r2, v);
      ge += wild_replicate(second, v) >= tstar[b] - 1e-13;
    }
    below += (ge + 1.0) / (b2 + 1.0) <= p_hat;
  }
  CHECK(got.first_level_pvalue == Approx(p_hat).epsilon(1e-15));
  CHECK(got.prepivot_pvalue == Approx((below + 1.0) / (b1 + 1.0)).epsilon(1e-15));
}

TEST_CASE("double wild bootstrap is close to nominal under symmetric copula data") {
  CopulaConfig cfg;
  cfg.corr = CovarianceSpec::ar1(50, 0.2);
  cfg.marginal_shape = 0.5;
  cfg.symmetrize = true;
  cfg.n = 100;
  const int trials = 1000;
  int rejections = 0;
  const auto law = WeightLaw::std_beta(0.1);
  for (int t = 1; t <= trials; ++t) {
    Rng rng(StreamKey{5, static_cast<std::uint64_t>(t), StreamPurpose::data, 0});
    const auto data = gen_copula(cfg, rng);
    rejections += double_wild_test(data, law, law, 199, 49, 0.1, StreamKey{5, static_cast<std::uint64_t>(t), StreamPurpose::level1, 0}).reject;
  }
  CHECK(std::abs(rejections / double(trials) - 0.1) <= 0.04);
}

TEST_CASE("bootstrap config parsing and validation") {
  CHECK(parse_method("gaussian").label() == "gaussian");
  CHECK(parse_method("empirical").gamma() == 1.0);
  CHECK(parse_method("gaussian").gamma() == 0.0);
  CHECK(parse_method("mammen").gamma() == Approx(1.0).epsilon(1e-14));
  const auto dbl = parse_method("double:0.1,49", 199, 0.1);
  CHECK(std::get<DoubleWildMethod>(dbl.method).b2 == 49);
  CHECK(dbl.label() == "double:0.1,49");
  CHECK(dbl.validate().empty());
  BootstrapConfig mixed;
  mixed.method = DoubleWildMethod{WeightLaw::gaussian(), WeightLaw::gaussian(), 9};
  CHECK(mixed.validate().size() == 1);
  CHECK_THROWS_AS(parse_method("beta:-1"), ValidationError);
  CHECK_THROWS_AS(parse_method("double:0.1"), ValidationError);
  CHECK_THROWS_AS(parse_method("bogus"), ValidationError);
  BootstrapConfig bad;
  bad.b = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad.b = 10;
  bad.alpha = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
