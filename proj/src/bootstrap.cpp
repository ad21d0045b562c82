#include "maxboot/bootstrap.hpp"

#include "maxboot/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace maxboot {

namespace {

constexpr int kRepChunk = 128;

void check_b(int b, const char* what) {
  if (b < 1) throw ValidationError(std::string(what) + " must be >= 1");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
}

/// out[r] = max_j (w.row(r) * xc)_j * scale
void row_max_products(const RowMatrix& w, const RowMatrix& xc, double scale, double* out) {
  const RowMatrix s = w * xc;
  for (Eigen::Index r = 0; r < s.rows(); ++r) out[r] = s.row(r).maxCoeff() * scale;
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng.next_u64()) * n) >> 64);
}

std::string format_nu(double nu) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", nu);
  return buf;
}

}  // namespace

CenteredData::CenteredData(const DataSet& data) {
  const auto& x = data.values();
  mean_ = x.colwise().mean();
  centered_ = x.rowwise() - mean_;
  t_n_ = t_stat(data);
}

double t_stat(const DataSet& data) {
  return data.values().colwise().sum().maxCoeff() / std::sqrt(static_cast<double>(data.n()));
}

double wild_replicate(const CenteredData& data, std::span<const double> weights) {
  if (static_cast<int>(weights.size()) != data.n()) throw ValidationError("weight vector length must equal n");
  const Eigen::Map<const Eigen::RowVectorXd> w(weights.data(), data.n());
  return (w * data.centered()).maxCoeff() / std::sqrt(static_cast<double>(data.n()));
}

double wild_replicate(const DataSet& data, std::span<const double> weights) {
  return wild_replicate(CenteredData(data), weights);
}

double empirical_replicate(const CenteredData& data, Rng& rng) {
  const int n = data.n();
  Eigen::RowVectorXd counts = Eigen::RowVectorXd::Zero(n);
  for (int k = 0; k < n; ++k) counts[static_cast<Eigen::Index>(uniform_index(rng, n))] += 1.0;
  return (counts * data.centered()).maxCoeff() / std::sqrt(static_cast<double>(n));
}

double empirical_replicate(const DataSet& data, Rng& rng) { return empirical_replicate(CenteredData(data), rng); }

ReplicateSet::ReplicateSet(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("replicate set must be nonempty");
  std::sort(values_.begin(), values_.end());
}

int quantile_rank(int b, double p) {
  if (b < 1) throw ValidationError("replicate count must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0,1)");
  const double raw = p * (b + 1.0);
  const int k = static_cast<int>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::clamp(k, 1, b);
}

double bootstrap_quantile(const ReplicateSet& reps, double p) {
  return reps.values()[quantile_rank(reps.size(), p) - 1];
}

double first_level_pvalue(double t_n, const ReplicateSet& reps) {
  const auto& v = reps.values();
  const auto ge = v.end() - std::lower_bound(v.begin(), v.end(), t_n);
  return (static_cast<double>(ge) + 1.0) / (reps.size() + 1.0);
}

std::vector<double> wild_replicates(const CenteredData& data, const WeightLaw& law, int b, Rng& rng) {
  check_b(b, "b");
  const int n = data.n();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> out(b);
  RowMatrix w;
  for (int start = 0; start < b; start += kRepChunk) {
    const int rows = std::min(kRepChunk, b - start);
    w.resize(rows, n);
    for (int r = 0; r < rows; ++r) fill_weights(law, rng, std::span<double>(w.row(r).data(), n));
    row_max_products(w, data.centered(), scale, out.data() + start);
  }
  return out;
}

std::vector<double> empirical_replicates(const CenteredData& data, int b, Rng& rng) {
  check_b(b, "b");
  const int n = data.n();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> out(b);
  RowMatrix w;
  for (int start = 0; start < b; start += kRepChunk) {
    const int rows = std::min(kRepChunk, b - start);
    w.setZero(rows, n);
    for (int r = 0; r < rows; ++r)
      for (int k = 0; k < n; ++k) w(r, static_cast<Eigen::Index>(uniform_index(rng, n))) += 1.0;
    row_max_products(w, data.centered(), scale, out.data() + start);
  }
  return out;
}

WildTestResult wild_test(const DataSet& data, const WeightLaw& law, int b, double alpha, const StreamKey& key) {
  check_b(b, "b");
  check_alpha(alpha);
  const CenteredData cd(data);
  Rng rng(key);
  const ReplicateSet reps(wild_replicates(cd, law, b, rng));
  WildTestResult out;
  out.t_n = cd.t_n();
  out.c_hat = bootstrap_quantile(reps, 1.0 - alpha);
  out.reject = out.t_n >= out.c_hat;
  return out;
}

DoubleWildResult double_wild_pvalue(const CenteredData& data, const WeightLaw& w_law, const WeightLaw& v_law, int b1,
                                    int b2, const StreamKey& key) {
  check_b(b1, "b1");
  check_b(b2, "b2");
  if (b1 >= (1 << 20)) throw ValidationError("b1 must be below 2^20");
  if (key.lane >= (1u << 12)) throw ValidationError("method lane must be below 2^12 for the double bootstrap");
  const int n = data.n();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const RowMatrix& xc = data.centered();

  Rng rng(key);
  RowMatrix w(b1, n);
  for (int r = 0; r < b1; ++r) fill_weights(w_law, rng, std::span<double>(w.row(r).data(), n));
  std::vector<double> t_star(b1);
  row_max_products(w, xc, scale, t_star.data());
  const ReplicateSet first(t_star);
  const double p_hat = first_level_pvalue(data.t_n(), first);

  RowMatrix v(b2, n);
  std::vector<double> t_star2(b2);
  int below = 0;
  for (int b = 0; b < b1; ++b) {
    Rng rng2(StreamKey{key.seed, key.trial, StreamPurpose::level2, (key.lane << 20) | static_cast<std::uint32_t>(b)});
    for (int r = 0; r < b2; ++r) fill_weights(v_law, rng2, std::span<double>(v.row(r).data(), n));
    // sum_i v_i (X*_i - X*-bar) = sum_i (v_i - v-bar) w_bi (X_i - X-bar)
    const Eigen::VectorXd vbar = v.rowwise().mean();
    v.colwise() -= vbar;
    v.array().rowwise() *= w.row(b).array();
    row_max_products(v, xc, scale, t_star2.data());
    int ge = 0;
    for (double x : t_star2) ge += (x >= t_star[b]);
    const double p_star = (ge + 1.0) / (b2 + 1.0);
    below += (p_star <= p_hat);
  }
  DoubleWildResult out;
  out.first_level_pvalue = p_hat;
  out.prepivot_pvalue = (below + 1.0) / (b1 + 1.0);
  return out;
}

DoubleWildResult double_wild_test(const DataSet& data, const WeightLaw& w_law, const WeightLaw& v_law, int b1, int b2,
                                  double alpha, const StreamKey& key) {
  check_alpha(alpha);
  auto out = double_wild_pvalue(CenteredData(data), w_law, v_law, b1, b2, key);
  out.reject = out.prepivot_pvalue <= alpha;
  return out;
}

std::vector<std::string> BootstrapConfig::validate() const {
  check_b(b, "b");
  check_alpha(alpha);
  std::vector<std::string> warnings;
  if (const auto* dw = std::get_if<DoubleWildMethod>(&method)) {
    check_b(dw->b2, "b2");
    if (b >= (1 << 20)) throw ValidationError("double bootstrap b1 must be below 2^20");
    const double gw = weight_moments(dw->w_law).m3;
    const double gv = weight_moments(dw->v_law).m3;
    if (std::abs(gw - 1.0) > 1e-9 || std::abs(gv - 1.0) > 1e-9)
      warnings.push_back("double wild bootstrap weights do not match third moments (E[w^3] != 1); "
                         "second-order accuracy is not expected");
  }
  return warnings;
}

double BootstrapConfig::gamma() const {
  if (const auto* w = std::get_if<WildMethod>(&method)) return weight_moments(w->law).m3;
  if (const auto* dw = std::get_if<DoubleWildMethod>(&method)) return weight_moments(dw->w_law).m3;
  return 1.0;
}

std::string BootstrapConfig::label() const {
  if (const auto* w = std::get_if<WildMethod>(&method)) return w->law.name();
  if (std::holds_alternative<EmpiricalMethod>(method)) return "empirical";
  const auto& dw = std::get<DoubleWildMethod>(method);
  if (dw.w_law.kind() == WeightLaw::Kind::std_beta && dw.v_law.kind() == WeightLaw::Kind::std_beta &&
      dw.w_law.nu() == dw.v_law.nu())
    return "double:" + format_nu(dw.w_law.nu()) + "," + std::to_string(dw.b2);
  return "double:" + dw.w_law.name() + "/" + dw.v_law.name() + "," + std::to_string(dw.b2);
}

namespace {

double parse_positive(const std::string& s, const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !(v > 0.0) || !std::isfinite(v))
    throw ValidationError("invalid numeric parameter in method '" + token + "'");
  return v;
}

}  // namespace

BootstrapConfig parse_method(const std::string& token, int b, double alpha) {
  BootstrapConfig cfg;
  cfg.b = b;
  cfg.alpha = alpha;
  if (token == "gaussian") cfg.method = WildMethod{WeightLaw::gaussian()};
  else if (token == "mammen") cfg.method = WildMethod{WeightLaw::mammen()};
  else if (token == "rademacher") cfg.method = WildMethod{WeightLaw::rademacher()};
  else if (token == "empirical") cfg.method = EmpiricalMethod{};
  else if (token.rfind("beta:", 0) == 0) cfg.method = WildMethod{WeightLaw::std_beta(parse_positive(token.substr(5), token))};
  else if (token.rfind("double:", 0) == 0) {
    const std::string rest = token.substr(7);
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw ValidationError("double bootstrap method must be double:NU,B2");
    const double nu = parse_positive(rest.substr(0, comma), token);
    const double b2 = parse_positive(rest.substr(comma + 1), token);
    if (b2 != std::floor(b2) || b2 > 1e7) throw ValidationError("double bootstrap B2 must be a positive integer");
    cfg.method = DoubleWildMethod{WeightLaw::std_beta(nu), WeightLaw::std_beta(nu), static_cast<int>(b2)};
  } else {
    throw ValidationError("unknown bootstrap method '" + token +
                          "' (expected gaussian|mammen|rademacher|beta:NU|empirical|double:NU,B2)");
  }
  return cfg;
}

}  // namespace maxboot
