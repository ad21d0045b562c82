#include "maxboot/harness.hpp"

#include "maxboot/edgeworth.hpp"
#include "maxboot/error.hpp"
#include "maxboot/gaussnum.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>
#include <thread>

namespace maxboot {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kAsymShape = 1.0;
constexpr double kSymShape = 0.5;
constexpr int kAuxChunk = 4096;
constexpr double kMaxAuxEntries = 5e7;

ScalarLaw scalar_law(MarginalMode m) {
  return m == MarginalMode::asymmetric ? ScalarLaw::std_gamma(kAsymShape) : ScalarLaw::sym_gamma(kSymShape);
}

CopulaConfig copula_config(const ExperimentConfig& cfg, int n) {
  CopulaConfig c;
  c.corr = cfg.design == Design::copula_i ? CovarianceSpec::equicorrelation(cfg.d, cfg.rho)
                                          : CovarianceSpec::ar1(cfg.d, cfg.rho);
  c.symmetrize = cfg.marginal == MarginalMode::symmetric;
  c.marginal_shape = c.symmetrize ? kSymShape : kAsymShape;
  c.marginal_scale = 1.0;
  c.n = n;
  return c;
}

FactorConfig factor_config(const ExperimentConfig& cfg, int n) {
  FactorConfig f;
  f.rho = cfg.rho;
  f.d = cfg.d;
  f.n = n;
  f.u_law = scalar_law(cfg.marginal);
  f.v_law = ScalarLaw::normal();
  return f;
}

int b2_of(const BootstrapConfig& m) {
  if (const auto* dw = std::get_if<DoubleWildMethod>(&m.method)) return dw->b2;
  return 0;
}

}  // namespace

std::string design_token(Design d) {
  switch (d) {
    case Design::copula_i: return "copula-i";
    case Design::copula_ii: return "copula-ii";
    case Design::factor: return "factor";
    case Design::iid_spherical: return "iid-spherical";
  }
  return "?";
}

Design parse_design(const std::string& token) {
  if (token == "copula-i" || token == "I") return Design::copula_i;
  if (token == "copula-ii" || token == "II") return Design::copula_ii;
  if (token == "factor") return Design::factor;
  if (token == "iid-spherical" || token == "iid") return Design::iid_spherical;
  throw ValidationError("unknown design '" + token + "' (copula-i | copula-ii | factor | iid-spherical)");
}

std::string marginal_token(MarginalMode m) { return m == MarginalMode::asymmetric ? "asym" : "sym"; }

MarginalMode parse_marginal(const std::string& token) {
  if (token == "asym" || token == "asymmetric") return MarginalMode::asymmetric;
  if (token == "sym" || token == "symmetric") return MarginalMode::symmetric;
  throw ValidationError("unknown marginal mode '" + token + "' (asym | sym)");
}

void ExperimentConfig::validate() const {
  if (n < 2) throw ValidationError("n must be >= 2");
  if (d < 1) throw ValidationError("d must be >= 1");
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (threads < 0) throw ValidationError("threads must be >= 0");
  if (!(budget > 0.0)) throw ValidationError("budget must be positive");
  if (aux_rows < 1) throw ValidationError("aux_rows must be >= 1");
  if (alphas.empty()) throw ValidationError("at least one alpha is required");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0)) throw ValidationError("alpha values must lie in (0,1)");
  switch (design) {
    case Design::copula_i:
    case Design::factor:
      if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("rho must lie in [0,1) for this design");
      break;
    case Design::copula_ii:
      if (!(rho > -1.0 && rho < 1.0)) throw ValidationError("rho must lie in (-1,1) for copula-ii");
      break;
    case Design::iid_spherical: break;
  }
  for (const auto& m : method_configs()) m.validate();
}

std::vector<BootstrapConfig> ExperimentConfig::method_configs() const {
  std::vector<BootstrapConfig> out;
  out.reserve(methods.size());
  for (const auto& tok : methods) out.push_back(parse_method(tok, b, alphas.empty() ? 0.1 : alphas.front()));
  if (out.size() >= (1u << 12)) throw ValidationError("too many methods");
  return out;
}

double projected_cost(const ExperimentConfig& cfg) {
  double per_trial = 0.0;
  for (const auto& m : cfg.method_configs()) {
    const double b1 = m.b, b2 = b2_of(m);
    per_trial += b1 + b1 * b2 + 1.0;
  }
  return static_cast<double>(cfg.trials) * per_trial * cfg.n * cfg.d;
}

DataSet generate_trial_data(const ExperimentConfig& cfg, std::uint64_t trial) {
  if (cfg.fixed_data) return cfg.fixed_data(trial);
  Rng rng(StreamKey{cfg.seed, trial, StreamPurpose::data, 0});
  switch (cfg.design) {
    case Design::copula_i:
    case Design::copula_ii: return gen_copula(copula_config(cfg, cfg.n), rng);
    case Design::factor: return gen_factor(factor_config(cfg, cfg.n), rng);
    case Design::iid_spherical: return gen_iid(scalar_law(cfg.marginal), cfg.n, cfg.d, rng);
  }
  throw ValidationError("unknown design");
}

double mc_standard_error(double rate, int trials) {
  if (trials < 1) throw ValidationError("trials must be >= 1");
  return std::sqrt(std::max(0.0, rate * (1.0 - rate)) / trials);
}

RejectionReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const double cost = projected_cost(cfg);
  if (cost > cfg.budget) {
    std::ostringstream os;
    os << "projected cost " << cost << " multiply-adds exceeds the budget " << cfg.budget;
    throw CostRefusal(os.str(), cost, cfg.budget);
  }
  const auto methods = cfg.method_configs();
  const int n_m = static_cast<int>(methods.size());
  const int n_a = static_cast<int>(cfg.alphas.size());
  const int trials = cfg.trials;

  std::vector<std::uint8_t> reject(static_cast<std::size_t>(trials) * n_m * n_a, 0);
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, trials);
  std::vector<std::vector<double>> seconds(threads, std::vector<double>(n_m, 0.0));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  const auto worker = [&](int id) {
    try {
      for (int t = next++; t < trials && !failed; t = next++) {
        const std::uint64_t trial = static_cast<std::uint64_t>(t) + 1;
        const CenteredData cd(generate_trial_data(cfg, trial));
        if (cd.d() != cfg.d) throw ValidationError("trial data has the wrong dimension");
        for (int m = 0; m < n_m; ++m) {
          const auto t0 = std::chrono::steady_clock::now();
          const StreamKey key{cfg.seed, trial, StreamPurpose::level1, static_cast<std::uint32_t>(m)};
          std::uint8_t* out = reject.data() + (static_cast<std::size_t>(t) * n_m + m) * n_a;
          std::visit(overloaded{
                         [&](const WildMethod& w) {
                           Rng rng(key);
                           const ReplicateSet reps(wild_replicates(cd, w.law, methods[m].b, rng));
                           for (int a = 0; a < n_a; ++a)
                             out[a] = cd.t_n() >= bootstrap_quantile(reps, 1.0 - cfg.alphas[a]);
                         },
                         [&](const EmpiricalMethod&) {
                           Rng rng(key);
                           const ReplicateSet reps(empirical_replicates(cd, methods[m].b, rng));
                           for (int a = 0; a < n_a; ++a)
                             out[a] = cd.t_n() >= bootstrap_quantile(reps, 1.0 - cfg.alphas[a]);
                         },
                         [&](const DoubleWildMethod& dw) {
                           const auto r = double_wild_pvalue(cd, dw.w_law, dw.v_law, methods[m].b, dw.b2, key);
                           for (int a = 0; a < n_a; ++a) out[a] = r.prepivot_pvalue <= cfg.alphas[a];
                         },
                     },
                     methods[m].method);
          seconds[id][m] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker, i);
  }
  if (failure) std::rethrow_exception(failure);

  std::optional<std::vector<PredictionRow>> predictions;
  if (cfg.with_prediction) {
    try {
      predictions = predict(cfg);
    } catch (const CapabilityError&) {
    }
  }

  RejectionReport report;
  report.marginal = marginal_token(cfg.marginal);
  for (int m = 0; m < n_m; ++m) {
    double secs = 0.0;
    for (const auto& s : seconds) secs += s[m];
    for (int a = 0; a < n_a; ++a) {
      long long count = 0;
      for (int t = 0; t < trials; ++t) count += reject[(static_cast<std::size_t>(t) * n_m + m) * n_a + a];
      ReportRow row;
      row.design = design_token(cfg.design);
      row.rho = cfg.rho;
      row.n = cfg.n;
      row.d = cfg.d;
      row.method = methods[m].label();
      row.alpha = cfg.alphas[a];
      row.rate = static_cast<double>(count) / trials;
      row.mc_se = mc_standard_error(row.rate, trials);
      row.trials = trials;
      row.seed = cfg.seed;
      if (predictions) row.predicted = (*predictions)[static_cast<std::size_t>(m) * n_a + a].predicted;
      row.seconds = cfg.timing ? secs : 0.0;
      report.rows.push_back(std::move(row));
    }
  }
  if (cfg.with_prediction && !predictions) report.notes.push_back("no prediction path for this design");
  return report;
}

RejectionReport pp_curve(const ExperimentConfig& cfg) {
  if (cfg.alphas.empty()) throw ValidationError("alpha grid is empty");
  for (std::size_t i = 1; i < cfg.alphas.size(); ++i)
    if (!(cfg.alphas[i] > cfg.alphas[i - 1])) throw ValidationError("alpha grid must be strictly increasing");
  auto report = run_experiment(cfg);
  report.notes.push_back("separate pp-curve panels are independent runs; no data is shared between them");
  return report;
}

namespace {

struct PopulationMoments {
  CovarianceSpec sigma = CovarianceSpec::identity(1);
  ThirdMomentSource third = ThirdMomentSummary{};
};

ThirdMomentSummary exchangeable_summary(int d, double diag, double pair, double triple) {
  ThirdMomentSummary s;
  const double dd = d;
  s.d = d;
  s.s1 = dd * diag;
  s.s2 = dd * (dd - 1.0) * pair;
  s.s3 = dd * (dd - 1.0) * (dd - 2.0) * triple;
  return s;
}

PopulationMoments population_moments(const ExperimentConfig& cfg) {
  PopulationMoments pm;
  const int d = cfg.d;
  switch (cfg.design) {
    case Design::iid_spherical: {
      pm.sigma = CovarianceSpec::identity(d);
      pm.third = exchangeable_summary(d, scalar_law(cfg.marginal).third_moment(), 0.0, 0.0);
      return pm;
    }
    case Design::factor: {
      const auto f = factor_config(cfg, 1);
      pm.sigma = CovarianceSpec::equicorrelation(d, cfg.rho);
      const double common = std::pow(cfg.rho, 1.5) * f.u_law.third_moment();
      const double own = std::pow(1.0 - cfg.rho, 1.5) * f.v_law.third_moment();
      pm.third = exchangeable_summary(d, common + own, common, common);
      return pm;
    }
    case Design::copula_i:
    case Design::copula_ii: break;
  }
  const auto ccfg = copula_config(cfg, kAuxChunk);
  pm.sigma = copula_population_cov(ccfg);
  if (ccfg.symmetrize) {
    pm.third = exchangeable_summary(d, 0.0, 0.0, 0.0);
    return pm;
  }
  // Trial 0 is never used by run_experiment, so this stream is disjoint from the trials.
  Rng rng(StreamKey{cfg.seed, 0, StreamPurpose::data, 1});
  const bool exchangeable = pm.sigma.is_exchangeable();
  if (!exchangeable && static_cast<double>(cfg.aux_rows) * d > kMaxAuxEntries)
    throw CapabilityError("auxiliary sample of " + std::to_string(cfg.aux_rows) + " x " + std::to_string(d) +
                          " rows is too large to hold for a non-exchangeable Sigma; lower aux_rows");
  MomentAccumulator acc(d);
  RowMatrix all;
  if (!exchangeable) all.resize(cfg.aux_rows, d);
  for (long long done = 0; done < cfg.aux_rows;) {
    auto chunk_cfg = ccfg;
    chunk_cfg.n = static_cast<int>(std::min<long long>(kAuxChunk, cfg.aux_rows - done));
    const DataSet part = gen_copula(chunk_cfg, rng);
    if (exchangeable)
      acc.add(part.values());
    else
      all.middleRows(done, chunk_cfg.n) = part.values();
    done += chunk_cfg.n;
  }
  if (exchangeable)
    pm.third = acc.third();
  else
    pm.third = std::make_shared<const DataSet>(std::move(all));
  return pm;
}

}  // namespace

std::vector<PredictionRow> predict(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto methods = cfg.method_configs();
  const PopulationMoments pm = population_moments(cfg);
  std::vector<PredictionRow> out;
  for (const auto& m : methods) {
    for (double alpha : cfg.alphas) {
      PredictionRow row;
      row.method = m.label();
      row.alpha = alpha;
      row.gamma = m.gamma();
      if (std::holds_alternative<DoubleWildMethod>(m.method)) {
        row.predicted = alpha;
      } else {
        ExpansionInputs in;
        in.sigma = pm.sigma;
        in.n = cfg.n;
        in.gamma = row.gamma;
        in.third_moments = pm.third;
        in.precision.seed = cfg.seed;
        const auto p = predicted_rejection(in, alpha);
        row.predicted = p.predicted;
        row.q_term = p.q_term;
        row.r_term = p.r_term;
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace maxboot
