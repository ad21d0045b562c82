#include "maxboot/random.hpp"

#include "maxboot/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace maxboot {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// ZIGNOR tables, 128 layers.
struct Ziggurat {
  static constexpr int kLayers = 128;
  static constexpr double kR = 3.442619855899;
  static constexpr double kV = 9.91256303526217e-3;
  double x[kLayers + 1];
  double ratio[kLayers];

  Ziggurat() {
    const double f = std::exp(-0.5 * kR * kR);
    x[0] = kV / f;
    x[1] = kR;
    x[kLayers] = 0.0;
    for (int i = 2; i < kLayers; ++i) x[i] = std::sqrt(-2.0 * std::log(kV / x[i - 1] + std::exp(-0.5 * x[i - 1] * x[i - 1])));
    for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
  }
};

const Ziggurat& ziggurat() {
  static const Ziggurat z;
  return z;
}

double normal_tail(double r, bool negative, Rng& rng) {
  double x, y;
  do {
    x = std::log(rng.uniform()) / r;
    y = std::log(rng.uniform());
  } while (-2.0 * y < x * x);
  return negative ? x - r : r - x;
}

}  // namespace

Philox4x32::Counter Philox4x32::encrypt(Counter c, Key k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  return c;
}

Rng::Rng(const StreamKey& key) {
  std::uint64_t h = splitmix64(key.seed);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(key.purpose) + 1) * 0x632BE59BD9B4E019ull);
  h = splitmix64(h ^ (key.trial >> 32));
  key_ = {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  ctr_ = {0u, 0u, key.lane, static_cast<std::uint32_t>(key.trial)};
}

void Rng::refill() {
  ctr_[0] = static_cast<std::uint32_t>(block_);
  ctr_[1] = static_cast<std::uint32_t>(block_ >> 32);
  ++block_;
  const auto out = Philox4x32::encrypt(ctr_, key_);
  buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  pos_ = 0;
}

double Rng::normal() {
  const Ziggurat& z = ziggurat();
  for (;;) {
    const std::uint64_t bits = next_u64();
    const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-52 - 1.0;
    const int i = static_cast<int>(bits & 0x7F);
    if (std::abs(u) < z.ratio[i]) return u * z.x[i];
    if (i == 0) return normal_tail(Ziggurat::kR, u < 0.0, *this);
    const double x = u * z.x[i];
    const double f0 = std::exp(-0.5 * (z.x[i] * z.x[i] - x * x));
    const double f1 = std::exp(-0.5 * (z.x[i + 1] * z.x[i + 1] - x * x));
    if (f1 + uniform() * (f0 - f1) < 1.0) return x;
  }
}

double Rng::exponential() { return -std::log(uniform()); }

StdBetaParams std_beta_params(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("std_beta_params: nu must be positive");
  const double c = nu * nu + 20.0 * nu + 20.0;
  const double sc = std::sqrt(c);
  return {nu * (c - (2.0 + nu) * sc) / (2.0 * c), nu * (c + (2.0 + nu) * sc) / (2.0 * c)};
}

double beta_skewness(double a, double b) {
  return 2.0 * (b - a) * std::sqrt(a + b + 1.0) / ((a + b + 2.0) * std::sqrt(a * b));
}

WeightLaw::WeightLaw(Kind k, double nu) : kind_(k), nu_(nu) {
  if (k == Kind::std_beta) {
    const auto p = std_beta_params(nu);
    a_ = p.a;
    b_ = p.b;
    mu_ = a_ / (a_ + b_);
    sd_ = std::sqrt(a_ * b_ / ((a_ + b_) * (a_ + b_) * (a_ + b_ + 1.0)));
  }
}

WeightLaw WeightLaw::std_beta(double nu) { return WeightLaw(Kind::std_beta, nu); }

std::string WeightLaw::name() const {
  switch (kind_) {
    case Kind::gaussian: return "gaussian";
    case Kind::mammen: return "mammen";
    case Kind::rademacher: return "rademacher";
    case Kind::std_beta: {
      std::ostringstream os;
      os << "beta:" << nu_;
      return os.str();
    }
  }
  return "?";
}

WeightMoments weight_moments(const WeightLaw& law) {
  switch (law.kind()) {
    case WeightLaw::Kind::gaussian:
    case WeightLaw::Kind::rademacher: return {0.0, 1.0, 0.0};
    case WeightLaw::Kind::mammen: {
      const double m3 = kMammenPHigh * kMammenHigh * kMammenHigh * kMammenHigh +
                        (1.0 - kMammenPHigh) * kMammenLow * kMammenLow * kMammenLow;
      return {0.0, 1.0, m3};
    }
    case WeightLaw::Kind::std_beta: return {0.0, 1.0, beta_skewness(law.a(), law.b())};
  }
  return {0.0, 1.0, 0.0};
}

double sample_weight(const WeightLaw& law, Rng& rng) {
  switch (law.kind()) {
    case WeightLaw::Kind::gaussian: return rng.normal();
    case WeightLaw::Kind::rademacher: return (rng.next_u64() >> 63) ? 1.0 : -1.0;
    case WeightLaw::Kind::mammen: return rng.uniform() < kMammenPHigh ? kMammenHigh : kMammenLow;
    case WeightLaw::Kind::std_beta:
      return (sample_beta(law.a(), law.b(), rng) - law.beta_mean()) / law.beta_sd();
  }
  return 0.0;
}

void fill_weights(const WeightLaw& law, Rng& rng, std::span<double> out) {
  switch (law.kind()) {
    case WeightLaw::Kind::gaussian:
      for (double& w : out) w = rng.normal();
      return;
    case WeightLaw::Kind::rademacher: {
      std::size_t i = 0;
      while (i < out.size()) {
        std::uint64_t bits = rng.next_u64();
        for (int k = 0; k < 64 && i < out.size(); ++k, ++i, bits >>= 1) out[i] = (bits & 1u) ? 1.0 : -1.0;
      }
      return;
    }
    case WeightLaw::Kind::mammen:
      for (double& w : out) w = rng.uniform() < kMammenPHigh ? kMammenHigh : kMammenLow;
      return;
    case WeightLaw::Kind::std_beta: {
      const double a = law.a(), b = law.b(), mu = law.beta_mean(), inv_sd = 1.0 / law.beta_sd();
      for (double& w : out) w = (sample_beta(a, b, rng) - mu) * inv_sd;
      return;
    }
  }
}

namespace {

// Marsaglia-Tsang for shape >= 1.
double gamma_mt(double shape, Rng& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

double sample_log_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("gamma shape must be positive");
  if (shape >= 1.0) return std::log(gamma_mt(shape, rng));
  return std::log(gamma_mt(shape + 1.0, rng)) + std::log(rng.uniform()) / shape;
}

double sample_gamma(double shape, double scale, Rng& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("gamma shape must be positive");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("gamma scale must be positive");
  if (shape >= 1.0) return scale * gamma_mt(shape, rng);
  return scale * std::exp(sample_log_gamma(shape, rng));
}

double sample_beta(double a, double b, Rng& rng) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta shapes must be positive");
  if (a < 1.0 && b < 1.0) {
    for (;;) {
      const double lx = std::log(rng.uniform()) / a;
      const double ly = std::log(rng.uniform()) / b;
      const double hi = std::max(lx, ly);
      const double lsum = hi + std::log1p(std::exp(std::min(lx, ly) - hi));
      if (lsum <= 0.0) return 1.0 / (1.0 + std::exp(ly - lx));
    }
  }
  const double la = sample_log_gamma(a, rng);
  const double lb = sample_log_gamma(b, rng);
  return 1.0 / (1.0 + std::exp(lb - la));
}

}  // namespace maxboot
