#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>

namespace maxboot {

/// Philox4x32-10 counter-based block cipher.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter encrypt(Counter ctr, Key key);
};

enum class StreamPurpose : std::uint32_t { data = 0, level1 = 1, level2 = 2, gaussian_ref = 3 };

/// Identifies one independent substream.  `lane` separates sibling streams
/// that share (seed, trial, purpose), e.g. the methods of one trial or the
/// first-level replicates of a double bootstrap.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  StreamPurpose purpose = StreamPurpose::data;
  std::uint32_t lane = 0;

  StreamKey with_lane(std::uint32_t l) const { return {seed, trial, purpose, l}; }
  StreamKey with_purpose(StreamPurpose p) const { return {seed, trial, p, lane}; }
};

/// Single-owner generator state for one StreamKey.  Satisfies
/// UniformRandomBitGenerator so it can feed <random> and Boost distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(const StreamKey& key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    if (pos_ == 2) refill();
    return buf_[pos_++];
  }
  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
  double normal();
  double exponential();

 private:
  void refill();

  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int pos_ = 2;
};

struct StdBetaParams {
  double a;
  double b;
};

/// Shapes of the beta law whose standardisation has third moment 1 and a + b = nu.
StdBetaParams std_beta_params(double nu);

/// Skewness of Beta(a, b).
double beta_skewness(double a, double b);

class WeightLaw {
 public:
  enum class Kind { gaussian, mammen, rademacher, std_beta };

  static WeightLaw gaussian() { return WeightLaw(Kind::gaussian, 0.0); }
  static WeightLaw mammen() { return WeightLaw(Kind::mammen, 0.0); }
  static WeightLaw rademacher() { return WeightLaw(Kind::rademacher, 0.0); }
  static WeightLaw std_beta(double nu);

  Kind kind() const { return kind_; }
  double nu() const { return nu_; }
  /// Beta shapes; meaningful for std_beta only.
  double a() const { return a_; }
  double b() const { return b_; }
  /// Mean and standard deviation of the underlying Beta(a, b).
  double beta_mean() const { return mu_; }
  double beta_sd() const { return sd_; }

  std::string name() const;

 private:
  WeightLaw(Kind k, double nu);

  Kind kind_;
  double nu_ = 0.0;
  double a_ = 0.0, b_ = 0.0, mu_ = 0.0, sd_ = 0.0;
};

struct WeightMoments {
  double m1, m2, m3;
};

WeightMoments weight_moments(const WeightLaw& law);

inline constexpr double kMammenHigh = 1.6180339887498949;   // (sqrt5 + 1) / 2
inline constexpr double kMammenLow = -0.6180339887498949;   // -(sqrt5 - 1) / 2
inline constexpr double kMammenPHigh = 0.27639320225002106;  // (sqrt5 - 1) / (2 sqrt5)

double sample_weight(const WeightLaw& law, Rng& rng);
void fill_weights(const WeightLaw& law, Rng& rng, std::span<double> out);

/// Gamma(shape, scale) draw; Marsaglia-Tsang, boosted for shape < 1.
double sample_gamma(double shape, double scale, Rng& rng);
/// log of a Gamma(shape, 1) draw; stays finite for tiny shapes.
double sample_log_gamma(double shape, Rng& rng);
/// Beta(a, b) draw.  Johnk's algorithm in log space when a, b < 1,
/// otherwise the gamma ratio.
double sample_beta(double a, double b, Rng& rng);

}  // namespace maxboot
