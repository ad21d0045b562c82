#include "maxboot/error.hpp"
#include "maxboot/gaussnum.hpp"
#include "maxboot/normal.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <unordered_map>

namespace maxboot::detail {

double bvn_cdf(double h, double k, double r) {
  if (std::isinf(h) || std::isinf(k)) {
    if (h == -INFINITY || k == -INFINITY) return 0.0;
    if (h == INFINITY) return norm_cdf(k);
    return norm_cdf(h);
  }
  if (r >= 1.0 - 1e-15) return norm_cdf(std::min(h, k));
  if (r <= -1.0 + 1e-15) return std::max(0.0, norm_cdf(h) - norm_sf(k));
  const double hk = h * k;
  const double hs = 0.5 * (h * h + k * k);
  const auto integrand = [&](double theta) {
    const double sn = std::sin(theta);
    const double c2 = 1.0 - sn * sn;
    return std::exp((sn * hk - hs) / c2);
  };
  const double upper = std::asin(r);
  double integral;
  if (std::abs(r) <= 0.925) {
    integral = boost::math::quadrature::gauss<double, 20>::integrate(integrand, 0.0, upper);
  } else {
    integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, upper, 20, 1e-15);
  }
  const double v = norm_cdf(h) * norm_cdf(k) + integral / (2.0 * M_PI);
  return std::clamp(v, 0.0, 1.0);
}

namespace {

// Genz sequential conditioning; the last two coordinates are handled by bvn_cdf.
class GenzOrthant {
 public:
  GenzOrthant(const Eigen::MatrixXd& c, const Eigen::VectorXd& b) : k_(static_cast<int>(b.size())), b_(b) {
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) throw ValidationError("orthant covariance is not positive definite");
    l_ = llt.matrixL();
    y_.assign(k_, 0.0);
  }

  double run() { return level(0); }

 private:
  double shift(int i) const {
    double s = 0.0;
    for (int m = 0; m < i; ++m) s += l_(i, m) * y_[m];
    return s;
  }

  double level(int i) {
    if (i == k_ - 2) {
      const double sa = l_(i, i);
      const double sb = std::hypot(l_(i + 1, i), l_(i + 1, i + 1));
      const double r = l_(i + 1, i) / sb;
      return bvn_cdf((b_[i] - shift(i)) / sa, (b_[i + 1] - shift(i + 1)) / sb, r);
    }
    const double a = (b_[i] - shift(i)) / l_(i, i);
    const double e = norm_cdf(a);
    if (e == 0.0) return 0.0;
    const double ec = norm_sf(a);
    const auto g = [&, i, e, ec](double w) {
      const double p = w * e;
      y_[i] = p < 0.5 ? norm_quantile(p) : norm_quantile_upper((1.0 - w) + w * ec);
      return level(i + 1);
    };
    double inner;
    if (k_ <= 3) {
      inner = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, 1.0, 12, 1e-12);
    } else {
      // smoothing substitution w = 3v^2 - 2v^3
      const auto gs = [&](double v) { return 6.0 * v * (1.0 - v) * g(v * v * (3.0 - 2.0 * v)); };
      if (k_ == 4) inner = boost::math::quadrature::gauss<double, 40>::integrate(gs, 0.0, 1.0);
      else if (k_ == 5) inner = boost::math::quadrature::gauss<double, 30>::integrate(gs, 0.0, 1.0);
      else inner = boost::math::quadrature::gauss<double, 20>::integrate(gs, 0.0, 1.0);
    }
    return e * inner;
  }

  int k_;
  Eigen::VectorXd b_;
  Eigen::MatrixXd l_;
  std::vector<double> y_;
};

struct Node {
  std::vector<int> ids;  // original coordinate ids still present
  Eigen::MatrixXd c;
  Eigen::VectorXd b;
  std::uint32_t mask = 0;  // removed (conditioned) coordinates
};

Node condition_on(const Node& node, int j, Eigen::VectorXd& beta) {
  const int k = static_cast<int>(node.ids.size());
  Node out;
  out.mask = node.mask | (1u << node.ids[j]);
  out.ids.reserve(k - 1);
  for (int m = 0; m < k; ++m)
    if (m != j) out.ids.push_back(node.ids[m]);
  const double cjj = node.c(j, j);
  beta.resize(k - 1);
  Eigen::VectorXd col(k - 1);
  for (int m = 0, p = 0; m < k; ++m) {
    if (m == j) continue;
    col[p] = node.c(m, j);
    beta[p] = col[p] / cjj;
    ++p;
  }
  out.c.resize(k - 1, k - 1);
  out.b.resize(k - 1);
  for (int m = 0, p = 0; m < k; ++m) {
    if (m == j) continue;
    out.b[p] = node.b[m] - beta[p] * node.b[j];
    for (int n = 0, q = 0; n < k; ++n) {
      if (n == j) continue;
      out.c(p, q) = node.c(m, n) - col[p] * col[q] / cjj;
      ++q;
    }
    ++p;
  }
  return out;
}

// Derivatives of P(Z <= b) by repeated conditioning.  Orthant probabilities
// depend only on the conditioned set and are cached by bitmask.
class DerivativeEngine {
 public:
  DerivativeEngine(const Eigen::MatrixXd& c, const Eigen::VectorXd& b) {
    root_.c = c;
    root_.b = b;
    for (int i = 0; i < b.size(); ++i) root_.ids.push_back(i);
  }

  double derivative(const std::vector<int>& alpha) { return eval(root_, alpha); }

 private:
  double orthant(const Node& node) {
    auto it = memo_.find(node.mask);
    if (it != memo_.end()) return it->second;
    const double v = mvn_orthant(node.c, node.b);
    memo_.emplace(node.mask, v);
    return v;
  }

  double eval(const Node& node, const std::vector<int>& alpha) {
    if (alpha.empty()) return orthant(node);
    const int j = alpha[0];
    int p = 0;
    std::vector<int> rest;
    for (std::size_t i = 1; i < alpha.size(); ++i) {
      if (alpha[i] == j) ++p;
      else rest.push_back(alpha[i] > j ? alpha[i] - 1 : alpha[i]);
    }
    Eigen::VectorXd beta;
    const Node child = condition_on(node, j, beta);
    const double sd = std::sqrt(node.c(j, j));
    const double x = node.b[j] / sd;
    const int kc = static_cast<int>(child.ids.size());
    const auto hder = [&](int m) { return std::pow(sd, -1 - m) * phi_derivative(m, x); };

    double total = hder(p) * eval(child, rest);
    if (p >= 1) {
      double s = 0.0;
      for (int l = 0; l < kc; ++l) {
        if (beta[l] == 0.0) continue;
        auto a = rest;
        a.push_back(l);
        s += beta[l] * eval(child, a);
      }
      total -= p * hder(p - 1) * s;
    }
    if (p >= 2) {
      double s = 0.0;
      for (int l = 0; l < kc; ++l) {
        if (beta[l] == 0.0) continue;
        for (int m = 0; m < kc; ++m) {
          if (beta[m] == 0.0) continue;
          auto a = rest;
          a.push_back(l);
          a.push_back(m);
          s += beta[l] * beta[m] * eval(child, a);
        }
      }
      total += hder(p - 2) * s;
    }
    return total;
  }

  Node root_;
  std::unordered_map<std::uint32_t, double> memo_;
};

}  // namespace

double mvn_orthant(const Eigen::MatrixXd& c, const Eigen::VectorXd& b) {
  const int k = static_cast<int>(b.size());
  if (k == 0) return 1.0;
  if (k == 1) return norm_cdf(b[0] / std::sqrt(c(0, 0)));
  if (k == 2) {
    const double s0 = std::sqrt(c(0, 0)), s1 = std::sqrt(c(1, 1));
    return bvn_cdf(b[0] / s0, b[1] / s1, c(0, 1) / (s0 * s1));
  }
  if (k > kDenseMaxDim) throw CapabilityError("orthant quadrature supports at most 6 dimensions");
  return std::clamp(GenzOrthant(c, b).run(), 0.0, 1.0);
}

double mvn_cdf_derivative(const Eigen::MatrixXd& c, const Eigen::VectorXd& b, const std::vector<int>& alpha) {
  if (alpha.size() > 3) throw CapabilityError("derivative order above 3 is not supported");
  for (int a : alpha)
    if (a < 0 || a >= b.size()) throw ValidationError("derivative index out of range");
  DerivativeEngine engine(c, b);
  return engine.derivative(alpha);
}

RectGradTensor rect_grad_dense(const Eigen::MatrixXd& sigma, double t, int r) {
  const int d = static_cast<int>(sigma.rows());
  if (d > kDenseMaxDim) throw CapabilityError("dense rectangle integrals require d <= 6");
  DerivativeEngine engine(sigma, Eigen::VectorXd::Constant(d, t));
  if (r == 1) {
    std::vector<double> v(d);
    for (int j = 0; j < d; ++j) v[j] = engine.derivative({j});
    return RectGradTensor::dense(1, d, t, std::move(v));
  }
  if (r == 2) {
    std::vector<double> v(static_cast<std::size_t>(d) * d);
    for (int j = 0; j < d; ++j)
      for (int k = j; k < d; ++k) v[j * d + k] = v[k * d + j] = engine.derivative({j, k});
    return RectGradTensor::dense(2, d, t, std::move(v));
  }
  std::vector<double> v(static_cast<std::size_t>(d) * d * d);
  for (int j = 0; j < d; ++j)
    for (int k = j; k < d; ++k)
      for (int l = k; l < d; ++l) {
        const double x = engine.derivative({j, k, l});
        const int p[3] = {j, k, l};
        static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        for (const auto& q : perms) v[(p[q[0]] * d + p[q[1]]) * d + p[q[2]]] = x;
      }
  return RectGradTensor::dense(3, d, t, std::move(v));
}

}  // namespace maxboot::detail
