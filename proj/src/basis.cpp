#include "dgles/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dgles/error.hpp"

namespace dgles {

std::string_view to_string(NodeKind kind) {
  return kind == NodeKind::Gauss ? "Gauss" : "GaussLobatto";
}

LegendreValue legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  if (n == 1) return {x, 1.0};
  double p_prev2 = 1.0, p_prev1 = x;
  double dp_prev2 = 0.0, dp_prev1 = 1.0;
  double p = 0.0, dp = 0.0;
  for (int k = 2; k <= n; ++k) {
    p = ((2.0 * k - 1.0) * x * p_prev1 - (k - 1.0) * p_prev2) / k;
    dp = dp_prev2 + (2.0 * k - 1.0) * p_prev1;
    p_prev2 = p_prev1;
    p_prev1 = p;
    dp_prev2 = dp_prev1;
    dp_prev1 = dp;
  }
  return {p, dp};
}

namespace {

constexpr double kNewtonTol = 1e-15;
constexpr int kNewtonMaxIter = 100;

void gauss_nodes(int order, std::vector<double>& x, std::vector<double>& w) {
  const int n = order + 1;
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int j = 0; j < n / 2; ++j) {
    // Chebyshev-Gauss initial guess; mirrored below.
    double xj = -std::cos((2.0 * j + 1.0) * std::numbers::pi / (2.0 * n));
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      const auto [p, dp] = legendre(n, xj);
      const double delta = -p / dp;
      xj += delta;
      if (std::abs(delta) <= kNewtonTol * std::abs(xj)) break;
    }
    const auto [p, dp] = legendre(n, xj);
    (void)p;
    x[j] = xj;
    x[n - 1 - j] = -xj;
    w[j] = w[n - 1 - j] = 2.0 / ((1.0 - xj * xj) * dp * dp);
  }
  if (n % 2 == 1) {
    const auto [p, dp] = legendre(n, 0.0);
    (void)p;
    x[n / 2] = 0.0;
    w[n / 2] = 2.0 / (dp * dp);
  }
}

// q(x) = P_{N+1} - P_{N-1} vanishes at the Lobatto points (together with the
// endpoints), q'(x) = (2N+1) P_N.
struct LobattoPoly {
  double q;
  double dq;
  double pn;
};

LobattoPoly lobatto_poly(int order, double x) {
  const auto lp1 = legendre(order + 1, x);
  const auto lm1 = legendre(order - 1, x);
  const auto ln = legendre(order, x);
  return {lp1.p - lm1.p, lp1.dp - lm1.dp, ln.p};
}

void lobatto_nodes(int order, std::vector<double>& x, std::vector<double>& w) {
  const int n = order + 1;
  const double nn1 = static_cast<double>(order) * (order + 1);
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  x[0] = -1.0;
  x[order] = 1.0;
  w[0] = w[order] = 2.0 / nn1;
  for (int j = 1; j < (order + 1) / 2; ++j) {
    // Chebyshev-Gauss-Lobatto initial guess.
    double xj = -std::cos(std::numbers::pi * j / order);
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      const auto lp = lobatto_poly(order, xj);
      const double delta = -lp.q / lp.dq;
      xj += delta;
      if (std::abs(delta) <= kNewtonTol * std::abs(xj)) break;
    }
    const auto lp = lobatto_poly(order, xj);
    x[j] = xj;
    x[order - j] = -xj;
    w[j] = w[order - j] = 2.0 / (nn1 * lp.pn * lp.pn);
  }
  if (order % 2 == 0) {
    const auto lp = lobatto_poly(order, 0.0);
    x[order / 2] = 0.0;
    w[order / 2] = 2.0 / (nn1 * lp.pn * lp.pn);
  }
}

}  // namespace

BasisSet::BasisSet(NodeKind kind, int order) : kind_(kind), order_(order) {
  if (order < kMinOrder || order > kMaxOrder) {
    throw ConfigError("polynomial order " + std::to_string(order) +
                      " outside supported range [" + std::to_string(kMinOrder) +
                      ", " + std::to_string(kMaxOrder) + "]");
  }
  if (kind == NodeKind::Gauss) {
    gauss_nodes(order, nodes_, weights_);
  } else {
    lobatto_nodes(order, nodes_, weights_);
  }
  const int n = size();

  bary_.assign(n, 1.0);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (k != j) bary_[j] *= nodes_[j] - nodes_[k];
    }
    bary_[j] = 1.0 / bary_[j];
  }

  diff_.assign(n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (bary_[j] / bary_[i]) / (nodes_[i] - nodes_[j]);
      diff_[i * n + j] = d;
      row += d;
    }
    diff_[i * n + i] = -row;
  }

  diff_hat_.assign(n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < n; ++m) {
      diff_hat_[i * n + m] = -diff_[m * n + i] * weights_[m] / weights_[i];
    }
  }

  left_ = lagrange_at(-1.0);
  right_ = lagrange_at(1.0);
}

std::vector<double> BasisSet::lagrange_at(double x) const {
  const int n = size();
  std::vector<double> l(n, 0.0);
  for (int j = 0; j < n; ++j) {
    if (x == nodes_[j]) {
      l[j] = 1.0;
      return l;
    }
  }
  double denom = 0.0;
  for (int j = 0; j < n; ++j) {
    l[j] = bary_[j] / (x - nodes_[j]);
    denom += l[j];
  }
  for (double& v : l) v /= denom;
  return l;
}

std::vector<double> BasisSet::interpolation_matrix(
    std::span<const double> targets) const {
  const int n = size();
  std::vector<double> m(targets.size() * n);
  for (std::size_t r = 0; r < targets.size(); ++r) {
    const auto l = lagrange_at(targets[r]);
    std::copy(l.begin(), l.end(), m.begin() + r * n);
  }
  return m;
}

BasisSet build_basis(NodeKind kind, int order) { return BasisSet(kind, order); }

int quadrature_exactness_degree(const BasisSet& basis) {
  constexpr double kTol = 1e-12;
  const auto x = basis.nodes();
  const auto w = basis.weights();
  int degree = -1;
  for (int k = 0; k <= 4 * basis.size() + 4; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] * std::pow(x[i], k);
    const double exact = (k % 2 == 0) ? 2.0 / (k + 1.0) : 0.0;
    if (std::abs(sum - exact) > kTol) break;
    degree = k;
  }
  return degree;
}

double sbp_residual(const BasisSet& basis) {
  const int n = basis.size();
  const auto w = basis.weights();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double q = w[i] * basis.diff(i, j) + basis.diff(j, i) * w[j];
      if (i == j && i == 0) q += 1.0;
      if (i == j && i == n - 1) q -= 1.0;
      worst = std::max(worst, std::abs(q));
    }
  }
  return worst;
}

}  // namespace dgles
