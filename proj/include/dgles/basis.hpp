#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace dgles {

enum class NodeKind { Gauss, GaussLobatto };

std::string_view to_string(NodeKind kind);

inline constexpr int kMinOrder = 1;
inline constexpr int kMaxOrder = 12;

/// One-dimensional nodal Lagrange basis on [-1, 1] built on Legendre-Gauss or
/// Legendre-Gauss-Lobatto points. Immutable once constructed.
class BasisSet {
 public:
  BasisSet(NodeKind kind, int order);

  NodeKind kind() const { return kind_; }
  int order() const { return order_; }
  int size() const { return order_ + 1; }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> bary_weights() const { return bary_; }

  /// D(i, j) = l_j'(x_i), row-major.
  double diff(int i, int j) const { return diff_[i * size() + j]; }
  std::span<const double> diff_matrix() const { return diff_; }

  /// Weak-form derivative, D_hat(i, m) = -D(m, i) w_m / w_i.
  double diff_hat(int i, int m) const { return diff_hat_[i * size() + m]; }

  /// Lagrange values at xi = -1 and xi = +1.
  std::span<const double> left_interp() const { return left_; }
  std::span<const double> right_interp() const { return right_; }

  /// Values of all Lagrange polynomials at an arbitrary point.
  std::vector<double> lagrange_at(double x) const;

  /// Row-major (targets.size() x size()) interpolation matrix onto targets.
  std::vector<double> interpolation_matrix(std::span<const double> targets) const;

 private:
  NodeKind kind_;
  int order_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> bary_;
  std::vector<double> diff_;
  std::vector<double> diff_hat_;
  std::vector<double> left_;
  std::vector<double> right_;
};

BasisSet build_basis(NodeKind kind, int order);

/// Highest degree d such that every monomial x^k, k <= d, integrates on
/// [-1, 1] to within 1e-12 of the exact value.
int quadrature_exactness_degree(const BasisSet& basis);

/// max |W D + D^T W - B| with B = diag(-1, 0, ..., 0, 1).
double sbp_residual(const BasisSet& basis);

/// Legendre polynomial P_n(x) and its derivative.
struct LegendreValue {
  double p;
  double dp;
};
LegendreValue legendre(int n, double x);

}  // namespace dgles
