#pragma once

#include <span>
#include <vector>

// Small tensor-product helpers shared by the mesh and solver translation units.
namespace dgles::detail {

inline int idx3(int i, int j, int k, int n) { return i + n * (j + n * k); }

template <class T>
T zero_like() {
  T z{};
  return z;
}

template <class T>
T axpy(double a, const T& x, const T& y) {
  T r = y;
  for (std::size_t c = 0; c < r.size(); ++c) r[c] += a * x[c];
  return r;
}

template <>
inline double axpy<double>(double a, const double& x, const double& y) {
  return y + a * x;
}

/// Applies the 1D matrix m (rows x cols, row-major) along all three
/// directions of a cols^3 tensor, producing a rows^3 tensor.
template <class T>
std::vector<T> interpolate3(std::span<const T> src, std::span<const double> m,
                            int rows, int cols) {
  std::vector<T> a(rows * cols * cols, zero_like<T>());
  for (int k = 0; k < cols; ++k)
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) {
        T acc = zero_like<T>();
        for (int p = 0; p < cols; ++p)
          acc = axpy(m[i * cols + p], src[p + cols * (j + cols * k)], acc);
        a[i + rows * (j + cols * k)] = acc;
      }
  std::vector<T> b(rows * rows * cols, zero_like<T>());
  for (int k = 0; k < cols; ++k)
    for (int j = 0; j < rows; ++j)
      for (int i = 0; i < rows; ++i) {
        T acc = zero_like<T>();
        for (int p = 0; p < cols; ++p)
          acc = axpy(m[j * cols + p], a[i + rows * (p + cols * k)], acc);
        b[i + rows * (j + rows * k)] = acc;
      }
  std::vector<T> c(rows * rows * rows, zero_like<T>());
  for (int k = 0; k < rows; ++k)
    for (int j = 0; j < rows; ++j)
      for (int i = 0; i < rows; ++i) {
        T acc = zero_like<T>();
        for (int p = 0; p < cols; ++p)
          acc = axpy(m[k * cols + p], b[i + rows * (j + rows * p)], acc);
        c[i + rows * (j + rows * k)] = acc;
      }
  return c;
}

/// Derivative along reference direction `dir` using a square n x n matrix.
template <class T>
std::vector<T> differentiate3(std::span<const T> src, std::span<const double> d,
                              int n, int dir) {
  std::vector<T> out(src.size(), zero_like<T>());
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int c[3] = {i, j, k};
        T acc = zero_like<T>();
        for (int m = 0; m < n; ++m) {
          int cc[3] = {i, j, k};
          cc[dir] = m;
          acc = axpy(d[c[dir] * n + m], src[idx3(cc[0], cc[1], cc[2], n)], acc);
        }
        out[idx3(i, j, k, n)] = acc;
      }
  return out;
}

}  // namespace dgles::detail
