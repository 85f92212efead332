#pragma once

#include <array>
#include <cmath>

namespace ngalerkin {

/// Truncated univariate Taylor polynomial c[0] + c[1] s + ... + c[K] s^K.
///
/// Propagating a point x + s*e through a computation yields the normalized
/// directional derivatives c[k] = (d^k/ds^k f) / k!. The coefficient type T
/// may itself be a Taylor polynomial; nesting Taylor<Taylor<double, 1>, K>
/// carries a second seed direction and gives mixed partials exactly.
template <class T, int K>
struct Taylor {
  static_assert(K >= 0 && K <= 3, "activation closed forms stop at third order");

  std::array<T, K + 1> c{};

  Taylor() = default;
  Taylor(double v) { c[0] = T(v); }  // NOLINT(google-explicit-constructor)

  static Taylor variable(const T& x0) {
    Taylor r;
    r.c[0] = x0;
    if constexpr (K >= 1) r.c[1] = T(1.0);
    return r;
  }

  const T& primal() const { return c[0]; }

  /// k-th derivative along the seed direction.
  T derivative(int k) const {
    static constexpr double kFactorial[4] = {1.0, 1.0, 2.0, 6.0};
    return c[k] * kFactorial[k];
  }

  Taylor& operator+=(const Taylor& o) {
    for (int k = 0; k <= K; ++k) c[k] += o.c[k];
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    for (int k = 0; k <= K; ++k) c[k] -= o.c[k];
    return *this;
  }
  Taylor& operator*=(double s) {
    for (int k = 0; k <= K; ++k) c[k] *= s;
    return *this;
  }
  Taylor& operator*=(const Taylor& o) { return *this = *this * o; }

  friend Taylor operator-(Taylor a) {
    for (int k = 0; k <= K; ++k) a.c[k] = -a.c[k];
    return a;
  }
  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator+(Taylor a, double s) {
    a.c[0] += s;
    return a;
  }
  friend Taylor operator+(double s, Taylor a) { return a + s; }
  friend Taylor operator-(Taylor a, double s) {
    a.c[0] -= s;
    return a;
  }
  friend Taylor operator-(double s, const Taylor& a) { return -a + s; }
  friend Taylor operator*(Taylor a, double s) { return a *= s; }
  friend Taylor operator*(double s, Taylor a) { return a *= s; }

  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (int i = 0; i <= K; ++i) {
      for (int j = 0; i + j <= K; ++j) r.c[i + j] += a.c[i] * b.c[j];
    }
    return r;
  }
};

using Dual = Taylor<double, 1>;

inline double primal_value(double v) { return v; }
template <class T, int K>
double primal_value(const Taylor<T, K>& v) {
  return primal_value(v.c[0]);
}

/// f(z(s)) from the derivatives f0..f3 of f at z.c[0] (Faa di Bruno to third order).
template <class T, int K>
Taylor<T, K> compose(const Taylor<T, K>& z, const T& f0, const T& f1, const T& f2, const T& f3) {
  Taylor<T, K> r;
  r.c[0] = f0;
  if constexpr (K >= 1) r.c[1] = f1 * z.c[1];
  if constexpr (K >= 2) r.c[2] = f1 * z.c[2] + 0.5 * (f2 * (z.c[1] * z.c[1]));
  if constexpr (K >= 3) {
    r.c[3] = f1 * z.c[3] + f2 * (z.c[1] * z.c[2]) + (f3 * (z.c[1] * z.c[1] * z.c[1])) * (1.0 / 6.0);
  }
  return r;
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

template <class T, int K>
Taylor<T, K> sigmoid(const Taylor<T, K>& z) {
  // 1 - s as sigmoid(-z) keeps the derivatives accurate in saturation
  const T s = sigmoid(z.c[0]);
  const T q = sigmoid(-z.c[0]);
  const T d1 = s * q;
  const T d2 = d1 * (q - s);
  const T d3 = d1 * (1.0 - 6.0 * d1);
  return compose(z, s, d1, d2, d3);
}

using std::tanh;
template <class T, int K>
Taylor<T, K> tanh(const Taylor<T, K>& z) {
  const T t = tanh(z.c[0]);
  const T d1 = 4.0 * (sigmoid(2.0 * z.c[0]) * sigmoid(-2.0 * z.c[0]));
  const T d2 = -2.0 * (t * d1);
  const T d3 = (6.0 * (t * t) - 2.0) * d1;
  return compose(z, t, d1, d2, d3);
}

using std::exp;
template <class T, int K>
Taylor<T, K> exp(const Taylor<T, K>& z) {
  const T e = exp(z.c[0]);
  return compose(z, e, e, e, e);
}

using std::sin;
using std::cos;
template <class T, int K>
Taylor<T, K> sin(const Taylor<T, K>& z) {
  const T s = sin(z.c[0]);
  const T co = cos(z.c[0]);
  return compose(z, s, co, -s, -co);
}
template <class T, int K>
Taylor<T, K> cos(const Taylor<T, K>& z) {
  const T s = sin(z.c[0]);
  const T co = cos(z.c[0]);
  return compose(z, co, -s, -co, s);
}

}  // namespace ngalerkin
