#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace growthlab {

/// Truncated Taylor polynomial: c[k] = f^{(k)}(t0) / k!.
///
/// Arithmetic propagates all coefficients up to order N-1, which gives exact
/// (to rounding) derivatives of closed-form expressions.
template <std::size_t N>
struct Jet {
  std::array<double, N> c{};

  static Jet constant(double v) {
    Jet j;
    j.c[0] = v;
    return j;
  }
  static Jet variable(double t0) {
    Jet j;
    j.c[0] = t0;
    if constexpr (N > 1) j.c[1] = 1.0;
    return j;
  }

  double value() const { return c[0]; }

  double derivative(std::size_t k) const {
    double f = 1.0;
    for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return c[k] * f;
  }

  /// d/dt of the jet; the top coefficient is lost.
  Jet<N - 1> differentiated() const {
    Jet<N - 1> d;
    for (std::size_t k = 0; k + 1 < N; ++k) {
      d.c[k] = static_cast<double>(k + 1) * c[k + 1];
    }
    return d;
  }

  template <std::size_t M>
  Jet<M> truncated() const {
    static_assert(M <= N);
    Jet<M> r;
    for (std::size_t k = 0; k < M; ++k) r.c[k] = c[k];
    return r;
  }

  Jet& operator+=(const Jet& o) {
    for (std::size_t k = 0; k < N; ++k) c[k] += o.c[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t k = 0; k < N; ++k) c[k] -= o.c[k];
    return *this;
  }
  Jet& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }
};

template <std::size_t N>
Jet<N> operator+(Jet<N> a, const Jet<N>& b) {
  return a += b;
}
template <std::size_t N>
Jet<N> operator-(Jet<N> a, const Jet<N>& b) {
  return a -= b;
}
template <std::size_t N>
Jet<N> operator-(Jet<N> a) {
  return a *= -1.0;
}
template <std::size_t N>
Jet<N> operator*(Jet<N> a, double s) {
  return a *= s;
}
template <std::size_t N>
Jet<N> operator*(double s, Jet<N> a) {
  return a *= s;
}
template <std::size_t N>
Jet<N> operator+(Jet<N> a, double s) {
  a.c[0] += s;
  return a;
}
template <std::size_t N>
Jet<N> operator-(double s, Jet<N> a) {
  a *= -1.0;
  a.c[0] += s;
  return a;
}

template <std::size_t N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (std::size_t k = 0; k < N; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i <= k; ++i) s += a.c[i] * b.c[k - i];
    r.c[k] = s;
  }
  return r;
}

template <std::size_t N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (std::size_t k = 0; k < N; ++k) {
    double s = a.c[k];
    for (std::size_t i = 1; i <= k; ++i) s -= b.c[i] * r.c[k - i];
    r.c[k] = s / b.c[0];
  }
  return r;
}

template <std::size_t N>
Jet<N> exp(const Jet<N>& a) {
  Jet<N> r;
  r.c[0] = std::exp(a.c[0]);
  for (std::size_t k = 1; k < N; ++k) {
    double s = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
      s += static_cast<double>(i) * a.c[i] * r.c[k - i];
    }
    r.c[k] = s / static_cast<double>(k);
  }
  return r;
}

template <std::size_t N>
Jet<N> log(const Jet<N>& a) {
  Jet<N> r;
  r.c[0] = std::log(a.c[0]);
  for (std::size_t k = 1; k < N; ++k) {
    double s = static_cast<double>(k) * a.c[k];
    for (std::size_t i = 1; i < k; ++i) {
      s -= static_cast<double>(i) * r.c[i] * a.c[k - i];
    }
    r.c[k] = s / (static_cast<double>(k) * a.c[0]);
  }
  return r;
}

}  // namespace growthlab
