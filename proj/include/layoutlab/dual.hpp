#pragma once

// Forward-mode scalar with a single tangent direction, plus a 2-vector that
// works over either double or Dual. The ergonomic and intersection costs are
// written once as templates and instantiated for both.

#include <cmath>

namespace layoutlab {

struct Dual {
  double v = 0.0;  // value
  double d = 0.0;  // derivative along the seeded direction

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(double value, double tangent) : v(value), d(tangent) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v /= o.v;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }

inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }

inline Dual exp(const Dual& a) {
  const double e = std::exp(a.v);
  return {e, e * a.d};
}
inline Dual log(const Dual& a) { return {std::log(a.v), a.d / a.v}; }
inline Dual sqrt(const Dual& a) {
  const double s = std::sqrt(a.v);
  return {s, s > 0.0 ? a.d / (2.0 * s) : 0.0};
}
inline Dual sin(const Dual& a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Dual cos(const Dual& a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
inline Dual atan2(const Dual& y, const Dual& x) {
  const double r2 = x.v * x.v + y.v * y.v;
  return {std::atan2(y.v, x.v), (x.v * y.d - y.v * x.d) / r2};
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

// |x| with a zero subgradient inside a tiny band around 0. cos(pi/2) evaluates
// to 6e-17, and central differences of |cos| there are 0, so snapping keeps the
// analytic derivative consistent with the symmetric one at cardinal angles.
template <class T>
T snapped_abs(const T& x) {
  constexpr double kBand = 1e-9;
  const double xv = value_of(x);
  if (xv > kBand) return x;
  if (xv < -kBand) return -x;
  return T(std::abs(xv));
}

template <class T>
T max0(const T& x) {
  return value_of(x) > 0.0 ? x : T(0.0);
}

template <class T>
T tmax(const T& a, const T& b) {
  return value_of(a) >= value_of(b) ? a : b;
}

template <class T>
T tmin(const T& a, const T& b) {
  return value_of(a) <= value_of(b) ? a : b;
}

template <class T>
struct Vec2T {
  T x{}, y{};

  Vec2T() = default;
  Vec2T(T x_, T y_) : x(x_), y(y_) {}

  friend Vec2T operator+(const Vec2T& a, const Vec2T& b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2T operator-(const Vec2T& a, const Vec2T& b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2T operator*(const T& s, const Vec2T& a) { return {s * a.x, s * a.y}; }
  friend T dot(const Vec2T& a, const Vec2T& b) { return a.x * b.x + a.y * b.y; }
};

using Vec2 = Vec2T<double>;

template <class T>
T norm(const Vec2T<T>& a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

// Normalization regularized so coincident points do not produce NaN inside
// scene-level aggregates. The regularizer is far below any geometric scale.
template <class T>
Vec2T<T> safe_normalize(const Vec2T<T>& a) {
  using std::sqrt;
  const T n = sqrt(dot(a, a) + T(1e-18));
  return {a.x / n, a.y / n};
}

}  // namespace layoutlab
