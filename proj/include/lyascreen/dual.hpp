#pragma once

// Truncated Taylor jets used for forward-mode differentiation along a single
// tangent direction. Dual1 carries (f, f'), Dual2 carries (f, f', f'').

#include <cmath>

namespace lyascreen {

struct Dual1 {
  double value = 0.0;
  double d1 = 0.0;

  constexpr Dual1() = default;
  constexpr Dual1(double v) : value(v) {}
  constexpr Dual1(double v, double t) : value(v), d1(t) {}

  friend constexpr bool operator==(const Dual1&, const Dual1&) = default;
};

struct Dual2 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;

  constexpr Dual2() = default;
  constexpr Dual2(double v) : value(v) {}
  constexpr Dual2(double v, double t1, double t2) : value(v), d1(t1), d2(t2) {}

  friend constexpr bool operator==(const Dual2&, const Dual2&) = default;
};

// ---- Dual1 arithmetic ----

constexpr Dual1 operator+(Dual1 a, Dual1 b) { return {a.value + b.value, a.d1 + b.d1}; }
constexpr Dual1 operator-(Dual1 a, Dual1 b) { return {a.value - b.value, a.d1 - b.d1}; }
constexpr Dual1 operator-(Dual1 a) { return {-a.value, -a.d1}; }
constexpr Dual1 operator*(Dual1 a, Dual1 b) {
  return {a.value * b.value, a.d1 * b.value + a.value * b.d1};
}
constexpr Dual1 operator/(Dual1 a, Dual1 b) {
  const double q = a.value / b.value;
  return {q, (a.d1 - q * b.d1) / b.value};
}

// ---- Dual2 arithmetic ----

constexpr Dual2 operator+(Dual2 a, Dual2 b) {
  return {a.value + b.value, a.d1 + b.d1, a.d2 + b.d2};
}
constexpr Dual2 operator-(Dual2 a, Dual2 b) {
  return {a.value - b.value, a.d1 - b.d1, a.d2 - b.d2};
}
constexpr Dual2 operator-(Dual2 a) { return {-a.value, -a.d1, -a.d2}; }
constexpr Dual2 operator*(Dual2 a, Dual2 b) {
  return {a.value * b.value, a.d1 * b.value + a.value * b.d1,
          a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2};
}
constexpr Dual2 operator/(Dual2 a, Dual2 b) {
  // q = a/b  =>  a = q b; differentiate twice and solve for q', q''.
  const double q = a.value / b.value;
  const double q1 = (a.d1 - q * b.d1) / b.value;
  const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.value;
  return {q, q1, q2};
}

// Chain rule for a scalar function f given f(a), f'(a), f''(a).
constexpr double chain(double, double f0, double, double) { return f0; }
constexpr Dual1 chain(Dual1 a, double f0, double f1, double) { return {f0, f1 * a.d1}; }
constexpr Dual2 chain(Dual2 a, double f0, double f1, double f2) {
  return {f0, f1 * a.d1, f1 * a.d2 + f2 * a.d1 * a.d1};
}

constexpr double value_of(double a) { return a; }
constexpr double value_of(Dual1 a) { return a.value; }
constexpr double value_of(Dual2 a) { return a.value; }

inline bool all_finite(double a) { return std::isfinite(a); }
inline bool all_finite(Dual1 a) { return std::isfinite(a.value) && std::isfinite(a.d1); }
inline bool all_finite(Dual2 a) {
  return std::isfinite(a.value) && std::isfinite(a.d1) && std::isfinite(a.d2);
}

}  // namespace lyascreen
