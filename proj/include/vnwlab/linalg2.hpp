#pragma once

// Fixed 2x2 matrices and 2-vectors over double or DD.

#include <array>
#include <cmath>

#include "vnwlab/ddreal.hpp"

namespace vnwlab {

template <typename T>
struct Vec2 {
  T x{};
  T y{};

  friend Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(const T& s, const Vec2& a) { return {s * a.x, s * a.y}; }
};

template <typename T>
T dot(const Vec2<T>& a, const Vec2<T>& b) {
  return a.x * b.x + a.y * b.y;
}

/// Row-major: m[0][0] m[0][1] / m[1][0] m[1][1].
template <typename T>
struct Mat2 {
  std::array<std::array<T, 2>, 2> m{};

  static Mat2 identity() {
    Mat2 r;
    r.m[0][0] = T(1.0);
    r.m[1][1] = T(1.0);
    return r;
  }

  T& operator()(int i, int j) { return m[i][j]; }
  const T& operator()(int i, int j) const { return m[i][j]; }

  T trace() const { return m[0][0] + m[1][1]; }
  T det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

  friend Mat2 operator+(const Mat2& a, const Mat2& b) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] + b.m[i][j];
    return r;
  }
  friend Mat2 operator-(const Mat2& a, const Mat2& b) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] - b.m[i][j];
    return r;
  }
  friend Mat2 operator*(const T& s, const Mat2& a) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r.m[i][j] = s * a.m[i][j];
    return r;
  }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
    return r;
  }
  friend Vec2<T> operator*(const Mat2& a, const Vec2<T>& v) {
    return {a.m[0][0] * v.x + a.m[0][1] * v.y, a.m[1][0] * v.x + a.m[1][1] * v.y};
  }
};

template <typename T>
Mat2<T> make_mat2(T a, T b, T c, T d) {
  Mat2<T> r;
  r.m = {{{a, b}, {c, d}}};
  return r;
}

inline double to_double(double x) { return x; }
inline double to_double(DD x) { return x.hi; }

inline double abs_value(double x) { return std::fabs(x); }
inline double abs_value(DD x) { return std::fabs(x.hi); }

/// Maximum absolute row sum (the operator norm induced by the max-norm).
template <typename T>
double norm_inf(const Mat2<T>& a) {
  const double r0 = abs_value(a.m[0][0]) + abs_value(a.m[0][1]);
  const double r1 = abs_value(a.m[1][0]) + abs_value(a.m[1][1]);
  return r0 > r1 ? r0 : r1;
}

template <typename T>
double norm_inf(const Vec2<T>& v) {
  const double a = abs_value(v.x);
  const double b = abs_value(v.y);
  return a > b ? a : b;
}

inline Mat2<double> to_double(const Mat2<DD>& a) {
  return make_mat2(a.m[0][0].hi, a.m[0][1].hi, a.m[1][0].hi, a.m[1][1].hi);
}

}  // namespace vnwlab
