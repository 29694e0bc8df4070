#pragma once

// Second-order forward-mode differentiation in two variables. Used to get the
// gradient and Hessian of conformal perturbations in a single evaluation.

#include <cmath>

#include <Eigen/Dense>

namespace lenspec::detail {

struct Jet {
  double v = 0.0;
  Eigen::Vector2d d = Eigen::Vector2d::Zero();
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();

  static Jet constant(double c) {
    Jet j;
    j.v = c;
    return j;
  }
  static Jet variable(double x, int index) {
    Jet j;
    j.v = x;
    j.d[index] = 1.0;
    return j;
  }
};

// f(a) given f, f' and f'' evaluated at a.v
inline Jet chain(const Jet& a, double f, double f1, double f2) {
  Jet r;
  r.v = f;
  r.d = f1 * a.d;
  r.h = f1 * a.h + f2 * a.d * a.d.transpose();
  return r;
}

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v + b.v;
  r.d = a.d + b.d;
  r.h = a.h + b.h;
  return r;
}
inline Jet operator-(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v - b.v;
  r.d = a.d - b.d;
  r.h = a.h - b.h;
  return r;
}
inline Jet operator-(const Jet& a) {
  Jet r;
  r.v = -a.v;
  r.d = -a.d;
  r.h = -a.h;
  return r;
}
inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v * b.v;
  r.d = a.v * b.d + b.v * a.d;
  r.h = a.v * b.h + b.v * a.h + a.d * b.d.transpose() + b.d * a.d.transpose();
  return r;
}
inline Jet operator*(double s, const Jet& a) {
  Jet r;
  r.v = s * a.v;
  r.d = s * a.d;
  r.h = s * a.h;
  return r;
}
inline Jet operator+(const Jet& a, double c) {
  Jet r = a;
  r.v += c;
  return r;
}
inline Jet operator-(const Jet& a, double c) { return a + (-c); }

inline Jet reciprocal(const Jet& a) {
  const double inv = 1.0 / a.v;
  return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

inline Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
inline Jet log(const Jet& a) {
  return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}
inline Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet cosh(const Jet& a) {
  const double c = std::cosh(a.v);
  return chain(a, c, std::sinh(a.v), c);
}
inline Jet sinh(const Jet& a) {
  const double s = std::sinh(a.v);
  return chain(a, s, std::cosh(a.v), s);
}
inline Jet tanh(const Jet& a) {
  const double t = std::tanh(a.v);
  const double s2 = 1.0 - t * t;
  return chain(a, t, s2, -2.0 * t * s2);
}
inline Jet sech(const Jet& a) {
  const double s = 1.0 / std::cosh(a.v);
  const double t = std::tanh(a.v);
  return chain(a, s, -s * t, s * (t * t - s * s));
}

// acosh(w)^2, smooth through w = 1 where acosh itself is not.
inline Jet acosh_squared(const Jet& w) {
  const double x = w.v - 1.0;
  if (x < 1e-4) {
    const double f = x * (2.0 + x * (-1.0 / 3.0 + x * (4.0 / 45.0 - x / 35.0)));
    const double f1 = 2.0 + x * (-2.0 / 3.0 + x * (4.0 / 15.0 - x * 4.0 / 35.0));
    const double f2 = -2.0 / 3.0 + x * (8.0 / 15.0 - x * 12.0 / 35.0);
    return chain(w, f, f1, f2);
  }
  const double a = std::acosh(w.v);
  const double s2 = w.v * w.v - 1.0;
  const double f1 = 2.0 * a / std::sqrt(s2);
  return chain(w, a * a, f1, (2.0 - w.v * f1) / s2);
}

// Complex number with jet components.
struct ComplexJet {
  Jet re;
  Jet im;
};

inline ComplexJet operator+(const ComplexJet& a, const ComplexJet& b) {
  return {a.re + b.re, a.im + b.im};
}
inline ComplexJet operator*(const ComplexJet& a, const ComplexJet& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline ComplexJet operator/(const ComplexJet& a, const ComplexJet& b) {
  const Jet den = reciprocal(b.re * b.re + b.im * b.im);
  return {(a.re * b.re + a.im * b.im) * den, (a.im * b.re - a.re * b.im) * den};
}

}  // namespace lenspec::detail
