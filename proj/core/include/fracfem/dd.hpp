// Double-double (compensated) arithmetic for conservation-critical sums.
//
// Stiffness entries on thin fracture bands reach k_f * (h_x/h_y) ~ 1e6-1e7,
// so plain double accumulation leaves ~1e-9 of rounding noise per row --
// far above the 1e-10 global-balance target. Sums of doubles are exact in
// double-double (106-bit significand), which restores the algebraic
// identities (zero row/column sums, residual cancellations) the flux
// post-processing relies on.
//
// Algorithms are the classical error-free transformations (Dekker, Knuth;
// see also Bailey's QD library and Ogita/Rump/Oishi accurate summation).
#pragma once

#include <cmath>

namespace fracfem {

struct DD {
  double hi = 0.0;
  double lo = 0.0;

  DD() = default;
  constexpr DD(double h) : hi(h), lo(0.0) {}
  constexpr DD(double h, double l) : hi(h), lo(l) {}

  double value() const { return hi + lo; }
};

// Error-free sum of two doubles: a + b = s + err exactly.
inline DD two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

// Error-free sum assuming |a| >= |b|.
inline DD quick_two_sum(double a, double b) {
  double s = a + b;
  return {s, b - (s - a)};
}

// Error-free product of two doubles via FMA: a * b = p + err exactly.
inline DD two_prod(double a, double b) {
  double p = a * b;
  double err = std::fma(a, b, -p);
  return {p, err};
}

inline DD operator+(DD a, double b) {
  DD s = two_sum(a.hi, b);
  s.lo += a.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline DD operator+(DD a, DD b) {
  DD s = two_sum(a.hi, b.hi);
  DD t = two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline DD operator-(DD a) { return {-a.hi, -a.lo}; }
inline DD operator-(DD a, DD b) { return a + (-b); }
inline DD operator-(DD a, double b) { return a + (-b); }

// double * double -> DD (exact).
inline DD dd_prod(double a, double b) { return two_prod(a, b); }

inline DD operator*(DD a, double b) {
  DD p = two_prod(a.hi, b);
  p.lo += a.lo * b;
  return quick_two_sum(p.hi, p.lo);
}

inline DD& operator+=(DD& a, double b) { a = a + b; return a; }
inline DD& operator+=(DD& a, DD b) { a = a + b; return a; }
inline DD& operator-=(DD& a, DD b) { a = a - b; return a; }
inline DD& operator-=(DD& a, double b) { a = a - b; return a; }

// Accumulate the exact product a*b.
inline void add_prod(DD& acc, double a, double b) { acc += two_prod(a, b); }

}  // namespace fracfem
