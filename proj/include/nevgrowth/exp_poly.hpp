#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "nevgrowth/polynomial.hpp"

namespace nevgrowth {

/// A complex number stored as mantissa * exp(shift), so that values such as
/// e^{1000} keep a usable modulus and argument.
struct ScaledValue {
  Complex mantissa;
  double shift = 0.0;

  double log_abs() const {
    const double a = std::abs(mantissa);
    return a == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(a) + shift;
  }
  Complex value() const { return mantissa * std::exp(shift); }
};

struct ExpTerm {
  Polynomial coeff;
  Complex rate;
};

/// Exponential polynomial sum_k P_k(z) e^{a_k z}: the entire functions the
/// toolkit differentiates, multiplies and bounds in closed form. Terms are
/// kept sorted by rate with equal rates merged and zero terms dropped.
class ExpPoly {
public:
  ExpPoly() = default;
  explicit ExpPoly(Polynomial p, Complex rate = 0.0) {
    if (!p.is_zero()) terms_.push_back({std::move(p), rate});
  }
  static ExpPoly exp(Complex rate) { return ExpPoly(Polynomial::constant(1.0), rate); }

  const std::vector<ExpTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_single_term() const { return terms_.size() == 1; }
  bool is_polynomial() const { return is_zero() || (is_single_term() && terms_[0].rate == Complex{}); }
  bool is_constant() const { return is_polynomial() && (is_zero() || terms_[0].coeff.degree() == 0); }

  ScaledValue scaled(Complex z) const {
    if (terms_.empty()) return {0.0, 0.0};
    double shift = -std::numeric_limits<double>::infinity();
    for (const ExpTerm& t : terms_) shift = std::max(shift, (t.rate * z).real());
    Complex acc = 0.0;
    for (const ExpTerm& t : terms_) acc += t.coeff(z) * std::exp(t.rate * z - shift);
    return {acc, shift};
  }

  Complex operator()(Complex z) const { return scaled(z).value(); }

  /// sum_k |P_k|(|z|) |e^{a_k z}|, expressed with the same shift as scaled(z).
  double abs_scale_shifted(Complex z, double shift) const {
    double acc = 0.0;
    for (const ExpTerm& t : terms_) acc += t.coeff.abs_scale(z) * std::exp((t.rate * z).real() - shift);
    return acc;
  }

  ExpPoly derivative() const {
    ExpPoly out;
    for (const ExpTerm& t : terms_) out.add_term(t.coeff.derivative() + t.rate * t.coeff, t.rate);
    return out;
  }

  friend ExpPoly operator+(const ExpPoly& a, const ExpPoly& b) {
    ExpPoly out = a;
    for (const ExpTerm& t : b.terms_) out.add_term(t.coeff, t.rate);
    return out;
  }
  friend ExpPoly operator*(Complex s, const ExpPoly& e) {
    ExpPoly out;
    for (const ExpTerm& t : e.terms_) out.add_term(s * t.coeff, t.rate);
    return out;
  }
  friend ExpPoly operator-(const ExpPoly& a, const ExpPoly& b) { return a + (-1.0) * b; }
  friend ExpPoly operator*(const ExpPoly& a, const ExpPoly& b) {
    ExpPoly out;
    for (const ExpTerm& s : a.terms_)
      for (const ExpTerm& t : b.terms_) out.add_term(s.coeff * t.coeff, s.rate + t.rate);
    return out;
  }
  friend ExpPoly operator*(const Polynomial& p, const ExpPoly& e) { return ExpPoly(p) * e; }

private:
  static bool rate_less(Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  }
  void add_term(const Polynomial& p, Complex rate) {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), rate,
                               [](const ExpTerm& t, Complex r) { return rate_less(t.rate, r); });
    if (it != terms_.end() && it->rate == rate) {
      it->coeff = it->coeff + p;
      if (it->coeff.is_zero()) terms_.erase(it);
    } else if (!p.is_zero()) {
      terms_.insert(it, {p, rate});
    }
  }

  std::vector<ExpTerm> terms_;
};

}  // namespace nevgrowth
