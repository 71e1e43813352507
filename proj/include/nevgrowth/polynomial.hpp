#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "nevgrowth/errors.hpp"

namespace nevgrowth {

using Complex = std::complex<double>;

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// A root (zero or pole location) together with its multiplicity.
struct RootMult {
  Complex at;
  int mult = 1;
};

/// Dense polynomial with complex coefficients in ascending powers.
/// Exact trailing zeros are trimmed, so the zero polynomial has no
/// coefficients and degree -1.
class Polynomial {
public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Complex> coeffs) : c_(std::move(coeffs)) {
    for (Complex a : c_) {
      if (!is_finite(a)) throw InvalidArgument("polynomial coefficient is not finite");
    }
    trim();
  }

  static Polynomial constant(Complex a) { return Polynomial({a}); }
  static Polynomial monomial(int degree, Complex a = 1.0) {
    std::vector<Complex> c(static_cast<std::size_t>(degree) + 1, 0.0);
    c.back() = a;
    return Polynomial(std::move(c));
  }
  /// scale * prod (z - root)^mult
  static Polynomial from_roots(Complex scale, std::span<const RootMult> roots) {
    Polynomial p = constant(scale);
    for (const RootMult& rm : roots) {
      const Polynomial lin({-rm.at, 1.0});
      for (int k = 0; k < rm.mult; ++k) p = p * lin;
    }
    return p;
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  std::span<const Complex> coeffs() const { return c_; }
  Complex coeff(int k) const {
    return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(k)] : Complex{};
  }
  Complex leading() const { return c_.empty() ? Complex{} : c_.back(); }

  /// Horner evaluation.
  Complex operator()(Complex z) const {
    Complex acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  /// Value and first derivative in one Horner pass.
  std::pair<Complex, Complex> eval_with_derivative(Complex z) const {
    Complex p = 0.0, dp = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      dp = dp * z + p;
      p = p * z + *it;
    }
    return {p, dp};
  }

  /// sum |a_k| |z|^k, the natural scale for rounding error in p(z).
  double abs_scale(Complex z) const {
    const double t = std::abs(z);
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + std::abs(*it);
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<Complex> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * static_cast<double>(k);
    return Polynomial(std::move(d));
  }

  /// Multiplicity of the root at the origin (number of leading zero coefficients).
  int origin_order() const {
    int k = 0;
    while (k < static_cast<int>(c_.size()) && c_[static_cast<std::size_t>(k)] == Complex{}) ++k;
    return k;
  }

  /// All roots with multiplicity, by Aberth–Ehrlich iteration. Roots at the
  /// origin are split off exactly.
  std::vector<Complex> roots() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<Complex> c(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < a.c_.size(); ++k) c[k] += a.c_[k];
    for (std::size_t k = 0; k < b.c_.size(); ++k) c[k] += b.c_[k];
    return Polynomial(std::move(c));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }
  friend Polynomial operator*(Complex s, const Polynomial& p) {
    std::vector<Complex> c(p.c_);
    for (Complex& a : c) a *= s;
    return Polynomial(std::move(c));
  }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Complex> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
  void trim() {
    while (!c_.empty() && c_.back() == Complex{}) c_.pop_back();
  }
  std::vector<Complex> c_;
};

inline std::vector<Complex> Polynomial::roots() const {
  if (is_zero()) throw InvalidArgument("roots of the zero polynomial are undefined");
  const int k0 = origin_order();
  std::vector<Complex> out(static_cast<std::size_t>(k0), Complex{});

  std::vector<Complex> q(c_.begin() + k0, c_.end());
  const int d = static_cast<int>(q.size()) - 1;
  if (d <= 0) return out;
  const Complex lead = q.back();
  for (Complex& a : q) a /= lead;
  if (d == 1) {
    out.push_back(-q[0]);
    return out;
  }

  const Polynomial monic(q);
  // Start on a circle whose radius is the geometric mean of the root moduli.
  const double rad = std::pow(std::abs(q[0]), 1.0 / d);
  std::vector<Complex> z(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) z[static_cast<std::size_t>(k)] = std::polar(rad, 2.0 * M_PI * k / d + 0.4);

  std::vector<bool> done(z.size(), false);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int iter = 0; iter < 2000; ++iter) {
    bool all_done = true;
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (done[k]) continue;
      auto [p, dp] = monic.eval_with_derivative(z[k]);
      if (p == Complex{} || std::abs(p) <= 4.0 * eps * monic.abs_scale(z[k])) {
        done[k] = true;
        continue;
      }
      const Complex w = p / dp;
      Complex s = 0.0;
      for (std::size_t j = 0; j < z.size(); ++j)
        if (j != k) s += 1.0 / (z[k] - z[j]);
      const Complex corr = w / (1.0 - w * s);
      z[k] -= corr;
      if (std::abs(corr) <= 4.0 * eps * std::max(1.0, std::abs(z[k]))) done[k] = true;
      else all_done = false;
    }
    if (all_done) break;
  }
  out.insert(out.end(), z.begin(), z.end());
  return out;
}

/// Group numerically coincident roots into (center, multiplicity) pairs.
/// Cluster centers are the mean of the members, which is accurate for
/// multiple roots even when the individual estimates are not.
inline std::vector<RootMult> cluster_roots(std::span<const Complex> roots, double rel_tol = 1e-4) {
  const std::size_t n = roots.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double scale = std::max({1.0, std::abs(roots[i]), std::abs(roots[j])});
      if (std::abs(roots[i] - roots[j]) < rel_tol * scale) parent[find(i)] = find(j);
    }
  std::vector<RootMult> out;
  std::vector<std::size_t> slot(n, n);
  std::vector<Complex> sums;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (slot[root] == n) {
      slot[root] = out.size();
      out.push_back({0.0, 0});
      sums.push_back(0.0);
    }
    sums[slot[root]] += roots[i];
    out[slot[root]].mult += 1;
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k].at = sums[k] / static_cast<double>(out[k].mult);
  return out;
}

/// Distinct roots of p with multiplicities; each center is polished by
/// Newton's method on p^(m-1), where an m-fold root is simple.
inline std::vector<RootMult> factor_roots(const Polynomial& p) {
  std::vector<RootMult> out = cluster_roots(p.roots());
  for (RootMult& rm : out) {
    if (rm.at == Complex{}) continue;
    Polynomial g = p;
    for (int k = 1; k < rm.mult; ++k) g = g.derivative();
    const Polynomial dg = g.derivative();
    for (int it = 0; it < 4; ++it) {
      const Complex val = g(rm.at);
      const Complex slope = dg(rm.at);
      if (slope == Complex{}) break;
      const Complex next = rm.at - val / slope;
      if (!is_finite(next) || std::abs(g(next)) >= std::abs(val)) break;
      rm.at = next;
    }
  }
  std::sort(out.begin(), out.end(), [](const RootMult& a, const RootMult& b) {
    if (std::abs(a.at) != std::abs(b.at)) return std::abs(a.at) < std::abs(b.at);
    return std::arg(a.at) < std::arg(b.at);
  });
  return out;
}

}  // namespace nevgrowth
