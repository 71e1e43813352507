#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nevgrowth/errors.hpp"
#include "nevgrowth/exp_poly.hpp"
#include "nevgrowth/polynomial.hpp"

namespace nevgrowth {

inline constexpr double kPoleGuardRelative = 1e-8;
inline constexpr double kReducedRootTolerance = 1e-10;

/// scale * prod (z - b_k)^{m_k}; the denominator of every closed-form
/// function, kept factored so pole data is exact.
struct FactoredPoly {
  Complex scale{1.0};
  std::vector<RootMult> roots;

  Complex operator()(Complex z) const {
    Complex acc = scale;
    for (const RootMult& rm : roots) acc *= std::pow(z - rm.at, rm.mult);
    return acc;
  }
  double log_abs(Complex z) const {
    double acc = std::log(std::abs(scale));
    for (const RootMult& rm : roots) acc += rm.mult * std::log(std::abs(z - rm.at));
    return acc;
  }
  /// Q'/Q = sum m/(z-b)
  Complex log_derivative(Complex z) const {
    Complex acc = 0.0;
    for (const RootMult& rm : roots) acc += static_cast<double>(rm.mult) / (z - rm.at);
    return acc;
  }
  int degree() const {
    int d = 0;
    for (const RootMult& rm : roots) d += rm.mult;
    return d;
  }
  int origin_order() const {
    for (const RootMult& rm : roots)
      if (rm.at == Complex{}) return rm.mult;
    return 0;
  }
  Polynomial expand() const { return Polynomial::from_roots(scale, roots); }
  Polynomial radical() const {
    Polynomial p = Polynomial::constant(1.0);
    for (const RootMult& rm : roots) p = p * Polynomial({-rm.at, 1.0});
    return p;
  }
};

namespace detail {

inline std::vector<RootMult> merge_roots(std::vector<RootMult> a, std::span<const RootMult> b, bool take_max) {
  for (const RootMult& rb : b) {
    auto it = std::find_if(a.begin(), a.end(), [&](const RootMult& ra) {
      return std::abs(ra.at - rb.at) <= 1e-12 * std::max(1.0, std::abs(rb.at));
    });
    if (it == a.end()) a.push_back(rb);
    else it->mult = take_max ? std::max(it->mult, rb.mult) : it->mult + rb.mult;
  }
  return a;
}

inline std::vector<RootMult> within(std::span<const RootMult> roots, double radius) {
  std::vector<RootMult> out;
  for (const RootMult& rm : roots)
    if (std::abs(rm.at) <= radius) out.push_back(rm);
  return out;
}

}  // namespace detail

enum class FnKind { rational, closed_form, quotient };

inline const char* to_string(FnKind k) {
  switch (k) {
    case FnKind::rational: return "rational";
    case FnKind::closed_form: return "closed-form";
    case FnKind::quotient: return "quotient-of-entire";
  }
  return "?";
}

/// Zeros inside a disk of the given radius.
using ZeroSource = std::function<std::vector<RootMult>(double radius)>;
using EntireEvaluator = std::function<Complex(Complex)>;

/// A meromorphic function with exact (or declared) zero and pole data.
///
/// Closed-form functions are E(z) / (c prod (z-b)^m) with E an exponential
/// polynomial; this covers rational functions, exp, sin, cos and their
/// products, and is closed under differentiation. Quotient-of-entire
/// functions wrap two black-box entire evaluators with declared zeros and
/// poles inside a finite working disk; they cannot be differentiated.
class MeromorphicFn {
public:
  static MeromorphicFn constant(Complex a) { return polynomial(Polynomial::constant(a)); }
  static MeromorphicFn polynomial(Polynomial p, std::string name = {}) {
    return rational(std::move(p), Polynomial::constant(1.0), std::move(name));
  }

  /// P/Q from coefficient lists. Rejects Q == 0 and common roots.
  static MeromorphicFn rational(Polynomial num, Polynomial den, std::string name = {}) {
    if (den.is_zero()) throw InvalidArgument("denominator is identically zero");
    FactoredPoly q{den.leading(), den.degree() > 0 ? factor_roots(den) : std::vector<RootMult>{}};
    if (num.is_zero()) return closed_form(ExpPoly{}, FactoredPoly{}, std::nullopt, std::move(name));
    std::vector<RootMult> zeros = num.degree() > 0 ? factor_roots(num) : std::vector<RootMult>{};
    for (const RootMult& z : zeros)
      for (const RootMult& p : q.roots)
        if (std::abs(z.at - p.at) < kReducedRootTolerance)
          throw NotReduced("numerator and denominator share a root near (" + std::to_string(p.at.real()) +
                           ", " + std::to_string(p.at.imag()) + ")");
    return closed_form(ExpPoly(std::move(num)), std::move(q), std::nullopt, std::move(name));
  }

  /// scale * prod (z-a)^m / prod (z-b)^m from explicit root data.
  static MeromorphicFn from_factors(Complex scale, std::span<const RootMult> zeros,
                                    std::span<const RootMult> poles, std::string name = {}) {
    FactoredPoly q{1.0, std::vector<RootMult>(poles.begin(), poles.end())};
    auto exact = std::make_shared<const std::vector<RootMult>>(zeros.begin(), zeros.end());
    ZeroSource source = [exact](double radius) { return detail::within(*exact, radius); };
    return closed_form(ExpPoly(Polynomial::from_roots(scale, zeros)), std::move(q), std::move(source),
                       std::move(name));
  }

  static MeromorphicFn exp(Complex rate = 1.0) {
    if (rate == Complex{}) return constant(1.0);
    return closed_form(ExpPoly::exp(rate), FactoredPoly{}, std::nullopt, "exp");
  }

  /// sin(w z); zeros at k pi / w.
  static MeromorphicFn sin(Complex w = 1.0) {
    if (w == Complex{}) return constant(0.0);
    const Complex i(0.0, 1.0);
    ExpPoly e = (-0.5 * i) * ExpPoly::exp(i * w) + (0.5 * i) * ExpPoly::exp(-i * w);
    return closed_form(std::move(e), FactoredPoly{}, lattice_zeros(0.0, std::numbers::pi / w), "sin");
  }

  /// cos(w z); zeros at (k + 1/2) pi / w.
  static MeromorphicFn cos(Complex w = 1.0) {
    if (w == Complex{}) return constant(1.0);
    const Complex i(0.0, 1.0);
    ExpPoly e = 0.5 * ExpPoly::exp(i * w) + 0.5 * ExpPoly::exp(-i * w);
    const Complex step = std::numbers::pi / w;
    return closed_form(std::move(e), FactoredPoly{}, lattice_zeros(0.5 * step, step), "cos");
  }

  /// General closed form E/Q. `zeros` may be omitted when E is a single
  /// term, in which case they are computed from its polynomial factor.
  static MeromorphicFn closed_form(ExpPoly num, FactoredPoly den, std::optional<ZeroSource> zeros,
                                   std::string name = {}) {
    if (den.scale == Complex{}) throw InvalidArgument("denominator scale is zero");
    if (num.is_zero()) den = FactoredPoly{};
    for (const RootMult& p : den.roots) {
      const ScaledValue v = num.scaled(p.at);
      if (std::abs(v.mantissa) <= kReducedRootTolerance * num.abs_scale_shifted(p.at, v.shift))
        throw NotReduced("numerator vanishes at a declared pole");
    }
    ClosedForm cf{std::move(num), std::move(den), std::move(zeros)};
    if (!cf.zeros && cf.num.is_single_term()) {
      const Polynomial& p = cf.num.terms()[0].coeff;
      auto roots = std::make_shared<const std::vector<RootMult>>(p.degree() > 0 ? factor_roots(p)
                                                                                : std::vector<RootMult>{});
      cf.zeros = [roots](double radius) { return detail::within(*roots, radius); };
    }
    const FnKind kind = cf.num.is_polynomial() ? FnKind::rational : FnKind::closed_form;
    return MeromorphicFn(kind, std::move(name), std::numeric_limits<double>::infinity(), std::move(cf));
  }

  /// f = f1 / f2 with black-box entire parts. Zeros are those of f1, poles
  /// those of f2, both declared exhaustively inside the working disk.
  static MeromorphicFn quotient(EntireEvaluator f1, EntireEvaluator f2, std::vector<RootMult> zeros,
                                std::vector<RootMult> poles, double working_radius, std::string name = {}) {
    if (!(working_radius > 0.0) || !std::isfinite(working_radius))
      throw InvalidArgument("quotient-of-entire functions need a finite positive working radius");
    return MeromorphicFn(FnKind::quotient, std::move(name), working_radius,
                         BlackBox{std::move(f1), std::move(f2), std::move(zeros), std::move(poles)});
  }

  FnKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  MeromorphicFn named(std::string n) const {
    MeromorphicFn copy = *this;
    copy.name_ = std::move(n);
    return copy;
  }
  double working_radius() const { return working_radius_; }
  bool is_closed_form() const { return std::holds_alternative<ClosedForm>(rep_); }

  /// Pole-guard tolerance at z: 1e-8 of the working radius (or of max(1,|z|)
  /// when the function is defined on the whole plane).
  double pole_guard(Complex z = 0.0) const {
    return kPoleGuardRelative * (std::isfinite(working_radius_) ? working_radius_ : std::max(1.0, std::abs(z)));
  }

  Complex eval(Complex z) const {
    check_point(z);
    if (const auto* cf = std::get_if<ClosedForm>(&rep_)) {
      const ScaledValue v = cf->num.scaled(z);
      return v.mantissa / cf->den(z) * std::exp(v.shift);
    }
    const auto& bb = std::get<BlackBox>(rep_);
    return bb.f1(z) / bb.f2(z);
  }
  Complex operator()(Complex z) const { return eval(z); }

  /// log|f(z)|, safe against overflow of exponential factors.
  double log_abs(Complex z) const {
    check_point(z);
    if (const auto* cf = std::get_if<ClosedForm>(&rep_)) return cf->num.scaled(z).log_abs() - cf->den.log_abs(z);
    const auto& bb = std::get<BlackBox>(rep_);
    return std::log(std::abs(bb.f1(z))) - std::log(std::abs(bb.f2(z)));
  }

  /// f'(z)/f(z) for closed forms.
  Complex log_derivative(Complex z) const {
    check_point(z);
    const auto* cf = std::get_if<ClosedForm>(&rep_);
    if (!cf) throw Unsupported("log-derivative needs derivative rules (" + label() + ")");
    const ScaledValue v = cf->num.scaled(z);
    const ScaledValue dv = cf->num.derivative().scaled(z);
    return dv.mantissa / v.mantissa * std::exp(dv.shift - v.shift) - cf->den.log_derivative(z);
  }

  std::vector<RootMult> poles_within(double radius) const {
    if (const auto* cf = std::get_if<ClosedForm>(&rep_)) return detail::within(cf->den.roots, radius);
    check_radius(radius);
    return detail::within(std::get<BlackBox>(rep_).poles, radius);
  }
  bool zeros_known() const {
    if (const auto* cf = std::get_if<ClosedForm>(&rep_)) return cf->zeros.has_value();
    return true;
  }
  std::vector<RootMult> zeros_within(double radius) const {
    if (const auto* cf = std::get_if<ClosedForm>(&rep_)) {
      if (!cf->zeros) throw NotAvailable("zero data unavailable for " + label());
      return (*cf->zeros)(radius);
    }
    check_radius(radius);
    return detail::within(std::get<BlackBox>(rep_).zeros, radius);
  }

  int origin_pole_order() const {
    if (const auto* cf = std::get_if<ClosedForm>(&rep_)) return cf->den.origin_order();
    for (const RootMult& p : std::get<BlackBox>(rep_).poles)
      if (p.at == Complex{}) return p.mult;
    return 0;
  }
  bool is_entire() const {
    if (const auto* cf = std::get_if<ClosedForm>(&rep_)) return cf->den.roots.empty();
    return std::get<BlackBox>(rep_).poles.empty();
  }
  bool is_zero() const {
    const auto* cf = std::get_if<ClosedForm>(&rep_);
    return cf && cf->num.is_zero();
  }
  bool is_constant() const {
    const auto* cf = std::get_if<ClosedForm>(&rep_);
    return cf && cf->num.is_constant() && cf->den.roots.empty();
  }

  /// The two entire evaluators of a black-box quotient.
  std::optional<std::pair<EntireEvaluator, EntireEvaluator>> entire_parts() const {
    const auto* bb = std::get_if<BlackBox>(&rep_);
    if (!bb) return std::nullopt;
    return std::make_pair(bb->f1, bb->f2);
  }

  /// Numerator / denominator of a closed form (nullptr for black boxes).
  const ExpPoly* numerator() const {
    const auto* cf = std::get_if<ClosedForm>(&rep_);
    return cf ? &cf->num : nullptr;
  }
  const FactoredPoly* denominator() const {
    const auto* cf = std::get_if<ClosedForm>(&rep_);
    return cf ? &cf->den : nullptr;
  }

  /// Exact derivative. Each pole of order m becomes a pole of order m+1.
  MeromorphicFn derivative() const {
    const auto* cf = std::get_if<ClosedForm>(&rep_);
    if (!cf) throw Unsupported("cannot differentiate black-box quotient " + label());
    const Polynomial rad = cf->den.radical();
    Polynomial s;
    for (std::size_t k = 0; k < cf->den.roots.size(); ++k) {
      Polynomial term = Polynomial::constant(static_cast<double>(cf->den.roots[k].mult));
      for (std::size_t j = 0; j < cf->den.roots.size(); ++j)
        if (j != k) term = term * Polynomial({-cf->den.roots[j].at, 1.0});
      s = s + term;
    }
    ExpPoly num = rad * cf->num.derivative() - s * cf->num;
    FactoredPoly den = cf->den;
    for (RootMult& rm : den.roots) rm.mult += 1;
    return closed_form(std::move(num), std::move(den), std::nullopt, name_.empty() ? "" : name_ + "'");
  }

  /// 1/f, available when the numerator is a single term P(z) e^{az}.
  MeromorphicFn reciprocal() const {
    const auto* cf = std::get_if<ClosedForm>(&rep_);
    if (!cf || !cf->num.is_single_term())
      throw Unsupported("reciprocal needs a single-term numerator (" + label() + ")");
    const ExpTerm& t = cf->num.terms()[0];
    FactoredPoly den{t.coeff.leading(), t.coeff.degree() > 0 ? factor_roots(t.coeff) : std::vector<RootMult>{}};
    ExpPoly num(cf->den.expand(), -t.rate);
    return closed_form(std::move(num), std::move(den), std::nullopt, name_.empty() ? "" : "1/(" + name_ + ")");
  }

  friend MeromorphicFn operator*(const MeromorphicFn& f, const MeromorphicFn& g) {
    const auto& a = f.closed("multiply");
    const auto& b = g.closed("multiply");
    FactoredPoly den{a.den.scale * b.den.scale, detail::merge_roots(a.den.roots, b.den.roots, false)};
    ExpPoly num = a.num * b.num;
    std::optional<ZeroSource> zeros;
    if (!num.is_single_term() && a.zeros && b.zeros) {
      zeros = [za = *a.zeros, zb = *b.zeros](double radius) {
        return detail::merge_roots(za(radius), zb(radius), false);
      };
    }
    return closed_form(std::move(num), std::move(den), std::move(zeros), binary_name(f, "*", g));
  }
  friend MeromorphicFn operator*(Complex s, const MeromorphicFn& f) { return MeromorphicFn::constant(s) * f; }
  friend MeromorphicFn operator+(const MeromorphicFn& f, const MeromorphicFn& g) {
    const auto& a = f.closed("add");
    const auto& b = g.closed("add");
    const std::vector<RootMult> lcm = detail::merge_roots(a.den.roots, b.den.roots, true);
    auto cofactor = [&](const FactoredPoly& d) {
      Polynomial p = Polynomial::constant(1.0 / d.scale);
      for (const RootMult& l : lcm) {
        int have = 0;
        for (const RootMult& r : d.roots)
          if (std::abs(r.at - l.at) <= 1e-12 * std::max(1.0, std::abs(l.at))) have = r.mult;
        for (int k = have; k < l.mult; ++k) p = p * Polynomial({-l.at, 1.0});
      }
      return p;
    };
    ExpPoly num = cofactor(a.den) * a.num + cofactor(b.den) * b.num;
    return closed_form(std::move(num), FactoredPoly{1.0, lcm}, std::nullopt, binary_name(f, "+", g));
  }
  friend MeromorphicFn operator-(const MeromorphicFn& f, const MeromorphicFn& g) { return f + (-1.0) * g; }

private:
  struct ClosedForm {
    ExpPoly num;
    FactoredPoly den;
    std::optional<ZeroSource> zeros;
  };
  struct BlackBox {
    EntireEvaluator f1, f2;
    std::vector<RootMult> zeros, poles;
  };

  MeromorphicFn(FnKind kind, std::string name, double working_radius, std::variant<ClosedForm, BlackBox> rep)
      : kind_(kind), name_(std::move(name)), working_radius_(working_radius), rep_(std::move(rep)) {}

  static ZeroSource lattice_zeros(Complex offset, Complex step) {
    return [offset, step](double radius) {
      std::vector<RootMult> out;
      const long kmax = static_cast<long>(std::ceil(radius / std::abs(step))) + 1;
      for (long k = -kmax; k <= kmax; ++k) {
        const Complex z = offset + static_cast<double>(k) * step;
        if (std::abs(z) <= radius) out.push_back({z, 1});
      }
      std::sort(out.begin(), out.end(), [](const RootMult& a, const RootMult& b) {
        return std::abs(a.at) != std::abs(b.at) ? std::abs(a.at) < std::abs(b.at) : a.at.real() < b.at.real();
      });
      return out;
    };
  }

  static std::string binary_name(const MeromorphicFn& f, const char* op, const MeromorphicFn& g) {
    if (f.name_.empty() || g.name_.empty()) return {};
    return "(" + f.name_ + op + g.name_ + ")";
  }

  std::string label() const { return name_.empty() ? std::string("<unnamed>") : name_; }

  const ClosedForm& closed(const char* what) const {
    const auto* cf = std::get_if<ClosedForm>(&rep_);
    if (!cf) throw Unsupported(std::string("cannot ") + what + " black-box quotient " + label());
    return *cf;
  }

  void check_radius(double radius) const {
    if (radius > working_radius_ * (1.0 + 1e-12))
      throw OutsideDomain("radius " + std::to_string(radius) + " exceeds working radius of " + label());
  }

  void check_point(Complex z) const {
    if (!is_finite(z)) throw InvalidArgument("non-finite evaluation point");
    if (std::abs(z) > working_radius_) throw OutsideDomain("point outside working disk of " + label());
    const double guard = pole_guard(z);
    const std::vector<RootMult>& poles =
        is_closed_form() ? std::get<ClosedForm>(rep_).den.roots : std::get<BlackBox>(rep_).poles;
    for (const RootMult& p : poles)
      if (std::abs(z - p.at) <= guard) throw PoleProximity("evaluation point within pole guard of " + label());
  }

  FnKind kind_;
  std::string name_;
  double working_radius_;
  std::variant<ClosedForm, BlackBox> rep_;
};

/// Nearest declared pole (or zero, when known) distance from the circle |z| = r.
inline bool singular_point_on_circle(std::span<const RootMult> pts, double r, double guard) {
  return std::any_of(pts.begin(), pts.end(), [&](const RootMult& p) { return std::abs(std::abs(p.at) - r) <= guard; });
}

struct ModulusEstimate {
  double log_value;  ///< log M(r, f)
  double value;      ///< M(r, f); +inf when it overflows
  double theta;      ///< argument of the maximizing point
  double resolution; ///< angular sampling step before refinement
};

/// M(r, f) = max_{|z|=r} |f|: equispaced scan, then golden-section search
/// around the discrete maximum.
inline ModulusEstimate max_modulus(const MeromorphicFn& f, double r, int samples = 4096) {
  if (!(r > 0.0)) throw InvalidArgument("radius must be positive");
  if (samples < 8) throw InvalidArgument("at least 8 samples required");
  const double guard = f.pole_guard(Complex(r, 0.0));
  if (singular_point_on_circle(f.poles_within(std::min(f.working_radius(), r + 2 * guard)), r, guard))
    throw PoleOnCircle("declared pole on |z| = " + std::to_string(r));
  const double step = 2.0 * std::numbers::pi / samples;
  auto g = [&](double t) { return f.log_abs(std::polar(r, t)); };
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const double v = g(k * step);
    if (v > best_val) best_val = v, best = k;
  }
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = (best - 1) * step, b = (best + 1) * step;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 80 && (b - a) > 1e-15; ++it) {
    if (gc > gd) {
      b = d, d = c, gd = gc;
      c = b - invphi * (b - a), gc = g(c);
    } else {
      a = c, c = d, gc = gd;
      d = a + invphi * (b - a), gd = g(d);
    }
  }
  double theta = best * step;
  const double tm = 0.5 * (a + b), gm = g(tm);
  if (gm > best_val) best_val = gm, theta = tm;
  theta = std::remainder(theta, 2.0 * std::numbers::pi);
  return {best_val, std::exp(best_val), theta, step};
}

/// Winding number of g around 0 along |z| = r by phase unwrapping with
/// adaptive refinement until every step turns by less than pi/4.
inline int winding_number(const EntireEvaluator& g, double r) {
  for (int n = 1024; n <= (1 << 22); n *= 2) {
    double total = 0.0;
    bool fine = true;
    Complex prev = g(Complex(r, 0.0));
    for (int k = 1; k <= n && fine; ++k) {
      const Complex cur = g(std::polar(r, 2.0 * std::numbers::pi * k / n));
      if (cur == Complex{} || prev == Complex{}) throw DomainError("zero on contour");
      const double d = std::arg(cur / prev);
      if (std::abs(d) > std::numbers::pi / 4) fine = false;
      total += d;
      prev = cur;
    }
    if (fine) return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
  }
  throw NonIntegerResidue("phase unwrapping did not resolve the winding number");
}

/// (#zeros - #poles) in |z| < r by the contour integral of f'/f (closed
/// forms) or the winding numbers of both entire parts (black boxes).
inline int count_by_argument_principle(const MeromorphicFn& f, double r) {
  if (!(r > 0.0)) throw InvalidArgument("radius must be positive");
  if (f.is_zero()) throw DomainError("argument principle undefined for the zero function");
  const double guard = f.pole_guard(Complex(r, 0.0));
  const double reach = std::min(f.working_radius(), r + 2 * guard);
  if (singular_point_on_circle(f.poles_within(reach), r, guard))
    throw PoleOnCircle("declared pole on |z| = " + std::to_string(r));
  if (f.zeros_known() && singular_point_on_circle(f.zeros_within(reach), r, guard))
    throw DomainError("declared zero on |z| = " + std::to_string(r));

  double value = 0.0;
  if (f.is_closed_form()) {
    // (1/2 pi i) \oint f'/f dz = mean over theta of z f'(z)/f(z)
    auto trapezoid = [&](int n) {
      Complex acc = 0.0;
      for (int k = 0; k < n; ++k) {
        const Complex z = std::polar(r, 2.0 * std::numbers::pi * k / n);
        acc += z * f.log_derivative(z);
      }
      return acc / static_cast<double>(n);
    };
    Complex prev = trapezoid(128);
    bool converged = false;
    for (int n = 256; n <= (1 << 20); n *= 2) {
      const Complex cur = trapezoid(n);
      const bool close = std::abs(cur - prev) <= 1e-9 * std::max(1.0, std::abs(cur));
      prev = cur;
      if (close) {
        converged = true;
        break;
      }
    }
    if (!converged) throw NonIntegerResidue("argument-principle quadrature did not converge");
    value = prev.real();
    if (std::abs(prev.imag()) > 1e-6) throw NonIntegerResidue("contour integral has an imaginary part");
  } else {
    auto parts = f.entire_parts();
    return winding_number(parts->first, r) - winding_number(parts->second, r);
  }
  const double nearest = std::round(value);
  if (std::abs(value - nearest) > 1e-6)
    throw NonIntegerResidue("contour integral " + std::to_string(value) + " is not an integer");
  return static_cast<int>(nearest);
}

struct ArgumentPrincipleCheck {
  int counted = 0;
  int declared = 0;
  bool ok() const { return counted == declared; }
};

/// Compares the contour count on |z| = r with the declared zero/pole lists.
inline ArgumentPrincipleCheck validate_declared_lists(const MeromorphicFn& f, double r) {
  ArgumentPrincipleCheck out;
  for (const RootMult& z : f.zeros_within(r)) out.declared += z.mult;
  for (const RootMult& p : f.poles_within(r)) out.declared -= p.mult;
  out.counted = count_by_argument_principle(f, r);
  return out;
}

}  // namespace nevgrowth
