#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nevgrowth/constants.hpp"
#include "nevgrowth/csv.hpp"
#include "nevgrowth/exceptional.hpp"
#include "nevgrowth/meromorphic.hpp"

namespace nevgrowth {

/// Radial segment from rho e^{i theta0} to r e^{i theta0}, then the full
/// circle |z| = r counterclockwise from theta0, parametrized by arc length.
class PathOmega {
public:
  PathOmega(double theta0, double rho, double r) : theta0_(theta0), rho_(rho), r_(r) {
    if (!(rho > 0.0) || !(r >= rho) || !std::isfinite(r))
      throw InvalidArgument("path needs 0 < rho <= r < inf");
    if (!std::isfinite(theta0)) throw InvalidArgument("theta0 must be finite");
  }

  double theta0() const { return theta0_; }
  double rho() const { return rho_; }
  double r() const { return r_; }
  double segment_length() const { return r_ - rho_; }
  double length() const { return segment_length() + 2.0 * kPi * r_; }
  Complex start() const { return std::polar(rho_, theta0_); }

  Complex z(double s) const {
    const double l1 = segment_length();
    if (s <= l1) return std::polar(rho_ + s, theta0_);
    return std::polar(r_, theta0_ + (s - l1) / r_);
  }
  /// Unit tangent; on the kink s = segment_length() the segment side is used.
  Complex dz_ds(double s) const {
    const double l1 = segment_length();
    if (s <= l1) return std::polar(1.0, theta0_);
    return Complex(0.0, 1.0) * std::polar(1.0, theta0_ + (s - l1) / r_);
  }

  /// Distance from p to the path.
  double distance(Complex p) const {
    const Complex u = std::polar(1.0, theta0_);
    const double t = std::clamp((p * std::conj(u)).real(), rho_, r_);
    return std::min(std::abs(p - t * u), std::abs(std::abs(p) - r_));
  }

  /// `intervals + 1` equispaced arc-length marks from 0 to length().
  std::vector<double> marks(int intervals = 256) const {
    std::vector<double> out(static_cast<std::size_t>(intervals) + 1);
    for (int k = 0; k <= intervals; ++k) out[static_cast<std::size_t>(k)] = length() * k / intervals;
    out.back() = length();
    return out;
  }

private:
  double theta0_, rho_, r_;
};

/// y^(n) + f_{n-1} y^(n-1) + ... + f_0 y = 0 as F' = A F.
class CompanionSystem {
public:
  explicit CompanionSystem(std::vector<MeromorphicFn> coeffs, std::string name = {})
      : coeffs_(std::move(coeffs)), name_(std::move(name)) {
    if (coeffs_.empty()) throw InvalidArgument("companion system needs order >= 1");
  }
  int order() const { return static_cast<int>(coeffs_.size()); }
  const std::vector<MeromorphicFn>& coefficients() const { return coeffs_; }
  const MeromorphicFn& coefficient(int nu) const { return coeffs_.at(static_cast<std::size_t>(nu)); }
  const std::string& name() const { return name_; }

  std::vector<RootMult> poles_within(double radius) const {
    std::vector<RootMult> out;
    for (const MeromorphicFn& f : coeffs_) {
      const auto p = f.poles_within(std::min(radius, f.working_radius()));
      out = detail::merge_roots(std::move(out), p, true);
    }
    return out;
  }

  /// F' = A(z) F evaluated without forming A.
  void apply(Complex z, std::span<const Complex> F, std::span<Complex> out) const {
    const int n = order();
    for (int i = 0; i + 1 < n; ++i) out[static_cast<std::size_t>(i)] = F[static_cast<std::size_t>(i) + 1];
    Complex last = 0.0;
    for (int nu = 0; nu < n; ++nu) last -= coeffs_[static_cast<std::size_t>(nu)](z) * F[static_cast<std::size_t>(nu)];
    out[static_cast<std::size_t>(n) - 1] = last;
  }

  /// ||A(z)|| = sum |a_ij| = (n - 1) + sum_nu |f_nu(z)|.
  double matrix_norm(Complex z) const {
    double acc = order() - 1;
    for (const MeromorphicFn& f : coeffs_) acc += std::abs(f(z));
    return acc;
  }

  /// sum_nu (|f_nu(z)| + 1), the integrand of the coarse envelope.
  double coarse_integrand(Complex z) const {
    double acc = order();
    for (const MeromorphicFn& f : coeffs_) acc += std::abs(f(z));
    return acc;
  }

private:
  std::vector<MeromorphicFn> coeffs_;
  std::string name_;
};

using StateVector = std::vector<Complex>;

inline double norm1(std::span<const Complex> v) {
  double s = 0.0;
  for (Complex c : v) s += std::abs(c);
  return s;
}

using Matrix = std::vector<std::vector<Complex>>;

inline Matrix companion_matrix(const CompanionSystem& sys, Complex z) {
  const auto n = static_cast<std::size_t>(sys.order());
  Matrix a(n, std::vector<Complex>(n, 0.0));
  for (std::size_t i = 0; i + 1 < n; ++i) a[i][i + 1] = 1.0;
  for (std::size_t nu = 0; nu < n; ++nu) a[n - 1][nu] = -sys.coefficient(static_cast<int>(nu))(z);
  return a;
}

inline double matrix_norm(const Matrix& a) {
  double s = 0.0;
  for (const auto& row : a)
    for (Complex c : row) s += std::abs(c);
  return s;
}

/// Throws PoleProximity if any coefficient pole lies within `clearance` of Ω.
inline void check_path_clearance(const CompanionSystem& sys, const PathOmega& path, double clearance) {
  for (const RootMult& p : sys.poles_within(path.r() + clearance + 1.0)) {
    if (path.distance(p.at) <= clearance)
      throw PoleProximity("coefficient pole at (" + std::to_string(p.at.real()) + ", " + std::to_string(p.at.imag()) +
                          ") within " + std::to_string(clearance) + " of the path");
  }
}

inline double default_guard(const CompanionSystem& sys, const PathOmega& path) {
  double g = 0.0;
  for (const MeromorphicFn& f : sys.coefficients()) g = std::max(g, f.pole_guard(Complex(path.r(), 0.0)));
  return g;
}

struct TrajectoryPoint {
  double s = 0.0;
  Complex z;
  StateVector F;
  double local_error = 0.0;  ///< ||y5 - y4||_1 of the step that ended here
  bool mark = false;         ///< one of the forced equispaced marks
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  int accepted = 0;
  int rejected = 0;
  double tol = 0.0;

  const TrajectoryPoint& back() const { return points.back(); }
  std::vector<const TrajectoryPoint*> marks() const {
    std::vector<const TrajectoryPoint*> out;
    for (const auto& p : points)
      if (p.mark) out.push_back(&p);
    return out;
  }
};

struct IntegratorOptions {
  int mark_intervals = 256;
  int max_steps = 2'000'000;
  /// local error target as a fraction of the requested tolerance
  double local_fraction = 0.05;
  double collapse_ratio = 1e-14;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DP45 {
  static constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static constexpr double a[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static constexpr std::array<double, 7> b5{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
  static constexpr std::array<double, 7> b4{5179.0 / 57600, 0.0,          7571.0 / 16695, 393.0 / 640,
                                            -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
};

/// Adaptive DP45 with PI control for dy/ds = rhs(s, y) on [s0, s1].
/// `emit(s, y, err)` receives each accepted step; `h` carries over between calls.
template <class Rhs, class Emit>
void dp45_interval(const Rhs& rhs, double s0, double s1, StateVector& y, double tol, double& h, double min_h,
                   int& accepted, int& rejected, int max_steps, const Emit& emit) {
  const std::size_t n = y.size();
  std::array<StateVector, 7> k;
  for (auto& v : k) v.assign(n, 0.0);
  StateVector tmp(n), y5(n);
  double s = s0;
  double err_prev = 1.0;
  rhs(s, y, k[0]);
  while (s < s1) {
    const bool last = s + h >= s1 * (1.0 - 1e-15) - 1e-300;
    const double step = last ? s1 - s : h;
    for (int st = 1; st < 7; ++st) {
      for (std::size_t i = 0; i < n; ++i) {
        Complex acc = y[i];
        for (int j = 0; j < st; ++j) acc += step * DP45::a[st][j] * k[static_cast<std::size_t>(j)][i];
        tmp[i] = acc;
      }
      rhs(s + DP45::c[static_cast<std::size_t>(st)] * step, tmp, k[static_cast<std::size_t>(st)]);
    }
    // stage 6 evaluates at the 5th-order solution (FSAL)
    y5 = tmp;
    double err_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex e = 0.0;
      for (std::size_t j = 0; j < 7; ++j) e += (DP45::b5[j] - DP45::b4[j]) * k[j][i];
      err_abs += std::abs(step * e);
    }
    const double scale = tol * std::max({norm1(y), norm1(y5), 1e-300});
    const double err = err_abs / scale;
    if (err <= 1.0) {
      s = last ? s1 : s + step;
      y = y5;
      k[0] = k[6];
      ++accepted;
      emit(s, y, err_abs);
      // PI controller
      const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      err_prev = std::max(err, 1e-4);
      if (!last) h = step * std::clamp(fac, 0.2, 5.0);
    } else {
      ++rejected;
      h = step * std::clamp(0.9 * std::pow(err, -1.0 / 5.0), 0.1, 0.9);
    }
    if (h < min_h) throw StepCollapse("step size underflow at s = " + std::to_string(s));
    if (accepted + rejected > max_steps) throw ToleranceUnmet("step budget exhausted at s = " + std::to_string(s));
  }
}

}  // namespace detail

/// Integrate F' = A F along Ω from F0 at rho e^{i theta0}. Samples every
/// accepted step plus forced marks at 256 equispaced arc lengths; the last
/// point closes the circle.
inline Trajectory integrate_along(const CompanionSystem& sys, const PathOmega& path, const StateVector& F0, double tol,
                                  const IntegratorOptions& opt = {}) {
  if (static_cast<int>(F0.size()) != sys.order()) throw InvalidArgument("initial state size must equal the order");
  for (Complex c : F0)
    if (!is_finite(c)) throw InvalidArgument("initial state is not finite");
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  check_path_clearance(sys, path, default_guard(sys, path));

  const double L = path.length(), l1 = path.segment_length();
  std::vector<double> breaks = path.marks(opt.mark_intervals);
  const std::size_t n_marks = breaks.size();
  if (l1 > 0.0 && l1 < L) breaks.push_back(l1);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const std::vector<double> mark_list = path.marks(opt.mark_intervals);

  Trajectory out;
  out.tol = tol;
  out.points.push_back({0.0, path.start(), F0, 0.0, true});
  StateVector y = F0;
  double h = std::min(L / opt.mark_intervals, 0.05 * path.r());
  const double local_tol = tol * opt.local_fraction;
  std::size_t next_mark = 1;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double s0 = breaks[b], s1 = breaks[b + 1];
    // direction is constant on a segment sub-interval; on the circle it rotates with s
    auto rhs = [&](double s, const StateVector& F, StateVector& dF) {
      const double sm = std::clamp(s, s0, s1);
      const bool on_segment = s1 <= l1;
      const Complex z = on_segment ? std::polar(path.rho() + sm, path.theta0()) : path.z(std::max(sm, std::nextafter(l1, L)));
      const Complex dz = on_segment ? std::polar(1.0, path.theta0()) : path.dz_ds(std::max(sm, std::nextafter(l1, L)));
      sys.apply(z, F, dF);
      for (Complex& c : dF) c *= dz;
    };
    auto emit = [&](double s, const StateVector& F, double err) {
      const bool is_mark = next_mark < n_marks && s == s1 && s1 == mark_list[next_mark];
      if (is_mark) ++next_mark;
      out.points.push_back({s, path.z(s), F, err, is_mark});
    };
    detail::dp45_interval(rhs, s0, s1, y, local_tol, h, opt.collapse_ratio * L, out.accepted, out.rejected,
                          opt.max_steps, emit);
  }
  out.points.back().z = path.z(L);
  return out;
}

/// Straight-line integration from z_a to z_b (used for local checks).
inline StateVector integrate_segment(const CompanionSystem& sys, Complex z_a, Complex z_b, const StateVector& F_a,
                                     double tol) {
  const double len = std::abs(z_b - z_a);
  if (len == 0.0) return F_a;
  const Complex u = (z_b - z_a) / len;
  auto rhs = [&](double s, const StateVector& F, StateVector& dF) {
    sys.apply(z_a + s * u, F, dF);
    for (Complex& c : dF) c *= u;
  };
  StateVector y = F_a;
  double h = len / 16;
  int acc = 0, rej = 0;
  detail::dp45_interval(rhs, 0.0, len, y, tol, h, 1e-14 * len, acc, rej, 2'000'000,
                        [](double, const StateVector&, double) {});
  return y;
}

/// A value carried in log space with its linear form (+inf on overflow).
struct LogValue {
  double log = -std::numeric_limits<double>::infinity();
  double linear() const { return std::exp(log); }
};

namespace detail {

// Boost's 31-point Gauss-Kronrod rule under bisection: a piece is accepted
// when the rule on it agrees with the sum over its halves. Boost's own error
// estimate has an absolute floor that stalls its adaptive mode on short pieces.
inline double gk_piece(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err);
}

inline double gk_integral(const std::function<double(double)>& f, double a, double b, double whole, int depth) {
  const double m = 0.5 * (a + b);
  const double left = gk_piece(f, a, m), right = gk_piece(f, m, b);
  if (std::abs(left + right - whole) <= 1e-13 * std::abs(left + right) + 1e-300 || depth >= 40) return left + right;
  return gk_integral(f, a, m, left, depth + 1) + gk_integral(f, m, b, right, depth + 1);
}

inline double gk_integral(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return gk_integral(f, a, b, gk_piece(f, a, b), 0);
}

}  // namespace detail

/// integral of ||A(z(s))|| ds from a to b along the path, split at the kink.
inline double norm_integral(const CompanionSystem& sys, const PathOmega& path, double a, double b) {
  const double l1 = path.segment_length();
  auto seg = [&](double s) { return sys.matrix_norm(std::polar(path.rho() + s, path.theta0())); };
  auto circ = [&](double s) { return sys.matrix_norm(std::polar(path.r(), path.theta0() + (s - l1) / path.r())); };
  double acc = 0.0;
  if (a < l1) acc += detail::gk_integral(seg, a, std::min(b, l1));
  if (b > l1) acc += detail::gk_integral(circ, std::max(a, l1), b);
  return acc;
}

/// ||F0|| exp(integral over Ω of ||A|| |dt|), in log space.
inline LogValue gronwall_envelope(const CompanionSystem& sys, const PathOmega& path, const StateVector& F0) {
  check_path_clearance(sys, path, default_guard(sys, path));
  return {std::log(norm1(F0)) + norm_integral(sys, path, 0.0, path.length())};
}

/// log of the envelope truncated at each s in `s_sorted` (nondecreasing).
inline std::vector<double> gronwall_log_cumulative(const CompanionSystem& sys, const PathOmega& path,
                                                   const StateVector& F0, std::span<const double> s_sorted) {
  std::vector<double> out;
  out.reserve(s_sorted.size());
  double acc = std::log(norm1(F0)), prev = 0.0;
  for (double s : s_sorted) {
    acc += norm_integral(sys, path, prev, s);
    prev = s;
    out.push_back(acc);
  }
  return out;
}

struct PathMaximum {
  double value = 0.0;
  double s = 0.0;
};

/// max over Ω of g(z(s)): dense arc-length scan, then golden-section search
/// around the best sample.
template <class G>
PathMaximum path_maximum(const PathOmega& path, const G& g, int samples = 4096) {
  const double L = path.length();
  auto at = [&](double s) { return g(path.z(std::clamp(s, 0.0, L))); };
  PathMaximum best{-std::numeric_limits<double>::infinity(), 0.0};
  const double step = L / samples;
  for (int k = 0; k <= samples; ++k) {
    const double v = at(k * step);
    if (v > best.value) best = {v, k * step};
  }
  const double l1 = path.segment_length();
  if (const double v = at(l1); v > best.value) best = {v, l1};
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::max(0.0, best.s - step), b = std::min(L, best.s + step);
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double gc = at(c), gd = at(d);
  for (int it = 0; it < 80 && b - a > 1e-14 * L; ++it) {
    if (gc > gd) b = d, d = c, gd = gc, c = b - invphi * (b - a), gc = at(c);
    else a = c, c = d, gc = gd, d = a + invphi * (b - a), gd = at(d);
  }
  const double sm = 0.5 * (a + b), vm = at(sm);
  if (vm > best.value) best = {vm, sm};
  return best;
}

struct CoarseEnvelope {
  LogValue bound;
  double max_integrand = 0.0;  ///< max over Ω of sum (|f_nu| + 1)
  double argmax_s = 0.0;
};

/// K1 exp[(max_Ω sum_nu (|f_nu| + 1)) (2 pi + 1) r].
inline CoarseEnvelope coarse_envelope(const CompanionSystem& sys, const PathOmega& path, const StateVector& F0) {
  check_path_clearance(sys, path, default_guard(sys, path));
  const PathMaximum m = path_maximum(path, [&](Complex z) { return sys.coarse_integrand(z); });
  return {{std::log(norm1(F0)) + m.value * kPathFactor * path.r()}, m.value, m.s};
}

inline constexpr int kThetaGrid = 64;
inline constexpr double kPathClearance = 1e-3;

/// First angle theta_pref + 2 pi k / 64 whose Ω keeps 1e-3 r away from
/// coefficient poles and poles of y and misses every exclusion disk.
inline PathOmega select_admissible_path(const CompanionSystem& sys, double rho, double r,
                                        std::span<const RootMult> y_poles, const DiskUnion* disks = nullptr,
                                        double theta_pref = 0.0) {
  const double clear = kPathClearance * r;
  std::vector<Complex> avoid;
  for (const RootMult& p : sys.poles_within(r + clear + 1.0)) avoid.push_back(p.at);
  for (const RootMult& p : y_poles) avoid.push_back(p.at);
  auto blocked = [&](const PathOmega& path) {
    for (Complex p : avoid)
      if (path.distance(p) <= clear) return true;
    if (disks)
      for (const Disk& d : disks->disks)
        if (path.distance(d.center) <= d.radius) return true;
    return false;
  };
  // the circle does not depend on theta0
  const PathOmega probe(theta_pref, r, r);
  if (blocked(probe))
    throw NoAdmissiblePath("circle |z| = " + std::to_string(r) + " meets a pole or exclusion disk; perturb r");
  for (int k = 0; k < kThetaGrid; ++k) {
    const PathOmega path(theta_pref + 2.0 * kPi * k / kThetaGrid, rho, r);
    if (!blocked(path)) return path;
  }
  throw NoAdmissiblePath("no admissible theta0 on the 64-angle grid from " + std::to_string(theta_pref) +
                         " at r = " + std::to_string(r));
}

/// Radii tried when the requested one admits no path: r(1 + 0.02k) for
/// k = 0, 1, -1, 2, -2, ...
inline std::vector<double> perturbed_radii(double r, int attempts = 16) {
  std::vector<double> out{r};
  for (int k = 1; static_cast<int>(out.size()) < attempts; ++k) {
    out.push_back(r * (1.0 + 0.02 * k));
    if (1.0 - 0.02 * k > 0.5) out.push_back(r * (1.0 - 0.02 * k));
  }
  out.resize(static_cast<std::size_t>(attempts));
  return out;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::span<const double> log_envelope) {
  if (traj.points.empty()) return;
  const std::size_t n = traj.points.front().F.size();
  std::vector<std::string> cols{"s", "re_z", "im_z"};
  for (std::size_t j = 0; j < n; ++j) cols.push_back("abs_y" + std::to_string(j));
  cols.insert(cols.end(), {"norm", "log_envelope", "envelope", "mark"});
  os << "# schema=" << kCsvSchemaVersion << '\n';
  for (std::size_t k = 0; k < cols.size(); ++k) os << (k ? "," : "") << cols[k];
  os << '\n';
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    const auto& p = traj.points[i];
    os << format_number(p.s) << ',' << format_number(p.z.real()) << ',' << format_number(p.z.imag());
    for (Complex c : p.F) os << ',' << format_number(std::abs(c));
    const double le = i < log_envelope.size() ? log_envelope[i] : std::numeric_limits<double>::quiet_NaN();
    os << ',' << format_number(norm1(p.F)) << ',' << format_number(le) << ',' << format_number(std::exp(le)) << ','
       << (p.mark ? 1 : 0) << '\n';
  }
}

}  // namespace nevgrowth
