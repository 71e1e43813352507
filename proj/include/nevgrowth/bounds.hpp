#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nevgrowth/constants.hpp"
#include "nevgrowth/exceptional.hpp"
#include "nevgrowth/nevanlinna.hpp"
#include "nevgrowth/path.hpp"

namespace nevgrowth {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == -kInf) return -kInf;
  return a + std::log1p(std::exp(b - a));
}

/// T(r, f) with r nudged outward when a declared pole sits on the circle.
inline double characteristic_safe(const MeromorphicFn& f, double r) {
  double rr = r;
  for (int k = 0; k < 8; ++k) {
    try {
      return characteristic_at(f, rr);
    } catch (const PoleOnCircle&) {
      rr *= 1.0 + 1e-6;
    }
  }
  return characteristic_at(f, rr);
}

/// Every constant of the growth theorem for one (equation, r) point.
struct BoundContext {
  int n = 1;
  std::vector<int> q_nu;
  double eta = 0.1;
  double B = 1.0;
  double C = kE;
  double R = kInf;  ///< +inf selects the plane case
  double R_cap = kInf;  ///< stands in for R inside D when R = +inf
  double r = 1.0;
  double rho = 1.0;
  double K1 = 0.0;
  std::function<double(double)> T_of;  ///< coefficient envelope max_nu T(., f_nu)

  int q() const { return q_nu.empty() ? 0 : *std::max_element(q_nu.begin(), q_nu.end()); }
  double H() const { return nevgrowth::H(eta); }
  bool plane() const { return std::isinf(R); }
  /// R as it enters D and T(CR).
  double R_eff() const {
    if (!plane()) return R;
    if (!std::isfinite(R_cap) || !(R_cap > 0.0)) throw DomainError("R = inf needs a finite positive R_cap");
    return R_cap;
  }
  /// (R + 2er)/(R - 2er); 1 in the plane case.
  double growth_factor() const {
    if (plane()) return 1.0;
    const double t = 2.0 * kE * r;
    if (!(R > t)) throw DomainError("R must exceed 2er (R = " + std::to_string(R) + ", 2er = " + std::to_string(t) + ")");
    return (R + t) / (R - t);
  }
  double T_CR() const {
    if (!T_of) throw InvalidArgument("BoundContext has no coefficient envelope");
    return T_of(C * R_eff());
  }
  void validate() const {
    if (n < 1) throw InvalidArgument("order must be positive");
    if (!q_nu.empty() && static_cast<int>(q_nu.size()) != n) throw InvalidArgument("q_nu needs one entry per coefficient");
    for (int q : q_nu)
      if (q < 0) throw InvalidArgument("q_nu must be nonnegative");
    (void)H();
    if (!(B >= 1.0)) throw DomainError("B must be at least 1");
    if (!(C > 1.0)) throw DomainError("C must exceed 1");
    if (!(rho > 0.0) || !(r >= rho)) throw DomainError("need 0 < rho <= r");
    if (!plane() && !(r < R)) throw DomainError("need r < R");
    if (!(K1 >= 0.0)) throw DomainError("K1 must be nonnegative");
  }
};

/// f = f1 / f2 with entire parts, and the measured B with T(r, f_j) <= B T(Cr, f).
struct MilesDecomposition {
  MeromorphicFn f1 = MeromorphicFn::constant(1.0);
  MeromorphicFn f2 = MeromorphicFn::constant(1.0);
  double measured_B = 1.0;
  double max_ratio = 0.0;  ///< before the 1.1 safety factor
  double C = kE;
  int q_nu = 0;
  std::size_t points = 0;
};

inline constexpr double kMilesSafety = 1.1;

inline MilesDecomposition miles_decompose(const MeromorphicFn& f, double C, const RadiusGrid& grid) {
  if (!(C > 1.0)) throw DomainError("C must exceed 1");
  MilesDecomposition out;
  out.C = C;
  out.q_nu = f.origin_pole_order();
  if (const ExpPoly* num = f.numerator()) {
    const FactoredPoly& den = *f.denominator();
    const Complex q0 = den(0.0);
    const Complex norm = out.q_nu == 0 ? q0 : Complex(1.0);
    std::optional<ZeroSource> zeros;
    if (f.zeros_known()) zeros = [f](double radius) { return f.zeros_within(radius); };
    out.f1 = MeromorphicFn::closed_form((1.0 / norm) * *num, FactoredPoly{1.0, {}}, zeros, f.name() + ".f1");
    out.f2 = MeromorphicFn::from_factors(den.scale / norm, den.roots, {}, f.name() + ".f2");
  } else if (auto parts = f.entire_parts()) {
    const double wr = f.working_radius();
    if (C * grid.back() > wr) throw DomainError("C times the grid maximum exceeds the working radius");
    const Complex q0 = parts->second(0.0);
    const Complex norm = out.q_nu == 0 ? q0 : Complex(1.0);
    auto e1 = parts->first, e2 = parts->second;
    auto one = [](Complex) { return Complex(1.0); };
    out.f1 = MeromorphicFn::quotient([e1, norm](Complex z) { return e1(z) / norm; }, one, f.zeros_within(wr), {}, wr,
                                     f.name() + ".f1");
    out.f2 = MeromorphicFn::quotient([e2, norm](Complex z) { return e2(z) / norm; }, one, f.poles_within(wr), {}, wr,
                                     f.name() + ".f2");
  } else {
    throw NotDecomposable("no quotient representation for " + f.name());
  }

  if (f.is_entire()) {
    out.measured_B = 1.0;
    return out;
  }
  for (double r : grid.radii()) {
    const double TC = characteristic_safe(f, C * r);
    if (!(TC > 0.0)) continue;
    const double ratio = std::max(characteristic_safe(out.f1, r), characteristic_safe(out.f2, r)) / TC;
    out.max_ratio = std::max(out.max_ratio, ratio);
    ++out.points;
  }
  if (out.points == 0) throw DegenerateT("T(Cr, f) vanishes on the whole grid");
  out.measured_B = std::max(1.0, kMilesSafety * out.max_ratio);
  return out;
}

/// B (1 + H) k T(CR): bound on log|f_nu| off the exclusion disks when f_{nu,2}(0) != 0.
inline double coeff_log_bound_regular(const BoundContext& ctx) {
  return ctx.B * (1.0 + ctx.H()) * ctx.growth_factor() * ctx.T_CR();
}

inline double coeff_log_bound_regular(const BoundContext& ctx, const MilesDecomposition& dec) {
  if (dec.q_nu > 0) throw DomainError("coefficient has a pole at the origin; use the origin-pole bound");
  return coeff_log_bound_regular(ctx);
}

/// Regular bound plus q_nu log[R^{H k} / r].
inline double coeff_log_bound_origin_pole(const BoundContext& ctx, int q_nu) {
  if (q_nu < 0) throw InvalidArgument("q_nu must be nonnegative");
  const double k = ctx.growth_factor();
  return coeff_log_bound_regular(ctx) + q_nu * (ctx.H() * k * std::log(ctx.R_eff()) - std::log(ctx.r));
}

inline double coeff_log_bound_origin_pole(const BoundContext& ctx, const MilesDecomposition& dec, int q_nu) {
  (void)dec;
  return coeff_log_bound_origin_pole(ctx, q_nu);
}

struct DValue {
  double log = 0.0;
  double linear = 0.0;  ///< +inf on overflow
};

/// D = n {1 + (R^{H k} / r)^q exp[B (1 + H) k T(CR)]}, in log space.
inline DValue D_constant(const BoundContext& ctx) {
  const double k = ctx.growth_factor();
  const double a = ctx.q() * (ctx.H() * k * std::log(ctx.R_eff()) - std::log(ctx.r));
  const double b = ctx.B * (1.0 + ctx.H()) * k * ctx.T_CR();
  const double log_d = std::log(static_cast<double>(ctx.n)) + log_add(0.0, a + b);
  return {log_d, std::exp(log_d)};
}

/// Direct evaluation of D, for cross-checking the log-space route.
inline double D_constant_linear(const BoundContext& ctx) {
  const double k = ctx.growth_factor();
  const double base = std::pow(ctx.R_eff(), ctx.H() * k) / ctx.r;
  return ctx.n * (1.0 + std::pow(base, ctx.q()) * std::exp(ctx.B * (1.0 + ctx.H()) * k * ctx.T_CR()));
}

enum class Status { pass, fail, inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    case Status::inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

struct TheoremCertificate {
  std::string equation;
  double r_requested = 0.0;
  double r = 0.0;
  double rho = 0.0;
  double theta0 = 0.0;
  double eta = 0.0;
  double H = 0.0;
  double B = 0.0;
  double C = 0.0;
  double R = 0.0;
  double growth_factor = 0.0;
  double T_CR = 0.0;
  int n = 0;
  int q = 0;
  double K1 = 0.0;
  DValue D;
  double log_exponent = 0.0;  ///< log((2 pi + 1) r D)
  double log_bound = 0.0;     ///< log K1 + (2 pi + 1) r D
  double log_measured = 0.0;  ///< log max_s ||F(z(s))||
  double log_gronwall = 0.0;
  double log_coarse = 0.0;
  double log_tightness = 0.0;  ///< log_measured - log_bound
  double tol = 0.0;
  bool origin_pole_branch = false;
  bool disks_honored = true;
  int steps = 0;
  Status status = Status::inconclusive;
  std::string note;
  Trajectory trajectory;  ///< not serialized
};

inline double tightness(const TheoremCertificate& c) { return std::exp(c.log_tightness); }

/// Integrate along Ω and compare max ||F|| with K1 exp((2 pi + 1) D r).
inline TheoremCertificate certify_theorem_main(const CompanionSystem& sys, const PathOmega& path, const StateVector& F0,
                                               BoundContext ctx, double tol) {
  if (std::abs(ctx.r - path.r()) > 1e-12 * path.r() || std::abs(ctx.rho - path.rho()) > 1e-12 * path.rho())
    throw InvalidArgument("context radii disagree with the path");
  if (ctx.n != sys.order()) throw InvalidArgument("context order disagrees with the system");
  ctx.K1 = norm1(F0);
  ctx.validate();

  TheoremCertificate c;
  c.equation = sys.name();
  c.r_requested = c.r = path.r();
  c.rho = path.rho();
  c.theta0 = path.theta0();
  c.eta = ctx.eta;
  c.H = ctx.H();
  c.B = ctx.B;
  c.C = ctx.C;
  c.R = ctx.R;
  c.growth_factor = ctx.growth_factor();
  c.T_CR = ctx.T_CR();
  c.n = ctx.n;
  c.q = ctx.q();
  c.K1 = ctx.K1;
  c.tol = tol;
  c.origin_pole_branch = c.q > 0;
  c.D = D_constant(ctx);
  c.log_exponent = std::log(kPathFactor * path.r()) + c.D.log;
  c.log_bound = std::log(ctx.K1) + std::exp(c.log_exponent);

  try {
    c.trajectory = integrate_along(sys, path, F0, tol);
    c.steps = c.trajectory.accepted;
    double best = 0.0;
    for (const auto& p : c.trajectory.points) best = std::max(best, norm1(p.F));
    c.log_measured = std::log(best);
  } catch (const StepCollapse& e) {
    c.status = Status::inconclusive;
    c.note = e.what();
    return c;
  }
  c.log_gronwall = gronwall_envelope(sys, path, F0).log;
  c.log_coarse = coarse_envelope(sys, path, F0).bound.log;
  c.log_tightness = c.log_measured - c.log_bound;
  c.status = c.log_measured <= c.log_bound + std::log1p(10.0 * tol) ? Status::pass : Status::fail;
  return c;
}

inline nlohmann::ordered_json to_json(const TheoremCertificate& c) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
  nlohmann::ordered_json j;
  j["equation"] = c.equation;
  j["status"] = to_string(c.status);
  j["inputs"] = {{"r_requested", c.r_requested}, {"r", c.r},        {"rho", c.rho}, {"theta0", c.theta0},
                 {"eta", c.eta},                 {"C", c.C},        {"R", num(c.R)}, {"tol", c.tol},
                 {"n", c.n},                     {"q", c.q}};
  j["constants"] = {{"H", c.H},           {"B", c.B},         {"growth_factor", c.growth_factor},
                    {"T_CR", c.T_CR},     {"K1", c.K1},       {"log_D", c.D.log},
                    {"D", num(c.D.linear)}, {"log_exponent", c.log_exponent}};
  j["measured"] = {{"log_max_norm", c.log_measured}, {"log_gronwall", c.log_gronwall}, {"log_coarse", c.log_coarse},
                   {"steps", c.steps}};
  j["bound"] = {{"log_bound", num(c.log_bound)}, {"log_tightness", num(c.log_tightness)},
                {"tightness", num(tightness(c))}};
  j["flags"] = {{"origin_pole_branch", c.origin_pole_branch}, {"disks_honored", c.disks_honored}};
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

struct CertifyRequest {
  double rho = 0.1;
  double r = 1.0;
  double eta = 0.1;
  double tol = 1e-8;
  double theta_pref = 0.0;
  double C = kE;
  int decomposition_points = 16;
};

/// Initial state at path.start() for the chosen path.
using InitialState = std::function<StateVector(const PathOmega&)>;

/// max_nu T(t, f_nu) over the coefficients.
inline std::function<double(double)> coefficient_T(const CompanionSystem& sys) {
  return [coeffs = sys.coefficients()](double t) {
    double best = 0.0;
    for (const MeromorphicFn& f : coeffs) best = std::max(best, characteristic_safe(f, t));
    return best;
  };
}

/// Context with R = 3er, measured B over the coefficients and q_nu from
/// their origin poles.
inline BoundContext make_context(const CompanionSystem& sys, double rho, double r, double eta, double C,
                                 int decomposition_points = 16) {
  BoundContext ctx;
  ctx.n = sys.order();
  ctx.eta = eta;
  ctx.C = C;
  ctx.r = r;
  ctx.rho = rho;
  ctx.R = 3.0 * kE * r;
  ctx.T_of = coefficient_T(sys);
  const RadiusGrid grid = RadiusGrid::log(std::min(rho, ctx.R), ctx.R, decomposition_points);
  for (const MeromorphicFn& f : sys.coefficients()) {
    double b = 1.0;
    try {
      b = miles_decompose(f, C, grid).measured_B;
    } catch (const DegenerateT&) {
      b = 1.0;
    }
    ctx.B = std::max(ctx.B, b);
    ctx.q_nu.push_back(f.origin_pole_order());
  }
  return ctx;
}

/// Full pipeline at one radius: perturb r until a path exists, prefer one that
/// misses the exclusion disks of the coefficient poles, then certify.
inline TheoremCertificate certify_at(const CompanionSystem& sys, std::span<const RootMult> y_poles,
                                     const InitialState& initial, const CertifyRequest& req) {
  std::string last_error = "no radius tried";
  for (double r : perturbed_radii(req.r)) {
    if (!(r > req.rho)) continue;
    const double R = 3.0 * kE * r;
    const auto poles = sys.poles_within(2.0 * kE * R);
    const DiskUnion disks = build_exclusion_disks(poles, R, req.eta);
    std::optional<PathOmega> path;
    bool honored = true;
    try {
      path = select_admissible_path(sys, req.rho, r, y_poles, &disks, req.theta_pref);
    } catch (const NoAdmissiblePath&) {
      honored = false;
      try {
        path = select_admissible_path(sys, req.rho, r, y_poles, nullptr, req.theta_pref);
      } catch (const NoAdmissiblePath& e) {
        last_error = e.what();
        continue;
      }
    }
    BoundContext ctx = make_context(sys, req.rho, r, req.eta, req.C, req.decomposition_points);
    TheoremCertificate c = certify_theorem_main(sys, *path, initial(*path), std::move(ctx), req.tol);
    c.r_requested = req.r;
    c.disks_honored = honored;
    return c;
  }
  throw NoAdmissiblePath("no admissible path near r = " + std::to_string(req.r) + ": " + last_error);
}

/// Right side of the density theorem with C = e and R = 3er:
/// 5B(1+H) T(3e^2 r) + [(5H - 1) q + 1 + eps] log r.
inline double density_bound_rhs(const BoundContext& ctx, double r, double eps) {
  const double thr = density_eta_threshold();
  if (!(ctx.eta < thr))
    throw EtaTooLarge("eta = " + std::to_string(ctx.eta) + " must be below (1+log 2)/(16 e^{5/2}) = " +
                      std::to_string(thr));
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  if (!(r > 0.0)) throw DomainError("r must be positive");
  if (!ctx.T_of) throw InvalidArgument("BoundContext has no coefficient envelope");
  const double h = ctx.H();
  return 5.0 * ctx.B * (1.0 + h) * ctx.T_of(3.0 * kE * kE * r) + ((5.0 * h - 1.0) * ctx.q() + 1.0 + eps) * std::log(r);
}

struct DensityCheckRow {
  double r = 0.0;
  int j = 0;
  double log_m = 0.0;  ///< -inf when m(r, y^(j)) = 0
  double rhs = 0.0;
  bool exceptional = false;
  bool pass = false;
};

struct DensityCertificate {
  std::vector<DensityCheckRow> rows;
  double r_eps = 0.0;  ///< smallest grid radius beyond which no violation occurs
  int violations = 0;  ///< outside the exceptional set
  Status status = Status::pass;
};

/// Per radius and derivative: log m(r, y^(j)) <= RHS, skipping radii in the
/// radial exceptional set.
inline DensityCertificate certify_density(std::span<const MeromorphicFn> derivatives, const RadiusGrid& grid,
                                          const BoundContext& ctx, double eps, const RadialExceptionalSet& eset) {
  DensityCertificate out;
  double last_bad = -kInf;
  for (double r : grid.radii()) {
    const double rhs = density_bound_rhs(ctx, r, eps);
    const bool exc = eset.contains(r);
    for (std::size_t j = 0; j < derivatives.size(); ++j) {
      DensityCheckRow row{r, static_cast<int>(j), 0.0, rhs, exc, false};
      double m = 0.0;
      double rr = r;
      for (int k = 0;; ++k) {
        try {
          m = proximity(derivatives[j], rr);
          break;
        } catch (const PoleOnCircle&) {
          if (k >= 8) throw;
          rr *= 1.0 + 1e-6;
        }
      }
      row.log_m = m > 0.0 ? std::log(m) : -kInf;
      row.pass = row.log_m <= rhs;
      if (!row.pass && !exc) {
        ++out.violations;
        last_bad = r;
      }
      out.rows.push_back(row);
    }
  }
  out.r_eps = grid.front();
  if (last_bad > -kInf) {
    auto it = std::upper_bound(grid.radii().begin(), grid.radii().end(), last_bad);
    out.r_eps = it == grid.radii().end() ? kInf : *it;
  }
  out.status = out.violations == 0 ? Status::pass : Status::fail;
  return out;
}

/// Phi(r) = max_i max(log r, T(r, f_i)).
inline double bank_laine_phi(std::span<const MeromorphicFn> coeffs, double r) {
  double phi = std::log(r);
  for (const MeromorphicFn& f : coeffs) phi = std::max(phi, characteristic_safe(f, r));
  return phi;
}

/// log of c {r N(sigma r, y) + r^2 exp(c1 J(sigma r) log(r J(sigma r)))},
/// J = Nbar(r, 1/y) + Phi(r). Comparison only: c and c1 are not certified.
inline double bank_laine_log_rhs(const MeromorphicFn& y, std::span<const MeromorphicFn> coeffs, double sigma, double c,
                                 double c1, double r) {
  if (!(sigma > 1.0)) throw DomainError("sigma must exceed 1");
  if (!(c > 0.0) || !(c1 > 0.0)) throw DomainError("c and c1 must be positive");
  if (!(r > 0.0)) throw DomainError("r must be positive");
  const double sr = sigma * r;
  const double J = counting_zeros(y, sr, true) + bank_laine_phi(coeffs, sr);
  const double N = counting(y, sr);
  const double first = N > 0.0 ? std::log(r * N) : -kInf;
  const double second = 2.0 * std::log(r) + c1 * J * std::log(r * J);
  return std::log(c) + log_add(first, second);
}

/// Same formula from precomputed N(sigma r, y) and J(sigma r).
inline double bank_laine_log_rhs_from(double N_sr, double J_sr, double c, double c1, double r) {
  const double first = N_sr > 0.0 ? std::log(r * N_sr) : -kInf;
  return std::log(c) + log_add(first, 2.0 * std::log(r) + c1 * J_sr * std::log(r * J_sr));
}

/// log of (sum T) [(log r) log(sum T)]^sigma.
inline double sum_T_log_rhs_from(double sum_T, double sigma, double r) {
  if (!(sigma > 1.0)) throw DomainError("sigma must exceed 1");
  const double inner = std::log(r) * std::log(sum_T);
  if (!(sum_T > 0.0) || !(inner > 0.0))
    throw DomainError("(log r) log(sum T) must be positive (r = " + std::to_string(r) + ")");
  return std::log(sum_T) + sigma * std::log(inner);
}

inline double sum_T_log_rhs(std::span<const MeromorphicFn> coeffs, double sigma, double r) {
  if (std::all_of(coeffs.begin(), coeffs.end(), [](const MeromorphicFn& f) { return f.is_constant(); }))
    throw DegenerateCoefficients("all coefficients are constant");
  double sum = 0.0;
  for (const MeromorphicFn& f : coeffs) sum += characteristic_safe(f, r);
  return sum_T_log_rhs_from(sum, sigma, r);
}

/// log of (2 pi + 1) R D / (delta - eps).
inline double deficiency_T_log_bound(const BoundContext& ctx, double delta, double eps) {
  if (!(eps > 0.0) || !(delta <= 1.0) || !(eps < delta)) throw DomainError("need 0 < eps < delta <= 1");
  return std::log(kPathFactor) + std::log(ctx.R_eff()) + D_constant(ctx).log - std::log(delta - eps);
}

}  // namespace nevgrowth
