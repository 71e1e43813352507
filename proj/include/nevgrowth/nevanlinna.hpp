#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nevgrowth/csv.hpp"
#include "nevgrowth/meromorphic.hpp"

namespace nevgrowth {

struct QuadratureOptions {
  double rel_tol = 1e-6;
  double abs_floor = 1e-12;
  int min_samples = 512;
  int max_samples = 1 << 20;
};

struct ProximityResult {
  double value = 0.0;
  int samples = 0;
};

/// m(r, f) = (1/2pi) \int log^+ |f(re^{it})| dt by trapezoidal doubling.
/// Stops after two consecutive doublings agree to rel_tol.
inline ProximityResult proximity_detail(const MeromorphicFn& f, double r, const QuadratureOptions& opt = {}) {
  if (!(r > 0.0)) throw InvalidArgument("radius must be positive");
  const double guard = f.pole_guard(Complex(r, 0.0));
  if (singular_point_on_circle(f.poles_within(std::min(f.working_radius(), r + 2 * guard)), r, guard))
    throw PoleOnCircle("declared pole on |z| = " + std::to_string(r));
  if (f.is_zero()) return {0.0, 0};

  auto g = [&](double t) { return std::max(0.0, f.log_abs(std::polar(r, t))); };
  int n = opt.min_samples;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += g(2.0 * std::numbers::pi * k / n);
  double prev = sum / n;
  int agreements = 0;
  while (n < opt.max_samples) {
    for (int k = 0; k < n; ++k) sum += g(2.0 * std::numbers::pi * (k + 0.5) / n);
    n *= 2;
    const double cur = sum / n;
    agreements = std::abs(cur - prev) <= opt.rel_tol * std::abs(cur) + opt.abs_floor ? agreements + 1 : 0;
    prev = cur;
    if (agreements >= 2) return {cur, n};
  }
  throw QuadratureStall("proximity quadrature exceeded " + std::to_string(opt.max_samples) + " samples at r = " +
                        std::to_string(r));
}

inline double proximity(const MeromorphicFn& f, double r) { return proximity_detail(f, r).value; }

namespace detail {

inline double integrated_count(std::span<const RootMult> pts, double r, bool distinct) {
  double acc = 0.0;
  for (const RootMult& p : pts) {
    const double w = distinct ? 1.0 : static_cast<double>(p.mult);
    const double a = std::abs(p.at);
    // points at the origin contribute n(0) log r
    acc += w * (a == 0.0 ? std::log(r) : std::log(r / a));
  }
  return acc;
}

inline void require_validated_poles(const MeromorphicFn& f, double r) {
  if (f.is_closed_form()) return;  // poles are roots of an explicit denominator
  // nudge off the circle if a declared point sits on it
  double rr = r;
  for (int k = 0; k < 8; ++k) {
    try {
      if (validate_declared_lists(f, rr).ok()) return;
      break;
    } catch (const PoleOnCircle&) {
    } catch (const DomainError&) {
    }
    rr *= 1.0 + 1e-6;
  }
  throw UnvalidatedPoleList("declared zero/pole lists of " + f.name() + " fail the argument-principle check at r = " +
                            std::to_string(r));
}

}  // namespace detail

/// N(r, f) (or N-bar with distinct = true), counting poles with
/// 0 < |a| <= r plus n(0, f) log r.
inline double counting(const MeromorphicFn& f, double r, bool distinct = false) {
  if (!(r > 0.0)) throw InvalidArgument("radius must be positive");
  detail::require_validated_poles(f, r);
  return detail::integrated_count(f.poles_within(r), r, distinct);
}

/// N(r, 1/f) from the zero data of f.
inline double counting_zeros(const MeromorphicFn& f, double r, bool distinct = false) {
  if (!(r > 0.0)) throw InvalidArgument("radius must be positive");
  detail::require_validated_poles(f, r);
  return detail::integrated_count(f.zeros_within(r), r, distinct);
}

inline double characteristic_at(const MeromorphicFn& f, double r) { return proximity(f, r) + counting(f, r); }

/// Strictly increasing list of positive radii.
class RadiusGrid {
public:
  RadiusGrid() = default;
  explicit RadiusGrid(std::vector<double> radii) : radii_(std::move(radii)) {
    if (radii_.empty()) throw InvalidArgument("radius grid is empty");
    if (!(radii_.front() > 0.0)) throw InvalidArgument("radius grid must start above 0");
    for (std::size_t k = 1; k < radii_.size(); ++k)
      if (!(radii_[k] > radii_[k - 1])) throw InvalidArgument("radius grid must be strictly increasing");
  }
  static RadiusGrid linear(double lo, double hi, int points) { return RadiusGrid(spaced(lo, hi, points, false)); }
  static RadiusGrid log(double lo, double hi, int points) { return RadiusGrid(spaced(lo, hi, points, true)); }

  std::span<const double> radii() const& { return radii_; }
  std::vector<double> radii() && { return std::move(radii_); }
  std::size_t size() const { return radii_.size(); }
  double front() const { return radii_.front(); }
  double back() const { return radii_.back(); }

private:
  static std::vector<double> spaced(double lo, double hi, int points, bool logarithmic) {
    if (points < 1) throw InvalidArgument("radius grid needs at least one point");
    if (!(lo > 0.0) || !(hi >= lo)) throw InvalidArgument("radius grid needs 0 < min <= max");
    if (points == 1) return {lo};
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) {
      const double t = static_cast<double>(k) / (points - 1);
      out[static_cast<std::size_t>(k)] =
          logarithmic ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
    }
    out.front() = lo;
    out.back() = hi;
    return out;
  }
  std::vector<double> radii_;
};

struct NevanlinnaRecord {
  double r = 0.0;
  double m = 0.0;
  double N = 0.0;
  double Nbar = 0.0;
  double T = 0.0;
  int samples = 0;
};

struct NevanlinnaProfile {
  std::string function_id;
  std::vector<NevanlinnaRecord> records;
};

inline NevanlinnaRecord nevanlinna_record(const MeromorphicFn& f, double r) {
  const ProximityResult m = proximity_detail(f, r);
  NevanlinnaRecord rec;
  rec.r = r;
  rec.m = m.value;
  rec.N = counting(f, r, false);
  rec.Nbar = counting(f, r, true);
  rec.T = rec.m + rec.N;
  rec.samples = m.samples;
  return rec;
}

inline NevanlinnaProfile characteristic(const MeromorphicFn& f, const RadiusGrid& grid, std::string id = {}) {
  NevanlinnaProfile out{id.empty() ? f.name() : std::move(id), {}};
  for (double r : grid.radii()) out.records.push_back(nevanlinna_record(f, r));
  return out;
}

/// T(r) = max_nu T(r, f_nu) pointwise; each record is copied from the
/// maximizing coefficient so that T = m + N still holds.
inline NevanlinnaProfile coefficient_envelope(std::span<const MeromorphicFn> coeffs, const RadiusGrid& grid) {
  if (coeffs.empty()) throw InvalidArgument("coefficient list is empty");
  NevanlinnaProfile out{"envelope", {}};
  for (double r : grid.radii()) {
    NevanlinnaRecord best = nevanlinna_record(coeffs[0], r);
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
      NevanlinnaRecord rec = nevanlinna_record(coeffs[k], r);
      if (rec.T > best.T) best = rec;
    }
    out.records.push_back(best);
  }
  return out;
}

inline double envelope_T(std::span<const MeromorphicFn> coeffs, double r) {
  double best = -std::numeric_limits<double>::infinity();
  for (const MeromorphicFn& f : coeffs) best = std::max(best, characteristic_at(f, r));
  return best;
}

/// Finite-grid proxy for delta(inf, f) = liminf m/T: the minimum of m/T over
/// the top decade of the grid.
struct DeficiencyEstimate {
  double delta = 0.0;
  double r_lo = 0.0;  ///< lower end of the top decade
  double r_hi = 0.0;
  std::size_t points = 0;
};

inline DeficiencyEstimate deficiency_at_infinity(const MeromorphicFn& f, const RadiusGrid& grid) {
  if (grid.back() < 100.0 * grid.front()) throw InvalidArgument("deficiency grid must span at least two decades");
  // T of a constant does not grow, so m/T carries no deficiency information
  if (f.is_constant()) throw DegenerateT("deficiency of a constant function is undefined");
  DeficiencyEstimate out;
  out.r_hi = grid.back();
  out.r_lo = grid.back() / 10.0;
  out.delta = 1.0;
  double maxT = 0.0;
  for (double r : grid.radii()) {
    if (r < out.r_lo) continue;
    const NevanlinnaRecord rec = nevanlinna_record(f, r);
    maxT = std::max(maxT, rec.T);
    if (rec.T <= 1e-9) continue;
    out.delta = std::min(out.delta, std::clamp(rec.m / rec.T, 0.0, 1.0));
    ++out.points;
  }
  if (maxT <= 1e-9) throw DegenerateT("T(r) vanishes on the top decade (constant function?)");
  return out;
}

inline void write_profile_csv(std::ostream& os, const NevanlinnaProfile& p) {
  CsvWriter w(os, {"r", "m", "N", "Nbar", "T", "samples"});
  for (const auto& rec : p.records) w.row(rec.r, rec.m, rec.N, rec.Nbar, rec.T, rec.samples);
}

}  // namespace nevgrowth
