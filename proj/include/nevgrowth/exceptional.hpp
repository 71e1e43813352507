#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nevgrowth/constants.hpp"
#include "nevgrowth/csv.hpp"
#include "nevgrowth/meromorphic.hpp"

namespace nevgrowth {

struct Disk {
  Complex center;
  double radius = 0.0;
  bool contains(Complex z) const { return std::abs(z - center) <= radius; }
};

enum class DiskRule { proportional, cartan };

inline const char* to_string(DiskRule r) { return r == DiskRule::proportional ? "proportional" : "cartan"; }

/// Exclusion disks around zeros, with the radius budget 4 eta R they were
/// built against.
struct DiskUnion {
  std::vector<Disk> disks;
  double budget = 0.0;
  DiskRule rule = DiskRule::proportional;

  bool contains(Complex z) const {
    return std::any_of(disks.begin(), disks.end(), [&](const Disk& d) { return d.contains(z); });
  }
  double radius_sum() const {
    double s = 0.0;
    for (const Disk& d : disks) s += d.radius;
    return s;
  }
};

namespace detail {

inline void check_eta(double eta) {
  if (!(eta > 0.0) || eta > kEtaMax) throw DomainError("eta must lie in (0, 3e/2]");
}

}  // namespace detail

/// Disks centred at the distinct zeros, radius_k = 4 eta R mult_k / sum(mult).
inline DiskUnion build_exclusion_disks(std::span<const RootMult> zeros, double R, double eta) {
  detail::check_eta(eta);
  if (!(R > 0.0)) throw InvalidArgument("R must be positive");
  DiskUnion out;
  out.budget = 4.0 * eta * R;
  double total = 0.0;
  for (const RootMult& z : zeros) total += z.mult;
  for (const RootMult& z : zeros) out.disks.push_back({z.at, out.budget * z.mult / total});
  return out;
}

/// Cartan's construction: repeatedly take the largest lambda for which some
/// disk of radius lambda h / n holds lambda of the remaining points, then
/// double every radius. With h = 2 eta R the radii again sum to 4 eta R.
/// Candidate centres are the points and pairwise midpoints.
inline DiskUnion build_cartan_disks(std::span<const RootMult> zeros, double R, double eta) {
  detail::check_eta(eta);
  if (!(R > 0.0)) throw InvalidArgument("R must be positive");
  DiskUnion out;
  out.budget = 4.0 * eta * R;
  out.rule = DiskRule::cartan;
  std::vector<Complex> pts;
  for (const RootMult& z : zeros) pts.insert(pts.end(), static_cast<std::size_t>(z.mult), z.at);
  const double n = static_cast<double>(pts.size());
  const double h = 2.0 * eta * R;

  std::vector<double> dist;
  while (!pts.empty()) {
    std::vector<Complex> cands = pts;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) cands.push_back(0.5 * (pts[i] + pts[j]));
    std::size_t best_lambda = 0;
    Complex best_c;
    for (Complex c : cands) {
      dist.clear();
      for (Complex p : pts) dist.push_back(std::abs(p - c));
      std::sort(dist.begin(), dist.end());
      for (std::size_t lam = dist.size(); lam > best_lambda; --lam) {
        if (dist[lam - 1] <= static_cast<double>(lam) * h / n) {
          best_lambda = lam;
          best_c = c;
          break;
        }
      }
    }
    out.disks.push_back({best_c, 2.0 * static_cast<double>(best_lambda) * h / n});
    std::sort(pts.begin(), pts.end(),
              [&](Complex a, Complex b) { return std::abs(a - best_c) < std::abs(b - best_c); });
    pts.erase(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(best_lambda));
  }
  return out;
}

struct LevinReport {
  double margin = 0.0;  ///< min over samples of log|f| + H log M(2eR, f)
  double log_M = 0.0;   ///< log M(2eR, f)
  double H = 0.0;
  std::size_t samples_used = 0;
  Complex worst;
  bool pass = false;
};

inline constexpr double kLevinSlack = 1e-9;

/// Sample the disk |z| <= R off the exclusion disks (a sunflower lattice
/// plus rings just outside each disk) and check the minimum-modulus bound.
inline LevinReport verify_levin(const MeromorphicFn& f, double R, double eta, const DiskUnion& disks,
                                int samples) {
  if (!f.is_entire()) throw InvalidArgument("minimum-modulus check needs an entire function");
  if (std::abs(f(0.0) - 1.0) > 1e-10) throw NotNormalized("f(0) must equal 1");
  if (samples < 1) throw InvalidArgument("samples must be positive");
  LevinReport rep;
  rep.H = H(eta);
  rep.log_M = max_modulus(f, 2.0 * kE * R).log_value;
  rep.margin = std::numeric_limits<double>::infinity();
  auto visit = [&](Complex z) {
    if (std::abs(z) > R || disks.contains(z)) return;
    const double v = f.log_abs(z) + rep.H * rep.log_M;
    ++rep.samples_used;
    if (v < rep.margin) rep.margin = v, rep.worst = z;
  };
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < samples; ++k)
    visit(std::polar(R * std::sqrt((k + 0.5) / samples), golden * k));
  for (const Disk& d : disks.disks)
    for (int k = 0; k < 64; ++k) visit(d.center + std::polar(d.radius * (1.0 + 1e-9) + 1e-300, 2.0 * kPi * k / 64));
  rep.pass = rep.margin > -kLevinSlack;
  return rep;
}

struct LevinExclusion {
  DiskUnion disks;
  LevinReport report;
  bool fallback_used = false;
};

/// Proportional disks, falling back to Cartan's construction when the
/// sampled bound fails.
inline LevinExclusion levin_exclusion(const MeromorphicFn& f, double R, double eta, int samples) {
  const auto zeros = f.zeros_within(2.0 * kE * R);
  LevinExclusion out;
  out.disks = build_exclusion_disks(zeros, R, eta);
  out.report = verify_levin(f, R, eta, out.disks, samples);
  if (!out.report.pass) {
    out.disks = build_cartan_disks(zeros, R, eta);
    out.report = verify_levin(f, R, eta, out.disks, samples);
    out.fallback_used = true;
  }
  return out;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Disjoint, sorted radial intervals in [1, inf).
struct RadialExceptionalSet {
  std::vector<Interval> intervals;
  double alpha = kAlpha;
  int j_lo = 0;  ///< annulus index range touched (j_lo > j_hi when empty)
  int j_hi = -1;

  bool contains(double t) const {
    auto it = std::upper_bound(intervals.begin(), intervals.end(), t,
                               [](double v, const Interval& iv) { return v < iv.lo; });
    return it != intervals.begin() && t <= std::prev(it)->hi;
  }
};

namespace detail {

inline std::vector<Interval> merge_intervals(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const Interval& iv : v) {
    if (!out.empty() && iv.lo <= out.back().hi) out.back().hi = std::max(out.back().hi, iv.hi);
    else out.push_back(iv);
  }
  return out;
}

inline int annulus_floor(double t, double alpha) { return static_cast<int>(std::floor(std::log(t) / std::log(alpha))); }

}  // namespace detail

/// Each disk contributes [|c| - rho, |c| + rho] intersected with [1, inf).
inline RadialExceptionalSet radial_projection(const DiskUnion& disks, double alpha = kAlpha) {
  if (!(alpha > 1.0)) throw InvalidArgument("alpha must exceed 1");
  RadialExceptionalSet out;
  out.alpha = alpha;
  std::vector<Interval> raw;
  for (const Disk& d : disks.disks) {
    const double a = std::abs(d.center);
    Interval iv{std::max(1.0, a - d.radius), a + d.radius};
    if (iv.hi < iv.lo) continue;
    raw.push_back(iv);
    // annuli [alpha^j, alpha^{j+3/2}] meeting the interval
    const int lo = static_cast<int>(std::ceil(std::log(iv.lo) / std::log(alpha) - 1.5));
    const int hi = detail::annulus_floor(iv.hi, alpha);
    const int first = std::max(1, lo);
    if (first > hi) continue;
    if (out.j_lo > out.j_hi) out.j_lo = first, out.j_hi = hi;
    else out.j_lo = std::min(out.j_lo, first), out.j_hi = std::max(out.j_hi, hi);
  }
  out.intervals = detail::merge_intervals(std::move(raw));
  return out;
}

/// (1 / log r) * integral over E(r) = [1, r) cap E of dt / t.
inline double log_density(const RadialExceptionalSet& eset, double r) {
  if (!(r > 1.0)) throw DomainError("log density needs r > 1");
  double acc = 0.0;
  for (const Interval& iv : eset.intervals) {
    const double lo = std::max(iv.lo, 1.0), hi = std::min(iv.hi, r);
    if (hi > lo) acc += std::log(hi / lo);
  }
  return acc / std::log(r);
}

/// floor(log r / log alpha): number of annuli below r.
inline int annulus_index_count(double r, double alpha = kAlpha) {
  return r < 1.0 ? 0 : detail::annulus_floor(r, alpha);
}

/// Per-annulus construction: for Lambda_j = [alpha^j, alpha^{j+3/2}], j >= 1,
/// disks with Levin radius R_j = 2e alpha^{j+3/2} (budget 4 eta R_j) around
/// the zeros in |z| <= 2e R_j; each disk's radial shadow is clipped to Lambda_j.
inline RadialExceptionalSet annular_exceptional_set(std::span<const RootMult> zeros, double eta, double r_max,
                                                    double alpha = kAlpha) {
  detail::check_eta(eta);
  if (!(alpha > 1.0)) throw InvalidArgument("alpha must exceed 1");
  RadialExceptionalSet out;
  out.alpha = alpha;
  std::vector<Interval> raw;
  for (int j = 1; std::pow(alpha, j) <= r_max; ++j) {
    const double a_lo = std::pow(alpha, j), a_hi = std::pow(alpha, j + 1.5);
    const double Rj = 2.0 * kE * a_hi;
    std::vector<RootMult> local;
    for (const RootMult& z : zeros)
      if (std::abs(z.at) <= 2.0 * kE * Rj) local.push_back(z);
    const DiskUnion du = build_exclusion_disks(local, Rj, eta);
    for (const Disk& d : du.disks) {
      const double c = std::abs(d.center);
      const double lo = std::max(c - d.radius, a_lo), hi = std::min(c + d.radius, a_hi);
      if (hi >= lo) raw.push_back({lo, hi});
    }
    if (out.j_lo > out.j_hi) out.j_lo = j;
    out.j_hi = j;
  }
  out.intervals = detail::merge_intervals(std::move(raw));
  return out;
}

struct DensityRow {
  double r = 0.0;
  double density = 0.0;
  double ceiling = 0.0;
  bool pass = false;
};

struct DensityReport {
  std::vector<DensityRow> rows;
  double max_density = 0.0;
  bool pass = true;
};

inline constexpr double kDensityRelSlack = 1e-6;

inline DensityReport verify_density_lemma(const RadialExceptionalSet& eset, double eta, std::span<const double> radii) {
  DensityReport rep;
  const double ceil = density_ceiling(eta);
  for (double r : radii) {
    DensityRow row{r, log_density(eset, r), ceil, false};
    row.pass = row.density <= ceil * (1.0 + kDensityRelSlack);
    rep.max_density = std::max(rep.max_density, row.density);
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

inline DensityReport verify_density_lemma(std::span<const RootMult> zeros, double eta, std::span<const double> radii) {
  if (radii.empty()) throw InvalidArgument("radius grid is empty");
  const double r_max = *std::max_element(radii.begin(), radii.end());
  return verify_density_lemma(annular_exceptional_set(zeros, eta, r_max), eta, radii);
}

inline void write_density_csv(std::ostream& os, const DensityReport& rep) {
  CsvWriter w(os, {"r", "density", "ceiling", "pass"});
  for (const DensityRow& row : rep.rows) w.row(row.r, row.density, row.ceiling, row.pass);
}

inline nlohmann::ordered_json to_json(const DiskUnion& u) {
  nlohmann::ordered_json j;
  j["rule"] = to_string(u.rule);
  j["budget"] = u.budget;
  j["radius_sum"] = u.radius_sum();
  auto& arr = j["disks"] = nlohmann::ordered_json::array();
  for (const Disk& d : u.disks) arr.push_back({{"center", {d.center.real(), d.center.imag()}}, {"radius", d.radius}});
  return j;
}

inline nlohmann::ordered_json to_json(const RadialExceptionalSet& e) {
  nlohmann::ordered_json j;
  j["alpha"] = e.alpha;
  j["annuli"] = {e.j_lo, e.j_hi};
  auto& arr = j["intervals"] = nlohmann::ordered_json::array();
  for (const Interval& iv : e.intervals) arr.push_back({iv.lo, iv.hi});
  return j;
}

}  // namespace nevgrowth
