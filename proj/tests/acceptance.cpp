// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria (capped at 100).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nevgrowth/experiment.hpp"
#include "support/corpus.hpp"

using namespace nevgrowth;
namespace ex = nevgrowth::experiment;
namespace fs = std::filesystem;

namespace {

// Tolerances and limits, pinned here.
constexpr double kProximityRel = 1e-5;
constexpr double kDegreeRel = 0.02;
constexpr double kJensenAbs = 1e-3;
constexpr double kTol = 1e-8;
constexpr double kTolSlack = 10.0;
constexpr double kDExpRel = 1e-12;
constexpr double kCeilingAbs = 1e-12;
constexpr double kDensityCeilingListed = 0.46053;
constexpr double kDensityRelSlack = 1e-6;
constexpr double kSlopeRel = 0.10;
constexpr double kLimit1 = 30.0, kLimit2 = 60.0, kLimit3 = 120.0, kLimit7 = 180.0;

const fs::path kCorpusDir = NEVGROWTH_CORPUS_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Roots with modulus in [lo, hi], pairwise at least 0.05 apart.
std::vector<RootMult> random_roots(std::mt19937_64& rng, int n, double lo, double hi, std::vector<Complex>& taken) {
  std::uniform_real_distribution<double> mod(lo, hi), ang(0.0, 2.0 * kPi);
  std::vector<RootMult> out;
  while (static_cast<int>(out.size()) < n) {
    const Complex z = std::polar(mod(rng), ang(rng));
    bool ok = true;
    for (Complex w : taken) ok = ok && std::abs(z - w) > 0.05;
    if (!ok) continue;
    taken.push_back(z);
    out.push_back({z, 1});
  }
  return out;
}

MeromorphicFn random_rational(std::mt19937_64& rng, int dn, int dd, double lo, double hi) {
  std::vector<Complex> taken;
  const auto zs = random_roots(rng, dn, lo, hi, taken);
  const auto ps = random_roots(rng, dd, lo, hi, taken);
  return MeromorphicFn::rational(Polynomial::from_roots(1.0, zs), Polynomial::from_roots(1.0, ps));
}

// --- 1 ---------------------------------------------------------------------
Outcome nevanlinna_exactness() {
  double worst_m = 0.0;
  for (double r : {1.0, kPi, 10.0, 100.0})
    worst_m = std::max(worst_m, std::abs(proximity(MeromorphicFn::exp(), r) / (r / kPi) - 1.0));
  const auto inv = MeromorphicFn::rational(Polynomial::constant(1.0), Polynomial({-1.0, 1.0}));
  double worst_N = 0.0;
  for (double r : {1.5, 2.0, 10.0, 1e3, 1e6}) worst_N = std::max(worst_N, std::abs(counting(inv, r) - std::log(r)));
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> deg(0, 6);
  double worst_deg = 0.0;
  for (int k = 0; k < 20; ++k) {
    int dn = deg(rng), dd = deg(rng);
    if (dn == 0 && dd == 0) dn = 1;
    const auto f = random_rational(rng, dn, dd, 0.8, 1.25);
    const double r = 1e6;
    worst_deg = std::max(worst_deg, std::abs(characteristic_at(f, r) / std::log(r) / std::max(dn, dd) - 1.0));
  }
  const bool ok = worst_m <= kProximityRel && worst_N <= 4 * std::numeric_limits<double>::epsilon() * std::log(1e6) &&
                  worst_deg <= kDegreeRel;
  return {ok, "max rel err m(r,e^z) " + fmt("%.2e", worst_m) + ", |N - log r| " + fmt("%.1e", worst_N) +
                  ", max |T/(d log r) - 1| " + fmt("%.4f", worst_deg)};
}

// --- 2 ---------------------------------------------------------------------
Outcome jensen_consistency() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> deg(0, 6);
  const auto grid = RadiusGrid::log(0.1, 100.0, 12);
  double worst = 0.0;
  int checked = 0;
  for (int k = 0; k < 50; ++k) {
    int dn = deg(rng), dd = deg(rng);
    if (dn == 0 && dd == 0) dd = 1;
    const auto f = random_rational(rng, dn, dd, 0.3, 3.0);
    const auto g = f.reciprocal();
    const double log_f0 = std::log(std::abs(f(0.0)));
    for (double r : grid.radii()) {
      double rr = r;
      for (int t = 0; t < 8; ++t) {
        try {
          worst = std::max(worst, std::abs(characteristic_at(f, rr) - characteristic_at(g, rr) - log_f0));
          ++checked;
          break;
        } catch (const PoleOnCircle&) {
          rr *= 1.0 + 1e-3;
        }
      }
    }
  }
  return {worst < kJensenAbs && checked == 50 * 12, "max residual " + fmt("%.2e", worst) + " over " +
                                                        std::to_string(checked) + " (f, r) pairs"};
}

// --- 3, 4 --------------------------------------------------------------------
struct Variant {
  corpus::Equation eq;
  std::string label;
};

std::vector<Variant> solution_variants() {
  std::vector<Variant> out;
  out.push_back({corpus::exp_first_order(), "e^z"});
  auto sin = corpus::harmonic();
  out.push_back({sin, "sin"});
  auto cos = sin;
  const auto c = MeromorphicFn::cos();
  cos.solution = {c, c.derivative()};
  out.push_back({cos, "cos"});
  auto zz = corpus::euler();
  out.push_back({zz, "z^2"});
  auto z = zz;
  const auto lin = MeromorphicFn::polynomial(Polynomial({0.0, 1.0}));
  z.solution = {lin, lin.derivative()};
  out.push_back({z, "z"});
  out.push_back({corpus::exp_over_linear(), "e^z/(z-1)"});
  return out;
}

PathOmega path_near(const corpus::Equation& eq, double rho, double r) {
  for (double rr : perturbed_radii(r)) {
    try {
      return select_admissible_path(eq.sys, rho, rr, eq.y_poles);
    } catch (const NoAdmissiblePath&) {
    }
  }
  throw NoAdmissiblePath("no path near r = " + std::to_string(r));
}

Outcome gronwall_domination() {
  double worst = -kInf;
  std::size_t min_marks = 1u << 30;
  int runs = 0;
  for (const auto& eq : corpus::all()) {
    for (double rho : {0.1, 0.5}) {
      for (double r : {1.0, 2.0, 5.0}) {
        const PathOmega path = path_near(eq, rho, r);
        const StateVector F0 = eq.state_at(path.start());
        const Trajectory traj = integrate_along(eq.sys, path, F0, kTol);
        const auto marks = traj.marks();
        std::vector<double> s;
        for (const auto* p : marks) s.push_back(p->s);
        const auto env = gronwall_log_cumulative(eq.sys, path, F0, s);
        for (std::size_t k = 0; k < marks.size(); ++k)
          worst = std::max(worst, std::log(norm1(marks[k]->F)) - env[k]);
        min_marks = std::min(min_marks, marks.size());
        ++runs;
      }
    }
  }
  const bool ok = worst <= std::log1p(kTolSlack * kTol) && min_marks >= 256;
  return {ok, std::to_string(runs) + " runs, >= " + std::to_string(min_marks) +
                  " marks each, max log(norm/envelope) " + fmt("%.3f", worst)};
}

Outcome solution_fidelity() {
  double worst = 0.0;
  std::string worst_label;
  for (const auto& v : solution_variants()) {
    for (double rho : {0.1, 0.5}) {
      for (double r : {1.0, 2.0, 5.0}) {
        const PathOmega path = path_near(v.eq, rho, r);
        const Trajectory traj = integrate_along(v.eq.sys, path, v.eq.state_at(path.start()), kTol);
        const StateVector exact = v.eq.state_at(path.z(path.length()));
        StateVector d(exact.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = traj.back().F[i] - exact[i];
        const double rel = norm1(d) / norm1(exact);
        if (rel > worst) worst = rel, worst_label = v.label;
      }
    }
  }
  return {worst <= kTolSlack * kTol, "max end-of-path rel err " + fmt("%.2e", worst) + " (" + worst_label +
                                         ") vs 10 tol = " + fmt("%.0e", kTolSlack * kTol)};
}

// --- 5 ---------------------------------------------------------------------
Outcome theorem_certification() {
  int pass = 0, total = 0;
  double lo = kInf, hi = -kInf;
  std::string bad;
  for (const auto& eq : corpus::all()) {
    for (double eta : {0.1, 0.5, 1.5 * kE}) {
      for (double r : {1.0, 2.0, 5.0}) {
        CertifyRequest req;
        req.rho = 0.1;
        req.r = r;
        req.eta = eta;
        req.tol = kTol;
        const InitialState init = [&eq](const PathOmega& p) { return eq.state_at(p.start()); };
        const auto c = certify_at(eq.sys, eq.y_poles, init, req);
        ++total;
        if (c.status == Status::pass) {
          ++pass;
          lo = std::min(lo, c.log_tightness);
          hi = std::max(hi, c.log_tightness);
        } else if (bad.empty()) {
          bad = " first failure " + eq.name + " eta=" + fmt("%g", eta) + " r=" + fmt("%g", r);
        }
      }
    }
  }
  return {pass == total, std::to_string(pass) + "/" + std::to_string(total) + " PASS, log tightness in [" +
                             fmt("%.3g", lo) + ", " + fmt("%.3g", hi) + "]" + bad};
}

// --- 6 ---------------------------------------------------------------------
Outcome formula_constants() {
  const bool h1 = H(1.5 * kE) == 2.0;
  const bool h2 = H(1.5) == 3.0;
  BoundContext ctx;
  ctx.n = 1;
  ctx.q_nu = {0};
  ctx.eta = 1.5 * kE;
  ctx.B = 1.0;
  ctx.r = 1.7;
  ctx.rho = 0.1;
  ctx.R = 3.0 * kE * ctx.r;
  ctx.T_of = [](double) { return 1.0; };
  const bool k5 = ctx.growth_factor() == 5.0;
  const double d_rel = std::abs(D_constant(ctx).linear / (1.0 + std::exp(15.0)) - 1.0);
  const double ceil_err = std::abs(density_ceiling(density_eta_threshold()) - 1.0);
  const bool ok = h1 && h2 && k5 && d_rel <= kDExpRel && ceil_err <= kCeilingAbs;
  return {ok, std::string("H(3e/2)=2 ") + (h1 ? "exact" : "NOT exact") + ", H(3/2)=3 " + (h2 ? "exact" : "NOT exact") +
                  ", k=5 " + (k5 ? "exact" : "NOT exact") + ", D rel err " + fmt("%.1e", d_rel) +
                  ", ceiling at threshold - 1 = " + fmt("%.1e", ceil_err)};
}

// --- 7 ---------------------------------------------------------------------
Outcome levin_verification() {
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> deg(1, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double R = 1.0;
  int pass = 0, total = 0;
  double worst = kInf;
  for (int k = 0; k < 100; ++k) {
    std::vector<RootMult> zeros;
    const int n = deg(rng);
    while (static_cast<int>(zeros.size()) < n) {
      const Complex z = std::polar(2.0 * kE * R * std::sqrt(u(rng)) + 1e-3, 2.0 * kPi * u(rng));
      bool ok = true;
      for (const RootMult& w : zeros) ok = ok && std::abs(z - w.at) > 1e-3;
      if (ok) zeros.push_back({z, 1});
    }
    Complex scale = 1.0;
    for (const RootMult& z : zeros) scale *= -1.0 / z.at;
    const auto f = MeromorphicFn::from_factors(scale, zeros, {});
    for (double eta : {0.05, 0.1, 0.5}) {
      const auto disks = build_exclusion_disks(f.zeros_within(2.0 * kE * R), R, eta);
      const auto rep = verify_levin(f, R, eta, disks, 100000);
      ++total;
      pass += rep.pass;
      worst = std::min(worst, rep.margin);
    }
  }
  return {pass == total, std::to_string(pass) + "/" + std::to_string(total) +
                             " polynomial/eta pairs PASS with proportional disks, min margin " + fmt("%.3g", worst)};
}

// --- 8 ---------------------------------------------------------------------
Outcome density_lemma() {
  const double eta = 0.004;
  std::vector<RootMult> zeros;
  for (int k = -static_cast<int>(1000.0 / kPi); k * kPi <= 1000.0; ++k) zeros.push_back({k * kPi, 1});
  const auto eset = annular_exceptional_set(zeros, eta, 1000.0);
  const auto radii = RadiusGrid::log(1.01, 1000.0, 400);
  const auto rep = verify_density_lemma(eset, eta, radii.radii());
  const bool lemma_ok = rep.max_density <= kDensityCeilingListed * (1.0 + kDensityRelSlack);

  int eq_pass = 0, eq_total = 0, violations = 0;
  const auto grid = RadiusGrid::log(2.0, 100.0, 16);
  for (const auto& eq : corpus::all()) {
    const BoundContext ctx = make_context(eq.sys, 0.1, grid.back(), eta, kE);
    const auto ces = ex::coefficient_exceptional_set(eq.sys, eta, grid.back());
    const auto cert = certify_density(eq.solution, grid, ctx, 0.1, ces);
    ++eq_total;
    eq_pass += cert.status == Status::pass;
    violations += cert.violations;
  }
  return {lemma_ok && eq_pass == eq_total,
          "sin zeros: max density " + fmt("%.6f", rep.max_density) + " <= " + fmt("%.5f", kDensityCeilingListed) +
              "(1+1e-6); per-radius check " + std::to_string(eq_pass) + "/" + std::to_string(eq_total) +
              " equations, " + std::to_string(violations) + " violations off the exceptional set"};
}

// --- 9 ---------------------------------------------------------------------
Outcome comparison_slope() {
  const fs::path out = fs::temp_directory_path() / "nevgrowth_acceptance" / "compare";
  fs::remove_all(out);
  ex::RunOptions opt;
  opt.out_dir = out;
  std::ostringstream err;
  const auto res = ex::run("compare", ex::load_config(kCorpusDir / "exp_over_linear_order2.json"), opt, err);
  if (res.exit_code != 0) return {false, "compare run failed: " + err.str()};
  std::ifstream in(out / "compare.csv");
  std::string line;
  std::vector<double> xs, ys;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string r, t, lnb;
    std::getline(ss, r, ',');
    std::getline(ss, t, ',');
    std::getline(ss, lnb, ',');
    xs.push_back(std::stod(r));
    ys.push_back(std::stod(lnb));
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) sx += xs[k], sy += ys[k], sxx += xs[k] * xs[k], sxy += xs[k] * ys[k];
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  std::ifstream mj(out / "compare_meta.json");
  const auto meta = ex::Json::parse(mj);
  const double B = meta["B"].get<double>(), h = meta["H"].get<double>();
  const double predicted = 5.0 * B * (1.0 + h) * 3.0 * kE * kE / kPi;
  const double rel = std::abs(slope / predicted - 1.0);
  return {rel <= kSlopeRel && xs.size() >= 5, "fitted slope " + fmt("%.2f", slope) + " vs 5B(1+H)3e^2/pi = " +
                                                 fmt("%.2f", predicted) + " (B=" + fmt("%.3f", B) +
                                                 "), rel diff " + fmt("%.4f", rel)};
}

// --- 10 --------------------------------------------------------------------
std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out.emplace_back(fs::relative(e.path(), dir).string(), ss.str());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "nevgrowth_acceptance" / "determinism";
  fs::remove_all(root);
  std::vector<fs::path> configs;
  for (const auto& e : fs::directory_iterator(kCorpusDir))
    if (e.path().extension() == ".json") configs.push_back(e.path());
  std::sort(configs.begin(), configs.end());
  for (const char* pass : {"a", "b"}) {
    for (const auto& c : configs) {
      const auto cfg = ex::load_config(c);
      for (const char* cmd : {"nevanlinna", "certify", "density", "compare"}) {
        ex::RunOptions opt;
        opt.out_dir = root / pass / cfg.name / cmd;
        opt.threads = std::string(pass) == "a" ? 1 : 4;
        std::ostringstream err;
        ex::run(cmd, cfg, opt, err);
      }
    }
  }
  const auto a = snapshot(root / "a"), b = snapshot(root / "b");
  std::size_t bytes = 0;
  for (const auto& f : a) bytes += f.second.size();
  return {!a.empty() && a == b, std::to_string(a.size()) + " files (" + std::to_string(bytes) +
                                    " bytes) compared across 1-thread and 4-thread runs of " +
                                    std::to_string(configs.size()) + " configs"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double limit;
  };
  const std::vector<Criterion> criteria{
      {1, "nevanlinna exactness", nevanlinna_exactness, kLimit1},
      {2, "jensen consistency", jensen_consistency, kLimit2},
      {3, "gronwall domination", gronwall_domination, kLimit3},
      {4, "closed-form solution fidelity", solution_fidelity, 0.0},
      {5, "growth theorem certification", theorem_certification, 0.0},
      {6, "formula constants", formula_constants, 0.0},
      {7, "minimum-modulus verification", levin_verification, kLimit7},
      {8, "density lemma and per-radius check", density_lemma, 0.0},
      {9, "comparison table slope", comparison_slope, 0.0},
      {10, "determinism", determinism, 0.0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit > 0.0 && secs > c.limit) {
      o.pass = false;
      o.detail += "; runtime over " + fmt("%.0f", c.limit) + " s";
    }
    failed += !o.pass;
    std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return std::min(failed, 100);
}
