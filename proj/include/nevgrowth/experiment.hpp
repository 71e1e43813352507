#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nevgrowth/bounds.hpp"
#include "nevgrowth/csv.hpp"

namespace nevgrowth::experiment {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

class ConfigError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "ConfigError"; }
};

struct GridSpec {
  double min = 1.0;
  double max = 100.0;
  int points = 20;
  std::string spacing = "log";

  RadiusGrid build() const {
    if (points < 1) throw ConfigError("grid: points must be at least 1 (empty grid)");
    if (!(min > 0.0) || !(max >= min)) throw ConfigError("grid: need 0 < min <= max");
    return spacing == "log" ? RadiusGrid::log(min, max, points) : RadiusGrid::linear(min, max, points);
  }
};

struct Parameters {
  std::vector<double> eta{0.1};          ///< certify sweep and the compare bound
  std::vector<double> density_eta{0.004};  ///< density runs; must sit below the threshold
  double C = kE;
  std::string R_mode = "3er";
  double eps = 0.1;
  double sigma = 2.0;
  double c = 1.0;
  double c1 = 1.0;
};

/// One experiment. Function definitions are kept as their tagged JSON so
/// that serialization reproduces them exactly.
struct ExperimentConfig {
  std::string name;
  int order = 1;
  std::vector<Json> coefficients;  ///< f_0 .. f_{n-1} of y^(n) + sum f_nu y^(nu) = 0
  std::vector<Json> solution;      ///< optional y, y', ..., y^(n-1)
  std::vector<Json> functions;     ///< optional extra profiles for `nevanlinna`
  std::vector<RootMult> y_poles;
  double rho = 0.1;
  double theta = 0.0;
  std::vector<Complex> state;  ///< optional initial values at rho e^{i theta}
  Parameters params;
  std::vector<double> radii{1.0};
  GridSpec grid;
  double tol = 1e-8;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string field(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline std::string index(const std::string& path, std::size_t k) { return path + "[" + std::to_string(k) + "]"; }

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ConfigError("field '" + path + "': " + what);
}

inline void only_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(field(path, it.key()), "unknown key");
  }
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

inline int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

/// A real number or an [re, im] pair.
inline Complex complex(const Json& j, const std::string& path) {
  if (j.is_number()) return number(j, path);
  if (j.is_array() && j.size() == 2) return {number(j[0], index(path, 0)), number(j[1], index(path, 1))};
  fail(path, "expected a number or an [re, im] pair");
}

inline Json complex_json(Complex c) {
  if (c.imag() == 0.0) return c.real();
  return Json::array({c.real(), c.imag()});
}

inline Polynomial poly(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty coefficient list (ascending powers)");
  std::vector<Complex> c;
  for (std::size_t k = 0; k < j.size(); ++k) c.push_back(complex(j[k], index(path, k)));
  return Polynomial(std::move(c));
}

inline std::vector<double> number_list(const Json& j, const std::string& path) {
  if (j.is_number()) return {number(j, path)};
  if (!j.is_array() || j.empty()) fail(path, "expected a number or a nonempty list");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], index(path, k)));
  return out;
}

inline std::string string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

}  // namespace detail

/// Tags understood by `build_function`.
inline const std::set<std::string>& function_registry() {
  static const std::set<std::string> tags{"constant", "polynomial", "rational", "exp",     "sin",
                                          "cos",      "product",    "sum",      "quotient", "derivative"};
  return tags;
}

/// Build a function from its tagged description, e.g. {"exp": 1},
/// {"rational": {"num": [2, -1], "den": [-1, 1]}} or
/// {"quotient": [{"exp": 1}, {"polynomial": [-1, 1]}]}. An optional "name"
/// key labels the result.
inline MeromorphicFn build_function(const Json& j, const std::string& path) {
  using namespace detail;
  if (!j.is_object()) fail(path, "expected a tagged function object");
  std::string tag;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "name") continue;
    if (!tag.empty()) fail(path, "exactly one function tag expected, found '" + tag + "' and '" + it.key() + "'");
    tag = it.key();
  }
  if (tag.empty()) fail(path, "missing function tag");
  if (!function_registry().count(tag)) fail(field(path, tag), "unknown function '" + tag + "'");
  const Json& a = j.at(tag);
  const std::string p = field(path, tag);
  auto list = [&](std::size_t min_size) {
    if (!a.is_array() || a.size() < min_size)
      fail(p, "expected a list of at least " + std::to_string(min_size) + " functions");
    std::vector<MeromorphicFn> out;
    for (std::size_t k = 0; k < a.size(); ++k) out.push_back(build_function(a[k], index(p, k)));
    return out;
  };
  MeromorphicFn f = MeromorphicFn::constant(0.0);
  try {
    if (tag == "constant") {
      f = MeromorphicFn::constant(complex(a, p));
    } else if (tag == "polynomial") {
      f = MeromorphicFn::polynomial(poly(a, p));
    } else if (tag == "rational") {
      only_keys(a, p, {"num", "den"});
      if (!a.contains("num") || !a.contains("den")) fail(p, "needs 'num' and 'den'");
      f = MeromorphicFn::rational(poly(a["num"], field(p, "num")), poly(a["den"], field(p, "den")));
    } else if (tag == "exp") {
      f = MeromorphicFn::exp(complex(a, p));
    } else if (tag == "sin") {
      f = MeromorphicFn::sin(complex(a, p));
    } else if (tag == "cos") {
      f = MeromorphicFn::cos(complex(a, p));
    } else if (tag == "product") {
      auto fs = list(1);
      f = fs[0];
      for (std::size_t k = 1; k < fs.size(); ++k) f = f * fs[k];
    } else if (tag == "sum") {
      auto fs = list(1);
      f = fs[0];
      for (std::size_t k = 1; k < fs.size(); ++k) f = f + fs[k];
    } else if (tag == "quotient") {
      auto fs = list(2);
      if (fs.size() != 2) fail(p, "expected [numerator, denominator]");
      f = fs[0] * fs[1].reciprocal();
    } else {
      f = build_function(a, p).derivative();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(p, std::string(e.kind()) + ": " + e.what());
  }
  if (j.contains("name")) return f.named(string(j["name"], field(path, "name")));
  if (f.name().empty()) return f.named(tag);
  return f;
}

inline std::vector<MeromorphicFn> build_functions(const std::vector<Json>& specs, const std::string& path) {
  std::vector<MeromorphicFn> out;
  for (std::size_t k = 0; k < specs.size(); ++k) out.push_back(build_function(specs[k], detail::index(path, k)));
  return out;
}

inline ExperimentConfig config_from_json(const Json& j) {
  using namespace detail;
  only_keys(j, "", {"name", "equation", "solution", "functions", "initial", "parameters", "radii", "grid", "tol"});
  ExperimentConfig c;
  if (!j.contains("name")) fail("name", "required");
  c.name = string(j["name"], "name");
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos) fail("name", "must be a nonempty plain name");

  if (!j.contains("equation")) fail("equation", "required");
  const Json& eq = j["equation"];
  only_keys(eq, "equation", {"order", "coefficients", "y_poles"});
  if (!eq.contains("order")) fail("equation.order", "required");
  c.order = integer(eq["order"], "equation.order");
  if (c.order < 1) fail("equation.order", "must be at least 1");
  if (!eq.contains("coefficients") || !eq["coefficients"].is_array())
    fail("equation.coefficients", "required list of f_0 .. f_{n-1}");
  for (const auto& f : eq["coefficients"]) c.coefficients.push_back(f);
  if (static_cast<int>(c.coefficients.size()) != c.order)
    fail("equation.coefficients", "expected " + std::to_string(c.order) + " entries, found " +
                                      std::to_string(c.coefficients.size()));
  build_functions(c.coefficients, "equation.coefficients");
  if (eq.contains("y_poles")) {
    const Json& yp = eq["y_poles"];
    if (!yp.is_array()) fail("equation.y_poles", "expected a list of {at, mult}");
    for (std::size_t k = 0; k < yp.size(); ++k) {
      const std::string p = index("equation.y_poles", k);
      only_keys(yp[k], p, {"at", "mult"});
      if (!yp[k].contains("at")) fail(field(p, "at"), "required");
      const int mult = yp[k].contains("mult") ? integer(yp[k]["mult"], field(p, "mult")) : 1;
      if (mult < 1) fail(field(p, "mult"), "must be positive");
      c.y_poles.push_back({complex(yp[k]["at"], field(p, "at")), mult});
    }
  }

  if (j.contains("solution")) {
    if (!j["solution"].is_array()) fail("solution", "expected a list y, y', ...");
    for (const auto& f : j["solution"]) c.solution.push_back(f);
    if (static_cast<int>(c.solution.size()) != c.order)
      fail("solution", "expected " + std::to_string(c.order) + " entries (y through y^(n-1))");
    build_functions(c.solution, "solution");
  }
  if (j.contains("functions")) {
    if (!j["functions"].is_array()) fail("functions", "expected a list");
    for (const auto& f : j["functions"]) c.functions.push_back(f);
    build_functions(c.functions, "functions");
  }

  if (j.contains("initial")) {
    const Json& in = j["initial"];
    only_keys(in, "initial", {"rho", "theta", "state"});
    if (in.contains("rho")) c.rho = number(in["rho"], "initial.rho");
    if (in.contains("theta")) c.theta = number(in["theta"], "initial.theta");
    if (in.contains("state")) {
      if (!in["state"].is_array()) fail("initial.state", "expected a list");
      for (std::size_t k = 0; k < in["state"].size(); ++k)
        c.state.push_back(complex(in["state"][k], index("initial.state", k)));
      if (static_cast<int>(c.state.size()) != c.order)
        fail("initial.state", "expected " + std::to_string(c.order) + " values");
    }
  }
  if (!(c.rho > 0.0)) fail("initial.rho", "must be positive");

  if (j.contains("parameters")) {
    const Json& pj = j["parameters"];
    only_keys(pj, "parameters", {"eta", "density_eta", "C", "R_mode", "eps", "sigma", "c", "c1"});
    Parameters& p = c.params;
    if (pj.contains("eta")) p.eta = number_list(pj["eta"], "parameters.eta");
    if (pj.contains("density_eta")) p.density_eta = number_list(pj["density_eta"], "parameters.density_eta");
    if (pj.contains("C")) p.C = number(pj["C"], "parameters.C");
    if (pj.contains("R_mode")) p.R_mode = string(pj["R_mode"], "parameters.R_mode");
    if (pj.contains("eps")) p.eps = number(pj["eps"], "parameters.eps");
    if (pj.contains("sigma")) p.sigma = number(pj["sigma"], "parameters.sigma");
    if (pj.contains("c")) p.c = number(pj["c"], "parameters.c");
    if (pj.contains("c1")) p.c1 = number(pj["c1"], "parameters.c1");
    for (std::size_t k = 0; k < p.eta.size(); ++k)
      if (!(p.eta[k] > 0.0) || p.eta[k] > kEtaMax) fail(index("parameters.eta", k), "must lie in (0, 3e/2]");
    for (std::size_t k = 0; k < p.density_eta.size(); ++k)
      if (!(p.density_eta[k] > 0.0) || p.density_eta[k] > kEtaMax)
        fail(index("parameters.density_eta", k), "must lie in (0, 3e/2]");
    if (!(p.C > 1.0)) fail("parameters.C", "must exceed 1");
    if (p.R_mode != "3er") fail("parameters.R_mode", "only \"3er\" is supported");
    if (!(p.eps > 0.0)) fail("parameters.eps", "must be positive");
    if (!(p.c > 0.0)) fail("parameters.c", "must be positive");
    if (!(p.c1 > 0.0)) fail("parameters.c1", "must be positive");
  }
  if (j.contains("radii")) c.radii = number_list(j["radii"], "radii");
  for (std::size_t k = 0; k < c.radii.size(); ++k)
    if (!(c.radii[k] > c.rho)) fail(index("radii", k), "must exceed initial.rho");

  if (j.contains("grid")) {
    const Json& g = j["grid"];
    only_keys(g, "grid", {"min", "max", "points", "spacing"});
    if (g.contains("min")) c.grid.min = number(g["min"], "grid.min");
    if (g.contains("max")) c.grid.max = number(g["max"], "grid.max");
    if (g.contains("points")) c.grid.points = integer(g["points"], "grid.points");
    if (g.contains("spacing")) c.grid.spacing = string(g["spacing"], "grid.spacing");
    if (c.grid.spacing != "log" && c.grid.spacing != "linear") fail("grid.spacing", "must be \"log\" or \"linear\"");
  }
  if (j.contains("tol")) c.tol = number(j["tol"], "tol");
  if (!(c.tol > 0.0)) fail("tol", "must be positive");
  return c;
}

/// Parse JSON text; syntax errors report line and column.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "config") {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": syntax error");
  }
  try {
    return config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.string());
}

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  Json eq;
  eq["order"] = c.order;
  eq["coefficients"] = c.coefficients;
  if (!c.y_poles.empty()) {
    Json yp = Json::array();
    for (const RootMult& p : c.y_poles) yp.push_back({{"at", detail::complex_json(p.at)}, {"mult", p.mult}});
    eq["y_poles"] = yp;
  }
  j["equation"] = eq;
  if (!c.solution.empty()) j["solution"] = c.solution;
  if (!c.functions.empty()) j["functions"] = c.functions;
  Json in;
  in["rho"] = c.rho;
  in["theta"] = c.theta;
  if (!c.state.empty()) {
    Json st = Json::array();
    for (Complex v : c.state) st.push_back(detail::complex_json(v));
    in["state"] = st;
  }
  j["initial"] = in;
  j["parameters"] = {{"eta", c.params.eta}, {"density_eta", c.params.density_eta}, {"C", c.params.C},         {"R_mode", c.params.R_mode},
                     {"eps", c.params.eps}, {"sigma", c.params.sigma}, {"c", c.params.c},
                     {"c1", c.params.c1}};
  j["radii"] = c.radii;
  j["grid"] = {{"min", c.grid.min}, {"max", c.grid.max}, {"points", c.grid.points}, {"spacing", c.grid.spacing}};
  j["tol"] = c.tol;
  return j;
}

inline std::string serialize(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return to_json(a) == to_json(b); }

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string config_hash(const ExperimentConfig& c) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(to_json(c).dump());
  return os.str();
}

// ---------------------------------------------------------------------------
// Execution

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<double> tol;
  int threads = 1;
  std::uint64_t seed = 0;
};

struct TaskStatus {
  std::string id;
  std::string status;  ///< PASS, FAIL, INCONCLUSIVE, OK or ERROR
  std::string detail;
};

struct RunResult {
  int exit_code = 0;
  std::vector<TaskStatus> tasks;
  std::vector<std::string> files;  ///< relative to out_dir
  std::string error;               ///< set when the run was rejected or aborted
};

/// Run `work(k)` for k in [0, count) on up to `threads` workers; results keep
/// index order and exceptions are stored per index.
template <class R>
std::vector<std::pair<std::optional<R>, std::exception_ptr>> dispatch(std::size_t count, int threads,
                                                                      const std::function<R(std::size_t)>& work) {
  std::vector<std::pair<std::optional<R>, std::exception_ptr>> out(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        out[k].first.emplace(work(k));
      } catch (...) {
        out[k].second = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, std::max<std::size_t>(count, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

inline std::string describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const Error& err) {
    return std::string(err.kind()) + ": " + err.what();
  } catch (const std::exception& err) {
    return err.what();
  }
}

namespace detail {

class Outputs {
public:
  explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << content;
    files_.push_back(name);
  }
  const std::vector<std::string>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }

private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

/// Move the state from rho e^{i from} to rho e^{i to} along the arc, in chords
/// of at most 2 pi / 64.
inline StateVector transport_on_arc(const CompanionSystem& sys, double rho, double from, double to, StateVector F,
                                    double tol) {
  double delta = std::remainder(to - from, 2.0 * kPi);
  const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(delta) / (2.0 * kPi / 64.0))));
  for (int k = 0; k < pieces; ++k) {
    const Complex a = std::polar(rho, from + delta * k / pieces);
    const Complex b = std::polar(rho, from + delta * (k + 1) / pieces);
    F = integrate_segment(sys, a, b, F, 0.05 * tol);
  }
  return F;
}

inline Json manifest(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opt, double tol,
                     const RunResult& res) {
  Json j;
  j["tool"] = "nevgrowth";
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = cfg.name;
  j["config_hash"] = config_hash(cfg);
  j["tol"] = tol;
  j["seed"] = opt.seed;
  j["exit_code"] = res.exit_code;
  if (!res.error.empty()) j["error"] = res.error;
  Json tasks = Json::array();
  for (const TaskStatus& t : res.tasks) {
    Json tj{{"id", t.id}, {"status", t.status}};
    if (!t.detail.empty()) tj["detail"] = t.detail;
    tasks.push_back(tj);
  }
  j["tasks"] = tasks;
  Json files = Json::array();
  for (const std::string& f : res.files)
    files.push_back({{"path", f}, {"bytes", std::filesystem::file_size(opt.out_dir / f)}});
  j["files"] = files;
  return j;
}

}  // namespace detail

struct Prepared {
  CompanionSystem sys;
  std::vector<MeromorphicFn> solution;
};

inline Prepared prepare(const ExperimentConfig& cfg) {
  return {CompanionSystem(build_functions(cfg.coefficients, "equation.coefficients"), cfg.name),
          build_functions(cfg.solution, "solution")};
}

/// Initial state at the start of the selected path.
inline InitialState initial_state(const ExperimentConfig& cfg, const Prepared& prep, double tol) {
  if (!cfg.state.empty()) {
    StateVector given(cfg.state.begin(), cfg.state.end());
    return [given, &prep, rho = cfg.rho, theta = cfg.theta, tol](const PathOmega& path) {
      if (std::abs(std::remainder(path.theta0() - theta, 2.0 * kPi)) < 1e-15) return given;
      return detail::transport_on_arc(prep.sys, rho, theta, path.theta0(), given, tol);
    };
  }
  return [&prep](const PathOmega& path) {
    StateVector F;
    for (const MeromorphicFn& f : prep.solution) F.push_back(f(path.start()));
    return F;
  };
}

inline StateVector state_at_config_point(const ExperimentConfig& cfg, const Prepared& prep) {
  if (!cfg.state.empty()) return {cfg.state.begin(), cfg.state.end()};
  StateVector F;
  for (const MeromorphicFn& f : prep.solution) F.push_back(f(std::polar(cfg.rho, cfg.theta)));
  return F;
}

inline RunResult cmd_nevanlinna(const ExperimentConfig& cfg, const RunOptions& opt, detail::Outputs& out) {
  RunResult res;
  const RadiusGrid grid = cfg.grid.build();
  const Prepared prep = prepare(cfg);
  struct Item {
    std::string file;
    MeromorphicFn f;
  };
  std::vector<Item> items;
  for (std::size_t k = 0; k < prep.sys.coefficients().size(); ++k)
    items.push_back({"coef" + std::to_string(k) + ".csv", prep.sys.coefficient(static_cast<int>(k))});
  for (std::size_t k = 0; k < prep.solution.size(); ++k)
    items.push_back({"y" + std::to_string(k) + ".csv", prep.solution[k]});
  const auto extra = build_functions(cfg.functions, "functions");
  for (std::size_t k = 0; k < extra.size(); ++k) items.push_back({"fn" + std::to_string(k) + ".csv", extra[k]});

  const std::function<std::string(std::size_t)> work = [&](std::size_t k) {
    std::ostringstream os;
    if (k == items.size()) {
      write_profile_csv(os, coefficient_envelope(prep.sys.coefficients(), grid));
    } else {
      write_profile_csv(os, characteristic(items[k].f, grid));
    }
    return os.str();
  };
  const auto results = dispatch(items.size() + 1, opt.threads, work);
  for (std::size_t k = 0; k < results.size(); ++k) {
    const std::string id = k == items.size() ? "envelope" : items[k].f.name();
    const std::string file = k == items.size() ? "envelope.csv" : items[k].file;
    if (results[k].second) {
      res.tasks.push_back({id, "ERROR", describe(results[k].second)});
      res.exit_code = 1;
      continue;
    }
    out.write(file, *results[k].first);
    res.tasks.push_back({id, "OK", file});
  }
  return res;
}

inline RunResult cmd_certify(const ExperimentConfig& cfg, const RunOptions& opt, detail::Outputs& out, double tol) {
  RunResult res;
  if (cfg.state.empty() && cfg.solution.empty())
    throw ConfigError("certify needs initial.state or a solution to start from");
  const Prepared prep = prepare(cfg);
  const InitialState init = initial_state(cfg, prep, tol);
  struct Point {
    double eta, r;
  };
  std::vector<Point> sweep;
  for (double eta : cfg.params.eta)
    for (double r : cfg.radii) sweep.push_back({eta, r});

  const std::function<TheoremCertificate(std::size_t)> work = [&](std::size_t k) {
    CertifyRequest req;
    req.rho = cfg.rho;
    req.r = sweep[k].r;
    req.eta = sweep[k].eta;
    req.tol = tol;
    req.theta_pref = cfg.theta;
    req.C = cfg.params.C;
    return certify_at(prep.sys, cfg.y_poles, init, req);
  };
  auto results = dispatch(sweep.size(), opt.threads, work);

  Json certs = Json::array();
  std::ostringstream summary;
  CsvWriter w(summary, {"index", "eta", "r", "r_used", "theta0", "status", "log_measured", "log_bound", "log_tightness",
                        "B", "q", "disks_honored", "origin_pole_branch"});
  for (std::size_t k = 0; k < results.size(); ++k) {
    std::ostringstream id;
    id << "eta=" << format_number(sweep[k].eta) << ",r=" << format_number(sweep[k].r);
    if (results[k].second) {
      const std::string msg = describe(results[k].second);
      res.tasks.push_back({id.str(), "ERROR", msg});
      w.row(static_cast<int>(k), sweep[k].eta, sweep[k].r, "", "", "ERROR", "", "", "", "", "", "", "");
      certs.push_back({{"index", k}, {"status", "ERROR"}, {"error", msg}});
      res.exit_code = 1;
      continue;
    }
    const TheoremCertificate& c = *results[k].first;
    Json cj = to_json(c);
    cj["index"] = k;
    certs.push_back(cj);
    w.row(static_cast<int>(k), c.eta, c.r_requested, c.r, c.theta0, to_string(c.status), c.log_measured, c.log_bound,
          c.log_tightness, c.B, c.q, c.disks_honored, c.origin_pole_branch);
    res.tasks.push_back({id.str(), to_string(c.status), c.note});
    if (c.status != Status::pass) res.exit_code = 1;
    if (!c.trajectory.points.empty()) {
      const PathOmega path(c.theta0, c.rho, c.r);
      std::vector<double> s;
      for (const auto& p : c.trajectory.points) s.push_back(p.s);
      const auto env = gronwall_log_cumulative(prep.sys, path, c.trajectory.points.front().F, s);
      std::ostringstream traj;
      write_trajectory_csv(traj, c.trajectory, env);
      out.write("trajectory_" + std::to_string(k) + ".csv", traj.str());
    }
  }
  out.write("certificates.json", certs.dump(2) + "\n");
  out.write("summary.csv", summary.str());
  return res;
}

inline void require_density_eta(double eta) {
  const double thr = density_eta_threshold();
  if (!(eta < thr)) {
    std::ostringstream os;
    os << std::setprecision(17) << "eta = " << eta << " is not below the threshold (1+log 2)/(16 e^{5/2}) = " << thr;
    throw EtaTooLarge(os.str());
  }
}

/// Radii where the Levin disks of the coefficient poles may spoil the bound.
inline RadialExceptionalSet coefficient_exceptional_set(const CompanionSystem& sys, double eta, double r_max) {
  return annular_exceptional_set(sys.poles_within(400.0 * r_max), eta, r_max);
}

inline RunResult cmd_density(const ExperimentConfig& cfg, const RunOptions& opt, detail::Outputs& out) {
  RunResult res;
  for (double eta : cfg.params.density_eta) require_density_eta(eta);
  if (cfg.solution.empty()) throw ConfigError("density needs the solution y, y', ... in 'solution'");
  const RadiusGrid grid = cfg.grid.build();
  const Prepared prep = prepare(cfg);

  struct EtaResult {
    DensityCertificate cert;
    DensityReport lemma;
    RadialExceptionalSet eset;
    double B;
  };
  const std::function<EtaResult(std::size_t)> work = [&](std::size_t k) {
    const double eta = cfg.params.density_eta[k];
    BoundContext ctx = make_context(prep.sys, std::min(cfg.rho, grid.front()), grid.back(), eta, kE);
    EtaResult r;
    r.eset = coefficient_exceptional_set(prep.sys, eta, grid.back());
    r.cert = certify_density(prep.solution, grid, ctx, cfg.params.eps, r.eset);
    std::vector<double> lemma_radii;
    for (double t : grid.radii())
      if (t > 1.0) lemma_radii.push_back(t);
    r.lemma = verify_density_lemma(r.eset, eta, lemma_radii);
    r.B = ctx.B;
    return r;
  };
  auto results = dispatch(cfg.params.density_eta.size(), opt.threads, work);

  std::ostringstream rows, lemma;
  CsvWriter w(rows, {"eta", "r", "j", "log_m", "rhs", "exceptional", "pass"});
  CsvWriter wl(lemma, {"eta", "r", "density", "ceiling", "pass"});
  Json summary = Json::array();
  for (std::size_t k = 0; k < results.size(); ++k) {
    const double eta = cfg.params.density_eta[k];
    const std::string id = "eta=" + format_number(eta);
    if (results[k].second) {
      res.tasks.push_back({id, "ERROR", describe(results[k].second)});
      res.exit_code = 1;
      continue;
    }
    const EtaResult& er = *results[k].first;
    for (const auto& row : er.cert.rows) w.row(eta, row.r, row.j, row.log_m, row.rhs, row.exceptional, row.pass);
    for (const auto& row : er.lemma.rows) wl.row(eta, row.r, row.density, row.ceiling, row.pass);
    const bool ok = er.cert.status == Status::pass && er.lemma.pass;
    summary.push_back({{"eta", eta},
                       {"status", ok ? "PASS" : "FAIL"},
                       {"violations", er.cert.violations},
                       {"r_eps", std::isfinite(er.cert.r_eps) ? Json(er.cert.r_eps) : Json(nullptr)},
                       {"B", er.B},
                       {"max_density", er.lemma.max_density},
                       {"ceiling", density_ceiling(eta)},
                       {"density_lemma", er.lemma.pass ? "PASS" : "FAIL"},
                       {"exceptional_set", nevgrowth::to_json(er.eset)}});
    res.tasks.push_back({id, ok ? "PASS" : "FAIL", ""});
    if (!ok) res.exit_code = 1;
  }
  out.write("density.csv", rows.str());
  out.write("density_lemma.csv", lemma.str());
  out.write("density_summary.json", summary.dump(2) + "\n");
  return res;
}

struct CompareRow {
  double r = 0.0;
  double T_y = 0.0;
  double log_new_bound = 0.0;
  double density_rhs = 0.0;
  double log_bank_laine = 0.0;
  double log_sum_T_bound = 0.0;  ///< NaN when the coefficients are all constant
};

inline RunResult cmd_compare(const ExperimentConfig& cfg, const RunOptions& opt, detail::Outputs& out) {
  RunResult res;
  if (!(cfg.params.sigma > 1.0)) throw ConfigError("field 'parameters.sigma': must exceed 1");
  if (cfg.solution.empty()) throw ConfigError("compare needs the solution y in 'solution'");
  const RadiusGrid grid = cfg.grid.build();
  if (!(grid.front() > 1.0)) throw ConfigError("field 'grid.min': compare needs radii above 1");
  const Prepared prep = prepare(cfg);
  const MeromorphicFn& y = prep.solution[0];
  if (!y.zeros_known()) throw ConfigError("compare needs the zeros of y; '" + y.name() + "' has none declared");
  const double eta = cfg.params.eta.front();
  const double density_eta = cfg.params.density_eta.front();
  const bool density_ok = density_eta < density_eta_threshold();
  const BoundContext base = make_context(prep.sys, std::min(cfg.rho, grid.front()), grid.back(), eta, cfg.params.C);
  const double K1 = norm1(state_at_config_point(cfg, prep));
  const bool all_constant = std::all_of(prep.sys.coefficients().begin(), prep.sys.coefficients().end(),
                                        [](const MeromorphicFn& f) { return f.is_constant(); });
  const bool zero_free = y.zeros_within(cfg.params.sigma * grid.back()).empty();

  const std::function<CompareRow(std::size_t)> work = [&](std::size_t k) {
    const double r = grid.radii()[k];
    BoundContext ctx = base;
    ctx.r = r;
    ctx.R = 3.0 * kE * r;
    CompareRow row;
    row.r = r;
    row.T_y = characteristic_safe(y, r);
    // T(r, y) <= N(r, y) + log+ K1 + (2 pi + 1) r D
    double N = 0.0;
    for (double rr = r, tries = 0; tries < 8; ++tries, rr *= 1.0 + 1e-6) {
      try {
        N = counting(y, rr);
        break;
      } catch (const PoleOnCircle&) {
      }
    }
    const double growth = std::log(kPathFactor * r) + D_constant(ctx).log;
    const double rest = N + std::max(0.0, std::log(K1));
    row.log_new_bound = rest > 0.0 ? log_add(std::log(rest), growth) : growth;
    BoundContext dctx = ctx;
    dctx.eta = density_eta;
    row.density_rhs = density_ok ? density_bound_rhs(dctx, r, cfg.params.eps) : std::nan("");
    row.log_bank_laine =
        bank_laine_log_rhs(y, prep.sys.coefficients(), cfg.params.sigma, cfg.params.c, cfg.params.c1, r);
    row.log_sum_T_bound = std::nan("");
    if (!all_constant) {
      try {
        row.log_sum_T_bound = sum_T_log_rhs(prep.sys.coefficients(), cfg.params.sigma, r);
      } catch (const DomainError&) {
        // (log r) log(sum T) <= 0: the formula is undefined at this radius
      }
    }
    return row;
  };
  auto results = dispatch(grid.size(), opt.threads, work);

  std::ostringstream os;
  CsvWriter w(os, {"r", "T_y", "log_new_bound", "new_bound", "density_rhs", "log_bank_laine", "log_sum_T_bound"});
  w.comment("eta=" + format_number(eta) + " B=" + format_number(base.B) + " C=" + format_number(base.C) +
            " R=3er sigma=" + format_number(cfg.params.sigma) + " c=" + format_number(cfg.params.c) +
            " c1=" + format_number(cfg.params.c1));
  if (zero_free) w.comment("y has no zeros: J(r) = Phi(r)");
  if (all_constant) w.comment("coefficients are constant: log_sum_T_bound column left blank");
  else w.comment("log_sum_T_bound is blank where (log r) log(sum T) <= 0");
  if (!density_ok) w.comment("density_eta is not below the density threshold: density_rhs column left blank");
  Json rows = Json::array();
  for (std::size_t k = 0; k < results.size(); ++k) {
    const std::string id = "r=" + format_number(grid.radii()[k]);
    if (results[k].second) {
      res.tasks.push_back({id, "ERROR", describe(results[k].second)});
      res.exit_code = 1;
      continue;
    }
    const CompareRow& row = *results[k].first;
    w.row(row.r, row.T_y, row.log_new_bound, std::exp(row.log_new_bound), row.density_rhs, row.log_bank_laine,
          row.log_sum_T_bound);
    res.tasks.push_back({id, "OK", ""});
  }
  out.write("compare.csv", os.str());
  Json meta{{"eta", eta},           {"H", H(eta)},          {"B", base.B},
            {"C", base.C},          {"sigma", cfg.params.sigma}, {"K1", K1},
            {"zero_free", zero_free}, {"predicted_slope", 5.0 * base.B * (1.0 + H(eta)) * 3.0 * kE * kE / kPi}};
  out.write("compare_meta.json", meta.dump(2) + "\n");
  return res;
}

/// Run one command end to end: validation failures give exit 2, numeric
/// failures or non-passing certificates exit 1, success exits 0. A manifest
/// is always written when the output directory can be created.
inline RunResult run(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opt,
                     std::ostream& err = std::cerr) {
  const double tol = opt.tol.value_or(cfg.tol);
  RunResult res;
  detail::Outputs out(opt.out_dir);
  try {
    if (!(tol > 0.0)) throw ConfigError("--tol must be positive");
    if (command == "nevanlinna") {
      res = cmd_nevanlinna(cfg, opt, out);
    } else if (command == "certify") {
      res = cmd_certify(cfg, opt, out, tol);
    } else if (command == "density") {
      res = cmd_density(cfg, opt, out);
    } else if (command == "compare") {
      res = cmd_compare(cfg, opt, out);
    } else {
      throw ConfigError("unknown command '" + command + "'");
    }
  } catch (const ConfigError& e) {
    res.exit_code = 2;
    res.error = std::string(e.kind()) + ": " + e.what();
  } catch (const EtaTooLarge& e) {
    res.exit_code = 2;
    res.error = std::string(e.kind()) + ": " + e.what();
  } catch (const Error& e) {
    res.exit_code = 1;
    res.error = std::string(e.kind()) + ": " + e.what();
  }
  res.files = out.files();
  for (const TaskStatus& t : res.tasks)
    if (t.status == "ERROR") err << cfg.name << " " << t.id << ": " << t.detail << '\n';
  if (!res.error.empty()) err << cfg.name << ": " << res.error << '\n';
  const Json m = detail::manifest(command, cfg, opt, tol, res);
  out.write("manifest.json", m.dump(2) + "\n");
  return res;
}

}  // namespace nevgrowth::experiment
