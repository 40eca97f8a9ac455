#include "ablab/experiment.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "ablab/errors.hpp"
#include "ablab/propagator.hpp"

#ifndef ABLAB_VERSION
#define ABLAB_VERSION "0.0.0"
#endif

namespace ablab {

using nlohmann::json;

const char* tool_version() { return ABLAB_VERSION; }

// ---------------------------------------------------------------------------------------------
// config

GeometryParams GeometryParams::scaled(double core_radius) {
  GeometryParams g;
  g.half_width = 2.0 * core_radius;
  g.y_min = -4.0 * core_radius;
  g.y_max = 4.0 * core_radius;
  g.source = {0.0, -10.0 * core_radius};
  g.detector = {0.0, 10.0 * core_radius};
  return g;
}

LatticeGeometry GeometryParams::lattice_geometry() const {
  return {ForbiddenVolume(half_width, y_min, y_max), {source[0], source[1], 0.0}, {detector[0], detector[1], 0.0}};
}

std::vector<double> EpsilonSweep::values() const {
  std::vector<double> v;
  if (count == 1) return {start};
  for (int i = 0; i < count; ++i) v.push_back(start + (stop - start) * i / (count - 1));
  return v;
}

EpsilonSweep EpsilonSweep::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ':');) parts.push_back(item);
  if (parts.size() != 3) throw ValidationError("--epsilon: expected start:stop:count, got '" + text + "'");
  EpsilonSweep e;
  try {
    std::size_t used = 0;
    e.start = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("start");
    e.stop = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("stop");
    e.count = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("count");
  } catch (const std::exception&) {
    throw ValidationError("--epsilon: could not parse '" + text + "' as start:stop:count");
  }
  return e;
}

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_ + ": expected an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ValidationError(path_ + "." + key + ": unknown key");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    const std::string where = path_ + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ValidationError(where + ": expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ValidationError(where + ": expected an integer");
      if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned())
        throw ValidationError(where + ": expected a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ValidationError(where + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ValidationError(where + ": expected a string");
    } else {
      if (!v.is_array() || v.size() != std::tuple_size_v<T>)
        throw ValidationError(where + ": expected an array of " + std::to_string(std::tuple_size_v<T>) + " numbers");
      for (const auto& x : v)
        if (!x.is_number()) throw ValidationError(where + ": expected an array of numbers");
    }
    out = v.get<T>();
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    return Reader(j_.contains(key) ? j_.at(key) : empty(), path_ + "." + key);
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ValidationError("config." + key + ": " + what);
}

bool finite_all(std::initializer_list<double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

template <class F>
void prefixed(const std::string& key, F&& check) {
  try {
    check();
  } catch (const ValidationError& e) {
    throw ValidationError("config." + key + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  Reader root(j, "config");
  {
    Reader f = root.child("field");
    f.get("F", c.field.flux_density);
    f.get("rho_a", c.field.core_radius);
    std::string mode = to_string(c.field.mode);
    f.get("mode", mode);
    prefixed("field.mode", [&] { c.field.mode = field_mode_from_string(mode); });
  }
  {
    Reader k = root.child("constants");
    k.get("hbar", c.hbar);
    k.get("mass", c.mass);
  }
  c.geometry = GeometryParams::scaled(c.field.core_radius);
  {
    Reader g = root.child("geometry");
    g.get("half_width", c.geometry.half_width);
    g.get("y_min", c.geometry.y_min);
    g.get("y_max", c.geometry.y_max);
    g.get("source", c.geometry.source);
    g.get("detector", c.geometry.detector);
  }
  {
    Reader e = root.child("epsilon");
    e.get("start", c.epsilon.start);
    e.get("stop", c.epsilon.stop);
    e.get("count", c.epsilon.count);
  }
  {
    Reader l = root.child("lattice");
    l.get("cells", c.lattice.cells);
    l.get("spacing", c.lattice.spacing);
    l.get("time_step", c.lattice.time_step);
    l.get("steps", c.lattice.steps);
    l.get("absorbing", c.lattice.absorbing);
    l.get("packet_width", c.lattice.packet_width);
    l.get("packet_wavenumber", c.lattice.packet_wavenumber);
    l.get("series_terms", c.lattice.series_terms);
  }
  {
    Reader s = root.child("ensemble");
    s.get("n_paths", c.ensemble.n_paths);
    s.get("n_slices", c.ensemble.n_slices);
    s.get("sigma", c.ensemble.sigma);
    s.get("seed", c.ensemble.seed);
    s.get("duration", c.ensemble.duration);
  }
  {
    Reader g = root.child("geodesic");
    g.get("connection", c.geodesic.connection);
    g.get("omega", c.geodesic.omega);
    g.get("steps", c.geodesic.steps);
    g.get("tau_span", c.geodesic.tau_span);
    g.get("position", c.geodesic.position);
    g.get("velocity", c.geodesic.velocity);
    g.get("samples", c.geodesic.samples);
  }
  {
    Reader t = root.child("tolerances");
    t.get("quadrature", c.tolerances.quadrature);
    t.get("lattice_fit", c.tolerances.lattice_fit);
    t.get("oracle", c.tolerances.oracle);
  }
  root.get("output_dir", c.output_dir);
  root.get("threads", c.threads);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config file " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::canonical() const {
  return json{
      {"field", {{"F", field.flux_density}, {"rho_a", field.core_radius}, {"mode", to_string(field.mode)}}},
      {"constants", {{"hbar", hbar}, {"mass", mass}}},
      {"geometry",
       {{"half_width", geometry.half_width},
        {"y_min", geometry.y_min},
        {"y_max", geometry.y_max},
        {"source", geometry.source},
        {"detector", geometry.detector}}},
      {"epsilon", {{"start", epsilon.start}, {"stop", epsilon.stop}, {"count", epsilon.count}}},
      {"lattice",
       {{"cells", lattice.cells},
        {"spacing", lattice.spacing},
        {"time_step", lattice.time_step},
        {"steps", lattice.steps},
        {"absorbing", lattice.absorbing},
        {"packet_width", lattice.packet_width},
        {"packet_wavenumber", lattice.packet_wavenumber},
        {"series_terms", lattice.series_terms}}},
      {"ensemble",
       {{"n_paths", ensemble.n_paths},
        {"n_slices", ensemble.n_slices},
        {"sigma", ensemble.sigma},
        {"seed", ensemble.seed},
        {"duration", ensemble.duration}}},
      {"geodesic",
       {{"connection", geodesic.connection},
        {"omega", geodesic.omega},
        {"steps", geodesic.steps},
        {"tau_span", geodesic.tau_span},
        {"position", geodesic.position},
        {"velocity", geodesic.velocity},
        {"samples", geodesic.samples}}},
      {"tolerances",
       {{"quadrature", tolerances.quadrature}, {"lattice_fit", tolerances.lattice_fit}, {"oracle", tolerances.oracle}}},
  };
}

std::string ExperimentConfig::hash() const { return fmt::format("{:016x}", fnv1a(canonical().dump())); }

std::optional<FluxTubeField> ExperimentConfig::make_field() const {
  if (field.flux_density == 0.0) return std::nullopt;
  return FluxTubeField(field.flux_density, field.core_radius, field.mode);
}

void ExperimentConfig::validate() const {
  require(std::isfinite(field.flux_density), "field.F", "must be finite");
  require(field.core_radius > 0.0 && std::isfinite(field.core_radius), "field.rho_a", "must be > 0");
  require(hbar > 0.0 && std::isfinite(hbar), "constants.hbar", "must be > 0");
  require(mass > 0.0 && std::isfinite(mass), "constants.mass", "must be > 0");

  require(geometry.half_width > 0.0 && std::isfinite(geometry.half_width), "geometry.half_width", "must be > 0");
  require(finite_all({geometry.y_min, geometry.y_max}) && geometry.y_min < geometry.y_max, "geometry.y_min",
          "must be finite and below geometry.y_max");
  require(finite_all({geometry.source[0], geometry.source[1]}), "geometry.source", "must be finite");
  require(finite_all({geometry.detector[0], geometry.detector[1]}), "geometry.detector", "must be finite");
  const LatticeGeometry lg = geometry.lattice_geometry();
  prefixed("geometry", [&] { lg.barrier.require_contains_core(field.core_radius); });
  const bool upward = geometry.source[1] < geometry.y_min && geometry.detector[1] > geometry.y_max;
  const bool downward = geometry.source[1] > geometry.y_max && geometry.detector[1] < geometry.y_min;
  require(upward || downward, "geometry.source", "source and detector must lie beyond opposite ends of the barrier");

  require(epsilon.count >= 1, "epsilon.count", "must be >= 1");
  require(finite_all({epsilon.start, epsilon.stop}), "epsilon.start", "start and stop must be finite");
  require(epsilon.count == 1 || epsilon.stop > epsilon.start, "epsilon.stop", "must exceed epsilon.start");

  prefixed("lattice", [&] {
    validate_lattice_setup(lg, lattice, field.flux_density != 0.0 ? std::optional(field.core_radius) : std::nullopt,
                           mass, hbar);
  });

  require(ensemble.n_paths >= 1, "ensemble.n_paths", "must be >= 1");
  require(ensemble.n_slices >= 2, "ensemble.n_slices", "must be >= 2");
  require(ensemble.sigma >= 0.0 && std::isfinite(ensemble.sigma), "ensemble.sigma", "must be >= 0");
  require(ensemble.duration > 0.0 && std::isfinite(ensemble.duration), "ensemble.duration", "must be > 0");
  prefixed("ensemble", [&] {
    for (Side side : {Side::left, Side::right})
      reference_detour(lg.source, lg.detector, side, lg.barrier, ensemble.n_slices, ensemble.duration);
  });

  require(geodesic.connection == "flat" || geodesic.connection == "rotating", "geodesic.connection",
          "unknown connection '" + geodesic.connection + "' (expected flat or rotating)");
  require(geodesic.steps >= 2, "geodesic.steps", "must be >= 2");
  require(geodesic.tau_span > 0.0 && std::isfinite(geodesic.tau_span), "geodesic.tau_span", "must be > 0");
  require(geodesic.samples >= 1, "geodesic.samples", "must be >= 1");
  require(std::isfinite(geodesic.omega), "geodesic.omega", "must be finite");
  if (geodesic.connection == "rotating")
    prefixed("geodesic", [&] { rotating_timelike_start(geodesic.omega, geodesic.position, geodesic.velocity); });

  require(tolerances.quadrature > 0.0, "tolerances.quadrature", "must be > 0");
  require(tolerances.lattice_fit > 0.0, "tolerances.lattice_fit", "must be > 0");
  require(tolerances.oracle > 0.0, "tolerances.oracle", "must be > 0");
  require(threads >= 1, "threads", "must be >= 1");
}

// ---------------------------------------------------------------------------------------------
// runs

RunContext::RunContext(std::string subcommand_, const ExperimentConfig& config)
    : subcommand(std::move(subcommand_)), config_hash(config.hash()), dir(config.output_dir) {
  run_id = fmt::format("{}-{:08x}", subcommand, fnv1a(subcommand + ":" + config_hash) & 0xffffffffULL);
}

FieldCheckReport run_field_check(const ExperimentConfig& config) {
  config.validate();
  if (config.field.flux_density == 0.0)
    throw ValidationError("config.field.F: field-check needs a nonzero field");
  const double ra = config.field.core_radius;
  const double tol = config.tolerances.oracle;
  FieldCheckReport report;
  report.pass = true;

  for (FieldMode mode : {FieldMode::ab_standard, FieldMode::literal}) {
    const FluxTubeField f(config.field.flux_density, ra, mode);
    const std::string name = to_string(mode);
    const auto add = [&](const std::string& check, double value, double tolerance) {
      const bool pass = std::abs(value) <= tolerance;
      report.rows.push_back({name, check, value, tolerance, pass});
      if (mode == config.field.mode && !pass) report.pass = false;
    };

    double jump = 0.0;
    for (int k = 0; k < 64; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / 64;
      const Vector3 in = f.eval(CartPoint{ra * std::cos(phi), ra * std::sin(phi), 0.0});
      const double r = ra * (1.0 + 1e-12);
      const Vector3 out = f.eval(CartPoint{r * std::cos(phi), r * std::sin(phi), 0.0});
      jump = std::max(jump, norm(out - in));
    }
    add("continuity_at_core", jump, tol);

    std::mt19937_64 rng(config.ensemble.seed);
    std::uniform_real_distribution<double> u(-4.0 * ra, 4.0 * ra);
    const double h = 1e-4 * ra;
    double curl_gap = 0.0;
    double exterior_curl = 0.0;
    for (int accepted = 0; accepted < 1000;) {
      const CartPoint p{u(rng), u(rng), u(rng)};
      const double rho = std::hypot(p.x, p.y);
      if (std::abs(rho - ra) < 4.0 * h) continue;
      ++accepted;
      const Vector3 numeric = curl_numeric(f, p, h);
      const CylComponents exact = f.curl(CylPoint(rho, std::atan2(p.y, p.x), p.z));
      curl_gap = std::max(curl_gap, norm(numeric - Vector3{0.0, 0.0, exact.z}));
      if (rho > ra) exterior_curl = std::max(exterior_curl, std::abs(numeric.z));
    }
    add("curl_vs_finite_difference", curl_gap, tol);
    add("exterior_curl_free", exterior_curl, tol);

    add("stokes_residual_r2", stokes_residual(f, Polyline::circle(0.0, 0.0, 2.0 * ra, 8192)), tol);

    const Polyline straight({{-3.0 * ra, -3.0 * ra, 0.0}, {3.0 * ra, -3.0 * ra, 0.0}}, false);
    const Polyline bent({{-3.0 * ra, -3.0 * ra, 0.0}, {0.0, -6.0 * ra, 0.0}, {3.0 * ra, -3.0 * ra, 0.0}}, false);
    add("path_independence", path_independence_gap(f, straight, bent), config.tolerances.quadrature);
  }
  return report;
}

namespace {

std::optional<PhaseFit> try_fit(const std::vector<double>& eps, const std::vector<double>& y, std::string& note) {
  try {
    return phase_fit(eps, y);
  } catch (const ValidationError& e) {
    note = e.what();
    return std::nullopt;
  }
}

}  // namespace

SweepReport run_sweep(const ExperimentConfig& config) {
  config.validate();
  const auto field = config.make_field();
  const LatticeGeometry g = config.geometry.lattice_geometry();
  const std::vector<double> eps = config.epsilon.values();

  const LatticeCrossTerms ct = lattice_alpha_beta(g, config.lattice, config.mass, config.hbar, config.threads);
  const auto runs = lattice_sweep(g, config.lattice, field, eps, config.mass, config.hbar, config.threads);
  const Polyline right =
      reference_detour(g.source, g.detector, Side::right, g.barrier, config.ensemble.n_slices, config.ensemble.duration)
          .polyline();
  const Polyline left =
      reference_detour(g.source, g.detector, Side::left, g.barrier, config.ensemble.n_slices, config.ensemble.duration)
          .polyline();

  SweepReport report;
  report.alpha = ct.terms.alpha;
  report.beta = ct.terms.beta;
  const double baseline = std::norm(ct.right) + std::norm(ct.left);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    SweepRow row;
    row.epsilon = eps[i];
    const InterferenceResult analytic = interference_analytic(report.alpha, report.beta, eps[i],
                                                              config.field.flux_density, config.field.core_radius,
                                                              config.hbar);
    row.i_analytic = analytic.value;
    row.phase = analytic.phase;
    row.i_loop = field ? interference_from_loop(report.alpha, report.beta, *field, right, left, g.barrier, eps[i],
                                                config.hbar)
                             .value
                       : interference_term(report.alpha, report.beta, 0.0);
    row.i_lattice = runs[i].intensity - baseline;
    report.rows.push_back(row);
  }

  const double expected =
      std::abs(config.field.flux_density) * std::numbers::pi * config.field.core_radius * config.field.core_radius /
      config.hbar;
  const auto column = [&](double SweepRow::*member) {
    std::vector<double> v;
    for (const auto& r : report.rows) v.push_back(r.*member);
    return v;
  };
  for (const auto& [name, member] : {std::pair{"I_analytic", &SweepRow::i_analytic},
                                     std::pair{"I_loop", &SweepRow::i_loop}, std::pair{"I_lattice", &SweepRow::i_lattice}}) {
    FitRow fr;
    fr.column = name;
    fr.expected = expected;
    fr.fit = try_fit(eps, column(member), fr.note);
    report.fits.push_back(fr);
  }
  return report;
}

DofReport run_dof_report(const ExperimentConfig& config) {
  config.validate();
  return dof_report();
}

GeodesicReport run_geodesic(const ExperimentConfig& config) {
  config.validate();
  const GeodesicParams& p = config.geodesic;
  GeodesicState s0;
  ConnectionField gamma;
  std::function<GeodesicState(double)> exact;
  if (p.connection == "flat") {
    const auto& v = p.velocity;
    s0 = {p.position, {std::sqrt(1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]), v[0], v[1], v[2]}};
    gamma = flat_connection();
    exact = [s0](double tau) {
      GeodesicState s = s0;
      for (int k = 0; k < 4; ++k) s.position[k] += s0.velocity[k] * tau;
      return s;
    };
  } else {
    s0 = rotating_timelike_start(p.omega, p.position, p.velocity);
    gamma = rotating_connection(p.omega);
    exact = [s0, omega = p.omega](double tau) { return rotating_frame_exact(omega, s0, tau); };
  }

  const auto deviation = [&](const std::vector<GeodesicState>& tr, int steps) {
    double worst = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const GeodesicState ex = exact(p.tau_span * i / steps);
      for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(ex.position[k] - tr[i].position[k]));
    }
    return worst;
  };

  GeodesicReport report;
  report.trajectory = geodesic_integrate(gamma, s0, p.tau_span, p.steps);
  report.max_deviation = deviation(report.trajectory, p.steps);
  const int half = p.steps / 2;
  report.half_step_deviation = deviation(geodesic_integrate(gamma, s0, p.tau_span, half), half);
  return report;
}

SampleReport run_sample_paths(const ExperimentConfig& config) {
  config.validate();
  const LatticeGeometry g = config.geometry.lattice_geometry();
  SamplerSettings s;
  s.n_paths = config.ensemble.n_paths;
  s.n_slices = config.ensemble.n_slices;
  s.sigma = config.ensemble.sigma;
  s.seed = config.ensemble.seed;
  s.duration = config.ensemble.duration;
  s.threads = config.threads;
  SampleReport r{sample_paths(g.source, g.detector, Side::right, g.barrier, s),
                 sample_paths(g.source, g.detector, Side::left, g.barrier, s),
                 {},
                 {},
                 {},
                 {}};

  // with the field off the coupling term vanishes, so any field with eps = 0 gives the same sums
  const auto field = config.make_field();
  const PerturbedLagrangian pl(config.mass, field ? config.epsilon.stop : 0.0,
                               field.value_or(FluxTubeField(1.0, config.field.core_radius)), config.hbar);
  r.right_direct = side_amplitude_direct(r.right, pl);
  r.left_direct = side_amplitude_direct(r.left, pl);
  r.right_factorized = side_amplitude_factorized(
      r.right, pl,
      reference_detour(g.source, g.detector, Side::right, g.barrier, s.n_slices, s.duration).polyline());
  r.left_factorized = side_amplitude_factorized(
      r.left, pl, reference_detour(g.source, g.detector, Side::left, g.barrier, s.n_slices, s.duration).polyline());
  return r;
}

// ---------------------------------------------------------------------------------------------
// output

namespace {

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

class Table {
 public:
  Table(const RunContext& ctx, const std::string& name, const std::vector<std::string>& columns)
      : ctx_(ctx), path_(ctx.dir / name) {
    text_ = fmt::format("# run_id={} config_hash={} version={}\nconfig_hash", ctx.run_id, ctx.config_hash,
                        tool_version());
    for (const auto& c : columns) text_ += "," + c;
    text_ += "\n";
  }

  void row(const std::vector<std::string>& cells) {
    text_ += ctx_.config_hash;
    for (const auto& c : cells) text_ += "," + csv_cell(c);
    text_ += "\n";
  }

  std::string write() const {
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path_.string());
    out << text_;
    out.close();
    if (!out) throw IoError("failed while writing " + path_.string());
    return path_.filename().string();
  }

 private:
  const RunContext& ctx_;
  std::filesystem::path path_;
  std::string text_;
};

void write_manifest(const RunContext& ctx, const ExperimentConfig& config, const std::vector<std::string>& outputs,
                    const json& summary) {
  const json manifest{{"run_id", ctx.run_id},       {"config_hash", ctx.config_hash},
                      {"version", tool_version()},  {"subcommand", ctx.subcommand},
                      {"config", config.canonical()}, {"outputs", outputs},
                      {"summary", summary}};
  const auto path = ctx.dir / ("manifest_" + ctx.subcommand + ".json");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("failed while writing " + path.string());
}

std::string fit_status(const FitRow& f, double tolerance) {
  if (!f.fit) return "n/a";
  return std::abs(f.fit->frequency - f.expected) <= tolerance * f.expected ? "PASS" : "FAIL";
}

}  // namespace

std::string execute(const std::string& subcommand, const ExperimentConfig& config) {
  config.validate();
  const RunContext ctx(subcommand, config);
  std::error_code ec;
  std::filesystem::create_directories(ctx.dir, ec);
  if (ec) throw IoError("cannot create output directory " + ctx.dir.string() + ": " + ec.message());

  std::vector<std::string> outputs;
  json summary;
  std::string text;

  if (subcommand == "field-check") {
    const FieldCheckReport r = run_field_check(config);
    Table t(ctx, "field_check.csv", {"mode", "check", "value", "tolerance", "status"});
    for (const auto& row : r.rows) {
      t.row({row.mode, row.check, num(row.value), num(row.tolerance), row.pass ? "PASS" : "FAIL"});
      text += fmt::format("{:<12} {:<26} {:>24} {}\n", row.mode, row.check, num(row.value), row.pass ? "PASS" : "FAIL");
      summary["checks"][row.mode][row.check] = {{"value", row.value}, {"pass", row.pass}};
    }
    outputs.push_back(t.write());
    summary["pass"] = r.pass;
    text += fmt::format("{} mode: {}\n", to_string(config.field.mode), r.pass ? "all checks pass" : "FAIL");
  } else if (subcommand == "sweep") {
    const SweepReport r = run_sweep(config);
    Table t(ctx, "sweep.csv", {"epsilon", "I_analytic", "I_loop", "I_lattice", "phase"});
    for (const auto& row : r.rows)
      t.row({num(row.epsilon), num(row.i_analytic), num(row.i_loop), num(row.i_lattice), num(row.phase)});
    outputs.push_back(t.write());
    Table f(ctx, "sweep_fit.csv", {"column", "frequency", "expected", "rel_error", "residual", "status"});
    summary["alpha"] = r.alpha;
    summary["beta"] = r.beta;
    for (const auto& fr : r.fits) {
      const double tol = fr.column == "I_lattice" ? config.tolerances.lattice_fit : config.tolerances.quadrature;
      const std::string status = fit_status(fr, tol);
      if (fr.fit) {
        const double rel = fr.expected > 0.0 ? (fr.fit->frequency - fr.expected) / fr.expected : 0.0;
        f.row({fr.column, num(fr.fit->frequency), num(fr.expected), num(rel), num(fr.fit->residual), status});
        summary["fits"][fr.column] = {{"frequency", fr.fit->frequency}, {"rel_error", rel}, {"status", status}};
        text += fmt::format("{:<10} omega={:.10g} expected={:.10g} rel_error={:.3e} {}\n", fr.column,
                            fr.fit->frequency, fr.expected, rel, status);
      } else {
        f.row({fr.column, "nan", num(fr.expected), "nan", "nan", status});
        summary["fits"][fr.column] = {{"status", status}, {"note", fr.note}};
        text += fmt::format("{:<10} no fit ({})\n", fr.column, fr.note);
      }
    }
    outputs.push_back(f.write());
    text += fmt::format("alpha={:.6e} beta={:.6e} rows={}\n", r.alpha, r.beta, r.rows.size());
  } else if (subcommand == "dof-report") {
    const DofReport r = run_dof_report(config);
    Table t(ctx, "dof_report.csv", {"index", "constraint"});
    const auto constraints = enumerate_constraints(FluxTubeField(1.0, config.field.core_radius));
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      t.row({std::to_string(i + 1), constraints[i].label()});
      text += fmt::format("{:>2}  {}\n", i + 1, constraints[i].label());
    }
    outputs.push_back(t.write());
    text += fmt::format("unknowns={} equations={} underdetermined={}\n", r.unknowns, r.equations,
                        r.underdetermined ? "true" : "false");
    summary = {{"unknowns", r.unknowns}, {"equations", r.equations}, {"underdetermined", r.underdetermined}};
  } else if (subcommand == "geodesic") {
    const GeodesicReport r = run_geodesic(config);
    const GeodesicParams& p = config.geodesic;
    Table t(ctx, "geodesic.csv", {"tau", "t", "x", "y", "z"});
    const int stride = std::max(1, p.steps / p.samples);
    for (int i = 0; i <= p.steps; i += stride) {
      const auto& s = r.trajectory[i];
      t.row({num(p.tau_span * i / p.steps), num(s.position[0]), num(s.position[1]), num(s.position[2]),
             num(s.position[3])});
    }
    outputs.push_back(t.write());
    const double ratio = r.max_deviation > 0.0 ? r.half_step_deviation / r.max_deviation : 0.0;
    summary = {{"connection", p.connection}, {"steps", p.steps}, {"max_deviation", r.max_deviation},
               {"half_step_deviation", r.half_step_deviation}, {"error_ratio", ratio}};
    text += fmt::format("connection={} steps={} max_deviation={:.3e} half_step_deviation={:.3e} ratio={:.2f}\n",
                        p.connection, p.steps, r.max_deviation, r.half_step_deviation, ratio);
  } else if (subcommand == "sample-paths") {
    const SampleReport r = run_sample_paths(config);
    Table t(ctx, "paths.csv", {"side", "path", "slice", "t", "x", "y", "z"});
    for (const PathEnsemble* ens : {&r.right, &r.left})
      for (std::size_t i = 0; i < ens->paths.size(); ++i) {
        const auto& path = ens->paths[i];
        for (std::size_t k = 0; k < path.vertices.size(); ++k)
          t.row({to_string(ens->side), std::to_string(i), std::to_string(k), num(path.times[k]),
                 num(path.vertices[k].x), num(path.vertices[k].y), num(path.vertices[k].z)});
      }
    outputs.push_back(t.write());
    Table a(ctx, "amplitudes.csv",
            {"side", "n_paths", "epsilon", "re_direct", "im_direct", "re_factorized", "im_factorized", "rel_gap"});
    const double eps = config.make_field() ? config.epsilon.stop : 0.0;
    for (const auto& [side, direct, fact] : {std::tuple{"right", r.right_direct, r.right_factorized},
                                             std::tuple{"left", r.left_direct, r.left_factorized}}) {
      const double gap = std::abs(direct - fact) / std::abs(direct);
      a.row({side, std::to_string(config.ensemble.n_paths), num(eps), num(direct.real()), num(direct.imag()),
             num(fact.real()), num(fact.imag()), num(gap)});
      summary[side] = {{"abs_direct", std::abs(direct)}, {"rel_gap", gap}};
      text += fmt::format("{:<5} |U|={:.6e} factorization gap={:.3e}\n", side, std::abs(direct), gap);
    }
    outputs.push_back(a.write());
  } else {
    throw ValidationError("unknown subcommand '" + subcommand + "'");
  }

  write_manifest(ctx, config, outputs, summary);
  return fmt::format("run_id={} config_hash={}\n{}", ctx.run_id, ctx.config_hash, text);
}

}  // namespace ablab
