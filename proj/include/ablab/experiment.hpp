#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ablab/field.hpp"
#include "ablab/lattice.hpp"
#include "ablab/metric.hpp"

namespace ablab {

struct FieldParams {
  double flux_density = 1.0;  // 0 switches the field off
  double core_radius = 1.0;
  FieldMode mode = FieldMode::ab_standard;
};

struct GeometryParams {
  double half_width = 2.0;
  double y_min = -4.0;
  double y_max = 4.0;
  std::array<double, 2> source{0.0, -10.0};
  std::array<double, 2> detector{0.0, 10.0};

  /// w = 2 rho_a, D spanning |y| <= 4 rho_a, source and detector at y = -/+ 10 rho_a.
  static GeometryParams scaled(double core_radius);
  LatticeGeometry lattice_geometry() const;
};

struct EpsilonSweep {
  double start = 0.0;
  double stop = 4.0;
  int count = 41;

  std::vector<double> values() const;
  /// Parses "start:stop:count".
  static EpsilonSweep parse(const std::string& text);
};

struct EnsembleParams {
  int n_paths = 1000;
  int n_slices = 32;
  double sigma = 0.3;
  std::uint64_t seed = 1;
  double duration = 20.0;
};

struct GeodesicParams {
  std::string connection = "rotating";  // flat | rotating
  double omega = 0.1;
  int steps = 10000;
  double tau_span = 200.0;
  std::array<double, 4> position{0.0, 3.0, 0.0, 0.0};
  std::array<double, 3> velocity{0.2, 0.1, 0.05};
  int samples = 100;
};

struct Tolerances {
  double quadrature = 1e-9;
  double lattice_fit = 0.02;
  double oracle = 1e-6;
};

struct ExperimentConfig {
  FieldParams field;
  double hbar = 1.0;
  double mass = 1.0;
  GeometryParams geometry;
  EpsilonSweep epsilon;
  LatticeConfig lattice;
  EnsembleParams ensemble;
  GeodesicParams geodesic;
  Tolerances tolerances;
  std::string output_dir = "out";
  int threads = 1;

  /// Missing keys take defaults; a missing "geometry" block is scaled from field.rho_a.
  /// Unknown keys and wrong types throw ValidationError naming the key path.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Every key that affects results, fully resolved. Excludes threads and the output directory.
  nlohmann::json canonical() const;
  /// FNV-1a 64 of canonical().dump(), as 16 hex digits.
  std::string hash() const;

  /// Throws ValidationError with a "config.<key>: ..." message on the first failed precondition.
  void validate() const;

  /// The flux tube, or nothing when F = 0.
  std::optional<FluxTubeField> make_field() const;
};

const char* tool_version();

/// Output files share a leading "# run_id=... config_hash=... version=..." line and a config_hash column.
struct RunContext {
  std::string subcommand;
  std::string run_id;
  std::string config_hash;
  std::filesystem::path dir;

  RunContext(std::string subcommand, const ExperimentConfig& config);
};

struct CheckRow {
  std::string mode;
  std::string check;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct FieldCheckReport {
  std::vector<CheckRow> rows;
  /// All checks pass for the configured mode.
  bool pass = false;
};

struct SweepRow {
  double epsilon = 0.0;
  double i_analytic = 0.0;
  double i_loop = 0.0;
  double i_lattice = 0.0;
  double phase = 0.0;
};

struct FitRow {
  std::string column;
  std::optional<PhaseFit> fit;  // empty for a constant column
  double expected = 0.0;
  std::string note;
};

struct SweepReport {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<SweepRow> rows;
  std::vector<FitRow> fits;
};

struct GeodesicReport {
  std::vector<GeodesicState> trajectory;
  double max_deviation = 0.0;
  double half_step_deviation = 0.0;  // same run with steps / 2
};

struct SampleReport {
  PathEnsemble right;
  PathEnsemble left;
  Amplitude right_direct, left_direct, right_factorized, left_factorized;
};

FieldCheckReport run_field_check(const ExperimentConfig& config);
SweepReport run_sweep(const ExperimentConfig& config);
DofReport run_dof_report(const ExperimentConfig& config);
GeodesicReport run_geodesic(const ExperimentConfig& config);
SampleReport run_sample_paths(const ExperimentConfig& config);

/// Run a subcommand and write its table(s) and manifest into config.output_dir. Returns a short
/// summary for the terminal.
std::string execute(const std::string& subcommand, const ExperimentConfig& config);

}  // namespace ablab
