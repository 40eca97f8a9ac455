#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "ablab/field.hpp"
#include "ablab/paths.hpp"
#include "ablab/propagator.hpp"

namespace ablab {

/// Largest admissible dt * E_half / hbar for one Chebyshev step, where E_half = 2 hbar^2 / (m dx^2)
/// is half the spectral width of the lattice Hamiltonian.
inline constexpr double kChebyshevStepBound = 40.0;
/// Per-step norm drift that aborts a run.
inline constexpr double kNormDriftLimit = 1e-6;

/// Square grid of `cells` x `cells` cell-centred sites covering [-L, L]^2 with L = cells * spacing / 2,
/// centred on the flux axis.
struct LatticeConfig {
  int cells = 256;
  double spacing = 0.125;
  double time_step = 0.25;
  int steps = 28;
  /// false: cells in D are removed from the grid. true: they stay in the Hamiltonian and are
  /// zeroed after every step.
  bool absorbing = false;
  double packet_width = 2.0;
  double packet_wavenumber = 3.0;
  /// Chebyshev terms per step; 0 picks the count from the Bessel coefficient decay.
  int series_terms = 0;

  double half_extent() const { return 0.5 * cells * spacing; }
  /// Throws ValidationError naming the offending field.
  void validate(double mass, double hbar) const;
};

/// Source, detector and barrier in the z = 0 plane.
struct LatticeGeometry {
  ForbiddenVolume barrier;
  CartPoint source;
  CartPoint detector;
};

/// Checks the config together with the packet, detector and barrier placement on the grid.
/// `core_radius` is the flux-tube radius when a field is present.
void validate_lattice_setup(const LatticeGeometry& geometry, const LatticeConfig& config,
                            std::optional<double> core_radius, double mass, double hbar);

/// Which channel past the barrier is closed off by extending D to the grid edge.
enum class Blocked { none, left, right };

struct LatticeRun {
  double epsilon = 0.0;
  Amplitude detector_amplitude;
  double intensity = 0.0;  // |psi(Q)|^2
  double initial_norm = 0.0;
  double final_norm = 0.0;
  double absorbed = 0.0;  // norm removed inside D by the absorbing mask
  double max_step_drift = 0.0;
  int series_terms = 0;
  std::vector<Amplitude> psi;  // row-major, index = iy * cells + ix
};

/// Time-sliced evolution under H = (p - eps A)^2 / 2m on the grid, with minimal coupling through
/// per-link phases exp(i eps/hbar integral_link A . dl). Link integrals are exact, so every
/// plaquette outside the core carries zero flux.
class Lattice {
 public:
  Lattice(const LatticeGeometry& geometry, const LatticeConfig& config, std::optional<FluxTubeField> field,
          double mass = 1.0, double hbar = 1.0, Blocked blocked = Blocked::none);

  const LatticeConfig& config() const { return config_; }
  const LatticeGeometry& geometry() const { return geometry_; }
  double x(int ix) const { return -config_.half_extent() + (ix + 0.5) * config_.spacing; }
  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * config_.cells + ix; }
  std::size_t detector_index() const { return detector_; }
  bool active(std::size_t cell) const { return active_[cell] != 0; }
  bool in_barrier(std::size_t cell) const { return barrier_[cell] != 0; }

  /// Initial Gaussian packet at the source, heading along +y or -y towards the barrier. It carries
  /// the phase exp(i eps/hbar integral_source^x A . dl) along a path around D, so its kinetic
  /// momentum, and with it the physical state, is the same for every eps.
  std::vector<Amplitude> initial_state(double epsilon) const;

  /// Throws NumericalError when a step changes the norm by more than kNormDriftLimit.
  LatticeRun run(double epsilon) const;

 private:
  void apply_hopping(const std::vector<Amplitude>& in, std::vector<Amplitude>& out,
                     const std::vector<Amplitude>& ux, const std::vector<Amplitude>& uy) const;

  LatticeGeometry geometry_;
  LatticeConfig config_;
  double mass_;
  double hbar_;
  double hopping_;
  std::vector<unsigned char> active_;
  std::vector<unsigned char> barrier_;
  std::vector<double> theta_x_;  // link (ix, iy) -> (ix + 1, iy), at eps = 1
  std::vector<double> theta_y_;  // link (ix, iy) -> (ix, iy + 1), at eps = 1
  std::vector<double> source_phase_;  // at eps = 1
  std::vector<double> chebyshev_;
  std::size_t detector_ = 0;
};

/// Detector intensity per epsilon. Runs are independent, so the result does not depend on `threads`.
std::vector<LatticeRun> lattice_sweep(const LatticeGeometry& geometry, const LatticeConfig& config,
                                      const std::optional<FluxTubeField>& field,
                                      std::span<const double> epsilon_values, double mass = 1.0,
                                      double hbar = 1.0, int threads = 1, bool keep_states = false);

struct LatticeCrossTerms {
  Amplitude right;
  Amplitude left;
  CrossTerms terms;
};

/// U_R and U_L as the detector amplitudes of eps = 0 runs with the other channel blocked.
LatticeCrossTerms lattice_alpha_beta(const LatticeGeometry& geometry, const LatticeConfig& config,
                                     double mass = 1.0, double hbar = 1.0, int threads = 1);

}  // namespace ablab
