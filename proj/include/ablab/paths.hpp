#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ablab/errors.hpp"
#include "ablab/field.hpp"
#include "ablab/metric.hpp"

namespace ablab {

enum class Side { left, right, inside };

const char* to_string(Side side);
Side side_from_string(const std::string& name);

/// Infinitely long barrier along z with rectangular cross-section
/// |x - x_c| <= half_width, y_min <= y <= y_max. The boundary belongs to the barrier.
struct ForbiddenVolume {
  double half_width;
  double y_min;
  double y_max;
  CartPoint axis_center{};

  ForbiddenVolume(double half_width, double y_min, double y_max, CartPoint axis_center = {});

  /// Throws unless the flux core of radius `core_radius` about axis_center lies strictly inside.
  void require_contains_core(double core_radius) const;

  bool contains(const CartPoint& p) const;
  /// Closed segment-rectangle test on the xy projection.
  bool intersects(const CartPoint& a, const CartPoint& b) const;
};

Side classify(const CartPoint& p, const ForbiddenVolume& barrier);

/// Raised when a path enters the barrier or does not stay in one sector.
class SectorError : public ValidationError {
 public:
  SectorError(const std::string& what, std::optional<std::size_t> segment)
      : ValidationError(what), segment_(segment) {}
  std::optional<std::size_t> segment() const { return segment_; }

 private:
  std::optional<std::size_t> segment_;
};

/// Sector (left or right) in which `path` passes the barrier. Throws SectorError naming the
/// offending segment when the path touches the barrier, switches sides, or never passes it.
Side path_sector(const Polyline& path, const ForbiddenVolume& barrier);

struct SamplerSettings {
  int n_paths = 100;
  int n_slices = 32;
  double sigma = 0.1;
  std::uint64_t seed = 1;
  double duration = 20.0;
  /// Clearance of the reference detour from the barrier corners; defaults to half_width / 2.
  std::optional<double> detour_margin;
  int threads = 1;
};

struct PathEnsemble {
  Side side;
  std::vector<SlicedPath> paths;
  std::uint64_t seed;
  int n_slices;
  double delta_t;
  ForbiddenVolume barrier;
};

/// Side-respecting detour source -> near corner -> far corner -> detector, resampled to
/// n_slices equal arc-length steps.
SlicedPath reference_detour(const CartPoint& source, const CartPoint& detector, Side side,
                            const ForbiddenVolume& barrier, int n_slices, double duration,
                            std::optional<double> margin = std::nullopt);

/// In-plane Brownian bridge offsets b_0 .. b_n with b_0 = b_n = 0 and per-slice increments of
/// standard deviation sigma.
std::vector<Vector3> brownian_bridge(int n_slices, double sigma, std::mt19937_64& rng);

/// Bridge-perturbed detours confined to `side`. Path i draws from its own substream of `seed`
/// and is redrawn up to 100 times if it leaves the sector.
PathEnsemble sample_paths(const CartPoint& source, const CartPoint& detector, Side side,
                          const ForbiddenVolume& barrier, const SamplerSettings& settings);

}  // namespace ablab
