#include "ablab/paths.hpp"

#include <algorithm>
#include <cmath>

#include "ablab/parallel.hpp"
#include "ablab/rng.hpp"

namespace ablab {

namespace {

constexpr int kMaxAttemptsPerPath = 100;

// Parameter range [t0, t1] of a + t d inside lo <= coord <= hi; false if empty.
bool clip_axis(double a, double d, double lo, double hi, double& t0, double& t1) {
  if (d == 0.0) return a >= lo && a <= hi;
  double s0 = (lo - a) / d;
  double s1 = (hi - a) / d;
  if (s0 > s1) std::swap(s0, s1);
  t0 = std::max(t0, s0);
  t1 = std::min(t1, s1);
  return t0 <= t1;
}

}  // namespace

const char* to_string(Side side) {
  switch (side) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::inside: return "inside";
  }
  return "?";
}

Side side_from_string(const std::string& name) {
  if (name == "left") return Side::left;
  if (name == "right") return Side::right;
  throw ValidationError("unknown side '" + name + "' (expected left or right)");
}

ForbiddenVolume::ForbiddenVolume(double half_width_, double y_min_, double y_max_, CartPoint axis_center_)
    : half_width(half_width_), y_min(y_min_), y_max(y_max_), axis_center(axis_center_) {
  if (!(half_width > 0.0)) throw ValidationError("barrier: half_width must be > 0");
  if (!(y_min < y_max)) throw ValidationError("barrier: y_min must be < y_max");
}

void ForbiddenVolume::require_contains_core(double core_radius) const {
  if (!(half_width > core_radius) || !(y_min < axis_center.y - core_radius) || !(y_max > axis_center.y + core_radius))
    throw ValidationError("barrier: flux core must lie strictly inside the forbidden volume");
}

bool ForbiddenVolume::contains(const CartPoint& p) const {
  return std::abs(p.x - axis_center.x) <= half_width && p.y >= y_min && p.y <= y_max;
}

bool ForbiddenVolume::intersects(const CartPoint& a, const CartPoint& b) const {
  double t0 = 0.0;
  double t1 = 1.0;
  return clip_axis(a.x, b.x - a.x, axis_center.x - half_width, axis_center.x + half_width, t0, t1) &&
         clip_axis(a.y, b.y - a.y, y_min, y_max, t0, t1);
}

Side classify(const CartPoint& p, const ForbiddenVolume& barrier) {
  if (barrier.contains(p)) return Side::inside;
  return p.x < barrier.axis_center.x ? Side::left : Side::right;
}

Side path_sector(const Polyline& path, const ForbiddenVolume& barrier) {
  const auto& v = path.vertices();
  std::optional<Side> side;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (barrier.intersects(v[i], v[i + 1]))
      throw SectorError("path segment " + std::to_string(i) + " enters the forbidden volume", i);

    // which side of the barrier the segment passes while inside the barrier's y band
    double t0 = 0.0;
    double t1 = 1.0;
    if (!clip_axis(v[i].y, v[i + 1].y - v[i].y, barrier.y_min, barrier.y_max, t0, t1)) continue;
    const double x_mid = v[i].x + 0.5 * (t0 + t1) * (v[i + 1].x - v[i].x);
    const Side here = x_mid < barrier.axis_center.x ? Side::left : Side::right;
    if (side && *side != here)
      throw SectorError("path switches sides of the forbidden volume at segment " + std::to_string(i), i);
    side = here;
  }
  if (!side) throw SectorError("path never passes the forbidden volume", std::nullopt);
  return *side;
}

SlicedPath reference_detour(const CartPoint& source, const CartPoint& detector, Side side,
                            const ForbiddenVolume& barrier, int n_slices, double duration,
                            std::optional<double> margin) {
  if (side == Side::inside) throw ValidationError("reference_detour: side must be left or right");
  if (n_slices < 2) throw ValidationError("reference_detour: n_slices must be >= 2");
  if (!(duration > 0.0)) throw ValidationError("reference_detour: duration must be > 0");
  const bool upward = source.y < barrier.y_min && detector.y > barrier.y_max;
  const bool downward = source.y > barrier.y_max && detector.y < barrier.y_min;
  if (!upward && !downward)
    throw ValidationError("reference_detour: source and detector must lie on opposite ends of the barrier");
  const double m = margin.value_or(0.5 * barrier.half_width);
  if (!(m > 0.0)) throw ValidationError("reference_detour: margin must be > 0");

  const double xs = barrier.axis_center.x + (side == Side::right ? 1.0 : -1.0) * (barrier.half_width + m);
  const double y_near = upward ? barrier.y_min - m : barrier.y_max + m;
  const double y_far = upward ? barrier.y_max + m : barrier.y_min - m;
  const std::array<CartPoint, 4> corners{source, CartPoint{xs, y_near, source.z}, CartPoint{xs, y_far, detector.z},
                                         detector};

  std::array<double, 4> cum{0.0, 0.0, 0.0, 0.0};
  for (int i = 1; i < 4; ++i) cum[i] = cum[i - 1] + norm(corners[i] - corners[i - 1]);

  std::vector<CartPoint> v;
  v.reserve(n_slices + 1);
  v.push_back(source);
  int leg = 0;
  for (int k = 1; k < n_slices; ++k) {
    const double s = cum[3] * k / n_slices;
    while (leg < 2 && s > cum[leg + 1]) ++leg;
    const double f = (s - cum[leg]) / (cum[leg + 1] - cum[leg]);
    v.push_back(corners[leg] + f * (corners[leg + 1] - corners[leg]));
  }
  v.push_back(detector);

  SlicedPath path = SlicedPath::uniform(std::move(v), 0.0, duration / n_slices);
  try {
    if (path_sector(path.polyline(), barrier) != side) throw SectorError("wrong side", std::nullopt);
  } catch (const SectorError&) {
    throw ValidationError("reference_detour: detour clips the forbidden volume; increase n_slices or the margin");
  }
  return path;
}

std::vector<Vector3> brownian_bridge(int n_slices, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector3> walk(n_slices + 1);
  for (int k = 1; k <= n_slices; ++k) {
    const double dx = normal(rng);
    const double dy = normal(rng);
    walk[k] = walk[k - 1] + Vector3{sigma * dx, sigma * dy, 0.0};
  }
  const Vector3 end = walk[n_slices];
  for (int k = 0; k <= n_slices; ++k) walk[k] = walk[k] - (static_cast<double>(k) / n_slices) * end;
  walk[0] = {};
  walk[n_slices] = {};
  return walk;
}

PathEnsemble sample_paths(const CartPoint& source, const CartPoint& detector, Side side,
                          const ForbiddenVolume& barrier, const SamplerSettings& settings) {
  if (settings.n_paths < 1) throw ValidationError("sample_paths: n_paths must be >= 1");
  if (!(settings.sigma >= 0.0) || !std::isfinite(settings.sigma))
    throw ValidationError("sample_paths: sigma must be >= 0");
  const SlicedPath ref =
      reference_detour(source, detector, side, barrier, settings.n_slices, settings.duration, settings.detour_margin);

  PathEnsemble ens{side, std::vector<SlicedPath>(settings.n_paths), settings.seed, settings.n_slices,
                   settings.duration / settings.n_slices, barrier};

  parallel_for(ens.paths.size(), settings.threads, [&](std::size_t i) {
    std::mt19937_64 rng = substream(settings.seed, i);
    for (int attempt = 0; attempt < kMaxAttemptsPerPath; ++attempt) {
      const std::vector<Vector3> bridge = brownian_bridge(settings.n_slices, settings.sigma, rng);
      SlicedPath candidate = ref;
      for (std::size_t k = 0; k < bridge.size(); ++k) candidate.vertices[k] = candidate.vertices[k] + bridge[k];
      try {
        if (path_sector(candidate.polyline(), barrier) == side) {
          ens.paths[i] = std::move(candidate);
          return;
        }
      } catch (const SectorError&) {
      }
    }
    throw ValidationError("sample_paths: path " + std::to_string(i) + " left the sector in " +
                          std::to_string(kMaxAttemptsPerPath) + " draws; geometry too tight for sigma");
  });
  return ens;
}

}  // namespace ablab
