#include "ablab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ablab/errors.hpp"
#include "ablab/parallel.hpp"

namespace ablab {

namespace {

constexpr double kSeriesCutoff = 1e-16;

double distance_to_barrier(const CartPoint& p, const ForbiddenVolume& d) {
  const double dx = std::max(0.0, std::abs(p.x - d.axis_center.x) - d.half_width);
  const double dy = std::max({0.0, d.y_min - p.y, p.y - d.y_max});
  return std::hypot(dx, dy);
}

// A path from `from` to `to` around the barrier on the side of `to`.
Polyline path_around(const CartPoint& from, const CartPoint& to, const ForbiddenVolume& d, double margin) {
  std::vector<CartPoint> v{from};
  if (d.intersects(from, to)) {
    const double side = to.x >= d.axis_center.x ? 1.0 : -1.0;
    const double xs = d.axis_center.x + side * (d.half_width + margin);
    const bool below = from.y < d.y_min;
    const CartPoint near{xs, below ? d.y_min - margin : d.y_max + margin, 0.0};
    const CartPoint far{xs, below ? d.y_max + margin : d.y_min - margin, 0.0};
    v.push_back(near);
    if (d.intersects(near, to)) v.push_back(far);
  }
  v.push_back(to);
  return Polyline(std::move(v), false);
}

double norm2(const std::vector<Amplitude>& psi) {
  double s = 0.0;
  for (const auto& a : psi) s += std::norm(a);
  return s;
}

}  // namespace

void LatticeConfig::validate(double mass, double hbar) const {
  if (!(mass > 0.0)) throw ValidationError("lattice: mass must be > 0");
  if (!(hbar > 0.0)) throw ValidationError("lattice: hbar must be > 0");
  if (cells < 8) throw ValidationError("lattice.cells must be >= 8");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ValidationError("lattice.spacing must be > 0");
  if (!(time_step > 0.0) || !std::isfinite(time_step)) throw ValidationError("lattice.time_step must be > 0");
  if (steps < 1) throw ValidationError("lattice.steps must be >= 1");
  if (!(packet_width > 0.0)) throw ValidationError("lattice.packet_width must be > 0");
  if (!(packet_wavenumber >= 0.0)) throw ValidationError("lattice.packet_wavenumber must be >= 0");
  if (series_terms < 0) throw ValidationError("lattice.series_terms must be >= 0");
  const double radius = 2.0 * hbar * time_step / (mass * spacing * spacing);
  if (radius > kChebyshevStepBound)
    throw ValidationError("lattice.time_step too large: dt * 2 hbar / (m dx^2) = " + std::to_string(radius) +
                          " exceeds " + std::to_string(kChebyshevStepBound));
  if (packet_wavenumber * spacing > 1.0)
    throw ValidationError("lattice.packet_wavenumber * spacing must be <= 1 to resolve the packet");
  if (packet_width < 2.0 * spacing) throw ValidationError("lattice.packet_width must span at least two cells");
}

void validate_lattice_setup(const LatticeGeometry& geometry, const LatticeConfig& config,
                            std::optional<double> core_radius, double mass, double hbar) {
  config.validate(mass, hbar);
  const ForbiddenVolume& d = geometry.barrier;
  if (core_radius) d.require_contains_core(*core_radius);
  const double half = config.half_extent();
  const double sigma = config.packet_width;
  const auto inside_grid = [&](const CartPoint& p, double margin) {
    return std::abs(p.x) <= half - margin && std::abs(p.y) <= half - margin;
  };
  if (!inside_grid(geometry.source, 3.0 * sigma))
    throw ValidationError("lattice: source packet must lie at least 3 widths inside the grid");
  if (!inside_grid(geometry.detector, 0.0)) throw ValidationError("lattice: detector lies outside the grid");
  if (distance_to_barrier(geometry.source, d) < 3.0 * sigma)
    throw ValidationError("lattice: source packet must start at least 3 widths from the barrier");
  if (d.contains(geometry.detector)) throw ValidationError("lattice: detector lies inside the barrier");
}

Lattice::Lattice(const LatticeGeometry& geometry, const LatticeConfig& config, std::optional<FluxTubeField> field,
                 double mass, double hbar, Blocked blocked)
    : geometry_(geometry), config_(config), mass_(mass), hbar_(hbar) {
  validate_lattice_setup(geometry, config, field ? std::optional(field->core_radius()) : std::nullopt, mass, hbar);
  const ForbiddenVolume& d = geometry_.barrier;
  const int n = config_.cells;
  const double half = config_.half_extent();

  hopping_ = hbar * hbar / (2.0 * mass * config_.spacing * config_.spacing);

  const std::size_t total = static_cast<std::size_t>(n) * n;
  active_.assign(total, 1);
  barrier_.assign(total, 0);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const CartPoint c{x(ix), x(iy), 0.0};
      const std::size_t k = index(ix, iy);
      if (d.contains(c)) {
        barrier_[k] = 1;
        if (!config_.absorbing) active_[k] = 0;
      }
      const bool band = c.y >= d.y_min && c.y <= d.y_max;
      if (band && blocked == Blocked::left && c.x <= d.axis_center.x + d.half_width) active_[k] = 0;
      if (band && blocked == Blocked::right && c.x >= d.axis_center.x - d.half_width) active_[k] = 0;
    }
  }

  // the cell containing Q, half-open so that a tie goes to +x / +y
  const auto cell_of = [&](double v) {
    return std::clamp(static_cast<int>(std::floor((v + half) / config_.spacing)), 0, n - 1);
  };
  detector_ = index(cell_of(geometry_.detector.x), cell_of(geometry_.detector.y));
  if (barrier_[detector_]) throw ValidationError("lattice: detector cell lies inside the barrier");

  theta_x_.assign(total, 0.0);
  theta_y_.assign(total, 0.0);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t k = index(ix, iy);
      const CartPoint c{x(ix), x(iy), 0.0};
      if (ix + 1 < n && active_[k] && active_[k + 1] && field)
        theta_x_[k] = segment_integral(*field, c, {x(ix + 1), c.y, 0.0}) / hbar;
      if (iy + 1 < n && active_[k] && active_[k + n] && field)
        theta_y_[k] = segment_integral(*field, c, {c.x, x(iy + 1), 0.0}) / hbar;
    }
  }

  source_phase_.assign(total, 0.0);
  if (field) {
    for (std::size_t k = 0; k < total; ++k) {
      if (!active_[k] || barrier_[k]) continue;
      const CartPoint c{x(static_cast<int>(k % n)), x(static_cast<int>(k / n)), 0.0};
      const Polyline path = path_around(geometry_.source, c, d, 0.5 * config_.spacing);
      const auto& v = path.vertices();
      for (std::size_t s = 0; s + 1 < v.size(); ++s)
        if (d.intersects(v[s], v[s + 1])) throw ValidationError("lattice: cannot route the packet phase around D");
      source_phase_[k] = line_integral(*field, path) / hbar;
    }
  }

  // exp(-i x z) = sum_k (2 - delta_k0) (-i)^k J_k(z) T_k(x) for x in [-1, 1]
  const double radius = 4.0 * hopping_ * config_.time_step / hbar;
  if (config_.series_terms > 0) {
    for (int k = 0; k < config_.series_terms; ++k) chebyshev_.push_back(std::cyl_bessel_j(double(k), radius));
  } else {
    for (int k = 0;; ++k) {
      const double j = std::cyl_bessel_j(double(k), radius);
      chebyshev_.push_back(j);
      if (k > radius && std::abs(j) < kSeriesCutoff) break;
    }
  }
}

std::vector<Amplitude> Lattice::initial_state(double epsilon) const {
  const int n = config_.cells;
  const double sigma = config_.packet_width;
  const CartPoint& s = geometry_.source;
  const double heading = geometry_.barrier.axis_center.y >= s.y ? 1.0 : -1.0;
  std::vector<Amplitude> psi(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t k = index(ix, iy);
      if (!active_[k]) continue;
      const double dx = x(ix) - s.x;
      const double dy = x(iy) - s.y;
      psi[k] = std::polar(std::exp(-(dx * dx + dy * dy) / (4.0 * sigma * sigma)),
                          heading * config_.packet_wavenumber * dy + epsilon * source_phase_[k]);
    }
  }
  const double scale = 1.0 / std::sqrt(norm2(psi));
  for (auto& a : psi) a *= scale;
  return psi;
}

// out = -(1/4) sum over links of U psi, i.e. (H - 4t) / 4t with the link phases of ux, uy.
void Lattice::apply_hopping(const std::vector<Amplitude>& in, std::vector<Amplitude>& out,
                            const std::vector<Amplitude>& ux, const std::vector<Amplitude>& uy) const {
  const int n = config_.cells;
  for (int iy = 0; iy < n; ++iy) {
    const std::size_t row = static_cast<std::size_t>(iy) * n;
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t k = row + ix;
      Amplitude s = 0.0;
      if (ix + 1 < n) s += std::conj(ux[k]) * in[k + 1];
      if (ix > 0) s += ux[k - 1] * in[k - 1];
      if (iy + 1 < n) s += std::conj(uy[k]) * in[k + n];
      if (iy > 0) s += uy[k - n] * in[k - n];
      out[k] = -0.25 * s;
    }
  }
}

LatticeRun Lattice::run(double epsilon) const {
  if (!std::isfinite(epsilon)) throw ValidationError("lattice: epsilon must be finite");
  const int n = config_.cells;
  const std::size_t total = static_cast<std::size_t>(n) * n;

  // link weights, zero for links touching a removed cell
  std::vector<Amplitude> ux(total, 0.0), uy(total, 0.0);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t k = index(ix, iy);
      if (ix + 1 < n && active_[k] && active_[k + 1]) ux[k] = std::polar(1.0, epsilon * theta_x_[k]);
      if (iy + 1 < n && active_[k] && active_[k + n]) uy[k] = std::polar(1.0, epsilon * theta_y_[k]);
    }
  }

  LatticeRun result;
  result.epsilon = epsilon;
  result.series_terms = static_cast<int>(chebyshev_.size());
  std::vector<Amplitude> psi = initial_state(epsilon);
  result.initial_norm = norm2(psi);

  std::vector<Amplitude> prev(total), cur(total), next(total), acc(total);
  const Amplitude centre = std::polar(1.0, -4.0 * hopping_ * config_.time_step / hbar_);
  double norm_before = result.initial_norm;
  for (int step = 0; step < config_.steps; ++step) {
    prev = psi;
    apply_hopping(prev, cur, ux, uy);
    Amplitude coeff = chebyshev_[0];
    for (std::size_t k = 0; k < total; ++k) acc[k] = coeff * prev[k];
    Amplitude minus_i_pow = 1.0;
    for (std::size_t m = 1; m < chebyshev_.size(); ++m) {
      minus_i_pow *= Amplitude(0.0, -1.0);
      coeff = 2.0 * minus_i_pow * chebyshev_[m];
      for (std::size_t k = 0; k < total; ++k) acc[k] += coeff * cur[k];
      if (m + 1 == chebyshev_.size()) break;
      apply_hopping(cur, next, ux, uy);
      for (std::size_t k = 0; k < total; ++k) next[k] = 2.0 * next[k] - prev[k];
      std::swap(prev, cur);
      std::swap(cur, next);
    }
    for (std::size_t k = 0; k < total; ++k) psi[k] = centre * acc[k];

    const double norm_after = norm2(psi);
    const double drift = std::abs(norm_after - norm_before);
    if (!std::isfinite(norm_after) || drift > kNormDriftLimit)
      throw NumericalError("lattice: norm drift " + std::to_string(drift) + " at step " + std::to_string(step + 1) +
                           " of " + std::to_string(config_.steps) + " (eps = " + std::to_string(epsilon) +
                           ", " + std::to_string(chebyshev_.size()) + " series terms) exceeds " +
                           std::to_string(kNormDriftLimit));
    result.max_step_drift = std::max(result.max_step_drift, drift);

    if (config_.absorbing) {
      for (std::size_t k = 0; k < total; ++k) {
        if (!barrier_[k]) continue;
        result.absorbed += std::norm(psi[k]);
        psi[k] = 0.0;
      }
    }
    norm_before = norm2(psi);
  }

  result.final_norm = norm_before;
  result.detector_amplitude = psi[detector_];
  result.intensity = std::norm(psi[detector_]);
  result.psi = std::move(psi);
  return result;
}

std::vector<LatticeRun> lattice_sweep(const LatticeGeometry& geometry, const LatticeConfig& config,
                                      const std::optional<FluxTubeField>& field,
                                      std::span<const double> epsilon_values, double mass, double hbar, int threads,
                                      bool keep_states) {
  const Lattice lattice(geometry, config, field, mass, hbar);
  std::vector<LatticeRun> runs(epsilon_values.size());
  parallel_for(runs.size(), threads, [&](std::size_t i) {
    runs[i] = lattice.run(epsilon_values[i]);
    if (!keep_states) runs[i].psi = {};
  });
  return runs;
}

LatticeCrossTerms lattice_alpha_beta(const LatticeGeometry& geometry, const LatticeConfig& config, double mass,
                                     double hbar, int threads) {
  Amplitude amp[2];
  parallel_for(2, threads, [&](std::size_t i) {
    const Lattice lattice(geometry, config, std::nullopt, mass, hbar, i == 0 ? Blocked::left : Blocked::right);
    amp[i] = lattice.run(0.0).detector_amplitude;
  });
  return {amp[0], amp[1], alpha_beta(amp[0], amp[1])};
}

}  // namespace ablab
