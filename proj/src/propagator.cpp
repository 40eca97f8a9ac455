#include "ablab/propagator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ablab/errors.hpp"

namespace ablab {

const char* to_string(InterferenceMethod m) {
  switch (m) {
    case InterferenceMethod::analytic: return "analytic";
    case InterferenceMethod::loop: return "loop";
    case InterferenceMethod::lattice: return "lattice";
  }
  return "?";
}

namespace {

void require_nonempty(const PathEnsemble& ensemble) {
  if (ensemble.paths.empty()) throw ValidationError("side amplitude: ensemble is empty");
}

Amplitude phasor(double phase) { return std::polar(1.0, phase); }

}  // namespace

Amplitude side_amplitude_direct(const PathEnsemble& ensemble, const PerturbedLagrangian& pl) {
  require_nonempty(ensemble);
  Amplitude sum = 0.0;
  for (const auto& path : ensemble.paths) sum += phasor(action(pl, path) / pl.hbar);
  return sum / static_cast<double>(ensemble.paths.size());
}

Amplitude side_amplitude_factorized(const PathEnsemble& ensemble, const PerturbedLagrangian& pl,
                                    const Polyline& reference_path) {
  require_nonempty(ensemble);
  if (path_sector(reference_path, ensemble.barrier) != ensemble.side)
    throw ValidationError("side_amplitude_factorized: reference path is not in the ensemble's sector");
  const auto& first = ensemble.paths.front().vertices;
  if (norm(reference_path.front() - first.front()) > 1e-12 || norm(reference_path.back() - first.back()) > 1e-12)
    throw ValidationError("side_amplitude_factorized: reference path endpoints differ from the ensemble's");

  Amplitude sum = 0.0;
  for (const auto& path : ensemble.paths) sum += phasor(free_action(pl.mass, path) / pl.hbar);
  const double coupling = pl.epsilon == 0.0 ? 0.0 : pl.epsilon * line_integral(pl.field, reference_path, pl.coupling);
  return phasor(coupling / pl.hbar) * (sum / static_cast<double>(ensemble.paths.size()));
}

CrossTerms alpha_beta(Amplitude right, Amplitude left) {
  const Amplitude c = right * std::conj(left);
  return {c.real(), c.imag()};
}

double interference_term(double alpha, double beta, double phase) {
  return 2.0 * alpha * std::cos(phase) - 2.0 * beta * std::sin(phase);
}

InterferenceResult interference_analytic(double alpha, double beta, double epsilon, double flux_density,
                                         double core_radius, double hbar) {
  if (!(core_radius > 0.0)) throw ValidationError("interference_analytic: rho_a must be > 0");
  if (!(hbar > 0.0)) throw ValidationError("interference_analytic: hbar must be > 0");
  const double phase = epsilon * flux_density * std::numbers::pi * core_radius * core_radius / hbar;
  return {alpha, beta, phase, interference_term(alpha, beta, phase), epsilon, InterferenceMethod::analytic};
}

InterferenceResult interference_from_loop(double alpha, double beta, const FluxTubeField& field,
                                          const Polyline& right_path, const Polyline& left_path,
                                          const ForbiddenVolume& barrier, double epsilon, double hbar,
                                          const Quadrature& quad) {
  if (!(hbar > 0.0)) throw ValidationError("interference_from_loop: hbar must be > 0");
  if (path_sector(right_path, barrier) != Side::right)
    throw ValidationError("interference_from_loop: first path must pass on the right");
  if (path_sector(left_path, barrier) != Side::left)
    throw ValidationError("interference_from_loop: second path must pass on the left");
  if (norm(right_path.front() - left_path.front()) > 1e-12 || norm(right_path.back() - left_path.back()) > 1e-12)
    throw ValidationError("interference_from_loop: paths must share source and detector");

  // out along the right path, back along the left one
  std::vector<CartPoint> loop = right_path.vertices();
  const auto& back = left_path.vertices();
  loop.insert(loop.end(), back.rbegin() + 1, back.rend());
  loop.back() = loop.front();
  const double phase = epsilon * loop_integral(field, Polyline(std::move(loop), true), quad) / hbar;
  return {alpha, beta, phase, interference_term(alpha, beta, phase), epsilon, InterferenceMethod::loop};
}

double total_probability(Amplitude right, Amplitude left, double phase) {
  return std::norm(phasor(phase) * right + left);
}

// ---------------------------------------------------------------------------------------------

namespace {

struct LinearFit {
  Eigen::Vector3d coeffs;
  double rss;
};

LinearFit fit_at(double w, const Eigen::VectorXd& e, const Eigen::VectorXd& y) {
  Eigen::MatrixXd a(e.size(), 3);
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    a(i, 0) = std::cos(w * e[i]);
    a(i, 1) = std::sin(w * e[i]);
    a(i, 2) = 1.0;
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
  return {c, (a * c - y).squaredNorm()};
}

}  // namespace

PhaseFit phase_fit(std::span<const double> epsilon, std::span<const double> values) {
  if (epsilon.size() != values.size()) throw ValidationError("phase_fit: epsilon and value counts differ");
  const auto n = static_cast<Eigen::Index>(epsilon.size());
  if (n < 8) throw ValidationError("phase_fit: need at least 8 samples");
  Eigen::VectorXd e(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    e[i] = epsilon[i];
    y[i] = values[i];
    if (!std::isfinite(e[i]) || !std::isfinite(y[i])) throw ValidationError("phase_fit: non-finite sample");
  }

  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  if ((y.array() - y.mean()).abs().maxCoeff() <= 1e-13 * scale)
    throw ValidationError("phase_fit: degenerate (constant) sweep");

  std::vector<double> sorted(epsilon.begin(), epsilon.end());
  std::sort(sorted.begin(), sorted.end());
  const double span = sorted.back() - sorted.front();
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    if (sorted[i + 1] > sorted[i]) min_gap = std::min(min_gap, sorted[i + 1] - sorted[i]);
  if (!(span > 0.0)) throw ValidationError("phase_fit: epsilon values do not span an interval");

  // coarse scan from half a period over the span up to the Nyquist frequency
  const double w_lo = std::numbers::pi / span;
  const double w_hi = std::numbers::pi / min_gap;
  const double dw = w_lo / 16.0;
  double best_w = w_lo;
  double best_rss = std::numeric_limits<double>::infinity();
  for (double w = w_lo; w <= w_hi; w += dw) {
    const double rss = fit_at(w, e, y).rss;
    if (rss < best_rss) {
      best_rss = rss;
      best_w = w;
    }
  }

  // Levenberg-Marquardt on (a, b, c, w)
  Eigen::Vector4d p;
  p.head<3>() = fit_at(best_w, e, y).coeffs;
  p[3] = best_w;
  const auto residuals = [&](const Eigen::Vector4d& q) {
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i)
      r[i] = q[0] * std::cos(q[3] * e[i]) + q[1] * std::sin(q[3] * e[i]) + q[2] - y[i];
    return r;
  };
  Eigen::VectorXd r = residuals(p);
  double cost = r.squaredNorm();
  double lambda = 1e-6;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::MatrixXd j(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = std::cos(p[3] * e[i]);
      const double s = std::sin(p[3] * e[i]);
      j(i, 0) = c;
      j(i, 1) = s;
      j(i, 2) = 1.0;
      j(i, 3) = e[i] * (-p[0] * s + p[1] * c);
    }
    const Eigen::Matrix4d jtj = j.transpose() * j;
    const Eigen::Vector4d g = j.transpose() * r;
    Eigen::Matrix4d damped = jtj;
    damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
    const Eigen::Vector4d step = damped.ldlt().solve(-g);
    const Eigen::Vector4d trial = p + step;
    const Eigen::VectorXd rt = residuals(trial);
    const double trial_cost = rt.squaredNorm();
    if (trial_cost <= cost) {
      const bool converged = step.cwiseAbs().maxCoeff() <= 1e-15 * std::max(1.0, p.cwiseAbs().maxCoeff());
      p = trial;
      r = rt;
      cost = trial_cost;
      lambda = std::max(lambda * 0.1, 1e-15);
      if (converged) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }

  PhaseFit fit{std::abs(p[3]), std::sqrt(cost / static_cast<double>(n)), p[0], p[1], p[2]};
  if (p[3] < 0.0) fit.sin_coeff = -fit.sin_coeff;
  if (fit.frequency * span < 2.0 * std::numbers::pi * (1.0 - 1e-9))
    throw ValidationError("phase_fit: sweep covers less than one period of the fitted oscillation");
  return fit;
}

}  // namespace ablab
