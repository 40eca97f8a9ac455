#pragma once

#include <complex>
#include <span>
#include <string>

#include "ablab/field.hpp"
#include "ablab/metric.hpp"
#include "ablab/paths.hpp"

namespace ablab {

using Amplitude = std::complex<double>;

enum class InterferenceMethod { analytic, loop, lattice };

const char* to_string(InterferenceMethod m);

struct InterferenceResult {
  double alpha = 0.0;
  double beta = 0.0;
  double phase = 0.0;  // radians
  double value = 0.0;  // I = 2 alpha cos(phase) - 2 beta sin(phase)
  double epsilon = 0.0;
  InterferenceMethod method = InterferenceMethod::analytic;
};

/// Mean over the ensemble of exp(i S / hbar), S including the epsilon A . dx coupling.
Amplitude side_amplitude_direct(const PathEnsemble& ensemble, const PerturbedLagrangian& pl);

/// exp(i epsilon integral_ref A . ds / hbar) times the mean of exp(i S_free / hbar). Equal to
/// side_amplitude_direct whenever the coupling integral is the same for every path in the sector.
Amplitude side_amplitude_factorized(const PathEnsemble& ensemble, const PerturbedLagrangian& pl,
                                    const Polyline& reference_path);

struct CrossTerms {
  double alpha = 0.0;
  double beta = 0.0;
};

/// alpha + i beta = U_R conj(U_L).
CrossTerms alpha_beta(Amplitude right, Amplitude left);

double interference_term(double alpha, double beta, double phase);

/// Closed form with phase = epsilon F pi rho_a^2 / hbar.
InterferenceResult interference_analytic(double alpha, double beta, double epsilon, double flux_density,
                                         double core_radius, double hbar);

/// Phase from the holonomy of the loop that runs out along `right_path` and back along `left_path`.
InterferenceResult interference_from_loop(double alpha, double beta, const FluxTubeField& field,
                                          const Polyline& right_path, const Polyline& left_path,
                                          const ForbiddenVolume& barrier, double epsilon, double hbar,
                                          const Quadrature& quad = {});

/// |exp(i phase) U_R + U_L|^2, i.e. |U_R|^2 + |U_L|^2 + I with the left sector as phase reference.
double total_probability(Amplitude right, Amplitude left, double phase);

struct PhaseFit {
  double frequency = 0.0;
  double residual = 0.0;  // RMS
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
  double offset = 0.0;
};

/// Least-squares fit of a cos(w e) + b sin(w e) + c. Needs >= 8 samples covering at least one
/// period of the fitted oscillation; a constant sweep is rejected.
PhaseFit phase_fit(std::span<const double> epsilon, std::span<const double> values);

}  // namespace ablab
