#pragma once

// Single-parameter noisy channel realized with an environment qubit plus
// post-selection, the angle-parameterized correction that undoes it from a
// guessed channel strength, and the closed-form success probabilities.

#include <string>

#include "qroute/circuit.hpp"

namespace qroute {

struct ChannelParams {
  double gamma = 0.0;        // true channel strength
  double gamma_guess = 0.5;  // statistical estimate used by the correction

  void validate() const;
};

/// Transmitted qubit alpha|0> + beta|1>.
struct QubitSpec {
  cplx alpha{1.0, 0.0};
  cplx beta{0.0, 0.0};

  void validate() const;
  ComplexVector vector() const;
};

struct CorrectionAngle {
  double theta = 0.0;  // radians
};

/// Where a post-selection outcome is recorded.
struct ClassicalTarget {
  std::string reg = "c1";
  int bit = 0;
};

/// [UG(gamma) on (system, environment), PostSelect(environment, 0)].
Fragment channel_subcircuit(double gamma, int system, int environment, ClassicalTarget target = {});

/// theta = arctan(1 / sqrt(1 - gamma_guess)). gamma_guess == 1 raises
/// DegenerateParameterError.
CorrectionAngle choose_theta(double gamma_guess);

/// [H_THETA(theta) on ancilla, CX(system -> ancilla), PostSelect(ancilla, 0)].
/// Only the angle enters; the true channel strength never reaches this path.
Fragment correction_subcircuit(CorrectionAngle theta, int system, int ancilla, ClassicalTarget target = {});

/// Channel survival probability |alpha|^2 + |beta|^2 (1 - gamma).
double analytic_p1(const QubitSpec& q, double gamma);

/// Correction survival probability conditioned on channel survival.
double analytic_p2(const QubitSpec& q, double gamma, CorrectionAngle theta);

/// Product of analytic_p2 over both corrected qubits.
double overall_success(const QubitSpec& control, const QubitSpec& signal, double gamma, double gamma_guess);

/// State after channel + correction on `q`, normalized (closed form).
ComplexVector corrected_state(const QubitSpec& q, double gamma, CorrectionAngle theta);

}  // namespace qroute
