#include "qroute/noise_correction.hpp"

#include <cmath>

#include "qroute/errors.hpp"

namespace qroute {

namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError(std::string(name) + " = " + std::to_string(v) + " outside [0, 1]");
}

}  // namespace

void ChannelParams::validate() const {
  check_unit(gamma, "gamma");
  check_unit(gamma_guess, "gamma_guess");
}

void QubitSpec::validate() const {
  const double norm = std::norm(alpha) + std::norm(beta);
  if (std::abs(norm - 1.0) > tol::kExact) {
    throw ArgumentError("qubit amplitudes are not normalized (|a|^2+|b|^2 = " + std::to_string(norm) + ")");
  }
}

ComplexVector QubitSpec::vector() const {
  ComplexVector v(2);
  v << alpha, beta;
  return v;
}

Fragment channel_subcircuit(double gamma, int system, int environment, ClassicalTarget target) {
  check_unit(gamma, "gamma");
  if (system == environment) throw BuildError("channel_subcircuit: system and environment must differ");
  return {CircuitOp::gate(GateKind::UG, {system, environment}, {gamma}),
          CircuitOp::post_select(environment, 0, target.reg, target.bit)};
}

CorrectionAngle choose_theta(double gamma_guess) {
  check_unit(gamma_guess, "gamma_guess");
  if (gamma_guess == 1.0) {
    throw DegenerateParameterError("gamma_guess = 1 gives theta = pi/2, which annihilates the |0> component");
  }
  return {std::atan(1.0 / std::sqrt(1.0 - gamma_guess))};
}

Fragment correction_subcircuit(CorrectionAngle theta, int system, int ancilla, ClassicalTarget target) {
  if (system == ancilla) throw BuildError("correction_subcircuit: system and ancilla must differ");
  return {CircuitOp::gate(GateKind::H_THETA, {ancilla}, {theta.theta}),
          CircuitOp::gate(GateKind::CX, {system, ancilla}),
          CircuitOp::post_select(ancilla, 0, target.reg, target.bit)};
}

double analytic_p1(const QubitSpec& q, double gamma) {
  q.validate();
  check_unit(gamma, "gamma");
  return std::norm(q.alpha) + std::norm(q.beta) * (1.0 - gamma);
}

double analytic_p2(const QubitSpec& q, double gamma, CorrectionAngle theta) {
  const double p1 = analytic_p1(q, gamma);
  if (p1 < tol::kBranchFloor) throw DegenerateParameterError("channel survival probability is zero");
  const double c = std::cos(theta.theta), s = std::sin(theta.theta);
  return (std::norm(q.alpha * c) + std::norm(q.beta * s) * (1.0 - gamma)) / p1;
}

double overall_success(const QubitSpec& control, const QubitSpec& signal, double gamma, double gamma_guess) {
  const CorrectionAngle theta = choose_theta(gamma_guess);
  return analytic_p2(control, gamma, theta) * analytic_p2(signal, gamma, theta);
}

ComplexVector corrected_state(const QubitSpec& q, double gamma, CorrectionAngle theta) {
  q.validate();
  check_unit(gamma, "gamma");
  ComplexVector v(2);
  v << q.alpha * std::cos(theta.theta), q.beta * std::sqrt(1.0 - gamma) * std::sin(theta.theta);
  const double norm = v.norm();
  if (norm < std::sqrt(tol::kBranchFloor)) throw DegenerateParameterError("corrected state has zero norm");
  return v / norm;
}

}  // namespace qroute
