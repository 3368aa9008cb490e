#include <gtest/gtest.h>

#include <random>

#include "qroute/errors.hpp"
#include "qroute/noise_correction.hpp"
#include "qroute/simulator.hpp"

using namespace qroute;

namespace {

QubitSpec plus() { return {cplx(1.0 / std::sqrt(2.0), 0.0), cplx(1.0 / std::sqrt(2.0), 0.0)}; }

QubitSpec random_qubit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexVector v(2);
  v << cplx(g(rng), g(rng)), cplx(g(rng), g(rng));
  v.normalize();
  return {v(0), v(1)};
}

// Runs channel + correction on (system 0, environment 1, ancilla 2).
SimState run_protocol(const QubitSpec& q, double gamma, double gamma_guess) {
  Circuit c(3, {{"c1", 2}});
  ComplexMatrix prep(2, 2);
  prep << q.alpha, -std::conj(q.beta), q.beta, std::conj(q.alpha);
  c.append(CircuitOp::custom(prep, {0}));
  c.append(channel_subcircuit(gamma, 0, 1, {"c1", 0}));
  c.append(correction_subcircuit(choose_theta(gamma_guess), 0, 2, {"c1", 1}));
  return run_statevector(c);
}

}  // namespace

TEST(noise_correction, theta_frozen_values) {
  EXPECT_NEAR(choose_theta(0.5).theta, 0.955316618124509, 1e-12);
  EXPECT_NEAR(choose_theta(0.75).theta, 1.107148717794090, 1e-12);
  EXPECT_NEAR(choose_theta(0.0).theta, std::atan(1.0), 1e-15);
  EXPECT_THROW(choose_theta(1.0), DegenerateParameterError);
  EXPECT_THROW(choose_theta(-0.1), ArgumentError);
}

TEST(noise_correction, theta_monotone_in_guess) {
  double prev = 0.0;
  for (double g = 0.0; g < 0.99; g += 0.05) {
    const double t = choose_theta(g).theta;
    EXPECT_GT(t, prev);
    EXPECT_LT(t, std::acos(-1.0) / 2.0);
    prev = t;
  }
}

TEST(noise_correction, analytic_probabilities_frozen) {
  const auto theta = choose_theta(0.5);
  struct Row {
    double gamma, p1, p2;
  };
  for (const Row& r : {Row{0.0, 1.0, 0.5}, Row{0.5, 0.75, 4.0 / 9.0}, Row{0.9, 0.55, 0.363636363636364},
                       Row{1.0, 0.5, 1.0 / 3.0}}) {
    EXPECT_NEAR(analytic_p1(plus(), r.gamma), r.p1, 1e-12) << r.gamma;
    EXPECT_NEAR(analytic_p2(plus(), r.gamma, theta), r.p2, 1e-12) << r.gamma;
  }
  EXPECT_NEAR(overall_success(plus(), plus(), 0.5, 0.5), 0.197530864197531, 1e-12);
  EXPECT_NEAR(overall_success(plus(), plus(), 0.9, 0.5), 0.132231404958678, 1e-12);
  EXPECT_NEAR(overall_success(plus(), plus(), 1.0, 0.5), 1.0 / 9.0, 1e-12);
  EXPECT_NEAR(analytic_p1(plus(), 0.6), 0.7, 1e-12);
  EXPECT_NEAR(analytic_p2(plus(), 0.6, theta), 0.428571428571429, 1e-12);
  EXPECT_NEAR(analytic_p1({cplx(0.0, 0.0), cplx(1.0, 0.0)}, 0.8), 0.2, 1e-12);
}

TEST(noise_correction, subcircuit_structure) {
  const Fragment ch = channel_subcircuit(0.3, 0, 1, {"c1", 2});
  ASSERT_EQ(ch.size(), 2u);
  EXPECT_EQ(ch[0].kind, GateKind::UG);
  EXPECT_EQ(ch[0].qubits, (std::vector<int>{0, 1}));
  EXPECT_EQ(ch[1].type, OpType::PostSelect);
  EXPECT_EQ(ch[1].qubits[0], 1);
  EXPECT_EQ(ch[1].bit, 2);

  const Fragment co = correction_subcircuit({0.4}, 0, 2);
  ASSERT_EQ(co.size(), 3u);
  EXPECT_EQ(co[0].kind, GateKind::H_THETA);
  EXPECT_EQ(co[0].qubits[0], 2);
  EXPECT_EQ(co[1].kind, GateKind::CX);
  EXPECT_EQ(co[1].qubits, (std::vector<int>{0, 2}));
  EXPECT_EQ(co[2].type, OpType::PostSelect);

  EXPECT_THROW(channel_subcircuit(0.3, 1, 1), BuildError);
  EXPECT_THROW(channel_subcircuit(1.3, 0, 1), ArgumentError);
  EXPECT_THROW(correction_subcircuit({0.4}, 2, 2), BuildError);
}

TEST(noise_correction, matched_guess_restores_input) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 0.95);
  for (int trial = 0; trial < 30; ++trial) {
    const QubitSpec q = random_qubit(rng);
    const double g = u(rng);
    const ComplexVector out = corrected_state(q, g, choose_theta(g));
    EXPECT_NEAR(pure_fidelity(out, q.vector()), 1.0, 1e-10);
  }
}

TEST(noise_correction, simulation_matches_closed_form) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(0.0, 0.95);
  for (int trial = 0; trial < 30; ++trial) {
    const QubitSpec q = random_qubit(rng);
    const double g = u(rng), gg = u(rng);
    const SimState s = run_protocol(q, g, gg);
    const auto theta = choose_theta(gg);
    EXPECT_NEAR(s.accumulated_postselect_prob, analytic_p1(q, g) * analytic_p2(q, g, theta), 1e-10);
    ComplexVector sys(2);
    sys << s.amplitudes(0), s.amplitudes(4);
    EXPECT_NEAR(sys.norm(), 1.0, 1e-10);
    EXPECT_NEAR(pure_fidelity(sys, corrected_state(q, g, theta)), 1.0, 1e-10);
  }
}

TEST(noise_correction, success_probability_in_unit_interval) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.0, 0.99);
  for (int trial = 0; trial < 100; ++trial) {
    const QubitSpec q = random_qubit(rng);
    const double g = u(rng);
    const double p1 = analytic_p1(q, g), p2 = analytic_p2(q, g, choose_theta(u(rng)));
    EXPECT_GE(p1, 0.0);
    EXPECT_LE(p1, 1.0);
    EXPECT_GE(p2, 0.0);
    EXPECT_LE(p2, 1.0);
  }
}

TEST(noise_correction, degenerate_inputs) {
  const QubitSpec one{cplx(0.0, 0.0), cplx(1.0, 0.0)};
  EXPECT_THROW(analytic_p2(one, 1.0, choose_theta(0.5)), DegenerateParameterError);
  EXPECT_THROW(QubitSpec({cplx(1.0, 0.0), cplx(1.0, 0.0)}).validate(), ArgumentError);
  EXPECT_THROW((ChannelParams{1.2, 0.5}).validate(), ArgumentError);
}
