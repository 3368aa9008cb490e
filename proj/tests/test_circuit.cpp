#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "qroute/circuit.hpp"
#include "qroute/errors.hpp"

using namespace qroute;

namespace {

constexpr double pi = std::numbers::pi;

ComplexVector basis(int dim, int index) {
  ComplexVector v = ComplexVector::Zero(dim);
  v(index) = 1.0;
  return v;
}

Circuit random_circuit(std::mt19937_64& rng, int n, int length) {
  std::uniform_int_distribution<int> pick_q(0, n - 1), pick_kind(0, 7);
  std::uniform_real_distribution<double> angle(-pi, pi), unit(0.0, 1.0);
  Circuit c(n);
  for (int k = 0; k < length; ++k) {
    const int a = pick_q(rng);
    int b = pick_q(rng);
    while (b == a) b = pick_q(rng);
    switch (pick_kind(rng)) {
      case 0: c.append(CircuitOp::gate(GateKind::H, {a})); break;
      case 1: c.append(CircuitOp::gate(GateKind::T, {a})); break;
      case 2: c.append(CircuitOp::gate(GateKind::RZ, {a}, {angle(rng)})); break;
      case 3: c.append(CircuitOp::gate(GateKind::H_THETA, {a}, {angle(rng)})); break;
      case 4: c.append(CircuitOp::gate(GateKind::SX, {a})); break;
      case 5: c.append(CircuitOp::gate(GateKind::CX, {a, b})); break;
      case 6: c.append(CircuitOp::gate(GateKind::UG, {a, b}, {unit(rng)})); break;
      default: c.append(CircuitOp::gate(GateKind::SWAP, {a, b})); break;
    }
  }
  return c;
}

}  // namespace

TEST(circuit, library_gates_are_unitary) {
  for (GateKind k : {GateKind::I, GateKind::X, GateKind::SX, GateKind::H, GateKind::T, GateKind::CX,
                     GateKind::CSWAP, GateKind::SWAP}) {
    EXPECT_TRUE(is_unitary(gate_matrix(k))) << gate_name(k);
  }
  for (double g : {0.0, 0.3, 1.0}) EXPECT_TRUE(is_unitary(gate_matrix(GateKind::UG, {g})));
  EXPECT_TRUE(is_unitary(gate_matrix(GateKind::RZ, {0.7})));
  EXPECT_TRUE(is_unitary(gate_matrix(GateKind::H_THETA, {0.7})));
}

TEST(circuit, sx_squared_is_x) {
  const ComplexMatrix sx = gate_matrix(GateKind::SX);
  EXPECT_LT(max_abs(sx * sx - gate_matrix(GateKind::X)), 1e-12);
}

TEST(circuit, h_theta_rotation_examples) {
  const double theta = 0.955316618124509;
  const ComplexVector out = gate_matrix(GateKind::H_THETA, {theta}) * basis(2, 0);
  EXPECT_NEAR(out(0).real(), std::cos(theta), 1e-15);
  EXPECT_NEAR(out(1).real(), std::sin(theta), 1e-15);
  EXPECT_NEAR(std::norm(out(0)), 1.0 / 3.0, 1e-12);
}

TEST(circuit, ug_amplitude_damping_action) {
  const ComplexMatrix u = gate_matrix(GateKind::UG, {0.36});
  // |1>_sys |0>_env -> sqrt(1-g)|10> - sqrt(g)|01>
  const ComplexVector out = u * basis(4, 2);
  EXPECT_NEAR(out(2).real(), 0.8, 1e-15);
  EXPECT_NEAR(out(1).real(), 0.6, 1e-15);
  EXPECT_NEAR(std::abs(out(0)), 0.0, 1e-15);
  EXPECT_LT(max_abs(gate_matrix(GateKind::UG, {0.0}) - ComplexMatrix::Identity(4, 4)), 1e-15);
  EXPECT_THROW(gate_matrix(GateKind::UG, {1.5}), ArgumentError);
}

TEST(circuit, cswap_permutes_all_basis_states) {
  const ComplexMatrix m = gate_matrix(GateKind::CSWAP);
  const int expected[8] = {0, 1, 2, 3, 4, 6, 5, 7};
  for (int i = 0; i < 8; ++i) {
    EXPECT_LT((m * basis(8, i) - basis(8, expected[i])).cwiseAbs().maxCoeff(), 1e-15) << i;
  }
}

TEST(circuit, cx_first_operand_controls) {
  Circuit c(2);
  c.append(CircuitOp::gate(GateKind::X, {0})).append(CircuitOp::gate(GateKind::CX, {0, 1}));
  const ComplexVector out = circuit_unitary(c) * basis(4, 0);
  EXPECT_NEAR(std::abs(out(3)), 1.0, 1e-15);
}

TEST(circuit, build_errors) {
  Circuit c(3, {{"c0", 2}});
  EXPECT_THROW(c.append(CircuitOp::gate(GateKind::CX, {0, 0})), BuildError);
  EXPECT_THROW(c.append(CircuitOp::gate(GateKind::H, {3})), BuildError);
  EXPECT_THROW(c.append(CircuitOp::gate(GateKind::CX, {0})), BuildError);
  EXPECT_THROW(c.append(CircuitOp::gate(GateKind::RZ, {0})), BuildError);
  EXPECT_THROW(c.append(CircuitOp::gate(GateKind::UG, {0, 1}, {1.2})), BuildError);
  EXPECT_THROW(c.append(CircuitOp::measure(0, "c9", 0)), BuildError);
  EXPECT_THROW(c.append(CircuitOp::measure(0, "c0", 2)), BuildError);
  EXPECT_THROW(c.append(CircuitOp::custom(2.0 * ComplexMatrix::Identity(2, 2), {0})), BuildError);
  EXPECT_THROW(c.append(CircuitOp::post_select(0, 2, "c0", 0)), BuildError);
  EXPECT_TRUE(c.ops().empty());
  EXPECT_THROW(Circuit(kMaxQubits + 1), CapacityError);
}

TEST(circuit, gate_after_measure_is_rejected) {
  Circuit c(2, {{"c0", 2}});
  c.append(CircuitOp::measure(0, "c0", 0));
  EXPECT_THROW(c.append(CircuitOp::gate(GateKind::H, {0})), BuildError);
  EXPECT_THROW(c.append(CircuitOp::measure(0, "c0", 1)), BuildError);
  EXPECT_THROW(c.append(CircuitOp::measure(1, "c0", 0)), BuildError);
  c.append(CircuitOp::measure(1, "c0", 1));
  EXPECT_FALSE(c.is_unitary_only());
  EXPECT_THROW(circuit_unitary(c), ContractError);
  EXPECT_THROW(inverse(c), ContractError);
  EXPECT_THROW(c.ops()[0].unitary(), ContractError);
}

TEST(circuit, build_error_reports_position) {
  Circuit c(2);
  c.append(CircuitOp::gate(GateKind::H, {0}));
  try {
    c.append(CircuitOp::gate(GateKind::H, {5}));
    FAIL();
  } catch (const BuildError& e) {
    EXPECT_EQ(e.position(), 1u);
  }
}

TEST(circuit, functional_append_leaves_original) {
  const Circuit c(2);
  const Circuit d = append(c, CircuitOp::gate(GateKind::H, {0}));
  EXPECT_EQ(c.ops().size(), 0u);
  EXPECT_EQ(d.ops().size(), 1u);
}

TEST(circuit, inverse_composes_to_identity) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const Circuit c = random_circuit(rng, 3, 20);
    const ComplexMatrix u = circuit_unitary(concatenate(c, inverse(c)));
    EXPECT_LT(max_abs(u - ComplexMatrix::Identity(8, 8)), 1e-10);
  }
}

TEST(circuit, concatenate_multiplies_unitaries) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const Circuit a = random_circuit(rng, 3, 10), b = random_circuit(rng, 3, 10);
    EXPECT_LT(max_abs(circuit_unitary(concatenate(a, b)) - circuit_unitary(b) * circuit_unitary(a)), 1e-10);
  }
  EXPECT_THROW(concatenate(Circuit(2), Circuit(3)), BuildError);
}

TEST(circuit, json_round_trip) {
  std::mt19937_64 rng(33);
  Circuit c = random_circuit(rng, 4, 30);
  c.add_register("c0", 2);
  c.append(CircuitOp::custom(gate_matrix(GateKind::H) * gate_matrix(GateKind::T), {2}));
  c.append(CircuitOp::post_select(1, 1, "c0", 1));
  c.append(CircuitOp::measure(0, "c0", 0));
  const Circuit back = circuit_from_json(nlohmann::json::parse(to_json(c).dump()));
  EXPECT_EQ(back, c);
  EXPECT_THROW(circuit_from_json(nlohmann::json{{"ops", nlohmann::json::array()}}), ArgumentError);
}

TEST(circuit, gate_counts) {
  Circuit c(3);
  c.append(CircuitOp::gate(GateKind::CX, {0, 1}))
      .append(CircuitOp::gate(GateKind::CX, {1, 2}))
      .append(CircuitOp::gate(GateKind::H, {0}));
  EXPECT_EQ(c.gate_count(), 3u);
  EXPECT_EQ(c.count(GateKind::CX), 2u);
  EXPECT_EQ(gate_kind_from_name("CSWAP"), GateKind::CSWAP);
  EXPECT_THROW(gate_kind_from_name("FOO"), ArgumentError);
}
