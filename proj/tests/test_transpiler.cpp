#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "qroute/errors.hpp"
#include "qroute/simulator.hpp"
#include "qroute/transpiler.hpp"

using namespace qroute;

namespace {

constexpr double pi = std::numbers::pi;

ComplexMatrix random_unitary(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  ComplexMatrix a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(a);
  return qr.householderQ();
}

// Max deviation after aligning the global phase on the largest entry.
double phase_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  Eigen::Index r = 0, c = 0;
  a.cwiseAbs().maxCoeff(&r, &c);
  const cplx phase = b(r, c) / a(r, c);
  return max_abs(a * (phase / std::abs(phase)) - b);
}

ComplexMatrix fragment_unitary(const Fragment& f, int n) {
  Circuit c(n);
  c.append(f);
  return circuit_unitary(c);
}

Circuit random_logical(std::mt19937_64& rng, int n, int length) {
  std::uniform_int_distribution<int> pick_q(0, n - 1), pick_kind(0, 9);
  std::uniform_real_distribution<double> angle(-pi, pi), unit(0.0, 1.0);
  Circuit c(n);
  for (int k = 0; k < length; ++k) {
    const int a = pick_q(rng);
    int b = pick_q(rng);
    while (b == a) b = pick_q(rng);
    int d = pick_q(rng);
    while (d == a || d == b) d = pick_q(rng);
    switch (pick_kind(rng)) {
      case 0: c.append(CircuitOp::gate(GateKind::H, {a})); break;
      case 1: c.append(CircuitOp::gate(GateKind::T, {a})); break;
      case 2: c.append(CircuitOp::gate(GateKind::H_THETA, {a}, {angle(rng)})); break;
      case 3: c.append(CircuitOp::gate(GateKind::RZ, {a}, {angle(rng)})); break;
      case 4: c.append(CircuitOp::gate(GateKind::CX, {a, b})); break;
      case 5: c.append(CircuitOp::gate(GateKind::UG, {a, b}, {unit(rng)})); break;
      case 6: c.append(CircuitOp::gate(GateKind::SWAP, {a, b})); break;
      case 7: c.append(CircuitOp::gate(GateKind::CSWAP, {a, b, d})); break;
      case 8: c.append(CircuitOp::custom(random_unitary(rng, 2), {a})); break;
      default: c.append(CircuitOp::custom(random_unitary(rng, 4), {a, b})); break;
    }
  }
  return c;
}

bool all_basis(const Circuit& c) {
  for (const auto& op : c.ops()) {
    if (op.is_gate() && !is_basis_kind(op.kind)) return false;
  }
  return true;
}

bool all_cx_on_edges(const Circuit& c, const CouplingMap& map) {
  for (const auto& op : c.ops()) {
    if (op.is_gate() && op.kind == GateKind::CX && !map.adjacent(op.qubits[0], op.qubits[1])) return false;
  }
  return true;
}

}  // namespace

TEST(transpiler, euler_reconstructs_unitary) {
  std::mt19937_64 rng(61);
  auto rz = [](double a) { return gate_matrix(GateKind::RZ, {a}); };
  auto ry = [](double a) {
    ComplexMatrix m(2, 2);
    m << std::cos(a / 2), -std::sin(a / 2), std::sin(a / 2), std::cos(a / 2);
    return m;
  };
  std::vector<ComplexMatrix> cases{gate_matrix(GateKind::H), gate_matrix(GateKind::X), gate_matrix(GateKind::T),
                                   gate_matrix(GateKind::SX), ComplexMatrix::Identity(2, 2), pauli('Y')};
  for (int i = 0; i < 50; ++i) cases.push_back(random_unitary(rng, 2));
  for (const auto& u : cases) {
    const EulerAngles e = euler_zyz(u);
    const ComplexMatrix back = std::exp(cplx(0.0, e.phase)) * rz(e.phi) * ry(e.theta) * rz(e.lambda);
    EXPECT_LT(max_abs(back - u), 1e-10);
  }
  EXPECT_THROW(euler_zyz(ComplexMatrix::Identity(4, 4)), ArgumentError);
}

TEST(transpiler, one_qubit_lowering_cases) {
  std::mt19937_64 rng(62);
  Circuit hc(1);
  hc.append(CircuitOp::gate(GateKind::H, {0}));
  const Circuit hd = decompose_to_basis(hc);
  const auto& h = hd.ops();
  ASSERT_EQ(h.size(), 3u);
  EXPECT_EQ(h[0].kind, GateKind::RZ);
  EXPECT_NEAR(h[0].params[0], pi / 2, 1e-12);
  EXPECT_EQ(h[1].kind, GateKind::SX);
  EXPECT_EQ(h[2].kind, GateKind::RZ);
  EXPECT_NEAR(h[2].params[0], pi / 2, 1e-12);

  EXPECT_LT(phase_distance(gate_matrix(GateKind::H), circuit_unitary(hd)), 1e-10);
  EXPECT_EQ(lower_one_qubit(gate_matrix(GateKind::H), 0).size(), 5u);

  Circuit tc(1);
  tc.append(CircuitOp::gate(GateKind::T, {0}));
  const Circuit td = decompose_to_basis(tc);
  const auto& t = td.ops();
  ASSERT_EQ(t.size(), 1u);
  EXPECT_NEAR(t[0].params[0], pi / 4, 1e-12);

  EXPECT_TRUE(lower_one_qubit(ComplexMatrix::Identity(2, 2), 0).empty());

  const Fragment x = lower_one_qubit(gate_matrix(GateKind::X), 0);
  bool has_x = false;
  for (const auto& op : x) has_x |= op.kind == GateKind::X;
  EXPECT_TRUE(has_x);

  for (int i = 0; i < 50; ++i) {
    const ComplexMatrix u = random_unitary(rng, 2);
    const Fragment f = lower_one_qubit(u, 0);
    EXPECT_LE(f.size(), 5u);
    for (const auto& op : f) EXPECT_TRUE(is_basis_kind(op.kind));
    EXPECT_LT(phase_distance(u, fragment_unitary(f, 1)), 1e-10);
  }
}

TEST(transpiler, decomposition_rules_are_exact) {
  for (double g : {0.0, 0.3, 0.5, 1.0}) {
    Circuit c(2);
    c.append(CircuitOp::gate(GateKind::UG, {0, 1}, {g}));
    const Circuit d = decompose_to_basis(c);
    EXPECT_TRUE(all_basis(d));
    EXPECT_LT(phase_distance(circuit_unitary(c), circuit_unitary(d)), 1e-10) << g;
    if (g == 0.0) EXPECT_EQ(d.gate_count(), 0u);
  }
  Circuit sw(2);
  sw.append(CircuitOp::gate(GateKind::SWAP, {0, 1}));
  const Circuit dsw = decompose_to_basis(sw);
  EXPECT_EQ(dsw.count(GateKind::CX), 3u);
  EXPECT_LT(phase_distance(circuit_unitary(sw), circuit_unitary(dsw)), 1e-10);
}

TEST(transpiler, cswap_on_every_basis_state) {
  Circuit c(3);
  c.append(CircuitOp::gate(GateKind::CSWAP, {0, 1, 2}));
  const Circuit d = decompose_to_basis(c);
  EXPECT_TRUE(all_basis(d));
  const int expected[8] = {0, 1, 2, 3, 4, 6, 5, 7};
  for (int i = 0; i < 8; ++i) {
    const SimState s = run_statevector(d, static_cast<std::size_t>(i));
    EXPECT_NEAR(std::abs(s.amplitudes(expected[i])), 1.0, 1e-10) << i;
  }
}

TEST(transpiler, custom_three_qubit_gate_is_unsupported) {
  std::mt19937_64 rng(63);
  Circuit c(3);
  c.append(CircuitOp::custom(random_unitary(rng, 8), {0, 1, 2}));
  EXPECT_THROW(decompose_to_basis(c), UnsupportedGateError);
}

TEST(transpiler, random_corpus_on_jakarta) {
  std::mt19937_64 rng(64);
  const CouplingMap map = CouplingMap::jakarta();
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 3 + trial % 5;
    const Circuit c = random_logical(rng, n, 25);
    std::vector<int> layout(static_cast<std::size_t>(map.n_physical()));
    for (int i = 0; i < map.n_physical(); ++i) layout[static_cast<std::size_t>(i)] = i;
    std::shuffle(layout.begin(), layout.end(), rng);
    layout.resize(static_cast<std::size_t>(n));
    const TranspileResult r = transpile(c, map, layout);
    EXPECT_TRUE(all_basis(r.circuit));
    EXPECT_TRUE(all_cx_on_edges(r.circuit, map));
    EXPECT_EQ(r.circuit.count(GateKind::CX), static_cast<std::size_t>(r.cx_count));
    const EquivalenceReport eq = verify_equivalence(c, r);
    EXPECT_TRUE(eq.equivalent) << "trial " << trial << " deviation " << eq.max_deviation;
  }
}

TEST(transpiler, corrupted_result_is_not_equivalent) {
  std::mt19937_64 rng(65);
  const Circuit c = random_logical(rng, 4, 15);
  TranspileResult r = transpile(c, CouplingMap::jakarta());
  ASSERT_TRUE(verify_equivalence(c, r).equivalent);
  Circuit broken = r.circuit;
  broken.append(CircuitOp::gate(GateKind::X, {0}));
  r.circuit = broken;
  const EquivalenceReport eq = verify_equivalence(c, r);
  EXPECT_FALSE(eq.equivalent);
  EXPECT_GT(eq.max_deviation, 1e-3);
}

TEST(transpiler, fully_connected_needs_no_swaps) {
  std::mt19937_64 rng(66);
  const Circuit c = random_logical(rng, 5, 30);
  const TranspileResult r = transpile(c, CouplingMap::fully_connected(5));
  EXPECT_EQ(r.swap_count, 0);
  EXPECT_EQ(r.final_permutation, r.initial_layout);
  EXPECT_TRUE(verify_equivalence(c, r).equivalent);
}

TEST(transpiler, measurements_move_to_final_positions) {
  // CX between physical 0 and 6 on jakarta forces swaps.
  Circuit c(7, {{"c0", 2}});
  c.append(CircuitOp::gate(GateKind::H, {0}))
      .append(CircuitOp::gate(GateKind::CX, {0, 6}))
      .append(CircuitOp::measure(0, "c0", 0))
      .append(CircuitOp::measure(6, "c0", 1));
  const TranspileResult r = transpile(c, CouplingMap::jakarta());
  EXPECT_GT(r.swap_count, 0);
  const ShotRecord a = sample_shots(c, 2000, NoiseSpec::none(1));
  const ShotRecord b = sample_shots(r.circuit, 2000, NoiseSpec::none(1));
  EXPECT_EQ(a.registers.at("c0").size(), 2u);
  for (const auto& [bits, n] : b.registers.at("c0")) EXPECT_TRUE(bits == "00" || bits == "11") << bits;
  std::size_t measures = 0;
  for (const auto& op : r.circuit.ops()) {
    if (op.type == OpType::Measure) {
      ++measures;
      EXPECT_EQ(op.qubits[0], r.final_permutation[static_cast<std::size_t>(op.bit == 0 ? 0 : 6)]);
    }
  }
  EXPECT_EQ(measures, 2u);
}

TEST(transpiler, layout_errors) {
  Circuit c(3);
  c.append(CircuitOp::gate(GateKind::CX, {0, 2}));
  const CouplingMap map = CouplingMap::jakarta();
  EXPECT_THROW(transpile(c, map, {0, 1}), ArgumentError);
  EXPECT_THROW(transpile(c, map, {0, 0, 1}), ArgumentError);
  EXPECT_THROW(transpile(c, map, {0, 1, 9}), ArgumentError);
  EXPECT_THROW(transpile(Circuit(8), map), CapacityError);
  Circuit h(2);
  h.append(CircuitOp::gate(GateKind::H, {0}));
  EXPECT_THROW(route(h, map), ContractError);
}

TEST(transpiler, coupling_map_validation) {
  EXPECT_THROW(CouplingMap(3, {{0, 1}}), ValidationError);
  EXPECT_THROW(CouplingMap(2, {{0, 0}, {0, 1}}), ValidationError);
  EXPECT_THROW(CouplingMap(2, {{0, 2}}), ValidationError);
  const CouplingMap j = CouplingMap::jakarta();
  EXPECT_EQ(j.n_physical(), 7);
  EXPECT_EQ(j.edges().size(), 6u);
  EXPECT_TRUE(j.adjacent(5, 3));
  EXPECT_FALSE(j.adjacent(0, 6));
  EXPECT_EQ(j.shortest_path(0, 6), (std::vector<int>{0, 1, 3, 5, 6}));
  const CouplingMap back = CouplingMap::from_json(j.to_json());
  EXPECT_EQ(back.edges(), j.edges());
  EXPECT_THROW(CouplingMap::resolve("/nonexistent/map.json"), IoError);

  const auto path = std::filesystem::temp_directory_path() / "qroute_line_map.json";
  std::ofstream(path) << R"({"n_physical": 3, "edges": [[0, 1], [1, 2]]})";
  EXPECT_EQ(CouplingMap::resolve(path.string()).edges().size(), 2u);
  std::ofstream(path) << R"({"n_physical": 3, "edges": [[0, 1, 2]]})";
  EXPECT_THROW(CouplingMap::resolve(path.string()), ValidationError);
  std::filesystem::remove(path);
}

TEST(transpiler, depth_and_report) {
  Circuit c(3);
  c.append(CircuitOp::gate(GateKind::X, {0}))
      .append(CircuitOp::gate(GateKind::X, {1}))
      .append(CircuitOp::gate(GateKind::CX, {0, 1}))
      .append(CircuitOp::gate(GateKind::X, {2}));
  EXPECT_EQ(circuit_depth(c), 2);
  const TranspileResult r = transpile(c, CouplingMap::jakarta());
  const auto report = transpile_report(r, verify_equivalence(c, r));
  EXPECT_TRUE(report.at("equivalent").get<bool>());
}
