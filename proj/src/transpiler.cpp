#include "qroute/transpiler.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>

#include "qroute/errors.hpp"

namespace qroute {

using std::numbers::pi;

// ---------------------------------------------------------------- coupling map

CouplingMap::CouplingMap(int n_physical, std::set<std::pair<int, int>> edges, std::string name)
    : n_physical_(n_physical), name_(std::move(name)) {
  if (n_physical < 1 || n_physical > kMaxQubits) {
    throw ValidationError("coupling map size " + std::to_string(n_physical) + " out of range");
  }
  neighbours_.resize(static_cast<std::size_t>(n_physical));
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n_physical || b >= n_physical) {
      throw ValidationError("coupling edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    }
    if (a == b) throw ValidationError("coupling edge is a self loop");
    if (a > b) std::swap(a, b);
    if (edges_.insert({a, b}).second) {
      neighbours_[static_cast<std::size_t>(a)].push_back(b);
      neighbours_[static_cast<std::size_t>(b)].push_back(a);
    }
  }
  for (auto& nb : neighbours_) std::sort(nb.begin(), nb.end());
  // connectivity
  std::vector<bool> seen(static_cast<std::size_t>(n_physical), false);
  std::deque<int> queue{0};
  seen[0] = true;
  int reached = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : neighbours_[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        ++reached;
        queue.push_back(w);
      }
    }
  }
  if (reached != n_physical) throw ValidationError("coupling map '" + name_ + "' is disconnected");
}

CouplingMap CouplingMap::jakarta() {
  return CouplingMap(7, {{0, 1}, {1, 2}, {1, 3}, {3, 5}, {4, 5}, {5, 6}}, "jakarta");
}

CouplingMap CouplingMap::fully_connected(int n) {
  std::set<std::pair<int, int>> edges;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) edges.insert({a, b});
  }
  return CouplingMap(n, std::move(edges), "full");
}

CouplingMap CouplingMap::from_json(const nlohmann::json& doc) {
  try {
    std::set<std::pair<int, int>> edges;
    for (const auto& e : doc.at("edges")) {
      if (e.size() != 2) throw ValidationError("coupling edge must have two endpoints");
      edges.insert({e.at(0).get<int>(), e.at(1).get<int>()});
    }
    return CouplingMap(doc.at("n_physical").get<int>(), std::move(edges), doc.value("name", std::string("custom")));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("coupling map JSON: ") + e.what());
  }
}

CouplingMap CouplingMap::resolve(const std::string& name_or_path) {
  if (name_or_path == "jakarta") return jakarta();
  if (name_or_path == "full") return fully_connected(7);
  std::ifstream in(name_or_path);
  if (!in) throw IoError("cannot open coupling map '" + name_or_path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("coupling map '" + name_or_path + "': " + e.what());
  }
  return from_json(doc);
}

bool CouplingMap::adjacent(int a, int b) const {
  if (a > b) std::swap(a, b);
  return edges_.contains({a, b});
}

std::vector<int> CouplingMap::shortest_path(int a, int b) const {
  std::vector<int> parent(static_cast<std::size_t>(n_physical_), -1);
  std::deque<int> queue{a};
  parent[static_cast<std::size_t>(a)] = a;
  while (!queue.empty() && parent[static_cast<std::size_t>(b)] < 0) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : neighbours_[static_cast<std::size_t>(v)]) {
      if (parent[static_cast<std::size_t>(w)] < 0) {
        parent[static_cast<std::size_t>(w)] = v;
        queue.push_back(w);
      }
    }
  }
  std::vector<int> path{b};
  while (path.back() != a) path.push_back(parent[static_cast<std::size_t>(path.back())]);
  std::reverse(path.begin(), path.end());
  return path;
}

nlohmann::json CouplingMap::to_json() const {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : edges_) edges.push_back({a, b});
  return {{"name", name_}, {"n_physical", n_physical_}, {"edges", std::move(edges)}};
}

// ------------------------------------------------------------ single qubit

namespace {

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * pi);  // (-pi, pi]
  return a;
}

bool is_zero_angle(double a) { return std::abs(wrap_angle(a)) < tol::kEuler * 1e3; }

ComplexMatrix ry_matrix(double theta) {
  ComplexMatrix m(2, 2);
  m << std::cos(theta / 2), -std::sin(theta / 2), std::sin(theta / 2), std::cos(theta / 2);
  return m;
}

ComplexMatrix rz_matrix(double lambda) { return gate_matrix(GateKind::RZ, {lambda}); }

void push_rz(Fragment& out, int q, double angle) {
  if (!is_zero_angle(angle)) out.push_back(CircuitOp::gate(GateKind::RZ, {q}, {wrap_angle(angle)}));
}

}  // namespace

EulerAngles euler_zyz(const ComplexMatrix& u) {
  if (u.rows() != 2 || u.cols() != 2) throw ArgumentError("euler_zyz: expected a 2x2 matrix");
  const cplx det = u.determinant();
  const cplx root = std::sqrt(det);
  const ComplexMatrix v = u / root;
  const double c = std::abs(v(1, 1)), s = std::abs(v(1, 0));
  EulerAngles e;
  e.theta = 2.0 * std::atan2(s, c);
  const double sum = c > tol::kEuler ? 2.0 * std::arg(v(1, 1)) : 0.0;
  const double diff = s > tol::kEuler ? 2.0 * std::arg(v(1, 0)) : 0.0;
  e.phi = 0.5 * (sum + diff);
  e.lambda = 0.5 * (sum - diff);
  e.phase = std::arg(root);
  return e;
}

Fragment lower_one_qubit(const ComplexMatrix& u, int qubit) {
  const EulerAngles e = euler_zyz(u);
  Fragment out;
  if (e.theta < tol::kEuler) {
    // gimbal lock: the outer rotations merge
    push_rz(out, qubit, e.phi + e.lambda);
  } else if (std::abs(e.theta - pi) < tol::kEuler) {
    push_rz(out, qubit, e.lambda + pi);
    out.push_back(CircuitOp::gate(GateKind::X, {qubit}));
    push_rz(out, qubit, e.phi);
  } else {
    push_rz(out, qubit, e.lambda);
    out.push_back(CircuitOp::gate(GateKind::SX, {qubit}));
    push_rz(out, qubit, e.theta + pi);
    out.push_back(CircuitOp::gate(GateKind::SX, {qubit}));
    push_rz(out, qubit, e.phi + pi);
  }
  return out;
}

bool is_basis_kind(GateKind kind) {
  return kind == GateKind::I || kind == GateKind::RZ || kind == GateKind::SX || kind == GateKind::X ||
         kind == GateKind::CX;
}

// ------------------------------------------------------------ decomposition

namespace {

CircuitOp cx(int c, int t) { return CircuitOp::gate(GateKind::CX, {c, t}); }
CircuitOp one(const ComplexMatrix& m, int q) { return CircuitOp::custom(m, {q}); }

// Intermediate form: CX plus arbitrary single-qubit ops.
void expand(const CircuitOp& op, Fragment& out);

void hadamard(int q, Fragment& out) { out.push_back(CircuitOp::gate(GateKind::H, {q})); }
void t_gate(int q, double sign, Fragment& out) { out.push_back(CircuitOp::gate(GateKind::RZ, {q}, {sign * pi / 4})); }

void toffoli(int c1, int c2, int t, Fragment& out) {
  hadamard(t, out);
  out.push_back(cx(c2, t));
  t_gate(t, -1, out);
  out.push_back(cx(c1, t));
  t_gate(t, +1, out);
  out.push_back(cx(c2, t));
  t_gate(t, -1, out);
  out.push_back(cx(c1, t));
  t_gate(c2, +1, out);
  t_gate(t, +1, out);
  hadamard(t, out);
  out.push_back(cx(c1, c2));
  t_gate(c1, +1, out);
  t_gate(c2, -1, out);
  out.push_back(cx(c1, c2));
}

// Controlled-V with the ABC construction; control fires on `control_value`.
void controlled_1q(int c, int t, const ComplexMatrix& v, int control_value, Fragment& out) {
  const EulerAngles e = euler_zyz(v);
  const ComplexMatrix a = rz_matrix(e.phi) * ry_matrix(e.theta / 2);
  const ComplexMatrix b = ry_matrix(-e.theta / 2) * rz_matrix(-(e.lambda + e.phi) / 2);
  const ComplexMatrix cm = rz_matrix((e.lambda - e.phi) / 2);
  ComplexMatrix phase = ComplexMatrix::Identity(2, 2);
  phase(1, 1) = std::exp(cplx(0.0, e.phase));
  if (control_value == 0) out.push_back(CircuitOp::gate(GateKind::X, {c}));
  out.push_back(one(cm, t));
  out.push_back(cx(c, t));
  out.push_back(one(b, t));
  out.push_back(cx(c, t));
  out.push_back(one(a, t));
  out.push_back(one(phase, c));
  if (control_value == 0) out.push_back(CircuitOp::gate(GateKind::X, {c}));
}

// Two-level unitary `v` acting on basis states (row_a, row_b) of a 2-qubit
// register (q0 is the high bit).
void two_level(int q0, int q1, int row_a, int row_b, ComplexMatrix v, Fragment& out) {
  const int diff = row_a ^ row_b;
  if (diff == 3) {
    // CX(q0 -> q1) maps the pair onto states differing only in q0.
    auto perm = [](int x) { return (x & 2) ? (x ^ 1) : x; };
    out.push_back(cx(q0, q1));
    two_level(q0, q1, perm(row_a), perm(row_b), v, out);
    out.push_back(cx(q0, q1));
    return;
  }
  const bool target_is_q0 = diff == 2;
  const int target = target_is_q0 ? q0 : q1;
  const int control = target_is_q0 ? q1 : q0;
  const int control_value = target_is_q0 ? (row_a & 1) : ((row_a >> 1) & 1);
  const int target_bit_a = target_is_q0 ? ((row_a >> 1) & 1) : (row_a & 1);
  if (target_bit_a == 1) {
    const ComplexMatrix x = pauli('X');
    v = x * v * x;
  }
  controlled_1q(control, target, v, control_value, out);
}

void decompose_two_qubit(const ComplexMatrix& u, int q0, int q1, Fragment& out) {
  // Reduce u to a diagonal phase with Givens rotations G_k: G_m..G_1 u = D, so
  // u = G_1^dag .. G_m^dag D and in time order D runs first.
  ComplexMatrix m = u;
  struct Step {
    int a, b;
    ComplexMatrix g;
  };
  std::vector<Step> steps;
  for (int j = 0; j < 3; ++j) {
    for (int i = 3; i > j; --i) {
      const cplx a = m(j, j), b = m(i, j);
      if (std::abs(b) < 1e-14) continue;
      const double n = std::sqrt(std::norm(a) + std::norm(b));
      ComplexMatrix g(2, 2);
      g << std::conj(a) / n, std::conj(b) / n, -b / n, a / n;
      const Eigen::RowVectorXcd rj = m.row(j), ri = m.row(i);
      m.row(j) = g(0, 0) * rj + g(0, 1) * ri;
      m.row(i) = g(1, 0) * rj + g(1, 1) * ri;
      steps.push_back({j, i, g});
    }
  }
  // m is now diag(d0, d1, d2, d3) with d0..d2 = 1 up to rounding
  ComplexMatrix d3 = ComplexMatrix::Identity(2, 2);
  d3(1, 1) = m(3, 3) / std::abs(m(3, 3));
  for (int k = 0; k < 3; ++k) {
    if (std::abs(m(k, k) - cplx(1.0, 0.0)) > 1e-9) {
      throw ArgumentError("two-qubit decomposition: residual is not diagonal");
    }
  }
  controlled_1q(q0, q1, d3, 1, out);
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    two_level(q0, q1, it->a, it->b, it->g.adjoint(), out);
  }
}

void expand(const CircuitOp& op, Fragment& out) {
  if (!op.is_gate()) {
    out.push_back(op);
    return;
  }
  const auto& q = op.qubits;
  switch (op.kind) {
    case GateKind::I:
    case GateKind::X:
    case GateKind::SX:
    case GateKind::RZ:
    case GateKind::CX:
    case GateKind::H:
    case GateKind::T:
    case GateKind::H_THETA:
      out.push_back(op);
      break;
    case GateKind::SWAP:
      out.push_back(cx(q[0], q[1]));
      out.push_back(cx(q[1], q[0]));
      out.push_back(cx(q[0], q[1]));
      break;
    case GateKind::CSWAP:
      out.push_back(cx(q[2], q[1]));
      toffoli(q[0], q[1], q[2], out);
      out.push_back(cx(q[2], q[1]));
      break;
    case GateKind::UG: {
      const double gamma = op.params[0];
      if (gamma == 0.0) break;
      const double phi = std::asin(std::sqrt(gamma));
      hadamard(q[0], out);
      out.push_back(cx(q[0], q[1]));
      out.push_back(one(ry_matrix(phi), q[0]));
      out.push_back(one(ry_matrix(phi), q[1]));
      out.push_back(cx(q[0], q[1]));
      hadamard(q[0], out);
      break;
    }
    case GateKind::CUSTOM:
      if (q.size() == 1) {
        out.push_back(op);
      } else if (q.size() == 2) {
        decompose_two_qubit(op.matrix, q[0], q[1], out);
      } else {
        throw UnsupportedGateError("no decomposition rule for a " + std::to_string(q.size()) + "-qubit CUSTOM gate");
      }
      break;
  }
}

void lower_single(const CircuitOp& op, Fragment& out) {
  const int q = op.qubits[0];
  switch (op.kind) {
    case GateKind::I:
    case GateKind::X:
    case GateKind::SX:
    case GateKind::RZ:
      out.push_back(op);
      break;
    case GateKind::H:
      out.push_back(CircuitOp::gate(GateKind::RZ, {q}, {pi / 2}));
      out.push_back(CircuitOp::gate(GateKind::SX, {q}));
      out.push_back(CircuitOp::gate(GateKind::RZ, {q}, {pi / 2}));
      break;
    case GateKind::T:
      out.push_back(CircuitOp::gate(GateKind::RZ, {q}, {pi / 4}));
      break;
    default: {
      const Fragment f = lower_one_qubit(op.unitary(), q);
      out.insert(out.end(), f.begin(), f.end());
      break;
    }
  }
}

}  // namespace

Circuit decompose_to_basis(const Circuit& circuit) {
  Circuit out(circuit.n_qubits(), circuit.registers());
  for (const auto& op : circuit.ops()) {
    Fragment stage;
    expand(op, stage);
    for (const auto& s : stage) {
      if (s.is_gate() && s.qubits.size() == 1) {
        Fragment lowered;
        lower_single(s, lowered);
        out.append(lowered);
      } else {
        out.append(s);
      }
    }
  }
  return out;
}

// ------------------------------------------------------------------- routing

int circuit_depth(const Circuit& circuit) {
  std::vector<int> level(static_cast<std::size_t>(circuit.n_qubits()), 0);
  int depth = 0;
  for (const auto& op : circuit.ops()) {
    int l = 0;
    for (int q : op.qubits) l = std::max(l, level[static_cast<std::size_t>(q)]);
    ++l;
    for (int q : op.qubits) level[static_cast<std::size_t>(q)] = l;
    depth = std::max(depth, l);
  }
  return depth;
}

namespace {

std::vector<int> complete_layout(std::vector<int> layout, int n_logical, int n_physical) {
  if (layout.empty()) {
    layout.resize(static_cast<std::size_t>(n_logical));
    for (int l = 0; l < n_logical; ++l) layout[static_cast<std::size_t>(l)] = l;
  }
  if (static_cast<int>(layout.size()) != n_logical) {
    throw ArgumentError("initial layout has " + std::to_string(layout.size()) + " entries for " +
                        std::to_string(n_logical) + " logical qubits");
  }
  std::vector<bool> used(static_cast<std::size_t>(n_physical), false);
  for (int p : layout) {
    if (p < 0 || p >= n_physical) throw ArgumentError("initial layout entry " + std::to_string(p) + " out of range");
    if (used[static_cast<std::size_t>(p)]) throw ArgumentError("initial layout is not injective");
    used[static_cast<std::size_t>(p)] = true;
  }
  for (int p = 0; p < n_physical; ++p) {
    if (!used[static_cast<std::size_t>(p)]) layout.push_back(p);
  }
  return layout;
}

}  // namespace

TranspileResult route(const Circuit& circuit, const CouplingMap& map, std::vector<int> initial_layout) {
  const int n_logical = circuit.n_qubits();
  const int n_physical = map.n_physical();
  if (n_logical > n_physical) {
    throw CapacityError("circuit width " + std::to_string(n_logical) + " exceeds coupling map size " +
                        std::to_string(n_physical));
  }
  std::vector<int> layout = complete_layout(std::move(initial_layout), n_logical, n_physical);
  TranspileResult result;
  result.n_logical = n_logical;
  result.initial_layout = layout;
  std::vector<int> at(static_cast<std::size_t>(n_physical));  // physical -> logical
  for (int l = 0; l < n_physical; ++l) at[static_cast<std::size_t>(layout[static_cast<std::size_t>(l)])] = l;

  Circuit out(n_physical, circuit.registers());
  Fragment deferred;
  auto phys = [&](int l) { return layout[static_cast<std::size_t>(l)]; };

  for (const auto& op : circuit.ops()) {
    if (!op.is_gate()) {
      deferred.push_back(op);
      continue;
    }
    if (!is_basis_kind(op.kind)) {
      throw ContractError("route: gate " + std::string(gate_name(op.kind)) + " is not a basis gate");
    }
    if (op.qubits.size() == 1) {
      CircuitOp m = op;
      m.qubits = {phys(op.qubits[0])};
      out.append(std::move(m));
      continue;
    }
    int pa = phys(op.qubits[0]);
    const int pb = phys(op.qubits[1]);
    while (!map.adjacent(pa, pb)) {
      const std::vector<int> path = map.shortest_path(pa, pb);
      const int next = path[1];
      out.append(cx(pa, next));
      out.append(cx(next, pa));
      out.append(cx(pa, next));
      ++result.swap_count;
      const int la = at[static_cast<std::size_t>(pa)], ln = at[static_cast<std::size_t>(next)];
      std::swap(at[static_cast<std::size_t>(pa)], at[static_cast<std::size_t>(next)]);
      layout[static_cast<std::size_t>(la)] = next;
      layout[static_cast<std::size_t>(ln)] = pa;
      pa = next;
    }
    out.append(cx(pa, pb));
  }
  for (CircuitOp op : deferred) {
    op.qubits = {phys(op.qubits[0])};
    out.append(std::move(op));
  }
  result.final_permutation = layout;
  result.cx_count = static_cast<int>(out.count(GateKind::CX));
  result.depth = circuit_depth(out);
  result.circuit = std::move(out);
  return result;
}

TranspileResult transpile(const Circuit& circuit, const CouplingMap& map, std::vector<int> initial_layout) {
  return route(decompose_to_basis(circuit), map, std::move(initial_layout));
}

ComplexMatrix layout_permutation(const std::vector<int>& layout) {
  const int n = static_cast<int>(layout.size());
  const auto dim = static_cast<Eigen::Index>(dim_for(n));
  ComplexMatrix p = ComplexMatrix::Zero(dim, dim);
  for (std::size_t x = 0; x < dim_for(n); ++x) {
    std::size_t y = 0;
    for (int l = 0; l < n; ++l) {
      if (qubit_bit(x, l, n)) y |= std::size_t{1} << (n - 1 - layout[static_cast<std::size_t>(l)]);
    }
    p(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = 1.0;
  }
  return p;
}

EquivalenceReport verify_equivalence(const Circuit& original, const TranspileResult& result) {
  const int n_phys = result.circuit.n_qubits();
  if (original.n_qubits() > kMaxQubits || n_phys > kMaxQubits) throw CapacityError("verify_equivalence: too wide");
  if (original.n_qubits() > n_phys) throw ArgumentError("verify_equivalence: original wider than result");
  ComplexMatrix expected = circuit_unitary(original);
  const int extra = n_phys - original.n_qubits();
  if (extra > 0) {
    const auto d = static_cast<Eigen::Index>(dim_for(extra));
    expected = tensor_product(expected, ComplexMatrix::Identity(d, d));
  }
  const ComplexMatrix actual = layout_permutation(result.final_permutation).adjoint() *
                               circuit_unitary(result.circuit) * layout_permutation(result.initial_layout);
  Eigen::Index r = 0, c = 0;
  expected.cwiseAbs().maxCoeff(&r, &c);
  const cplx pe = expected(r, c), pa = actual(r, c);
  EquivalenceReport rep;
  if (std::abs(pa) < 1e-12) {
    rep.max_deviation = max_abs(expected - actual);
    rep.equivalent = false;
    return rep;
  }
  const ComplexMatrix ne = expected * (std::abs(pe) / pe);
  const ComplexMatrix na = actual * (std::abs(pa) / pa);
  rep.max_deviation = max_abs(ne - na);
  rep.equivalent = rep.max_deviation < tol::kEigen;
  return rep;
}

nlohmann::json transpile_report(const TranspileResult& result, const EquivalenceReport& eq) {
  return {{"swap_count", result.swap_count},
          {"cx_count", result.cx_count},
          {"depth", result.depth},
          {"final_permutation", result.final_permutation},
          {"equivalent", eq.equivalent},
          {"max_deviation", eq.max_deviation}};
}

}  // namespace qroute
