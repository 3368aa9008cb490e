#include "qroute/circuit.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "qroute/errors.hpp"
#include "qroute/kernels.hpp"

namespace qroute {

namespace {

struct GateInfo {
  GateKind kind;
  std::string_view name;
  int arity;
  int params;
};

// CUSTOM arity is taken from its matrix.
constexpr std::array<GateInfo, 12> kGates = {{
    {GateKind::I, "I", 1, 0},
    {GateKind::X, "X", 1, 0},
    {GateKind::SX, "SX", 1, 0},
    {GateKind::RZ, "RZ", 1, 1},
    {GateKind::H, "H", 1, 0},
    {GateKind::T, "T", 1, 0},
    {GateKind::H_THETA, "H_THETA", 1, 1},
    {GateKind::UG, "UG", 2, 1},
    {GateKind::CX, "CX", 2, 0},
    {GateKind::CSWAP, "CSWAP", 3, 0},
    {GateKind::SWAP, "SWAP", 2, 0},
    {GateKind::CUSTOM, "CUSTOM", 0, 0},
}};

const GateInfo& info(GateKind kind) {
  for (const auto& g : kGates) {
    if (g.kind == kind) return g;
  }
  throw ArgumentError("unknown gate kind");
}

int custom_arity(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return -1;
  for (int k = 1; k <= 3; ++k) {
    if (m.rows() == (Eigen::Index{1} << k)) return k;
  }
  return -1;
}

}  // namespace

int gate_arity(GateKind kind) { return info(kind).arity; }
int gate_param_count(GateKind kind) { return info(kind).params; }
std::string_view gate_name(GateKind kind) { return info(kind).name; }

GateKind gate_kind_from_name(std::string_view name) {
  for (const auto& g : kGates) {
    if (g.name == name) return g.kind;
  }
  throw ArgumentError("unknown gate kind '" + std::string(name) + "'");
}

ComplexMatrix gate_matrix(GateKind kind, const std::vector<double>& params) {
  const GateInfo& gi = info(kind);
  if (kind == GateKind::CUSTOM) throw ArgumentError("CUSTOM gates carry their own matrix");
  if (static_cast<int>(params.size()) != gi.params) {
    throw ArgumentError(std::string(gi.name) + " expects " + std::to_string(gi.params) + " parameter(s)");
  }
  using std::numbers::pi;
  const cplx i1{0.0, 1.0};
  ComplexMatrix m;
  switch (kind) {
    case GateKind::I:
      m = ComplexMatrix::Identity(2, 2);
      break;
    case GateKind::X:
      m = pauli('X');
      break;
    case GateKind::SX:
      m.resize(2, 2);
      m << cplx(0.5, 0.5), cplx(0.5, -0.5), cplx(0.5, -0.5), cplx(0.5, 0.5);
      break;
    case GateKind::RZ:
      m = ComplexMatrix::Zero(2, 2);
      m(0, 0) = std::exp(-i1 * params[0] / 2.0);
      m(1, 1) = std::exp(i1 * params[0] / 2.0);
      break;
    case GateKind::H:
      m.resize(2, 2);
      m << 1, 1, 1, -1;
      m /= std::sqrt(2.0);
      break;
    case GateKind::T:
      m = ComplexMatrix::Zero(2, 2);
      m(0, 0) = 1.0;
      m(1, 1) = std::exp(i1 * pi / 4.0);
      break;
    case GateKind::H_THETA: {
      const double c = std::cos(params[0]), s = std::sin(params[0]);
      m.resize(2, 2);
      m << c, -s, s, c;
      break;
    }
    case GateKind::UG: {
      const double gamma = params[0];
      if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ArgumentError("UG: gamma " + std::to_string(gamma) + " outside [0, 1]");
      }
      const double c = std::sqrt(1.0 - gamma), s = std::sqrt(gamma);
      m = ComplexMatrix::Zero(4, 4);
      m(0, 0) = 1.0;
      m(1, 1) = c;
      m(1, 2) = s;
      m(2, 1) = -s;
      m(2, 2) = c;
      m(3, 3) = 1.0;
      break;
    }
    case GateKind::CX:
      m = ComplexMatrix::Zero(4, 4);
      m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
      break;
    case GateKind::SWAP:
      m = ComplexMatrix::Zero(4, 4);
      m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1.0;
      break;
    case GateKind::CSWAP:
      // |1ab> -> |1ba>: exchanges |101> and |110>.
      m = ComplexMatrix::Identity(8, 8);
      m(5, 5) = m(6, 6) = 0.0;
      m(5, 6) = m(6, 5) = 1.0;
      break;
    case GateKind::CUSTOM:
      break;
  }
  return m;
}

CircuitOp CircuitOp::gate(GateKind kind, std::vector<int> qubits, std::vector<double> params) {
  CircuitOp op;
  op.type = OpType::Gate;
  op.kind = kind;
  op.qubits = std::move(qubits);
  op.params = std::move(params);
  return op;
}

CircuitOp CircuitOp::custom(ComplexMatrix matrix, std::vector<int> qubits) {
  CircuitOp op;
  op.type = OpType::Gate;
  op.kind = GateKind::CUSTOM;
  op.qubits = std::move(qubits);
  op.matrix = std::move(matrix);
  return op;
}

CircuitOp CircuitOp::measure(int qubit, std::string reg, int bit) {
  CircuitOp op;
  op.type = OpType::Measure;
  op.qubits = {qubit};
  op.reg = std::move(reg);
  op.bit = bit;
  return op;
}

CircuitOp CircuitOp::post_select(int qubit, int outcome, std::string reg, int bit) {
  CircuitOp op;
  op.type = OpType::PostSelect;
  op.qubits = {qubit};
  op.outcome = outcome;
  op.reg = std::move(reg);
  op.bit = bit;
  return op;
}

ComplexMatrix CircuitOp::unitary() const {
  if (type != OpType::Gate) throw ContractError("unitary() called on a Measure/PostSelect op");
  if (kind == GateKind::CUSTOM) return matrix;
  return gate_matrix(kind, params);
}

bool CircuitOp::operator==(const CircuitOp& other) const {
  if (type != other.type || qubits != other.qubits) return false;
  if (type == OpType::Gate) {
    if (kind != other.kind || params != other.params) return false;
    if (kind == GateKind::CUSTOM) {
      return matrix.rows() == other.matrix.rows() && matrix.cols() == other.matrix.cols() && matrix == other.matrix;
    }
    return true;
  }
  return reg == other.reg && bit == other.bit && (type == OpType::Measure || outcome == other.outcome);
}

Circuit::Circuit(int n_qubits, std::map<std::string, int> registers) : n_qubits_(n_qubits) {
  if (n_qubits < 1) throw BuildError("circuit needs at least one qubit");
  if (n_qubits > kMaxQubits) {
    throw CapacityError("circuit width " + std::to_string(n_qubits) + " exceeds " + std::to_string(kMaxQubits));
  }
  retired_.assign(static_cast<std::size_t>(n_qubits), false);
  for (const auto& [name, size] : registers) add_register(name, size);
}

void Circuit::add_register(const std::string& name, int size) {
  if (name.empty()) throw BuildError("register name is empty");
  if (size < 1 || size > 64) throw BuildError("register '" + name + "' has invalid size " + std::to_string(size));
  if (registers_.contains(name)) throw BuildError("register '" + name + "' already exists");
  registers_[name] = size;
  written_[name].assign(static_cast<std::size_t>(size), false);
}

void Circuit::validate(const CircuitOp& op) const {
  const std::size_t pos = ops_.size();
  for (std::size_t i = 0; i < op.qubits.size(); ++i) {
    const int q = op.qubits[i];
    if (q < 0 || q >= n_qubits_) {
      throw BuildError(pos, "qubit " + std::to_string(q) + " out of range for width " + std::to_string(n_qubits_));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (op.qubits[j] == q) throw BuildError(pos, "qubit " + std::to_string(q) + " repeated");
    }
  }
  if (op.type == OpType::Gate) {
    int arity = gate_arity(op.kind);
    if (op.kind == GateKind::CUSTOM) {
      arity = custom_arity(op.matrix);
      if (arity < 0) throw BuildError(pos, "CUSTOM matrix must be 2^k x 2^k with 1 <= k <= 3");
      if (!is_unitary(op.matrix)) throw BuildError(pos, "CUSTOM matrix is not unitary");
    }
    if (static_cast<int>(op.qubits.size()) != arity) {
      throw BuildError(pos, std::string(gate_name(op.kind)) + " expects " + std::to_string(arity) + " qubit(s)");
    }
    if (static_cast<int>(op.params.size()) != gate_param_count(op.kind)) {
      throw BuildError(pos, std::string(gate_name(op.kind)) + " expects " +
                                std::to_string(gate_param_count(op.kind)) + " parameter(s)");
    }
    if (op.kind == GateKind::UG && !(op.params[0] >= 0.0 && op.params[0] <= 1.0)) {
      throw BuildError(pos, "UG gamma outside [0, 1]");
    }
    for (int q : op.qubits) {
      if (retired_[static_cast<std::size_t>(q)]) {
        throw BuildError(pos, "gate on qubit " + std::to_string(q) + " after it was measured or post-selected");
      }
    }
    return;
  }
  if (op.qubits.size() != 1) throw BuildError(pos, "measurement ops act on exactly one qubit");
  if (retired_[static_cast<std::size_t>(op.qubits[0])]) {
    throw BuildError(pos, "qubit " + std::to_string(op.qubits[0]) + " already measured");
  }
  if (op.type == OpType::PostSelect && op.outcome != 0 && op.outcome != 1) {
    throw BuildError(pos, "post-selection outcome must be 0 or 1");
  }
  const auto it = registers_.find(op.reg);
  if (it == registers_.end()) throw BuildError(pos, "unknown register '" + op.reg + "'");
  if (op.bit < 0 || op.bit >= it->second) {
    throw BuildError(pos, "bit " + std::to_string(op.bit) + " out of range for register '" + op.reg + "'");
  }
  if (written_.at(op.reg)[static_cast<std::size_t>(op.bit)]) {
    throw BuildError(pos, "register bit " + op.reg + "[" + std::to_string(op.bit) + "] written twice");
  }
}

Circuit& Circuit::append(CircuitOp op) {
  validate(op);
  if (op.type != OpType::Gate) {
    retired_[static_cast<std::size_t>(op.qubits[0])] = true;
    written_[op.reg][static_cast<std::size_t>(op.bit)] = true;
  }
  ops_.push_back(std::move(op));
  return *this;
}

Circuit& Circuit::append(const Fragment& fragment) {
  for (const auto& op : fragment) append(op);
  return *this;
}

bool Circuit::is_unitary_only() const {
  for (const auto& op : ops_) {
    if (op.type != OpType::Gate) return false;
  }
  return true;
}

std::size_t Circuit::gate_count() const {
  std::size_t n = 0;
  for (const auto& op : ops_) n += op.is_gate() ? 1 : 0;
  return n;
}

std::size_t Circuit::count(GateKind kind) const {
  std::size_t n = 0;
  for (const auto& op : ops_) n += (op.is_gate() && op.kind == kind) ? 1 : 0;
  return n;
}

bool Circuit::operator==(const Circuit& other) const {
  return n_qubits_ == other.n_qubits_ && registers_ == other.registers_ && ops_ == other.ops_;
}

Circuit append(Circuit circuit, CircuitOp op) {
  circuit.append(std::move(op));
  return circuit;
}

ComplexMatrix circuit_unitary(const Circuit& circuit) {
  if (!circuit.is_unitary_only()) throw ContractError("circuit_unitary: circuit contains Measure/PostSelect ops");
  const int n = circuit.n_qubits();
  const auto dim = static_cast<Eigen::Index>(dim_for(n));
  ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
  for (const auto& op : circuit.ops()) {
    const ComplexMatrix g = op.unitary();
    for (Eigen::Index c = 0; c < dim; ++c) {
      kernels::apply(std::span<cplx>(u.col(c).data(), static_cast<std::size_t>(dim)), n, op.qubits, g);
    }
  }
  return u;
}

Circuit inverse(const Circuit& circuit) {
  if (!circuit.is_unitary_only()) throw ContractError("inverse: circuit contains Measure/PostSelect ops");
  Circuit out(circuit.n_qubits(), circuit.registers());
  const auto& ops = circuit.ops();
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    switch (it->kind) {
      case GateKind::I:
      case GateKind::X:
      case GateKind::H:
      case GateKind::CX:
      case GateKind::SWAP:
      case GateKind::CSWAP:
        out.append(*it);
        break;
      case GateKind::RZ:
      case GateKind::H_THETA:
        out.append(CircuitOp::gate(it->kind, it->qubits, {-it->params[0]}));
        break;
      default:
        out.append(CircuitOp::custom(it->unitary().adjoint(), it->qubits));
        break;
    }
  }
  return out;
}

Circuit concatenate(const Circuit& first, const Circuit& second) {
  if (first.n_qubits() != second.n_qubits()) throw BuildError("concatenate: width mismatch");
  Circuit out = first;
  for (const auto& [name, size] : second.registers()) {
    const auto it = first.registers().find(name);
    if (it == first.registers().end()) {
      out.add_register(name, size);
    } else if (it->second != size) {
      throw BuildError("concatenate: register '" + name + "' size mismatch");
    }
  }
  for (const auto& op : second.ops()) out.append(op);
  return out;
}

nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json rr = nlohmann::json::array(), ir = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ir.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ir));
  }
  return {{"dim", m.rows()}, {"real", std::move(re)}, {"imag", std::move(im)}};
}

ComplexMatrix matrix_from_json(const nlohmann::json& doc) {
  const auto& re = doc.at("real");
  const auto& im = doc.at("imag");
  const auto rows = static_cast<Eigen::Index>(re.size());
  if (rows == 0 || im.size() != re.size()) throw ArgumentError("matrix JSON: real/imag shape mismatch");
  const auto cols = static_cast<Eigen::Index>(re.at(0).size());
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& rr = re.at(static_cast<std::size_t>(r));
    const auto& ir = im.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(rr.size()) != cols || static_cast<Eigen::Index>(ir.size()) != cols) {
      throw ArgumentError("matrix JSON: ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = cplx(rr.at(static_cast<std::size_t>(c)).get<double>(), ir.at(static_cast<std::size_t>(c)).get<double>());
    }
  }
  return m;
}

nlohmann::json to_json(const Circuit& circuit) {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& op : circuit.ops()) {
    nlohmann::json j;
    switch (op.type) {
      case OpType::Gate:
        j["kind"] = std::string(gate_name(op.kind));
        j["qubits"] = op.qubits;
        j["params"] = op.params;
        if (op.kind == GateKind::CUSTOM) j["matrix"] = matrix_to_json(op.matrix);
        break;
      case OpType::Measure:
        j["kind"] = "MEASURE";
        j["qubits"] = op.qubits;
        j["params"] = nlohmann::json::array();
        j["register"] = op.reg;
        j["bit"] = op.bit;
        break;
      case OpType::PostSelect:
        j["kind"] = "POSTSELECT";
        j["qubits"] = op.qubits;
        j["params"] = nlohmann::json::array();
        j["register"] = op.reg;
        j["bit"] = op.bit;
        j["outcome"] = op.outcome;
        break;
    }
    ops.push_back(std::move(j));
  }
  return {{"n_qubits", circuit.n_qubits()}, {"ops", std::move(ops)}, {"registers", circuit.registers()}};
}

Circuit circuit_from_json(const nlohmann::json& doc) {
  try {
    std::map<std::string, int> regs;
    if (doc.contains("registers")) regs = doc.at("registers").get<std::map<std::string, int>>();
    Circuit c(doc.at("n_qubits").get<int>(), regs);
    for (const auto& j : doc.at("ops")) {
      const auto kind = j.at("kind").get<std::string>();
      auto qubits = j.at("qubits").get<std::vector<int>>();
      if (kind == "MEASURE") {
        if (qubits.size() != 1) throw BuildError(c.ops().size(), "MEASURE takes one qubit");
        c.append(CircuitOp::measure(qubits[0], j.at("register").get<std::string>(), j.at("bit").get<int>()));
      } else if (kind == "POSTSELECT") {
        if (qubits.size() != 1) throw BuildError(c.ops().size(), "POSTSELECT takes one qubit");
        c.append(CircuitOp::post_select(qubits[0], j.value("outcome", 0), j.at("register").get<std::string>(),
                                        j.at("bit").get<int>()));
      } else if (kind == "CUSTOM") {
        c.append(CircuitOp::custom(matrix_from_json(j.at("matrix")), std::move(qubits)));
      } else {
        auto params = j.value("params", std::vector<double>{});
        c.append(CircuitOp::gate(gate_kind_from_name(kind), std::move(qubits), std::move(params)));
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("circuit JSON: ") + e.what());
  }
}

}  // namespace qroute
