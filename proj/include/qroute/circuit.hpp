#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qroute/qmath.hpp"

namespace qroute {

enum class GateKind { I, X, SX, RZ, H, T, H_THETA, UG, CX, CSWAP, SWAP, CUSTOM };

enum class OpType { Gate, Measure, PostSelect };

int gate_arity(GateKind kind);
int gate_param_count(GateKind kind);
std::string_view gate_name(GateKind kind);
GateKind gate_kind_from_name(std::string_view name);

/// Exact unitary of a library gate, operands in big-endian order (first
/// operand is the most significant bit). UG acts on (system, environment).
ComplexMatrix gate_matrix(GateKind kind, const std::vector<double>& params = {});

struct CircuitOp {
  OpType type = OpType::Gate;
  GateKind kind = GateKind::I;
  std::vector<int> qubits;
  std::vector<double> params;
  ComplexMatrix matrix;      // only for CUSTOM
  std::string reg;           // Measure / PostSelect target register
  int bit = 0;               // bit inside `reg`
  int outcome = 0;           // PostSelect required outcome

  static CircuitOp gate(GateKind kind, std::vector<int> qubits, std::vector<double> params = {});
  static CircuitOp custom(ComplexMatrix matrix, std::vector<int> qubits);
  static CircuitOp measure(int qubit, std::string reg, int bit);
  static CircuitOp post_select(int qubit, int outcome, std::string reg, int bit);

  bool is_gate() const { return type == OpType::Gate; }
  /// Unitary of a gate op (throws ContractError for Measure/PostSelect).
  ComplexMatrix unitary() const;

  bool operator==(const CircuitOp& other) const;
};

/// A sequence of ops emitted by a builder, appended into a Circuit later.
using Fragment = std::vector<CircuitOp>;

/// Ordered operation list over a fixed register width. Every append is
/// validated; a built Circuit is a plain value.
class Circuit {
 public:
  explicit Circuit(int n_qubits, std::map<std::string, int> registers = {});

  int n_qubits() const { return n_qubits_; }
  const std::vector<CircuitOp>& ops() const { return ops_; }
  const std::map<std::string, int>& registers() const { return registers_; }

  void add_register(const std::string& name, int size);
  Circuit& append(CircuitOp op);
  Circuit& append(const Fragment& fragment);

  /// True when the circuit has no Measure / PostSelect ops.
  bool is_unitary_only() const;
  std::size_t gate_count() const;
  std::size_t count(GateKind kind) const;

  bool operator==(const Circuit& other) const;

 private:
  void validate(const CircuitOp& op) const;

  int n_qubits_;
  std::map<std::string, int> registers_;
  std::vector<CircuitOp> ops_;
  std::vector<bool> retired_;  // qubit already measured / post-selected
  std::map<std::string, std::vector<bool>> written_;
};

/// Functional append: returns a copy with `op` added.
Circuit append(Circuit circuit, CircuitOp op);

/// Full 2^n x 2^n unitary. Requires a unitary-only circuit of width <= kMaxQubits.
ComplexMatrix circuit_unitary(const Circuit& circuit);

/// Reversed circuit of adjoint gates. Unitary-only circuits only.
Circuit inverse(const Circuit& circuit);

/// Gate kinds composed by concatenation; registers are merged.
Circuit concatenate(const Circuit& first, const Circuit& second);

nlohmann::json to_json(const Circuit& circuit);
Circuit circuit_from_json(const nlohmann::json& doc);

nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& doc);

}  // namespace qroute
