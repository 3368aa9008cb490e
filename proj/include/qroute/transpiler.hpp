#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qroute/circuit.hpp"

namespace qroute {

/// Undirected connectivity over physical qubits.
class CouplingMap {
 public:
  CouplingMap(int n_physical, std::set<std::pair<int, int>> edges, std::string name = "custom");

  /// 7-qubit H shape: 0-1, 1-2, 1-3, 3-5, 4-5, 5-6.
  static CouplingMap jakarta();
  static CouplingMap fully_connected(int n);
  static CouplingMap from_json(const nlohmann::json& doc);
  /// "jakarta", "full", or a path to a JSON file {n_physical, edges}.
  static CouplingMap resolve(const std::string& name_or_path);

  int n_physical() const { return n_physical_; }
  const std::set<std::pair<int, int>>& edges() const { return edges_; }
  const std::string& name() const { return name_; }
  bool adjacent(int a, int b) const;
  /// Shortest path a -> b (inclusive). BFS visits neighbours in ascending
  /// index order, so ties resolve toward the lowest physical index.
  std::vector<int> shortest_path(int a, int b) const;
  nlohmann::json to_json() const;

 private:
  int n_physical_;
  std::set<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> neighbours_;
  std::string name_;
};

struct TranspileResult {
  Circuit circuit{1};
  /// logical -> physical before and after routing, over all physical qubits
  /// (unused physical qubits carry placeholder logicals n_logical, ...).
  std::vector<int> initial_layout;
  std::vector<int> final_permutation;
  int n_logical = 0;
  int swap_count = 0;
  int cx_count = 0;
  int depth = 0;
};

struct EquivalenceReport {
  bool equivalent = false;
  double max_deviation = 0.0;
};

/// ZYZ angles with U = e^{i phase} RZ(phi) RY(theta) RZ(lambda).
struct EulerAngles {
  double theta = 0.0, phi = 0.0, lambda = 0.0, phase = 0.0;
};
EulerAngles euler_zyz(const ComplexMatrix& u);

/// RZ / SX / X lowering of a single-qubit unitary, up to global phase.
Fragment lower_one_qubit(const ComplexMatrix& u, int qubit);

bool is_basis_kind(GateKind kind);

/// Rewrites into {I, RZ, SX, X, CX}; Measure / PostSelect pass through.
Circuit decompose_to_basis(const Circuit& circuit);

/// Inserts SWAPs (as 3 CX) so every CX sits on a coupling edge. Measure and
/// PostSelect ops are emitted after all gates at their qubit's final position.
TranspileResult route(const Circuit& circuit, const CouplingMap& map, std::vector<int> initial_layout = {});

/// decompose_to_basis followed by route.
TranspileResult transpile(const Circuit& circuit, const CouplingMap& map, std::vector<int> initial_layout = {});

/// Compares U_orig (extended by identity on placeholder qubits) with
/// P_final^dagger U_routed P_initial up to global phase. Equivalent when the
/// max elementwise deviation is below 1e-9.
EquivalenceReport verify_equivalence(const Circuit& original, const TranspileResult& result);

/// Permutation matrix sending logical basis states to physical ones.
ComplexMatrix layout_permutation(const std::vector<int>& layout);

int circuit_depth(const Circuit& circuit);

nlohmann::json transpile_report(const TranspileResult& result, const EquivalenceReport& eq);

}  // namespace qroute
