#pragma once

// Pauli-basis state tomography by linear inversion, and readout mitigation by
// calibration-matrix inversion.
//
// Tomographic qubit k is recorded in bit k of the measurement register, so in
// a bitstring it is the k-th character from the right. Probability vectors
// use the big-endian semantic index (qubit 0 is the most significant bit).

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qroute/circuit.hpp"
#include "qroute/simulator.hpp"

namespace qroute {

inline constexpr int kMaxTomographyQubits = 5;

/// One basis label per qubit, each 'X', 'Y' or 'Z'. label[k] is qubit k.
struct TomographySetting {
  std::string bases;

  int n_qubits() const { return static_cast<int>(bases.size()); }
  bool operator==(const TomographySetting&) const = default;
};

struct PauliExpectation {
  std::string pauli;  // over {I, X, Y, Z}, pauli[k] acts on qubit k
  double value = 0.0;
};

/// Counts per setting label ("XYZ" -> bitstring -> count).
using SettingCounts = std::map<std::string, std::map<std::string, std::uint64_t>>;
/// Outcome distribution per setting label, semantic index order.
using SettingProbabilities = std::map<std::string, RealVector>;

/// All 3^n settings, lexicographic with X < Y < Z. CapacityError outside 1..5.
std::vector<TomographySetting> settings(int n_qubits);

/// All 4^n Pauli strings, lexicographic with I < X < Y < Z.
std::vector<std::string> pauli_strings(int n_qubits);

/// Basis change then Measure of `qubits[k]` into `reg` bit k. Defaults to
/// qubits 0..n-1.
Fragment measurement_rotation(const TomographySetting& setting, std::vector<int> qubits = {},
                              const std::string& reg = "c0");

/// Product of the per-qubit basis-change unitaries (qubit 0 most significant).
ComplexMatrix rotation_unitary(const TomographySetting& setting);

/// Born distribution of `rho` measured in `setting`.
RealVector setting_probabilities(const ComplexMatrix& rho, const TomographySetting& setting);

/// Relative frequencies over 2^n outcomes. IncompleteDataError when empty.
RealVector counts_to_probabilities(const std::map<std::string, std::uint64_t>& counts, int n_qubits);

/// Parity estimator averaged over every compatible setting. IncompleteDataError
/// if a setting is missing or has no shots.
std::vector<PauliExpectation> expectations_from_counts(const SettingCounts& counts, int n_qubits);
std::vector<PauliExpectation> expectations_from_probabilities(const SettingProbabilities& probs, int n_qubits);

/// Tr(rho P) for every Pauli string.
std::vector<PauliExpectation> exact_expectations(const ComplexMatrix& rho);

/// 2^-n sum value(P) P, without projection.
ComplexMatrix linear_inversion(const std::vector<PauliExpectation>& expectations);
/// linear_inversion followed by projection onto density matrices.
ComplexMatrix reconstruct(const std::vector<PauliExpectation>& expectations);

/// Column-stochastic readout model, m(i, j) = P(read i | prepared j).
struct CalibrationMatrix {
  int n_qubits = 0;
  RealMatrix m;

  void validate() const;
  nlohmann::json to_json() const;
};

enum class CalibrationMode { Analytic, Measured };

/// Readout model for n qubits from the confusion of circuit qubits 0..n-1.
/// Analytic mode takes the tensor product of per-qubit confusion matrices;
/// measured mode prepares every basis state and samples `shots` readouts.
CalibrationMatrix build_calibration(int n_qubits, const NoiseSpec& noise, CalibrationMode mode = CalibrationMode::Analytic,
                                    std::uint64_t shots = 100000);

/// Readout confusion of `qubits` reindexed to 0..k-1.
NoiseSpec readout_subset(const NoiseSpec& noise, const std::vector<int>& qubits);

/// M^-1 p. ConditioningError when cond(M) exceeds tol::kConditionMax.
RealVector mitigate_unclipped(const RealVector& observed, const CalibrationMatrix& cal);
/// mitigate_unclipped, negatives clipped to zero, renormalized to sum 1.
RealVector mitigate(const RealVector& observed, const CalibrationMatrix& cal);
RealVector mitigate(const std::map<std::string, std::uint64_t>& counts, const CalibrationMatrix& cal);

double total_variation(const RealVector& p, const RealVector& q);

}  // namespace qroute
