#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qroute/circuit.hpp"
#include "qroute/qmath.hpp"

namespace qroute {

/// Pure state plus the running product of post-selection branch probabilities.
struct SimState {
  int n_qubits = 0;
  ComplexVector amplitudes;
  double accumulated_postselect_prob = 1.0;

  static SimState basis(int n_qubits, std::size_t index = 0);
  static SimState from_amplitudes(int n_qubits, ComplexVector amplitudes);

  /// |amplitude|^2 per basis index.
  RealVector probabilities() const;
};

/// Synthetic noise for the sampler. Probabilities in [0, 1].
struct NoiseSpec {
  /// Per qubit (p(read 1 | true 0), p(read 0 | true 1)). Empty means no
  /// readout error; a single entry applies to every qubit.
  std::vector<std::pair<double, double>> readout_confusion;
  /// Probability that a CX is followed by a uniformly chosen non-identity
  /// two-qubit Pauli on its operands.
  double depolarizing_per_cx = 0.0;
  std::uint64_t rng_seed = 0;

  static NoiseSpec none(std::uint64_t seed = 0);
  static NoiseSpec symmetric_readout(double p, std::uint64_t seed = 0);

  void validate() const;
  std::pair<double, double> confusion_for(int qubit) const;
  bool has_readout_error() const;
};

/// Counts per classical register. Measurement registers count kept shots
/// only (their totals equal shots_kept). Registers holding post-selection bits
/// histogram every requested shot, so survival of each stage is recoverable.
struct ShotRecord {
  std::map<std::string, std::map<std::string, std::uint64_t>> registers;
  std::uint64_t shots_requested = 0;
  std::uint64_t shots_kept = 0;
  /// "ok", or "empty" when no shot survived post-selection.
  std::string status = "ok";

  bool empty() const { return shots_kept == 0; }
  nlohmann::json to_json() const;
};

/// Applies one gate op. Throws ContractError for Measure/PostSelect.
SimState apply_gate(SimState state, const CircuitOp& op);
void apply_gate_inplace(SimState& state, const CircuitOp& op);

/// Projects `qubit` onto `outcome` and renormalizes. Returns the new state and
/// the pre-renormalization branch probability. Throws ImpossibleBranchError
/// when that probability is below tol::kBranchFloor.
std::pair<SimState, double> post_select(SimState state, int qubit, int outcome);

/// Exact execution of gates and PostSelect ops in order. Measure ops raise
/// ContractError in this mode.
SimState run_statevector(const Circuit& circuit, std::size_t initial_basis = 0);
SimState run_statevector(const Circuit& circuit, SimState initial);

/// Shot sampling. Gates evolve the state, PostSelect ops become Z measurements
/// whose failing shots are discarded, readout confusion flips recorded Measure
/// bits. Deterministic for a fixed noise.rng_seed regardless of thread count.
ShotRecord sample_shots(const Circuit& circuit, std::uint64_t shots, const NoiseSpec& noise);

/// Bitstring for register bits, little-endian: bit 0 is the rightmost char.
std::string bits_to_string(std::uint64_t bits, int width);
std::uint64_t string_to_bits(const std::string& bitstring);

/// Counter-based random stream: output k of stream (key) is a pure function of
/// (key, k), so shots can be generated in any order or in parallel.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key);
  /// Stream for one shot: the root seed is hashed, then offset by the shot index.
  static CounterRng for_shot(std::uint64_t seed, std::uint64_t shot_index);

  std::uint64_t next_u64();
  /// Uniform double in [0, 1).
  double uniform();
  /// Skips `n` outputs.
  void discard(std::uint64_t n) { counter_ += n; }

 private:
  std::uint64_t hashed_key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);
/// Deterministic derivation of a child seed from (parent, index).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

}  // namespace qroute
