#pragma once

// The 7-qubit router protocol: preparation, noisy channels, corrections,
// controlled-swap routing and tomography, plus the per-run metrics.
//
// Layout: q0 control, q1 control environment, q2 control ancilla, q3 signal,
// q4 signal environment, q5 signal ancilla, q6 blank.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qroute/circuit.hpp"
#include "qroute/noise_correction.hpp"
#include "qroute/simulator.hpp"
#include "qroute/tomography.hpp"
#include "qroute/transpiler.hpp"

namespace qroute {

inline constexpr int kRouterQubits = 7;
inline constexpr int kControl = 0, kControlEnv = 1, kControlAnc = 2;
inline constexpr int kSignal = 3, kSignalEnv = 4, kSignalAnc = 5;
inline constexpr int kBlank = 6;
/// Router output qubits in (control, path 1, path 2) order.
inline const std::vector<int> kOutputQubits{kControl, kSignal, kBlank};

struct RouterInputs {
  QubitSpec control;
  QubitSpec signal;

  /// control = (|0> + |1>)/sqrt2, signal = cos(pi/4)|0> + e^{i pi/4} sin(pi/4)|1>.
  static RouterInputs paper();
  void validate() const;
};

/// Which qubits pass through the noisy channel.
enum class Variant { BothQubits, SignalOnly, NoNoise };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

/// alpha_c |0>|phi_s>|0> + beta_c |1>|0>|phi_s>.
ComplexVector ideal_output(const RouterInputs& inputs);
ComplexMatrix ideal_density(const RouterInputs& inputs);

/// Bits of register c1 that hold channel and correction post-selections.
struct PostSelectLayout {
  std::vector<int> channel_bits;
  std::vector<int> correction_bits;
  int width() const { return static_cast<int>(channel_bits.size() + correction_bits.size()); }
};
PostSelectLayout postselect_layout(Variant variant, bool error_correction);

struct RouterOptions {
  Variant variant = Variant::BothQubits;
  bool error_correction = true;
  std::optional<TomographySetting> tomography;
};

/// ConfigError when error correction is requested on the no-noise variant.
Circuit build_router_circuit(const RouterInputs& inputs, const ChannelParams& params, const RouterOptions& options);

struct RouterExact {
  ComplexMatrix output;               // reduced state of (q0, q3, q6)
  double postselect_probability = 1;  // product of all branch probabilities
};

/// Exact statevector run of the router without tomography.
RouterExact router_exact(const RouterInputs& inputs, const ChannelParams& params, Variant variant,
                         bool error_correction);

/// Channel survival probability over the noisy qubits.
double p1_theory(const RouterInputs& inputs, double gamma, Variant variant);
/// Correction survival conditioned on channel survival (1 without correction).
double success_theory(const RouterInputs& inputs, double gamma, double gamma_guess, Variant variant,
                      bool error_correction);

struct ExperimentConfig {
  std::vector<double> gamma_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double gamma_guess = 0.5;
  Variant variant = Variant::BothQubits;
  bool error_correction = true;
  std::uint64_t shots_per_setting = 100000;
  int repetitions = 10;
  std::uint64_t base_seed = 1;
  NoiseSpec noise;
  bool mitigation = true;
  CalibrationMode calibration = CalibrationMode::Analytic;
  bool transpile = false;
  /// Name or JSON path; `coupling_map_inline` ({n_physical, edges}) wins when set.
  std::string coupling_map = "jakarta";
  nlohmann::json coupling_map_inline;
  std::string output_dir = "out";
  RouterInputs inputs = RouterInputs::paper();

  void validate() const;
  CouplingMap resolve_coupling_map() const;
};

struct ExperimentResult {
  double gamma = 0.0;
  double gamma_guess = 0.0;
  int repetition = 0;
  std::uint64_t seed = 0;
  /// NaN when no shot survived in some setting (status "empty").
  double fidelity = 0.0;
  double success_prob_estimate = 0.0;
  double channel_survival_estimate = 0.0;
  double success_prob_theory = 0.0;
  double p1_theory = 0.0;
  std::uint64_t shots_requested = 0;
  std::uint64_t shots_kept = 0;
  std::string status = "ok";
  ComplexMatrix reconstructed;
};

/// seed_r = base_seed * 10007 + r.
std::uint64_t repetition_seed(std::uint64_t base_seed, int repetition);

/// Raw sampler output of every tomography setting for one point.
struct PointSamples {
  std::vector<ShotRecord> records;      // one per setting, settings(3) order
  std::vector<std::vector<int>> measured_qubits;  // circuit qubit of c0 bit k, per setting
};

PointSamples sample_point(const ExperimentConfig& config, double gamma, int repetition);

/// Samples 27 settings, optionally mitigates, reconstructs, and scores.
ExperimentResult run_point(const ExperimentConfig& config, double gamma, int repetition);

/// Qubit recorded into `reg` bit k for k = 0..width-1.
std::vector<int> measured_qubits(const Circuit& circuit, const std::string& reg, int width);

}  // namespace qroute
