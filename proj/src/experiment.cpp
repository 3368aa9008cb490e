#include "qroute/experiment.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numbers>

#include "qroute/errors.hpp"

namespace qroute {

namespace {

bool close(cplx a, cplx b) { return std::abs(a - b) < 1e-12; }

bool is_paper_control(const QubitSpec& q) {
  return close(q.alpha, cplx(std::numbers::sqrt2 / 2, 0)) && close(q.beta, cplx(std::numbers::sqrt2 / 2, 0));
}

bool is_paper_signal(const QubitSpec& q) {
  const RouterInputs p = RouterInputs::paper();
  return close(q.alpha, p.signal.alpha) && close(q.beta, p.signal.beta);
}

// Unitary taking |0> to alpha|0> + beta|1>.
ComplexMatrix prep_matrix(const QubitSpec& q) {
  ComplexMatrix m(2, 2);
  m << q.alpha, -std::conj(q.beta), q.beta, std::conj(q.alpha);
  return m;
}

std::vector<int> noisy_systems(Variant v) {
  switch (v) {
    case Variant::BothQubits:
      return {kControl, kSignal};
    case Variant::SignalOnly:
      return {kSignal};
    case Variant::NoNoise:
      return {};
  }
  return {};
}

const QubitSpec& spec_of(const RouterInputs& in, int system) { return system == kControl ? in.control : in.signal; }

}  // namespace

RouterInputs RouterInputs::paper() {
  const double h = std::numbers::sqrt2 / 2;
  RouterInputs in;
  in.control = {cplx(h, 0), cplx(h, 0)};
  in.signal = {cplx(std::cos(std::numbers::pi / 4), 0),
               std::exp(cplx(0, std::numbers::pi / 4)) * std::sin(std::numbers::pi / 4)};
  return in;
}

void RouterInputs::validate() const {
  control.validate();
  signal.validate();
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::BothQubits:
      return "both-qubits";
    case Variant::SignalOnly:
      return "signal-only";
    case Variant::NoNoise:
      return "no-noise";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  if (name == "both-qubits") return Variant::BothQubits;
  if (name == "signal-only") return Variant::SignalOnly;
  if (name == "no-noise") return Variant::NoNoise;
  throw ConfigError("variant", "unknown variant '" + name + "' (expected both-qubits, signal-only or no-noise)");
}

ComplexVector ideal_output(const RouterInputs& inputs) {
  inputs.validate();
  ComplexVector v = ComplexVector::Zero(8);
  const cplx a = inputs.signal.alpha, b = inputs.signal.beta;
  v(0) += inputs.control.alpha * a;  // |0>|0>|0>
  v(2) += inputs.control.alpha * b;  // |0>|1>|0>
  v(4) += inputs.control.beta * a;   // |1>|0>|0>
  v(5) += inputs.control.beta * b;   // |1>|0>|1>
  return v;
}

ComplexMatrix ideal_density(const RouterInputs& inputs) { return density_of(ideal_output(inputs)); }

PostSelectLayout postselect_layout(Variant variant, bool error_correction) {
  PostSelectLayout out;
  int bit = 0;
  for (std::size_t i = 0; i < noisy_systems(variant).size(); ++i) {
    out.channel_bits.push_back(bit++);
    if (error_correction) out.correction_bits.push_back(bit++);
  }
  return out;
}

Circuit build_router_circuit(const RouterInputs& inputs, const ChannelParams& params, const RouterOptions& options) {
  inputs.validate();
  params.validate();
  if (options.variant == Variant::NoNoise && options.error_correction) {
    throw ConfigError("error_correction", "the no-noise variant has no channel to correct");
  }
  std::map<std::string, int> regs;
  const PostSelectLayout layout = postselect_layout(options.variant, options.error_correction);
  if (layout.width() > 0) regs["c1"] = layout.width();
  if (options.tomography) regs["c0"] = options.tomography->n_qubits();
  Circuit c(kRouterQubits, regs);

  if (is_paper_control(inputs.control)) {
    c.append(CircuitOp::gate(GateKind::H, {kControl}));
  } else {
    c.append(CircuitOp::custom(prep_matrix(inputs.control), {kControl}));
  }
  if (is_paper_signal(inputs.signal)) {
    c.append(CircuitOp::gate(GateKind::H, {kSignal}));
    c.append(CircuitOp::gate(GateKind::T, {kSignal}));
  } else {
    c.append(CircuitOp::custom(prep_matrix(inputs.signal), {kSignal}));
  }

  const std::vector<int> systems = noisy_systems(options.variant);
  std::optional<CorrectionAngle> theta;
  if (options.error_correction) theta = choose_theta(params.gamma_guess);
  for (std::size_t i = 0; i < systems.size(); ++i) {
    const int sys = systems[i];
    c.append(channel_subcircuit(params.gamma, sys, sys + 1, {"c1", layout.channel_bits[i]}));
    if (theta) c.append(correction_subcircuit(*theta, sys, sys + 2, {"c1", layout.correction_bits[i]}));
  }
  c.append(CircuitOp::gate(GateKind::CSWAP, {kControl, kSignal, kBlank}));
  if (options.tomography) c.append(measurement_rotation(*options.tomography, kOutputQubits, "c0"));
  return c;
}

RouterExact router_exact(const RouterInputs& inputs, const ChannelParams& params, Variant variant,
                         bool error_correction) {
  const Circuit c = build_router_circuit(inputs, params, {variant, error_correction, std::nullopt});
  const SimState s = run_statevector(c);
  RouterExact out;
  out.output = partial_trace_pure(s.amplitudes, kOutputQubits, kRouterQubits);
  out.postselect_probability = s.accumulated_postselect_prob;
  return out;
}

double p1_theory(const RouterInputs& inputs, double gamma, Variant variant) {
  double p = 1.0;
  for (int sys : noisy_systems(variant)) p *= analytic_p1(spec_of(inputs, sys), gamma);
  return p;
}

double success_theory(const RouterInputs& inputs, double gamma, double gamma_guess, Variant variant,
                      bool error_correction) {
  if (!error_correction) return 1.0;
  const CorrectionAngle theta = choose_theta(gamma_guess);
  double p = 1.0;
  for (int sys : noisy_systems(variant)) p *= analytic_p2(spec_of(inputs, sys), gamma, theta);
  return p;
}

void ExperimentConfig::validate() const {
  if (gamma_grid.empty()) throw ConfigError("gamma_grid", "must not be empty");
  for (double g : gamma_grid) {
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("gamma_grid", "value " + std::to_string(g) + " outside [0, 1]");
  }
  if (!(gamma_guess >= 0.0 && gamma_guess <= 1.0)) throw ConfigError("gamma_guess", "outside [0, 1]");
  if (error_correction && variant != Variant::NoNoise && gamma_guess == 1.0) {
    throw ConfigError("gamma_guess", "1 makes the correction angle degenerate");
  }
  if (variant == Variant::NoNoise && error_correction) {
    throw ConfigError("error_correction", "the no-noise variant has no channel to correct");
  }
  if (shots_per_setting < 1) throw ConfigError("shots_per_setting", "must be at least 1");
  if (repetitions < 1) throw ConfigError("repetitions", "must be at least 1");
  try {
    noise.validate();
  } catch (const Error& e) {
    throw ConfigError("noise", e.what());
  }
  try {
    inputs.validate();
  } catch (const Error& e) {
    throw ConfigError("inputs", e.what());
  }
}

CouplingMap ExperimentConfig::resolve_coupling_map() const {
  if (!coupling_map_inline.is_null()) return CouplingMap::from_json(coupling_map_inline);
  return CouplingMap::resolve(coupling_map);
}

std::uint64_t repetition_seed(std::uint64_t base_seed, int repetition) {
  return base_seed * 10007U + static_cast<std::uint64_t>(repetition);
}

std::vector<int> measured_qubits(const Circuit& circuit, const std::string& reg, int width) {
  std::vector<int> out(static_cast<std::size_t>(width), -1);
  for (const auto& op : circuit.ops()) {
    if (op.type == OpType::Measure && op.reg == reg && op.bit >= 0 && op.bit < width) {
      out[static_cast<std::size_t>(op.bit)] = op.qubits[0];
    }
  }
  for (int q : out) {
    if (q < 0) throw ContractError("register '" + reg + "' is not fully measured");
  }
  return out;
}

PointSamples sample_point(const ExperimentConfig& config, double gamma, int repetition) {
  config.validate();
  const std::uint64_t seed = repetition_seed(config.base_seed, repetition);
  const auto all = settings(3);
  const ChannelParams params{gamma, config.gamma_guess};
  std::optional<CouplingMap> map;
  if (config.transpile) map = config.resolve_coupling_map();

  PointSamples out;
  out.records.resize(all.size());
  out.measured_qubits.resize(all.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < all.size(); ++i) {
    try {
      Circuit c = build_router_circuit(config.inputs, params, {config.variant, config.error_correction, all[i]});
      if (map) c = transpile(c, *map).circuit;
      NoiseSpec noise = config.noise;
      noise.rng_seed = derive_seed(seed, i);
      out.measured_qubits[i] = measured_qubits(c, "c0", 3);
      out.records[i] = sample_shots(c, config.shots_per_setting, noise);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

ExperimentResult run_point(const ExperimentConfig& config, double gamma, int repetition) {
  const PointSamples samples = sample_point(config, gamma, repetition);
  const auto all = settings(3);
  ExperimentResult r;
  r.gamma = gamma;
  r.gamma_guess = config.gamma_guess;
  r.repetition = repetition;
  r.seed = repetition_seed(config.base_seed, repetition);
  r.p1_theory = p1_theory(config.inputs, gamma, config.variant);
  try {
    r.success_prob_theory =
        success_theory(config.inputs, gamma, config.gamma_guess, config.variant, config.error_correction);
  } catch (const DegenerateParameterError&) {
    r.success_prob_theory = std::numeric_limits<double>::quiet_NaN();
  }

  const PostSelectLayout layout = postselect_layout(config.variant, config.error_correction);
  std::uint64_t channel_ok = 0, all_ok = 0;
  std::map<std::vector<int>, CalibrationMatrix> calibrations;
  SettingProbabilities probs;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const ShotRecord& rec = samples.records[i];
    r.shots_requested += rec.shots_requested;
    r.shots_kept += rec.shots_kept;
    if (layout.width() > 0) {
      for (const auto& [bits, count] : rec.registers.at("c1")) {
        const auto bit_set = [&](int b) { return bits[bits.size() - 1 - static_cast<std::size_t>(b)] == '1'; };
        bool ch = true, co = true;
        for (int b : layout.channel_bits) ch = ch && !bit_set(b);
        for (int b : layout.correction_bits) co = co && !bit_set(b);
        if (ch) channel_ok += count;
        if (ch && co) all_ok += count;
      }
    }
    if (rec.empty()) {
      r.status = "empty";
      continue;
    }
    RealVector p = counts_to_probabilities(rec.registers.at("c0"), 3);
    if (config.mitigation) {
      const auto& qubits = samples.measured_qubits[i];
      auto it = calibrations.find(qubits);
      if (it == calibrations.end()) {
        NoiseSpec sub = readout_subset(config.noise, qubits);
        sub.rng_seed = derive_seed(r.seed, 1000 + calibrations.size());
        it = calibrations.emplace(qubits, build_calibration(3, sub, config.calibration, config.shots_per_setting)).first;
      }
      p = mitigate(p, it->second);
    }
    probs[all[i].bases] = std::move(p);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (layout.width() == 0) {
    r.channel_survival_estimate = 1.0;
    r.success_prob_estimate = 1.0;
  } else {
    r.channel_survival_estimate = static_cast<double>(channel_ok) / static_cast<double>(r.shots_requested);
    r.success_prob_estimate = channel_ok > 0 ? static_cast<double>(all_ok) / static_cast<double>(channel_ok) : nan;
  }
  if (r.status == "empty") {
    r.fidelity = nan;
    return r;
  }
  r.reconstructed = reconstruct(expectations_from_probabilities(probs, 3));
  r.fidelity = fidelity(ideal_density(config.inputs), r.reconstructed);
  return r;
}

}  // namespace qroute
