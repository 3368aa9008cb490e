#include "qroute/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "qroute/errors.hpp"
#include "qroute/kernels.hpp"

namespace qroute {

namespace {

std::span<cplx> amps_of(SimState& s) {
  return {s.amplitudes.data(), static_cast<std::size_t>(s.amplitudes.size())};
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError(std::string(what) + " outside [0, 1]");
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return mix64(mix64(parent) ^ (index * 0xD1B54A32D192ED03ULL + 0x2545F4914F6CDD1DULL));
}

CounterRng CounterRng::for_shot(std::uint64_t seed, std::uint64_t shot_index) {
  return CounterRng(mix64(seed) + shot_index);
}

CounterRng::CounterRng(std::uint64_t key) : hashed_key_(mix64(key)) {}

std::uint64_t CounterRng::next_u64() { return mix64(hashed_key_ ^ mix64(counter_++ ^ 0x6A09E667F3BCC909ULL)); }

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

SimState SimState::basis(int n_qubits, std::size_t index) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw CapacityError("state width " + std::to_string(n_qubits) + " outside [1, " + std::to_string(kMaxQubits) + "]");
  }
  if (index >= dim_for(n_qubits)) throw ArgumentError("basis index out of range");
  SimState s;
  s.n_qubits = n_qubits;
  s.amplitudes = ComplexVector::Zero(static_cast<Eigen::Index>(dim_for(n_qubits)));
  s.amplitudes(static_cast<Eigen::Index>(index)) = 1.0;
  return s;
}

SimState SimState::from_amplitudes(int n_qubits, ComplexVector amplitudes) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw CapacityError("state width out of range");
  if (amplitudes.size() != static_cast<Eigen::Index>(dim_for(n_qubits))) {
    throw ArgumentError("amplitude count does not match width");
  }
  if (!is_state(amplitudes)) throw ArgumentError("amplitudes are not normalized");
  SimState s;
  s.n_qubits = n_qubits;
  s.amplitudes = std::move(amplitudes);
  return s;
}

RealVector SimState::probabilities() const { return amplitudes.cwiseAbs2(); }

NoiseSpec NoiseSpec::none(std::uint64_t seed) {
  NoiseSpec n;
  n.rng_seed = seed;
  return n;
}

NoiseSpec NoiseSpec::symmetric_readout(double p, std::uint64_t seed) {
  NoiseSpec n;
  n.readout_confusion = {{p, p}};
  n.rng_seed = seed;
  return n;
}

void NoiseSpec::validate() const {
  for (const auto& [p01, p10] : readout_confusion) {
    check_probability(p01, "readout p(1|0)");
    check_probability(p10, "readout p(0|1)");
  }
  check_probability(depolarizing_per_cx, "depolarizing_per_cx");
}

std::pair<double, double> NoiseSpec::confusion_for(int qubit) const {
  if (readout_confusion.empty()) return {0.0, 0.0};
  if (readout_confusion.size() == 1) return readout_confusion.front();
  if (qubit < 0 || static_cast<std::size_t>(qubit) >= readout_confusion.size()) {
    throw ArgumentError("no readout confusion entry for qubit " + std::to_string(qubit));
  }
  return readout_confusion[static_cast<std::size_t>(qubit)];
}

bool NoiseSpec::has_readout_error() const {
  return std::any_of(readout_confusion.begin(), readout_confusion.end(),
                     [](const auto& e) { return e.first > 0.0 || e.second > 0.0; });
}

nlohmann::json ShotRecord::to_json() const {
  nlohmann::json j;
  for (const auto& [name, counts] : registers) j[name] = counts;
  j["shots_requested"] = shots_requested;
  j["shots_kept"] = shots_kept;
  j["status"] = status;
  return j;
}

void apply_gate_inplace(SimState& state, const CircuitOp& op) {
  if (!op.is_gate()) throw ContractError("apply_gate: op is not a gate");
  kernels::apply(amps_of(state), state.n_qubits, op.qubits, op.unitary());
}

SimState apply_gate(SimState state, const CircuitOp& op) {
  apply_gate_inplace(state, op);
  return state;
}

std::pair<SimState, double> post_select(SimState state, int qubit, int outcome) {
  if (qubit < 0 || qubit >= state.n_qubits) throw ArgumentError("post_select: qubit out of range");
  if (outcome != 0 && outcome != 1) throw ArgumentError("post_select: outcome must be 0 or 1");
  const double p1 = kernels::parallel::probability_of_one(amps_of(state), state.n_qubits, qubit);
  const double total = state.amplitudes.squaredNorm();
  const double branch = std::clamp((outcome == 1 ? p1 : total - p1) / total, 0.0, 1.0);
  if (branch < tol::kBranchFloor) {
    throw ImpossibleBranchError("post-selection of qubit " + std::to_string(qubit) + " on |" +
                                    std::to_string(outcome) + "> has probability " + std::to_string(branch),
                                branch);
  }
  kernels::parallel::project(amps_of(state), state.n_qubits, qubit, outcome);
  kernels::parallel::scale(amps_of(state), 1.0 / state.amplitudes.norm());
  state.accumulated_postselect_prob *= branch;
  return {std::move(state), branch};
}

SimState run_statevector(const Circuit& circuit, SimState state) {
  if (circuit.n_qubits() > kMaxQubits) throw CapacityError("circuit too wide");
  if (state.n_qubits != circuit.n_qubits()) throw ArgumentError("initial state width does not match circuit");
  for (const auto& op : circuit.ops()) {
    switch (op.type) {
      case OpType::Gate:
        apply_gate_inplace(state, op);
        break;
      case OpType::PostSelect:
        state = post_select(std::move(state), op.qubits[0], op.outcome).first;
        break;
      case OpType::Measure:
        throw ContractError("run_statevector: Measure ops are not allowed in exact mode");
    }
  }
  return state;
}

SimState run_statevector(const Circuit& circuit, std::size_t initial_basis) {
  return run_statevector(circuit, SimState::basis(circuit.n_qubits(), initial_basis));
}

std::string bits_to_string(std::uint64_t bits, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int b = 0; b < width; ++b) {
    if ((bits >> b) & 1U) s[static_cast<std::size_t>(width - 1 - b)] = '1';
  }
  return s;
}

std::uint64_t string_to_bits(const std::string& bitstring) {
  std::uint64_t bits = 0;
  const auto width = bitstring.size();
  for (std::size_t i = 0; i < width; ++i) {
    const char c = bitstring[i];
    if (c != '0' && c != '1') throw ArgumentError("bitstring '" + bitstring + "' has non-binary characters");
    if (c == '1') bits |= std::uint64_t{1} << (width - 1 - i);
  }
  return bits;
}

namespace {

// One sampled Pauli error: position in the CX list and a code in 1..15
// (first operand Pauli = code / 4, second = code % 4; 0=I 1=X 2=Y 3=Z).
struct PauliError {
  std::uint32_t cx_slot;
  std::uint32_t code;
  bool operator<(const PauliError& o) const { return cx_slot != o.cx_slot ? cx_slot < o.cx_slot : code < o.code; }
  bool operator==(const PauliError& o) const = default;
};
using ErrorPattern = std::vector<PauliError>;

struct Readout {
  int qubit;
  std::size_t reg_index;
  int bit;
  bool post_select;
  int outcome;
  double p01, p10;
};

const ComplexMatrix& pauli_by_code(std::uint32_t c) {
  static const ComplexMatrix kPaulis[4] = {pauli('I'), pauli('X'), pauli('Y'), pauli('Z')};
  return kPaulis[c];
}

// Gate list prepared once per circuit: matrices built up front, runs of
// single-qubit gates fused, and one marker per CX where Pauli errors land.
// Measure / PostSelect are deferred: validated circuits never touch a qubit
// again after reading it out.
class Program {
 public:
  explicit Program(const Circuit& circuit) : n_(circuit.n_qubits()) {
    std::vector<std::optional<ComplexMatrix>> pending(static_cast<std::size_t>(n_));
    auto flush = [&](int q) {
      auto& p = pending[static_cast<std::size_t>(q)];
      if (p) steps_.push_back({{q}, std::move(*p), -1});
      p.reset();
    };
    for (const auto& op : circuit.ops()) {
      if (!op.is_gate()) continue;
      if (op.qubits.size() == 1) {
        auto& p = pending[static_cast<std::size_t>(op.qubits[0])];
        p = p ? ComplexMatrix(op.unitary() * *p) : op.unitary();
        continue;
      }
      for (int q : op.qubits) flush(q);
      const bool cx = op.kind == GateKind::CX;
      steps_.push_back({op.qubits, op.unitary(), cx ? static_cast<int>(slot_step_.size()) : -1});
      if (cx) slot_step_.push_back(steps_.size() - 1);
    }
    for (int q = 0; q < n_; ++q) flush(q);
    // clean state right after each CX
    SimState s = SimState::basis(n_);
    std::size_t next = 0;
    for (std::size_t i = 0; i < steps_.size(); ++i) {
      apply(s, i);
      if (next < slot_step_.size() && slot_step_[next] == i) {
        snapshots_.push_back(s.amplitudes);
        ++next;
      }
    }
    clean_ = s.amplitudes;
  }

  /// Final distributions for `patterns`, which must be sorted. Patterns that
  /// share a first error reuse one state advanced monotonically through the
  /// circuit, so only the part after their second error is recomputed.
  std::vector<std::vector<double>> cdfs(const std::vector<const ErrorPattern*>& patterns) const {
    std::vector<std::vector<double>> out(patterns.size());
    std::vector<std::size_t> group_start;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
      const ErrorPattern& p = *patterns[i];
      if (i == 0 || p.empty() || patterns[i - 1]->empty() || !(p.front() == patterns[i - 1]->front())) {
        group_start.push_back(i);
      }
    }
    group_start.push_back(patterns.size());
    const auto n_groups = static_cast<std::int64_t>(group_start.size() - 1);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t g = 0; g < n_groups; ++g) {
      const std::size_t lo = group_start[static_cast<std::size_t>(g)];
      const std::size_t hi = group_start[static_cast<std::size_t>(g) + 1];
      if (patterns[lo]->empty()) {
        out[lo] = to_cdf(clean_);
        continue;
      }
      const PauliError first = patterns[lo]->front();
      SimState shared;
      shared.n_qubits = n_;
      shared.amplitudes = snapshots_[first.cx_slot];
      inject(shared, first);
      std::size_t pos = slot_step_[first.cx_slot];  // last step applied to `shared`
      for (std::size_t i = lo; i < hi; ++i) {
        const ErrorPattern& p = *patterns[i];
        if (p.size() == 1) {
          SimState s = shared;
          run(s, pos + 1, p.end(), p.end());
          out[i] = to_cdf(s.amplitudes);
          continue;
        }
        const std::size_t second = slot_step_[p[1].cx_slot];
        for (; pos < second; ++pos) apply(shared, pos + 1);
        SimState s = shared;
        inject(s, p[1]);
        run(s, second + 1, p.begin() + 2, p.end());
        out[i] = to_cdf(s.amplitudes);
      }
    }
    return out;
  }

 private:
  struct Step {
    std::vector<int> qubits;
    ComplexMatrix matrix;
    int slot;  // CX index, or -1
  };

  void apply(SimState& s, std::size_t i) const {
    const Step& st = steps_[i];
    if (st.slot >= 0) {
      kernels::parallel::apply_cx(amps_of(s), n_, st.qubits[0], st.qubits[1]);
    } else {
      kernels::apply(amps_of(s), n_, st.qubits, st.matrix);
    }
  }

  void inject(SimState& s, const PauliError& e) const {
    const Step& st = steps_[slot_step_[e.cx_slot]];
    const std::uint32_t a = e.code / 4, b = e.code % 4;
    if (a != 0) kernels::parallel::apply_1q(amps_of(s), n_, st.qubits[0], pauli_by_code(a));
    if (b != 0) kernels::parallel::apply_1q(amps_of(s), n_, st.qubits[1], pauli_by_code(b));
  }

  // Applies steps from `from` to the end, injecting the remaining errors.
  void run(SimState& s, std::size_t from, ErrorPattern::const_iterator next, ErrorPattern::const_iterator end) const {
    for (std::size_t i = from; i < steps_.size(); ++i) {
      apply(s, i);
      const int slot = steps_[i].slot;
      if (slot >= 0 && next != end && next->cx_slot == static_cast<std::uint32_t>(slot)) inject(s, *next++);
    }
  }

  static std::vector<double> to_cdf(const ComplexVector& amps) {
    std::vector<double> cdf(static_cast<std::size_t>(amps.size()));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < amps.size(); ++i) {
      acc += std::norm(amps(i));
      cdf[static_cast<std::size_t>(i)] = acc;
    }
    for (auto& c : cdf) c /= acc;
    cdf.back() = 1.0;
    return cdf;
  }

  int n_;
  std::vector<Step> steps_;
  std::vector<std::size_t> slot_step_;
  std::vector<ComplexVector> snapshots_;
  ComplexVector clean_;
};

}  // namespace

ShotRecord sample_shots(const Circuit& circuit, std::uint64_t shots, const NoiseSpec& noise) {
  if (shots < 1) throw ArgumentError("sample_shots: shots must be >= 1");
  if (circuit.n_qubits() > kMaxQubits) throw CapacityError("circuit too wide");
  noise.validate();
  const int n = circuit.n_qubits();

  std::vector<std::string> reg_names;
  std::vector<int> reg_sizes;
  for (const auto& [name, size] : circuit.registers()) {
    reg_names.push_back(name);
    reg_sizes.push_back(size);
  }
  std::vector<bool> reg_is_postselect(reg_names.size(), false);
  std::vector<bool> reg_is_measure(reg_names.size(), false);
  std::vector<Readout> readouts;
  std::uint32_t cx_total = 0;
  bool has_measure = false;
  for (const auto& op : circuit.ops()) {
    if (op.is_gate()) {
      if (op.kind == GateKind::CX) ++cx_total;
      continue;
    }
    const auto ri = static_cast<std::size_t>(
        std::find(reg_names.begin(), reg_names.end(), op.reg) - reg_names.begin());
    Readout r{op.qubits[0], ri, op.bit, op.type == OpType::PostSelect, op.outcome, 0.0, 0.0};
    if (r.post_select) {
      reg_is_postselect[ri] = true;
    } else {
      has_measure = true;
      reg_is_measure[ri] = true;
      std::tie(r.p01, r.p10) = noise.confusion_for(r.qubit);
    }
    readouts.push_back(r);
  }
  for (std::size_t ri = 0; ri < reg_names.size(); ++ri) {
    if (reg_is_postselect[ri] && reg_is_measure[ri]) {
      throw ContractError("sample_shots: register '" + reg_names[ri] + "' mixes Measure and PostSelect bits");
    }
  }
  if (!has_measure) throw ContractError("sample_shots: circuit has no Measure ops");
  if (reg_names.size() > 8) throw CapacityError("sample_shots: too many registers");

  const auto total = static_cast<std::int64_t>(shots);
  const double p_dep = noise.depolarizing_per_cx;

  // Pass 1: error pattern per shot.
  std::vector<ErrorPattern> patterns(static_cast<std::size_t>(shots));
  if (p_dep > 0.0 && cx_total > 0) {
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < total; ++s) {
      CounterRng rng = CounterRng::for_shot(noise.rng_seed, static_cast<std::uint64_t>(s));
      ErrorPattern& pat = patterns[static_cast<std::size_t>(s)];
      for (std::uint32_t c = 0; c < cx_total; ++c) {
        if (rng.uniform() < p_dep) {
          const auto code = 1 + static_cast<std::uint32_t>(rng.uniform() * 15.0);
          pat.push_back({c, std::min<std::uint32_t>(code, 15)});
        }
      }
    }
  }

  // Pass 2: one final distribution per distinct pattern.
  std::map<ErrorPattern, std::size_t> pattern_index;
  std::vector<std::size_t> shot_pattern(static_cast<std::size_t>(shots), 0);
  std::vector<const ErrorPattern*> unique;
  if (p_dep > 0.0) {
    for (const auto& p : patterns) pattern_index.emplace(p, 0);
    for (auto& [pat, idx] : pattern_index) {
      idx = unique.size();
      unique.push_back(&pat);
    }
    for (std::size_t s = 0; s < patterns.size(); ++s) shot_pattern[s] = pattern_index.at(patterns[s]);
  } else {
    unique.push_back(&patterns.front());
  }
  const Program program(circuit);
  const std::vector<std::vector<double>> cdfs = program.cdfs(unique);

  // Pass 3: outcome and readout per shot, packed one byte-aligned slot per register.
  std::vector<std::uint64_t> packed(static_cast<std::size_t>(shots) * reg_names.size(), 0);
  std::vector<unsigned char> kept(static_cast<std::size_t>(shots), 0);
  const std::size_t n_regs = reg_names.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < total; ++s) {
    const auto us = static_cast<std::size_t>(s);
    CounterRng rng = CounterRng::for_shot(noise.rng_seed, static_cast<std::uint64_t>(s));
    // Skip the draws consumed by pass 1 so streams never reuse a value.
    if (p_dep > 0.0 && cx_total > 0) rng.discard(cx_total + patterns[us].size());
    const std::vector<double>& cdf = cdfs[shot_pattern[us]];
    const double u = rng.uniform();
    const auto index = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const std::size_t outcome = std::min(index, cdf.size() - 1);
    bool survive = true;
    for (const auto& r : readouts) {
      int bit = qubit_bit(outcome, r.qubit, n);
      if (r.post_select) {
        if (bit != r.outcome) survive = false;
      } else {
        const double flip = bit == 0 ? r.p01 : r.p10;
        if (flip > 0.0 && rng.uniform() < flip) bit ^= 1;
      }
      if (bit) packed[us * n_regs + r.reg_index] |= std::uint64_t{1} << r.bit;
    }
    kept[us] = survive ? 1 : 0;
  }

  ShotRecord rec;
  rec.shots_requested = shots;
  std::vector<std::map<std::uint64_t, std::uint64_t>> hist(n_regs);
  for (std::size_t s = 0; s < static_cast<std::size_t>(shots); ++s) {
    if (kept[s]) ++rec.shots_kept;
    for (std::size_t ri = 0; ri < n_regs; ++ri) {
      if (reg_is_postselect[ri] || kept[s]) ++hist[ri][packed[s * n_regs + ri]];
    }
  }
  for (std::size_t ri = 0; ri < n_regs; ++ri) {
    auto& out = rec.registers[reg_names[ri]];
    for (const auto& [bits, count] : hist[ri]) out[bits_to_string(bits, reg_sizes[ri])] = count;
  }
  if (rec.shots_kept == 0) rec.status = "empty";
  return rec;
}

}  // namespace qroute
