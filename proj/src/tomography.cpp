#include "qroute/tomography.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "qroute/errors.hpp"

namespace qroute {

namespace {

void check_width(int n) {
  if (n < 1 || n > kMaxTomographyQubits) {
    throw CapacityError("tomography supports 1.." + std::to_string(kMaxTomographyQubits) + " qubits, got " +
                        std::to_string(n));
  }
}

std::vector<std::string> product_labels(int n, const std::string& alphabet) {
  std::vector<std::string> out{""};
  for (int k = 0; k < n; ++k) {
    std::vector<std::string> next;
    next.reserve(out.size() * alphabet.size());
    for (const auto& prefix : out) {
      for (char c : alphabet) next.push_back(prefix + c);
    }
    out = std::move(next);
  }
  return out;
}

ComplexMatrix basis_change(char basis) {
  switch (basis) {
    case 'X':
      return gate_matrix(GateKind::H);
    case 'Y':
      return gate_matrix(GateKind::H) * gate_matrix(GateKind::RZ, {-std::numbers::pi / 2});
    case 'Z':
      return ComplexMatrix::Identity(2, 2);
    default:
      throw ArgumentError(std::string("unknown tomography basis '") + basis + "'");
  }
}

// register value (bit k = qubit k) -> semantic index (qubit 0 most significant)
std::size_t register_to_index(std::uint64_t reg, int n) {
  std::size_t idx = 0;
  for (int k = 0; k < n; ++k) {
    if ((reg >> k) & 1U) idx |= std::size_t{1} << (n - 1 - k);
  }
  return idx;
}

RealMatrix confusion_matrix(std::pair<double, double> c) {
  RealMatrix m(2, 2);
  m << 1.0 - c.first, c.second, c.first, 1.0 - c.second;
  return m;
}

}  // namespace

std::vector<TomographySetting> settings(int n_qubits) {
  check_width(n_qubits);
  std::vector<TomographySetting> out;
  for (auto& label : product_labels(n_qubits, "XYZ")) out.push_back({std::move(label)});
  return out;
}

std::vector<std::string> pauli_strings(int n_qubits) {
  check_width(n_qubits);
  return product_labels(n_qubits, "IXYZ");
}

Fragment measurement_rotation(const TomographySetting& setting, std::vector<int> qubits, const std::string& reg) {
  const int n = setting.n_qubits();
  if (qubits.empty()) {
    for (int k = 0; k < n; ++k) qubits.push_back(k);
  }
  if (static_cast<int>(qubits.size()) != n) throw ArgumentError("measurement_rotation: qubit list does not match setting");
  Fragment out;
  for (int k = 0; k < n; ++k) {
    const int q = qubits[static_cast<std::size_t>(k)];
    switch (setting.bases[static_cast<std::size_t>(k)]) {
      case 'X':
        out.push_back(CircuitOp::gate(GateKind::H, {q}));
        break;
      case 'Y':
        out.push_back(CircuitOp::gate(GateKind::RZ, {q}, {-std::numbers::pi / 2}));
        out.push_back(CircuitOp::gate(GateKind::H, {q}));
        break;
      case 'Z':
        break;
      default:
        throw ArgumentError("unknown tomography basis in '" + setting.bases + "'");
    }
  }
  for (int k = 0; k < n; ++k) out.push_back(CircuitOp::measure(qubits[static_cast<std::size_t>(k)], reg, k));
  return out;
}

ComplexMatrix rotation_unitary(const TomographySetting& setting) {
  ComplexMatrix u = basis_change(setting.bases.at(0));
  for (std::size_t k = 1; k < setting.bases.size(); ++k) u = tensor_product(u, basis_change(setting.bases[k]));
  return u;
}

RealVector setting_probabilities(const ComplexMatrix& rho, const TomographySetting& setting) {
  const ComplexMatrix u = rotation_unitary(setting);
  if (u.rows() != rho.rows()) throw ArgumentError("setting width does not match density matrix");
  const ComplexMatrix rotated = u * rho * u.adjoint();
  RealVector p = rotated.diagonal().real().cwiseMax(0.0);
  return p / p.sum();
}

RealVector counts_to_probabilities(const std::map<std::string, std::uint64_t>& counts, int n_qubits) {
  RealVector p = RealVector::Zero(static_cast<Eigen::Index>(dim_for(n_qubits)));
  std::uint64_t total = 0;
  for (const auto& [bits, count] : counts) {
    if (static_cast<int>(bits.size()) != n_qubits) {
      throw ArgumentError("bitstring '" + bits + "' does not have " + std::to_string(n_qubits) + " bits");
    }
    p(static_cast<Eigen::Index>(register_to_index(string_to_bits(bits), n_qubits))) += static_cast<double>(count);
    total += count;
  }
  if (total == 0) throw IncompleteDataError("no shots recorded");
  return p / static_cast<double>(total);
}

std::vector<PauliExpectation> expectations_from_counts(const SettingCounts& counts, int n_qubits) {
  SettingProbabilities probs;
  for (const auto& s : settings(n_qubits)) {
    const auto it = counts.find(s.bases);
    if (it == counts.end()) throw IncompleteDataError("missing tomography setting " + s.bases);
    try {
      probs[s.bases] = counts_to_probabilities(it->second, n_qubits);
    } catch (const IncompleteDataError&) {
      throw IncompleteDataError("tomography setting " + s.bases + " has no shots");
    }
  }
  return expectations_from_probabilities(probs, n_qubits);
}

std::vector<PauliExpectation> expectations_from_probabilities(const SettingProbabilities& probs, int n_qubits) {
  const auto all = settings(n_qubits);
  for (const auto& s : all) {
    if (!probs.contains(s.bases)) throw IncompleteDataError("missing tomography setting " + s.bases);
  }
  const std::size_t dim = dim_for(n_qubits);
  std::vector<PauliExpectation> out;
  for (const auto& p : pauli_strings(n_qubits)) {
    std::size_t mask = 0;  // semantic bits of non-identity positions
    for (int k = 0; k < n_qubits; ++k) {
      if (p[static_cast<std::size_t>(k)] != 'I') mask |= std::size_t{1} << (n_qubits - 1 - k);
    }
    if (mask == 0) {
      out.push_back({p, 1.0});
      continue;
    }
    double sum = 0.0;
    int used = 0;
    for (const auto& s : all) {
      bool compatible = true;
      for (int k = 0; k < n_qubits && compatible; ++k) {
        const char c = p[static_cast<std::size_t>(k)];
        compatible = c == 'I' || c == s.bases[static_cast<std::size_t>(k)];
      }
      if (!compatible) continue;
      const RealVector& dist = probs.at(s.bases);
      if (static_cast<std::size_t>(dist.size()) != dim) throw ArgumentError("probability vector has the wrong length");
      double v = 0.0;
      for (std::size_t x = 0; x < dim; ++x) {
        const double sign = (std::popcount(x & mask) & 1) ? -1.0 : 1.0;
        v += sign * dist(static_cast<Eigen::Index>(x));
      }
      sum += v;
      ++used;
    }
    out.push_back({p, sum / used});
  }
  return out;
}

std::vector<PauliExpectation> exact_expectations(const ComplexMatrix& rho) {
  int n = 0;
  while (static_cast<Eigen::Index>(dim_for(n)) < rho.rows()) ++n;
  if (static_cast<Eigen::Index>(dim_for(n)) != rho.rows() || rho.rows() != rho.cols()) {
    throw ArgumentError("exact_expectations: matrix is not 2^n square");
  }
  std::vector<PauliExpectation> out;
  for (const auto& p : pauli_strings(n)) out.push_back({p, (rho * pauli_string_matrix(p)).trace().real()});
  return out;
}

ComplexMatrix linear_inversion(const std::vector<PauliExpectation>& expectations) {
  if (expectations.empty()) throw IncompleteDataError("no expectations");
  const int n = static_cast<int>(expectations.front().pauli.size());
  check_width(n);
  if (expectations.size() != dim_for(2 * n)) {
    throw IncompleteDataError("expected " + std::to_string(dim_for(2 * n)) + " expectations, got " +
                              std::to_string(expectations.size()));
  }
  const auto d = static_cast<Eigen::Index>(dim_for(n));
  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  for (const auto& e : expectations) {
    if (static_cast<int>(e.pauli.size()) != n) throw ArgumentError("mixed Pauli string widths");
    rho += e.value * pauli_string_matrix(e.pauli);
  }
  return rho / static_cast<double>(d);
}

ComplexMatrix reconstruct(const std::vector<PauliExpectation>& expectations) {
  return project_to_density(linear_inversion(expectations));
}

void CalibrationMatrix::validate() const {
  if (m.rows() != static_cast<Eigen::Index>(dim_for(n_qubits)) || m.cols() != m.rows()) {
    throw ValidationError("calibration matrix has the wrong shape");
  }
  if (m.minCoeff() < 0.0) throw ValidationError("calibration matrix has a negative entry");
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (std::abs(m.col(j).sum() - 1.0) > tol::kExact) {
      throw ValidationError("calibration column " + std::to_string(j) + " does not sum to 1");
    }
  }
}

nlohmann::json CalibrationMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"n_qubits", n_qubits}, {"dim", m.rows()}, {"matrix", std::move(rows)}};
}

NoiseSpec readout_subset(const NoiseSpec& noise, const std::vector<int>& qubits) {
  NoiseSpec out = noise;
  out.readout_confusion.clear();
  if (noise.has_readout_error()) {
    for (int q : qubits) out.readout_confusion.push_back(noise.confusion_for(q));
  }
  return out;
}

CalibrationMatrix build_calibration(int n_qubits, const NoiseSpec& noise, CalibrationMode mode, std::uint64_t shots) {
  check_width(n_qubits);
  noise.validate();
  CalibrationMatrix cal;
  cal.n_qubits = n_qubits;
  const auto d = static_cast<Eigen::Index>(dim_for(n_qubits));
  if (mode == CalibrationMode::Analytic) {
    RealMatrix m = RealMatrix::Ones(1, 1);
    for (int k = 0; k < n_qubits; ++k) {
      const RealMatrix ck = confusion_matrix(noise.confusion_for(k));
      RealMatrix next(m.rows() * 2, m.cols() * 2);
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = m(i, j) * ck;
      }
      m = std::move(next);
    }
    cal.m = std::move(m);
    return cal;
  }
  if (shots == 0) throw ArgumentError("measured calibration needs at least one shot");
  cal.m = RealMatrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Circuit c(n_qubits, {{"c0", n_qubits}});
    for (int k = 0; k < n_qubits; ++k) {
      if (qubit_bit(static_cast<std::size_t>(j), k, n_qubits)) c.append(CircuitOp::gate(GateKind::X, {k}));
    }
    for (int k = 0; k < n_qubits; ++k) c.append(CircuitOp::measure(k, "c0", k));
    NoiseSpec ns = noise;
    ns.depolarizing_per_cx = 0.0;
    ns.rng_seed = derive_seed(noise.rng_seed, static_cast<std::uint64_t>(j));
    const ShotRecord rec = sample_shots(c, shots, ns);
    cal.m.col(j) = counts_to_probabilities(rec.registers.at("c0"), n_qubits);
  }
  return cal;
}

RealVector mitigate_unclipped(const RealVector& observed, const CalibrationMatrix& cal) {
  if (observed.size() != cal.m.rows()) throw ArgumentError("probability vector does not match calibration size");
  Eigen::JacobiSVD<RealMatrix> svd(cal.m);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || sv(0) / smin > tol::kConditionMax) {
    throw ConditioningError("calibration matrix condition number exceeds " + std::to_string(tol::kConditionMax));
  }
  return cal.m.partialPivLu().solve(observed);
}

RealVector mitigate(const RealVector& observed, const CalibrationMatrix& cal) {
  RealVector p = mitigate_unclipped(observed, cal).cwiseMax(0.0);
  const double total = p.sum();
  if (!(total > 0.0)) throw ConditioningError("mitigated distribution vanished after clipping");
  return p / total;
}

RealVector mitigate(const std::map<std::string, std::uint64_t>& counts, const CalibrationMatrix& cal) {
  return mitigate(counts_to_probabilities(counts, cal.n_qubits), cal);
}

double total_variation(const RealVector& p, const RealVector& q) {
  if (p.size() != q.size()) throw ArgumentError("total_variation: length mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace qroute
