#include "qroute/qmath.hpp"

#include <algorithm>
#include <cmath>

#include "qroute/errors.hpp"

namespace qroute {

namespace {

constexpr std::size_t kMaxDim = std::size_t{1} << kMaxQubits;

// Eigenvalues this small are treated as exact zeros inside square roots so
// that rounding noise of a rank-deficient input does not turn into 1e-8 sized
// entries.
constexpr double kZeroEigen = 1e-14;

Eigen::SelfAdjointEigenSolver<ComplexMatrix> hermitian_eigen(const ComplexMatrix& m) {
  ComplexMatrix h = 0.5 * (m + m.adjoint());
  return Eigen::SelfAdjointEigenSolver<ComplexMatrix>(h);
}

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw ArgumentError(std::string(what) + ": matrix is not square");
  }
}

}  // namespace

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  const auto rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
  const auto cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
  if (rows > kMaxDim || cols > kMaxDim) {
    throw CapacityError("tensor product exceeds " + std::to_string(kMaxQubits) + " qubits");
  }
  ComplexMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexVector tensor_product(const ComplexVector& a, const ComplexVector& b) {
  const auto size = static_cast<std::size_t>(a.size()) * static_cast<std::size_t>(b.size());
  if (size > kMaxDim) {
    throw CapacityError("tensor product exceeds " + std::to_string(kMaxQubits) + " qubits");
  }
  ComplexVector out(static_cast<Eigen::Index>(size));
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

namespace {

struct SplitIndex {
  std::vector<std::size_t> kept_offset;   // per reduced index: full-index bits of kept qubits
  std::vector<std::size_t> traced_offset; // per traced index: full-index bits of traced qubits
};

SplitIndex split_index(std::span<const int> keep, int n_qubits) {
  if (keep.empty()) throw ArgumentError("partial_trace: keep set is empty");
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw CapacityError("partial_trace: bad qubit count");
  std::vector<bool> kept(static_cast<std::size_t>(n_qubits), false);
  for (int q : keep) {
    if (q < 0 || q >= n_qubits) throw ArgumentError("partial_trace: qubit " + std::to_string(q) + " out of range");
    if (kept[static_cast<std::size_t>(q)]) throw ArgumentError("partial_trace: duplicate qubit " + std::to_string(q));
    kept[static_cast<std::size_t>(q)] = true;
  }
  std::vector<int> traced;
  for (int q = 0; q < n_qubits; ++q) {
    if (!kept[static_cast<std::size_t>(q)]) traced.push_back(q);
  }
  auto offsets = [n_qubits](const std::vector<int>& qubits) {
    const std::size_t k = qubits.size();
    std::vector<std::size_t> out(std::size_t{1} << k, 0);
    for (std::size_t r = 0; r < out.size(); ++r) {
      std::size_t full = 0;
      for (std::size_t j = 0; j < k; ++j) {
        if ((r >> (k - 1 - j)) & 1U) full |= std::size_t{1} << (n_qubits - 1 - qubits[j]);
      }
      out[r] = full;
    }
    return out;
  };
  return {offsets(std::vector<int>(keep.begin(), keep.end())), offsets(traced)};
}

}  // namespace

ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const int> keep, int n_qubits) {
  const SplitIndex idx = split_index(keep, n_qubits);
  if (rho.rows() != static_cast<Eigen::Index>(dim_for(n_qubits)) || rho.cols() != rho.rows()) {
    throw ArgumentError("partial_trace: matrix dimension does not match qubit count");
  }
  const auto d = static_cast<Eigen::Index>(idx.kept_offset.size());
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      cplx acc{0.0, 0.0};
      for (std::size_t t : idx.traced_offset) {
        acc += rho(static_cast<Eigen::Index>(idx.kept_offset[static_cast<std::size_t>(i)] | t),
                   static_cast<Eigen::Index>(idx.kept_offset[static_cast<std::size_t>(j)] | t));
      }
      out(i, j) = acc;
    }
  }
  return out;
}

ComplexMatrix partial_trace_pure(const ComplexVector& psi, std::span<const int> keep, int n_qubits) {
  const SplitIndex idx = split_index(keep, n_qubits);
  if (psi.size() != static_cast<Eigen::Index>(dim_for(n_qubits))) {
    throw ArgumentError("partial_trace_pure: vector dimension does not match qubit count");
  }
  // Reshape into (kept x traced) and form A A^dagger.
  const auto dk = static_cast<Eigen::Index>(idx.kept_offset.size());
  const auto dt = static_cast<Eigen::Index>(idx.traced_offset.size());
  ComplexMatrix a(dk, dt);
  for (Eigen::Index i = 0; i < dk; ++i) {
    for (Eigen::Index t = 0; t < dt; ++t) {
      a(i, t) = psi(static_cast<Eigen::Index>(idx.kept_offset[static_cast<std::size_t>(i)] |
                                              idx.traced_offset[static_cast<std::size_t>(t)]));
    }
  }
  return a * a.adjoint();
}

ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  require_square(m, "psd_sqrt");
  if (!is_hermitian(m, tol::kExact)) throw ArgumentError("psd_sqrt: input is not Hermitian");
  const auto es = hermitian_eigen(m);
  RealVector vals = es.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals(i) < -tol::kNegativeFloor) {
      throw ArgumentError("psd_sqrt: eigenvalue " + std::to_string(vals(i)) + " below floor");
    }
    vals(i) = vals(i) < kZeroEigen ? 0.0 : std::sqrt(vals(i));
  }
  const ComplexMatrix& v = es.eigenvectors();
  return v * vals.cast<cplx>().asDiagonal() * v.adjoint();
}

double fidelity(const ComplexMatrix& sigma, const ComplexMatrix& sigma_prime) {
  require_square(sigma, "fidelity");
  require_square(sigma_prime, "fidelity");
  if (sigma.rows() != sigma_prime.rows()) {
    throw ArgumentError("fidelity: dimension mismatch (" + std::to_string(sigma.rows()) + " vs " +
                        std::to_string(sigma_prime.rows()) + ")");
  }
  // Tr sqrt(sqrt(s) s' sqrt(s)) equals the nuclear norm of sqrt(s) sqrt(s').
  const ComplexMatrix prod = psd_sqrt(sigma) * psd_sqrt(sigma_prime);
  Eigen::JacobiSVD<ComplexMatrix> svd(prod);
  const double root = svd.singularValues().sum();
  return std::clamp(root * root, 0.0, 1.0);
}

double pure_fidelity(const ComplexVector& u, const ComplexVector& v) {
  if (u.size() != v.size()) throw ArgumentError("pure_fidelity: dimension mismatch");
  return std::norm(u.dot(v));
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ArgumentError("trace_distance: dimension mismatch");
  Eigen::JacobiSVD<ComplexMatrix> svd(a - b);
  return 0.5 * svd.singularValues().sum();
}

ComplexMatrix density_of(const ComplexVector& psi) { return psi * psi.adjoint(); }

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_unitary(const ComplexMatrix& m, double tolerance) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m.adjoint() * m - ComplexMatrix::Identity(m.rows(), m.cols())) < tolerance;
}

bool is_hermitian(const ComplexMatrix& m, double tolerance) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) < tolerance;
}

bool is_density(const ComplexMatrix& m, double tolerance) {
  if (!is_hermitian(m, tolerance)) return false;
  if (std::abs(m.trace() - cplx{1.0, 0.0}) > tolerance) return false;
  return min_eigenvalue(m) >= -tol::kNegativeFloor;
}

bool is_state(const ComplexVector& v, double tolerance) {
  return std::abs(v.norm() - 1.0) < tolerance;
}

double min_eigenvalue(const ComplexMatrix& m) {
  require_square(m, "min_eigenvalue");
  return hermitian_eigen(m).eigenvalues().minCoeff();
}

ComplexMatrix project_to_density(const ComplexMatrix& m) {
  require_square(m, "project_to_density");
  const auto es = hermitian_eigen(m);
  RealVector vals = es.eigenvalues().cwiseMax(0.0);
  const double total = vals.sum();
  if (total <= 0.0) {
    // Nothing positive survives; fall back to the maximally mixed state.
    return ComplexMatrix::Identity(m.rows(), m.cols()) / static_cast<double>(m.rows());
  }
  vals /= total;
  const ComplexMatrix& v = es.eigenvectors();
  ComplexMatrix out = v * vals.cast<cplx>().asDiagonal() * v.adjoint();
  return 0.5 * (out + out.adjoint());
}

ComplexMatrix pauli(char label) {
  ComplexMatrix p(2, 2);
  switch (label) {
    case 'I': p << 1, 0, 0, 1; break;
    case 'X': p << 0, 1, 1, 0; break;
    case 'Y': p << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'Z': p << 1, 0, 0, -1; break;
    default: throw ArgumentError(std::string("unknown Pauli label '") + label + "'");
  }
  return p;
}

ComplexMatrix pauli_string_matrix(const std::string& labels) {
  if (labels.empty()) throw ArgumentError("empty Pauli string");
  ComplexMatrix out = pauli(labels[0]);
  for (std::size_t i = 1; i < labels.size(); ++i) out = tensor_product(out, pauli(labels[i]));
  return out;
}

}  // namespace qroute
