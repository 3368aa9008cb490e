#pragma once

// Dense complex linear algebra for small registers.
//
// Qubit 0 is the leftmost ket label and the most significant bit of a basis
// index ("big-endian semantic indexing"). The only place where bit order is
// flipped is the bitstring conversion at the measurement boundary
// (see simulator.hpp).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qroute {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Tolerance table shared by every module.
namespace tol {
inline constexpr double kExact = 1e-10;        // exact-math identities
inline constexpr double kEigen = 1e-9;         // eigen-derived quantities
inline constexpr double kNegativeFloor = 1e-9; // psd_sqrt eigenvalue floor
inline constexpr double kBranchFloor = 1e-12;  // impossible post-selection
inline constexpr double kEuler = 1e-12;        // Euler-angle gimbal lock
inline constexpr double kConditionMax = 1e6;   // calibration inversion
}  // namespace tol

inline constexpr int kMaxQubits = 12;

inline std::size_t dim_for(int n_qubits) { return std::size_t{1} << n_qubits; }

/// Bit of `qubit` inside basis index `index` for an n-qubit register.
inline int qubit_bit(std::size_t index, int qubit, int n_qubits) {
  return static_cast<int>((index >> (n_qubits - 1 - qubit)) & 1U);
}

/// Kronecker product. Throws CapacityError if the result exceeds kMaxQubits
/// worth of rows or columns.
ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector tensor_product(const ComplexVector& a, const ComplexVector& b);

/// Reduced density matrix over `keep` (kept in the given order).
ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const int> keep, int n_qubits);

/// Reduced density matrix of a pure state, without forming |psi><psi|.
ComplexMatrix partial_trace_pure(const ComplexVector& psi, std::span<const int> keep, int n_qubits);

/// Principal square root of a Hermitian PSD matrix. Eigenvalues in
/// [-kNegativeFloor, 0) are clipped to zero; anything more negative, or a
/// non-Hermitian input, raises ArgumentError.
ComplexMatrix psd_sqrt(const ComplexMatrix& m);

/// Uhlmann fidelity (Tr sqrt(sqrt(s) s' sqrt(s)))^2, clamped to [0, 1].
double fidelity(const ComplexMatrix& sigma, const ComplexMatrix& sigma_prime);

/// |<u|v>|^2 for normalized vectors.
double pure_fidelity(const ComplexVector& u, const ComplexVector& v);

/// Half the trace norm of a - b.
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix density_of(const ComplexVector& psi);

double max_abs(const ComplexMatrix& m);
bool is_unitary(const ComplexMatrix& m, double tolerance = tol::kExact);
bool is_hermitian(const ComplexMatrix& m, double tolerance = tol::kExact);
/// Hermitian, unit trace, min eigenvalue >= -kNegativeFloor.
bool is_density(const ComplexMatrix& m, double tolerance = tol::kExact);
bool is_state(const ComplexVector& v, double tolerance = tol::kExact);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const ComplexMatrix& m);

/// Clip negative eigenvalues to zero and renormalize the trace to one.
ComplexMatrix project_to_density(const ComplexMatrix& m);

/// Single-qubit Pauli by label 'I', 'X', 'Y' or 'Z'.
ComplexMatrix pauli(char label);
/// Tensor product of Paulis; string[0] acts on qubit 0.
ComplexMatrix pauli_string_matrix(const std::string& labels);

}  // namespace qroute
