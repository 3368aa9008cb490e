#pragma once

// Statevector kernels. `serial` is the straightforward reference used by the
// tests as an oracle; `parallel` is the OpenMP version used by the engine.
// Both share signatures so tests and benchmarks can swap them.
//
// Amplitude index convention: qubit q of an n-qubit register is bit
// (n - 1 - q) of the index. A k-qubit matrix is applied with qubits[0] as its
// most significant operand.

#include <span>

#include "qroute/qmath.hpp"

namespace qroute::kernels {

/// Below this dimension the parallel kernels run single-threaded.
inline constexpr std::size_t kParallelThreshold = std::size_t{1} << 12;

namespace serial {
void apply_1q(std::span<cplx> amps, int n_qubits, int qubit, const ComplexMatrix& m);
void apply_2q(std::span<cplx> amps, int n_qubits, int q0, int q1, const ComplexMatrix& m);
void apply_matrix(std::span<cplx> amps, int n_qubits, std::span<const int> qubits, const ComplexMatrix& m);
/// CX as an amplitude permutation.
void apply_cx(std::span<cplx> amps, int n_qubits, int control, int target);
double probability_of_one(std::span<const cplx> amps, int n_qubits, int qubit);
/// Zeroes every amplitude whose `qubit` bit differs from `outcome`.
void project(std::span<cplx> amps, int n_qubits, int qubit, int outcome);
void scale(std::span<cplx> amps, double factor);
}  // namespace serial

namespace parallel {
void apply_1q(std::span<cplx> amps, int n_qubits, int qubit, const ComplexMatrix& m);
void apply_2q(std::span<cplx> amps, int n_qubits, int q0, int q1, const ComplexMatrix& m);
void apply_matrix(std::span<cplx> amps, int n_qubits, std::span<const int> qubits, const ComplexMatrix& m);
void apply_cx(std::span<cplx> amps, int n_qubits, int control, int target);
double probability_of_one(std::span<const cplx> amps, int n_qubits, int qubit);
void project(std::span<cplx> amps, int n_qubits, int qubit, int outcome);
void scale(std::span<cplx> amps, double factor);
}  // namespace parallel

/// Dispatches to the specialized parallel kernel by operand count.
void apply(std::span<cplx> amps, int n_qubits, std::span<const int> qubits, const ComplexMatrix& m);

}  // namespace qroute::kernels
