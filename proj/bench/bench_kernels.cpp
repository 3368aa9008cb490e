// Serial reference vs OpenMP kernels over register width.

#include <benchmark/benchmark.h>

#include <random>

#include "qroute/kernels.hpp"

using namespace qroute;

namespace {

ComplexVector random_state(int n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  ComplexVector v(static_cast<Eigen::Index>(dim_for(n)));
  for (auto& a : v) a = cplx(g(rng), g(rng));
  return v.normalized();
}

ComplexMatrix random_unitary(int d) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  ComplexMatrix a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(a);
  return qr.householderQ();
}

std::span<cplx> view(ComplexVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

template <auto Kernel>
void one_qubit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ComplexVector psi = random_state(n);
  const ComplexMatrix u = random_unitary(2);
  for (auto _ : state) {
    Kernel(view(psi), n, n / 2, u);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * psi.size());
}

template <auto Kernel>
void two_qubit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ComplexVector psi = random_state(n);
  const ComplexMatrix u = random_unitary(4);
  for (auto _ : state) {
    Kernel(view(psi), n, 0, n - 1, u);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * psi.size());
}

template <auto Kernel>
void cx(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ComplexVector psi = random_state(n);
  for (auto _ : state) {
    Kernel(view(psi), n, 1, n - 2);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * psi.size());
}

template <auto Kernel>
void three_qubit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ComplexVector psi = random_state(n);
  const ComplexMatrix u = random_unitary(8);
  const int qubits[] = {0, n / 2, n - 1};
  for (auto _ : state) {
    Kernel(view(psi), n, std::span<const int>(qubits), u);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * psi.size());
}

}  // namespace

BENCHMARK(one_qubit<kernels::serial::apply_1q>)->Name("serial/apply_1q")->DenseRange(8, 22, 7);
BENCHMARK(one_qubit<kernels::parallel::apply_1q>)->Name("parallel/apply_1q")->DenseRange(8, 22, 7);
BENCHMARK(two_qubit<kernels::serial::apply_2q>)->Name("serial/apply_2q")->DenseRange(8, 22, 7);
BENCHMARK(two_qubit<kernels::parallel::apply_2q>)->Name("parallel/apply_2q")->DenseRange(8, 22, 7);
BENCHMARK(cx<kernels::serial::apply_cx>)->Name("serial/apply_cx")->DenseRange(8, 22, 7);
BENCHMARK(cx<kernels::parallel::apply_cx>)->Name("parallel/apply_cx")->DenseRange(8, 22, 7);
BENCHMARK(three_qubit<kernels::serial::apply_matrix>)->Name("serial/apply_matrix")->DenseRange(8, 22, 7);
BENCHMARK(three_qubit<kernels::parallel::apply_matrix>)->Name("parallel/apply_matrix")->DenseRange(8, 22, 7);

BENCHMARK_MAIN();
