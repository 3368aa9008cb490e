#include "qroute/kernels.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "qroute/errors.hpp"

namespace qroute::kernels {

namespace {

using Index = std::int64_t;

std::size_t bit_of(int n_qubits, int qubit) { return std::size_t{1} << (n_qubits - 1 - qubit); }

void check_operands(std::span<const cplx> amps, int n_qubits, std::span<const int> qubits,
                    const ComplexMatrix& m) {
  if (amps.size() != dim_for(n_qubits)) throw ArgumentError("kernel: amplitude count does not match width");
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << qubits.size());
  if (m.rows() != d || m.cols() != d) throw ArgumentError("kernel: matrix size does not match operand count");
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    if (qubits[i] < 0 || qubits[i] >= n_qubits) throw ArgumentError("kernel: qubit out of range");
    for (std::size_t j = 0; j < i; ++j) {
      if (qubits[i] == qubits[j]) throw ArgumentError("kernel: repeated qubit");
    }
  }
}

// Inserts zero bits at the (sorted ascending) positions in `masks` into the
// compact counter `k`, producing the base index of the k-th group.
std::size_t spread(std::size_t k, std::span<const std::size_t> sorted_masks) {
  for (std::size_t mask : sorted_masks) {
    const std::size_t low = k & (mask - 1);
    k = ((k & ~(mask - 1)) << 1) | low;
  }
  return k;
}

struct Layout {
  std::vector<std::size_t> offsets;  // per sub-index, OR-ed onto a group base
  std::vector<std::size_t> sorted_masks;
  std::size_t groups = 0;
};

Layout make_layout(int n_qubits, std::span<const int> qubits) {
  Layout layout;
  const std::size_t k = qubits.size();
  layout.offsets.assign(std::size_t{1} << k, 0);
  for (std::size_t r = 0; r < layout.offsets.size(); ++r) {
    std::size_t off = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if ((r >> (k - 1 - j)) & 1U) off |= bit_of(n_qubits, qubits[j]);
    }
    layout.offsets[r] = off;
  }
  for (int q : qubits) layout.sorted_masks.push_back(bit_of(n_qubits, q));
  std::sort(layout.sorted_masks.begin(), layout.sorted_masks.end());
  layout.groups = dim_for(n_qubits) >> k;
  return layout;
}

}  // namespace

namespace serial {

void apply_1q(std::span<cplx> amps, int n_qubits, int qubit, const ComplexMatrix& m) {
  const int qs[1] = {qubit};
  check_operands(amps, n_qubits, qs, m);
  const std::size_t mask = bit_of(n_qubits, qubit);
  const cplx m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & mask) continue;
    const cplx a0 = amps[i];
    const cplx a1 = amps[i | mask];
    amps[i] = m00 * a0 + m01 * a1;
    amps[i | mask] = m10 * a0 + m11 * a1;
  }
}

void apply_2q(std::span<cplx> amps, int n_qubits, int q0, int q1, const ComplexMatrix& m) {
  const int qs[2] = {q0, q1};
  apply_matrix(amps, n_qubits, qs, m);
}

void apply_matrix(std::span<cplx> amps, int n_qubits, std::span<const int> qubits, const ComplexMatrix& m) {
  check_operands(amps, n_qubits, qubits, m);
  const Layout layout = make_layout(n_qubits, qubits);
  const std::size_t d = layout.offsets.size();
  std::vector<cplx> in(d);
  for (std::size_t g = 0; g < layout.groups; ++g) {
    const std::size_t base = spread(g, layout.sorted_masks);
    for (std::size_t r = 0; r < d; ++r) in[r] = amps[base | layout.offsets[r]];
    for (std::size_t r = 0; r < d; ++r) {
      cplx acc{0.0, 0.0};
      for (std::size_t c = 0; c < d; ++c) {
        acc += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
      }
      amps[base | layout.offsets[r]] = acc;
    }
  }
}

void apply_cx(std::span<cplx> amps, int n_qubits, int control, int target) {
  const int qs[2] = {control, target};
  check_operands(amps, n_qubits, qs, ComplexMatrix::Identity(4, 4));
  const std::size_t c = bit_of(n_qubits, control), t = bit_of(n_qubits, target);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i & c) && !(i & t)) std::swap(amps[i], amps[i | t]);
  }
}

double probability_of_one(std::span<const cplx> amps, int n_qubits, int qubit) {
  const std::size_t mask = bit_of(n_qubits, qubit);
  double p = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & mask) p += std::norm(amps[i]);
  }
  return p;
}

void project(std::span<cplx> amps, int n_qubits, int qubit, int outcome) {
  const std::size_t mask = bit_of(n_qubits, qubit);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (((i & mask) != 0) != (outcome != 0)) amps[i] = 0.0;
  }
}

void scale(std::span<cplx> amps, double factor) {
  for (auto& a : amps) a *= factor;
}

}  // namespace serial

namespace parallel {

void apply_1q(std::span<cplx> amps, int n_qubits, int qubit, const ComplexMatrix& m) {
  const int qs[1] = {qubit};
  check_operands(amps, n_qubits, qs, m);
  const std::size_t mask = bit_of(n_qubits, qubit);
  const std::size_t low = mask - 1;
  const cplx m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
  const auto half = static_cast<Index>(amps.size() / 2);
  cplx* a = amps.data();
  const auto body = [&](Index k) {
    const auto uk = static_cast<std::size_t>(k);
    const std::size_t i = ((uk & ~low) << 1) | (uk & low);
    const cplx a0 = a[i];
    const cplx a1 = a[i | mask];
    a[i] = m00 * a0 + m01 * a1;
    a[i | mask] = m10 * a0 + m11 * a1;
  };
  if (amps.size() < kParallelThreshold) {
    for (Index k = 0; k < half; ++k) body(k);
    return;
  }
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < half; ++k) body(k);
}

void apply_2q(std::span<cplx> amps, int n_qubits, int q0, int q1, const ComplexMatrix& m) {
  const int qs[2] = {q0, q1};
  check_operands(amps, n_qubits, qs, m);
  const std::size_t b0 = bit_of(n_qubits, q0);
  const std::size_t b1 = bit_of(n_qubits, q1);
  const std::array<std::size_t, 2> sorted = {std::min(b0, b1), std::max(b0, b1)};
  const std::array<std::size_t, 4> off = {0, b1, b0, b0 | b1};
  std::array<cplx, 16> mm{};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) mm[static_cast<std::size_t>(r * 4 + c)] = m(r, c);
  }
  const auto quarter = static_cast<Index>(amps.size() / 4);
  cplx* a = amps.data();
  const auto body = [&](Index k) {
    const std::size_t base = spread(static_cast<std::size_t>(k), sorted);
    const cplx in[4] = {a[base | off[0]], a[base | off[1]], a[base | off[2]], a[base | off[3]]};
    for (std::size_t r = 0; r < 4; ++r) {
      a[base | off[r]] = mm[r * 4] * in[0] + mm[r * 4 + 1] * in[1] + mm[r * 4 + 2] * in[2] + mm[r * 4 + 3] * in[3];
    }
  };
  if (amps.size() < kParallelThreshold) {
    for (Index k = 0; k < quarter; ++k) body(k);
    return;
  }
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < quarter; ++k) body(k);
}

void apply_matrix(std::span<cplx> amps, int n_qubits, std::span<const int> qubits, const ComplexMatrix& m) {
  check_operands(amps, n_qubits, qubits, m);
  const Layout layout = make_layout(n_qubits, qubits);
  const std::size_t d = layout.offsets.size();
  const auto groups = static_cast<Index>(layout.groups);
  cplx* a = amps.data();
#pragma omp parallel if (amps.size() >= kParallelThreshold)
  {
    std::vector<cplx> in(d);
#pragma omp for schedule(static)
    for (Index g = 0; g < groups; ++g) {
      const std::size_t base = spread(static_cast<std::size_t>(g), layout.sorted_masks);
      for (std::size_t r = 0; r < d; ++r) in[r] = a[base | layout.offsets[r]];
      for (std::size_t r = 0; r < d; ++r) {
        cplx acc{0.0, 0.0};
        for (std::size_t c = 0; c < d; ++c) {
          acc += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
        }
        a[base | layout.offsets[r]] = acc;
      }
    }
  }
}

void apply_cx(std::span<cplx> amps, int n_qubits, int control, int target) {
  if (control < 0 || target < 0 || control >= n_qubits || target >= n_qubits || control == target ||
      amps.size() != dim_for(n_qubits)) {
    throw ArgumentError("apply_cx: bad operands");
  }
  const std::size_t c = bit_of(n_qubits, control), t = bit_of(n_qubits, target);
  const std::array<std::size_t, 2> sorted = {std::min(c, t), std::max(c, t)};
  const auto quarter = static_cast<Index>(amps.size() / 4);
  cplx* a = amps.data();
  if (amps.size() < kParallelThreshold) {
    for (Index k = 0; k < quarter; ++k) {
      const std::size_t base = spread(static_cast<std::size_t>(k), sorted) | c;
      std::swap(a[base], a[base | t]);
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < quarter; ++k) {
    const std::size_t base = spread(static_cast<std::size_t>(k), sorted) | c;
    std::swap(a[base], a[base | t]);
  }
}

double probability_of_one(std::span<const cplx> amps, int n_qubits, int qubit) {
  const std::size_t mask = bit_of(n_qubits, qubit);
  const auto n = static_cast<Index>(amps.size());
  const cplx* a = amps.data();
  double p = 0.0;
#pragma omp parallel for reduction(+ : p) if (amps.size() >= kParallelThreshold) schedule(static)
  for (Index i = 0; i < n; ++i) {
    if (static_cast<std::size_t>(i) & mask) p += std::norm(a[i]);
  }
  return p;
}

void project(std::span<cplx> amps, int n_qubits, int qubit, int outcome) {
  const std::size_t mask = bit_of(n_qubits, qubit);
  const auto n = static_cast<Index>(amps.size());
  cplx* a = amps.data();
#pragma omp parallel for if (amps.size() >= kParallelThreshold) schedule(static)
  for (Index i = 0; i < n; ++i) {
    if (((static_cast<std::size_t>(i) & mask) != 0) != (outcome != 0)) a[i] = 0.0;
  }
}

void scale(std::span<cplx> amps, double factor) {
  const auto n = static_cast<Index>(amps.size());
  cplx* a = amps.data();
#pragma omp parallel for if (amps.size() >= kParallelThreshold) schedule(static)
  for (Index i = 0; i < n; ++i) a[i] *= factor;
}

}  // namespace parallel

void apply(std::span<cplx> amps, int n_qubits, std::span<const int> qubits, const ComplexMatrix& m) {
  switch (qubits.size()) {
    case 1: parallel::apply_1q(amps, n_qubits, qubits[0], m); break;
    case 2: parallel::apply_2q(amps, n_qubits, qubits[0], qubits[1], m); break;
    default: parallel::apply_matrix(amps, n_qubits, qubits, m); break;
  }
}

}  // namespace qroute::kernels
