#include <gtest/gtest.h>

#include <random>

#include "qroute/errors.hpp"
#include "qroute/tomography.hpp"

using namespace qroute;

namespace {

ComplexMatrix random_density(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  ComplexMatrix a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  const ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

ComplexMatrix bell_density() {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return density_of(v);
}

double value_of(const std::vector<PauliExpectation>& es, const std::string& p) {
  for (const auto& e : es) {
    if (e.pauli == p) return e.value;
  }
  ADD_FAILURE() << "missing " << p;
  return 0.0;
}

SettingCounts sample_bell(std::uint64_t shots, const NoiseSpec& noise) {
  SettingCounts out;
  std::uint64_t i = 0;
  for (const auto& s : settings(2)) {
    Circuit c(2, {{"c0", 2}});
    c.append(CircuitOp::gate(GateKind::H, {0})).append(CircuitOp::gate(GateKind::CX, {0, 1}));
    c.append(measurement_rotation(s));
    NoiseSpec ns = noise;
    ns.rng_seed = derive_seed(noise.rng_seed, i++);
    out[s.bases] = sample_shots(c, shots, ns).registers.at("c0");
  }
  return out;
}

}  // namespace

TEST(tomography, settings_and_pauli_order) {
  const auto one = settings(1);
  ASSERT_EQ(one.size(), 3u);
  EXPECT_EQ(one[0].bases, "X");
  EXPECT_EQ(one[2].bases, "Z");
  const auto three = settings(3);
  ASSERT_EQ(three.size(), 27u);
  EXPECT_EQ(three.front().bases, "XXX");
  EXPECT_EQ(three[1].bases, "XXY");
  EXPECT_EQ(three.back().bases, "ZZZ");
  const auto ps = pauli_strings(2);
  ASSERT_EQ(ps.size(), 16u);
  EXPECT_EQ(ps[0], "II");
  EXPECT_EQ(ps[1], "IX");
  EXPECT_EQ(ps[15], "ZZ");
  EXPECT_THROW(settings(0), CapacityError);
  EXPECT_THROW(settings(6), CapacityError);
}

TEST(tomography, bell_exact_expectations) {
  const auto es = exact_expectations(bell_density());
  EXPECT_NEAR(value_of(es, "II"), 1.0, 1e-12);
  EXPECT_NEAR(value_of(es, "XX"), 1.0, 1e-12);
  EXPECT_NEAR(value_of(es, "YY"), -1.0, 1e-12);
  EXPECT_NEAR(value_of(es, "ZZ"), 1.0, 1e-12);
  EXPECT_NEAR(value_of(es, "XY"), 0.0, 1e-12);
  EXPECT_NEAR(value_of(es, "ZI"), 0.0, 1e-12);
}

TEST(tomography, inversion_round_trip) {
  std::mt19937_64 rng(71);
  for (int n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      const ComplexMatrix rho = random_density(rng, 1 << n);
      EXPECT_LT(max_abs(linear_inversion(exact_expectations(rho)) - rho), 1e-12);
    }
  }
}

TEST(tomography, exact_probabilities_reproduce_state) {
  std::mt19937_64 rng(72);
  for (int n = 1; n <= 3; ++n) {
    const ComplexMatrix rho = random_density(rng, 1 << n);
    SettingProbabilities probs;
    for (const auto& s : settings(n)) probs[s.bases] = setting_probabilities(rho, s);
    const auto es = expectations_from_probabilities(probs, n);
    const auto exact = exact_expectations(rho);
    ASSERT_EQ(es.size(), exact.size());
    for (std::size_t i = 0; i < es.size(); ++i) {
      EXPECT_EQ(es[i].pauli, exact[i].pauli);
      EXPECT_NEAR(es[i].value, exact[i].value, 1e-12) << es[i].pauli;
    }
    EXPECT_NEAR(fidelity(reconstruct(es), rho), 1.0, 1e-9);
  }
}

TEST(tomography, rotation_matches_circuit_fragment) {
  for (const auto& s : settings(2)) {
    Circuit c(2);
    for (const auto& op : measurement_rotation(s)) {
      if (op.is_gate()) c.append(op);
    }
    const ComplexMatrix u = rotation_unitary(s);
    EXPECT_LT(max_abs(circuit_unitary(c) - u), 1e-12) << s.bases;
  }
  EXPECT_THROW(measurement_rotation({"XQ"}), ArgumentError);
  EXPECT_THROW(measurement_rotation({"XY"}, {0}), ArgumentError);
}

TEST(tomography, register_bit_order) {
  // qubit 0 recorded in the rightmost character
  const RealVector p = counts_to_probabilities({{"01", 3}, {"10", 1}}, 2);
  EXPECT_NEAR(p(2), 0.75, 1e-15);
  EXPECT_NEAR(p(1), 0.25, 1e-15);
  EXPECT_THROW(counts_to_probabilities({}, 2), IncompleteDataError);
  EXPECT_THROW(counts_to_probabilities({{"011", 1}}, 2), ArgumentError);
}

TEST(tomography, sampled_bell_reconstruction) {
  const SettingCounts counts = sample_bell(20000, NoiseSpec::none(3));
  const ComplexMatrix rho = reconstruct(expectations_from_counts(counts, 2));
  EXPECT_TRUE(is_density(rho, 1e-9));
  EXPECT_GT(fidelity(rho, bell_density()), 0.98);
  const auto es = expectations_from_counts(counts, 2);
  EXPECT_NEAR(value_of(es, "YY"), -1.0, 1e-12);
}

TEST(tomography, missing_setting_is_incomplete) {
  SettingCounts counts = sample_bell(100, NoiseSpec::none(3));
  counts.erase("XY");
  EXPECT_THROW(expectations_from_counts(counts, 2), IncompleteDataError);
  counts["XY"] = {};
  EXPECT_THROW(expectations_from_counts(counts, 2), IncompleteDataError);
}

TEST(tomography, analytic_calibration_structure) {
  NoiseSpec noise;
  noise.readout_confusion = {{0.1, 0.2}, {0.05, 0.0}};
  const CalibrationMatrix cal = build_calibration(2, noise);
  cal.validate();
  RealMatrix c0(2, 2), c1(2, 2);
  c0 << 0.9, 0.2, 0.1, 0.8;
  c1 << 0.95, 0.0, 0.05, 1.0;
  RealMatrix expected(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) expected.block(2 * i, 2 * j, 2, 2) = c0(i, j) * c1;
  }
  EXPECT_LT((cal.m - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((build_calibration(3, NoiseSpec::none()).m - RealMatrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 0.0 + 1e-15);
  EXPECT_EQ(cal.to_json().at("dim").get<int>(), 4);
}

TEST(tomography, measured_calibration_approaches_analytic) {
  NoiseSpec noise;
  noise.readout_confusion = {{0.1, 0.2}, {0.05, 0.0}};
  noise.rng_seed = 8;
  const CalibrationMatrix measured = build_calibration(2, noise, CalibrationMode::Measured, 100000);
  measured.validate();
  EXPECT_LT((measured.m - build_calibration(2, noise).m).cwiseAbs().maxCoeff(), 0.01);
}

TEST(tomography, mitigation_inverts_calibration) {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CalibrationMatrix cal = build_calibration(3, NoiseSpec::symmetric_readout(0.03));
  for (int trial = 0; trial < 10; ++trial) {
    RealVector p(8);
    for (int i = 0; i < 8; ++i) p(i) = u(rng);
    p /= p.sum();
    EXPECT_LT((mitigate(RealVector(cal.m * p), cal) - p).cwiseAbs().maxCoeff(), 1e-12);
  }
  const CalibrationMatrix ident = build_calibration(2, NoiseSpec::none());
  RealVector q(4);
  q << 0.1, 0.2, 0.3, 0.4;
  EXPECT_LT((mitigate(q, ident) - q).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(tomography, mitigation_clips_and_renormalizes) {
  const CalibrationMatrix cal = build_calibration(1, NoiseSpec::symmetric_readout(0.1));
  RealVector obs(2);
  obs << 1.0, 0.0;
  const RealVector raw = mitigate_unclipped(obs, cal);
  EXPECT_LT(raw(1), 0.0);
  const RealVector p = mitigate(obs, cal);
  EXPECT_NEAR(p(0), 1.0, 1e-15);
  EXPECT_NEAR(p(1), 0.0, 1e-15);
}

TEST(tomography, ill_conditioned_calibration) {
  const CalibrationMatrix cal = build_calibration(1, NoiseSpec::symmetric_readout(0.5));
  RealVector obs(2);
  obs << 0.5, 0.5;
  EXPECT_THROW(mitigate(obs, cal), ConditioningError);
  CalibrationMatrix bad = cal;
  bad.m(0, 0) = 0.7;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(tomography, mitigated_bell_counts_are_closer) {
  const NoiseSpec noise = NoiseSpec::symmetric_readout(0.05, 21);
  const SettingCounts counts = sample_bell(50000, noise);
  const CalibrationMatrix cal = build_calibration(2, noise);
  RealVector ideal = RealVector::Zero(4);
  ideal(0) = ideal(3) = 0.5;
  const RealVector raw = counts_to_probabilities(counts.at("ZZ"), 2);
  const RealVector fixed = mitigate(counts.at("ZZ"), cal);
  EXPECT_LT(total_variation(fixed, ideal), total_variation(raw, ideal));
  EXPECT_NEAR(total_variation(raw, ideal), 0.095, 0.01);
}

TEST(tomography, readout_subset_reindexes) {
  NoiseSpec noise;
  noise.readout_confusion = {{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}};
  const NoiseSpec sub = readout_subset(noise, {2, 0});
  ASSERT_EQ(sub.readout_confusion.size(), 2u);
  EXPECT_EQ(sub.readout_confusion[0].first, 0.3);
  EXPECT_EQ(sub.readout_confusion[1].first, 0.1);
  EXPECT_TRUE(readout_subset(NoiseSpec::none(), {0, 1}).readout_confusion.empty());
}
