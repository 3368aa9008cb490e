#include "qroute/harness.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "qroute/errors.hpp"
#include "qroute/transpiler.hpp"

namespace qroute {

namespace fs = std::filesystem;

namespace {

template <typename T>
T field(const nlohmann::json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(key, e.what());
  }
}

void reject_unknown(const nlohmann::json& doc, const std::set<std::string>& known, const std::string& scope) {
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) throw ConfigError(scope + key, "unknown key");
  }
}

cplx parse_complex(const nlohmann::json& j, const std::string& name) {
  try {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2) return {j.at(0).get<double>(), j.at(1).get<double>()};
  } catch (const nlohmann::json::exception&) {
  }
  throw ConfigError(name, "expected a number or [re, im]");
}

QubitSpec parse_qubit(const nlohmann::json& j, const std::string& name) {
  if (!j.is_object()) throw ConfigError(name, "expected {alpha, beta}");
  reject_unknown(j, {"alpha", "beta"}, name + ".");
  if (!j.contains("alpha") || !j.contains("beta")) throw ConfigError(name, "needs alpha and beta");
  return {parse_complex(j.at("alpha"), name + ".alpha"), parse_complex(j.at("beta"), name + ".beta")};
}

nlohmann::json complex_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string density_name(double gamma, int rep) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "gamma_%.4f_rep_%02d.json", gamma, rep);
  return buf;
}

void ensure_writable(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "density", ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  const fs::path probe = fs::path(dir) / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw IoError("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  reject_unknown(doc,
                 {"gamma_grid", "gamma_guess", "variant", "error_correction", "shots_per_setting", "repetitions",
                  "base_seed", "noise", "mitigation", "calibration", "transpile", "coupling_map", "output_dir",
                  "inputs"},
                 "");
  ExperimentConfig c;
  if (doc.contains("gamma_grid")) c.gamma_grid = field<std::vector<double>>(doc, "gamma_grid");
  if (doc.contains("gamma_guess")) c.gamma_guess = field<double>(doc, "gamma_guess");
  if (doc.contains("variant")) c.variant = variant_from_name(field<std::string>(doc, "variant"));
  c.error_correction = c.variant != Variant::NoNoise;
  if (doc.contains("error_correction")) c.error_correction = field<bool>(doc, "error_correction");
  if (doc.contains("shots_per_setting")) {
    const auto v = field<long long>(doc, "shots_per_setting");
    if (v < 1) throw ConfigError("shots_per_setting", "must be at least 1");
    c.shots_per_setting = static_cast<std::uint64_t>(v);
  }
  if (doc.contains("repetitions")) c.repetitions = field<int>(doc, "repetitions");
  if (doc.contains("base_seed")) c.base_seed = field<std::uint64_t>(doc, "base_seed");
  if (doc.contains("mitigation")) c.mitigation = field<bool>(doc, "mitigation");
  if (doc.contains("calibration")) {
    const auto mode = field<std::string>(doc, "calibration");
    if (mode == "analytic") {
      c.calibration = CalibrationMode::Analytic;
    } else if (mode == "measured") {
      c.calibration = CalibrationMode::Measured;
    } else {
      throw ConfigError("calibration", "expected 'analytic' or 'measured'");
    }
  }
  if (doc.contains("transpile")) c.transpile = field<bool>(doc, "transpile");
  if (doc.contains("coupling_map")) {
    const auto& m = doc.at("coupling_map");
    if (m.is_string()) {
      c.coupling_map = m.get<std::string>();
    } else if (m.is_object()) {
      try {
        CouplingMap::from_json(m);
      } catch (const Error& e) {
        throw ConfigError("coupling_map", e.what());
      }
      c.coupling_map_inline = m;
      c.coupling_map = m.value("name", std::string("custom"));
    } else {
      throw ConfigError("coupling_map", "expected a name, a path, or {n_physical, edges}");
    }
  }
  if (doc.contains("output_dir")) c.output_dir = field<std::string>(doc, "output_dir");
  if (doc.contains("noise")) {
    const auto& n = doc.at("noise");
    if (!n.is_object()) throw ConfigError("noise", "expected an object");
    reject_unknown(n, {"readout_confusion", "depolarizing_per_cx"}, "noise.");
    if (n.contains("readout_confusion")) {
      const auto& r = n.at("readout_confusion");
      try {
        if (r.is_number()) {
          c.noise.readout_confusion = {{r.get<double>(), r.get<double>()}};
        } else {
          for (const auto& e : r) {
            if (e.is_number()) {
              c.noise.readout_confusion.push_back({e.get<double>(), e.get<double>()});
            } else {
              c.noise.readout_confusion.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
            }
          }
        }
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("noise.readout_confusion", e.what());
      }
    }
    if (n.contains("depolarizing_per_cx")) c.noise.depolarizing_per_cx = field<double>(n, "depolarizing_per_cx");
  }
  if (doc.contains("inputs")) {
    const auto& in = doc.at("inputs");
    if (!in.is_object()) throw ConfigError("inputs", "expected an object");
    reject_unknown(in, {"control", "signal"}, "inputs.");
    if (in.contains("control")) c.inputs.control = parse_qubit(in.at("control"), "inputs.control");
    if (in.contains("signal")) c.inputs.signal = parse_qubit(in.at("signal"), "inputs.signal");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json confusion = nlohmann::json::array();
  for (const auto& [p10, p01] : c.noise.readout_confusion) confusion.push_back({p10, p01});
  nlohmann::json j = {
      {"gamma_grid", c.gamma_grid},
      {"gamma_guess", c.gamma_guess},
      {"variant", variant_name(c.variant)},
      {"error_correction", c.error_correction},
      {"shots_per_setting", c.shots_per_setting},
      {"repetitions", c.repetitions},
      {"base_seed", c.base_seed},
      {"noise", {{"readout_confusion", confusion}, {"depolarizing_per_cx", c.noise.depolarizing_per_cx}}},
      {"mitigation", c.mitigation},
      {"calibration", c.calibration == CalibrationMode::Analytic ? "analytic" : "measured"},
      {"transpile", c.transpile},
      {"output_dir", c.output_dir},
      {"inputs",
       {{"control", {{"alpha", complex_json(c.inputs.control.alpha)}, {"beta", complex_json(c.inputs.control.beta)}}},
        {"signal", {{"alpha", complex_json(c.inputs.signal.alpha)}, {"beta", complex_json(c.inputs.signal.beta)}}}}},
  };
  j["coupling_map"] = c.coupling_map_inline.is_null() ? nlohmann::json(c.coupling_map) : c.coupling_map_inline;
  return j;
}

std::vector<SweepRow> summarize(const ExperimentConfig& config, const std::vector<ExperimentResult>& results) {
  std::vector<SweepRow> rows;
  for (double g : config.gamma_grid) {
    SweepRow row;
    row.gamma = g;
    std::vector<double> fs, ps;
    bool have = false;
    for (const auto& r : results) {
      if (r.gamma != g) continue;
      fs.push_back(r.fidelity);
      ps.push_back(r.success_prob_estimate);
      row.shots_kept_total += r.shots_kept;
      row.P_theory = r.success_prob_theory;
      row.p1_theory = r.p1_theory;
      have = true;
    }
    if (!have) continue;
    auto stats = [](const std::vector<double>& v, double& mean, double& two_sigma) {
      mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      two_sigma = v.size() > 1 ? 2.0 * std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    };
    stats(fs, row.mean_F, row.two_sigma_F);
    stats(ps, row.mean_P_est, row.two_sigma_P);
    rows.push_back(row);
  }
  return rows;
}

std::string results_csv(const std::vector<ExperimentResult>& results) {
  std::ostringstream out;
  out << kResultsHeader << '\n';
  for (const auto& r : results) {
    out << num(r.gamma) << ',' << r.repetition << ',' << num(r.fidelity) << ',' << num(r.success_prob_estimate) << ','
        << num(r.success_prob_theory) << ',' << num(r.p1_theory) << ',' << r.shots_kept << '\n';
  }
  return out.str();
}

std::string summary_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << num(r.gamma) << ',' << num(r.mean_F) << ',' << num(r.two_sigma_F) << ',' << num(r.mean_P_est) << ','
        << num(r.two_sigma_P) << ',' << num(r.P_theory) << ',' << num(r.p1_theory) << ',' << r.shots_kept_total
        << '\n';
  }
  return out.str();
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out << content;
    if (!out) throw IoError("short write to '" + tmp + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

SweepReport run_sweep(const ExperimentConfig& config) {
  config.validate();
  ensure_writable(config.output_dir);
  std::optional<CouplingMap> map;
  if (config.transpile) map = config.resolve_coupling_map();
  const auto start = std::chrono::steady_clock::now();

  struct Task {
    double gamma;
    int rep;
  };
  std::vector<Task> tasks;
  for (double g : config.gamma_grid) {
    for (int r = 0; r < config.repetitions; ++r) tasks.push_back({g, r});
  }
  SweepReport report;
  report.results.resize(tasks.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    try {
      report.results[i] = run_point(config, tasks[i].gamma, tasks[i].rep);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  report.rows = summarize(config, report.results);

  const fs::path dir(config.output_dir);
  std::vector<std::string> files{"results.csv", "summary.csv", "ideal.json"};
  write_atomic((dir / "results.csv").string(), results_csv(report.results));
  write_atomic((dir / "summary.csv").string(), summary_csv(report.rows));
  write_atomic((dir / "ideal.json").string(), matrix_to_json(ideal_density(config.inputs)).dump(2) + "\n");
  for (const auto& r : report.results) {
    if (r.reconstructed.size() == 0) continue;
    const std::string name = "density/" + density_name(r.gamma, r.repetition);
    nlohmann::json doc = matrix_to_json(r.reconstructed);
    doc["gamma"] = r.gamma;
    doc["repetition"] = r.repetition;
    doc["fidelity"] = r.fidelity;
    write_atomic((dir / name).string(), doc.dump(2) + "\n");
    files.push_back(name);
  }
  nlohmann::json seeds = nlohmann::json::array();
  for (int r = 0; r < config.repetitions; ++r) seeds.push_back(repetition_seed(config.base_seed, r));
  nlohmann::json manifest = {{"version", kVersion},
                             {"config", config_to_json(config)},
                             {"repetition_seeds", seeds},
                             {"coupling_map", map ? map->to_json() : nlohmann::json(nullptr)},
                             {"files", files}};
  write_atomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_atomic((dir / "timing.txt").string(), "wall_seconds " + num(wall) + "\n");
  return report;
}

namespace {

void emit(const nlohmann::json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_atomic(out, doc.dump(2) + "\n");
  }
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void apply_thread_env() {
  if (const char* env = std::getenv("QROUTE_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) omp_set_num_threads(n);
  }
}

}  // namespace

int cli(int argc, char** argv) {
  CLI::App app{"qroute: error-corrected quantum router simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, variant, map_name;
  std::uint64_t seed = 0, shots = 0;
  bool no_mitigation = false, do_transpile = false;
  auto* sweep = app.add_subcommand("sweep", "run a gamma sweep and write result files");
  sweep->add_option("--config", config_path, "config JSON");
  sweep->add_option("--out", out_dir, "output directory");
  auto* seed_opt = sweep->add_option("--seed", seed, "base seed");
  auto* shots_opt = sweep->add_option("--shots", shots, "shots per tomography setting");
  sweep->add_option("--variant", variant, "both-qubits, signal-only or no-noise");
  sweep->add_flag("--no-mitigation", no_mitigation, "disable readout mitigation");
  sweep->add_flag("--transpile", do_transpile, "lower and route onto the coupling map");
  sweep->add_option("--map", map_name, "coupling map name or JSON path");

  std::string tomo_in, tomo_cal, tomo_out;
  auto* tomo = app.add_subcommand("tomo", "reconstruct a density matrix from tomography counts");
  tomo->add_option("--in", tomo_in, "counts JSON {n_qubits, counts: {setting: {bitstring: n}}}")->required();
  tomo->add_option("--calibration", tomo_cal, "calibration JSON from 'calibrate'");
  tomo->add_option("--out", tomo_out, "write the result here instead of stdout");

  std::string tr_in, tr_map = "jakarta", tr_out;
  auto* tr = app.add_subcommand("transpile", "lower a circuit JSON and check equivalence");
  tr->add_option("--in", tr_in, "circuit JSON")->required();
  tr->add_option("--map", tr_map, "coupling map name or JSON path");
  tr->add_option("--out", tr_out, "write the transpiled circuit JSON here");

  int cal_qubits = 3;
  double cal_readout = 0.0;
  bool cal_measured = false;
  std::uint64_t cal_shots = 100000, cal_seed = 1;
  std::string cal_out;
  auto* cal = app.add_subcommand("calibrate", "emit a readout calibration matrix");
  cal->add_option("--qubits", cal_qubits, "number of qubits");
  cal->add_option("--readout", cal_readout, "symmetric per-qubit readout flip probability");
  cal->add_flag("--measured", cal_measured, "sample basis-state preparations instead of the tensor product");
  cal->add_option("--shots", cal_shots, "shots per basis state in measured mode");
  cal->add_option("--seed", cal_seed, "seed for measured mode");
  cal->add_option("--out", cal_out, "write here instead of stdout");

  std::string ideal_out;
  auto* ideal = app.add_subcommand("dump-ideal", "write the ideal router output density matrix");
  ideal->add_option("--out", ideal_out, "write here instead of stdout");

  CLI11_PARSE(app, argc, argv);
  apply_thread_env();

  try {
    if (sweep->parsed()) {
      ExperimentConfig c = config_path.empty() ? parse_config(nlohmann::json::object()) : load_config(config_path);
      if (!out_dir.empty()) c.output_dir = out_dir;
      if (*seed_opt) c.base_seed = seed;
      if (*shots_opt) c.shots_per_setting = shots;
      if (!variant.empty()) {
        c.variant = variant_from_name(variant);
        if (c.variant == Variant::NoNoise) c.error_correction = false;
      }
      if (no_mitigation) c.mitigation = false;
      if (do_transpile) c.transpile = true;
      if (!map_name.empty()) {
        c.coupling_map = map_name;
        c.coupling_map_inline = nullptr;
      }
      const SweepReport rep = run_sweep(c);
      std::cout << summary_csv(rep.rows);
    } else if (tomo->parsed()) {
      const nlohmann::json doc = read_json(tomo_in);
      int n = 0;
      SettingCounts counts;
      try {
        n = doc.at("n_qubits").get<int>();
        counts = doc.at("counts").get<SettingCounts>();
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("counts file: ") + e.what());
      }
      std::vector<PauliExpectation> ex;
      if (tomo_cal.empty()) {
        ex = expectations_from_counts(counts, n);
      } else {
        const nlohmann::json cj = read_json(tomo_cal);
        CalibrationMatrix cm;
        cm.n_qubits = cj.at("n_qubits").get<int>();
        const auto rows = cj.at("matrix").get<std::vector<std::vector<double>>>();
        cm.m = RealMatrix(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (rows[i].size() != rows.size()) throw ValidationError("calibration matrix is not square");
          for (std::size_t j = 0; j < rows.size(); ++j) {
            cm.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
          }
        }
        cm.validate();
        if (cm.n_qubits != n) throw ValidationError("calibration width does not match counts");
        SettingProbabilities probs;
        for (const auto& s : settings(n)) {
          const auto it = counts.find(s.bases);
          if (it == counts.end()) throw IncompleteDataError("missing tomography setting " + s.bases);
          probs[s.bases] = mitigate(it->second, cm);
        }
        ex = expectations_from_probabilities(probs, n);
      }
      const ComplexMatrix rho = reconstruct(ex);
      nlohmann::json result = {{"density", matrix_to_json(rho)}};
      if (n == 3) result["fidelity_to_ideal"] = fidelity(ideal_density(RouterInputs::paper()), rho);
      emit(result, tomo_out);
    } else if (tr->parsed()) {
      const Circuit circuit = circuit_from_json(read_json(tr_in));
      const CouplingMap map = CouplingMap::resolve(tr_map);
      const TranspileResult res = transpile(circuit, map);
      const EquivalenceReport eq = verify_equivalence(circuit, res);
      if (!tr_out.empty()) write_atomic(tr_out, to_json(res.circuit).dump(2) + "\n");
      std::cout << transpile_report(res, eq).dump(2) << '\n';
      if (!eq.equivalent) {
        std::cerr << "error: transpiled circuit is not equivalent (max deviation " << eq.max_deviation << ")\n";
        return 1;
      }
    } else if (cal->parsed()) {
      const NoiseSpec noise = NoiseSpec::symmetric_readout(cal_readout, cal_seed);
      const CalibrationMatrix m =
          build_calibration(cal_qubits, noise, cal_measured ? CalibrationMode::Measured : CalibrationMode::Analytic,
                            cal_shots);
      emit(m.to_json(), cal_out);
    } else if (ideal->parsed()) {
      emit(matrix_to_json(ideal_density(RouterInputs::paper())), ideal_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace qroute
