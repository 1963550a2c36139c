#include "phlab/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/opensslv.h>

#include "phlab/atomic.hpp"
#include "phlab/config.hpp"
#include "phlab/counts.hpp"
#include "phlab/estimation.hpp"
#include "phlab/hom.hpp"
#include "phlab/montecarlo.hpp"
#include "phlab/timetag.hpp"

#ifndef PHLAB_VERSION
#define PHLAB_VERSION "0.0.0"
#endif

namespace phlab::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

IoError::IoError(std::string file, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", file, message)), file_(std::move(file)) {}

std::string version() { return PHLAB_VERSION; }

namespace {

// Error raised on bad data inside an input file (as opposed to I/O failure).
class DataError : public std::runtime_error {
 public:
  DataError(std::string file, const std::string& message)
      : std::runtime_error(fmt::format("{}: {}", file, message)), file_(std::move(file)) {}
  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << content;
  if (!out.flush()) throw IoError(path.string(), "write failed");
}

// Parses a file with `fn`, attaching the file name to any parse failure.
template <class Fn>
auto parse_file(const fs::path& path, Fn&& fn) {
  std::istringstream in(read_file(path));
  try {
    return fn(in);
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(path.string(), e.what());
  }
}

void emit(std::ostream& out, const std::optional<std::string>& path, const std::string& content) {
  if (path) {
    write_file(*path, content);
  } else {
    out << content;
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

RunConfig config_or_default(const std::optional<std::string>& path) {
  return path ? load_config(*path) : RunConfig{};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string aggregate_csv(const CountAggregate& agg, const std::string& hash) {
  std::ostringstream ss;
  write_aggregate_csv(ss, agg, hash);
  return ss.str();
}

std::string correlations_csv(const CorrelationSet& set, const std::string& hash) {
  std::ostringstream ss;
  write_correlations_csv(ss, set, hash);
  return ss.str();
}

json estimate_json(const estimation::EfficiencyEstimate& e, const std::string& hash) {
  json j;
  j["config_hash"] = hash;
  j["p_ex"] = e.p_ex;
  j["eta_s"] = e.eta_s;
  j["eta_asv"] = optional_number(e.eta_asv);
  j["eta_ast"] = optional_number(e.eta_ast);
  j["collection_probability"] = optional_number(e.collection_probability);
  j["out_of_range"] = e.out_of_range;
  return j;
}

std::string predictions_csv(const std::vector<noise::ScenarioPrediction>& rows,
                            const std::string& hash) {
  std::string s = fmt::format("# config_hash={}\n", hash);
  s += "scenario,zeta,g2_noise,g2_ss_given_ast,g2_ast_ast_given_s\n";
  for (const auto& p : rows) {
    s += fmt::format("{},{:.12g},{:.12g},{:.12g},{:.12g}\n", p.label, p.zeta, p.g2_noise,
                     p.g2_ss_given_ast, p.g2_ast_ast_given_s);
  }
  return s;
}

std::vector<noise::ScenarioPrediction> predict_all(const CorrelationSet& set,
                                                   const RunConfig& cfg) {
  const noise::NoiseMix base = noise_mix_from(set);
  const auto scenarios = cfg.scenarios.empty() ? noise::default_scenarios() : cfg.scenarios;
  std::vector<noise::ScenarioPrediction> rows;
  for (const auto& sc : scenarios) rows.push_back(noise::predict_scenario(base, sc));
  return rows;
}

// Runs one simulated acquisition and returns its aggregate, going through
// time tags and window selection when requested.
struct Acquisition {
  CountAggregate aggregate;
  std::vector<TimeTagRecord> records;
};

Acquisition acquire(const mc::SourceParams& src, const RunConfig& cfg, const mc::RngPlan& plan,
                    bool with_tags) {
  mc::ExperimentOptions opts;
  opts.engine = cfg.engine;
  if (with_tags) opts.emission = cfg.emission();
  auto res = mc::run_experiment(src, cfg.trials, plan, opts);
  Acquisition a;
  if (with_tags) {
    const auto flags = window_select(res.records, cfg.windows);
    a.aggregate = accumulate(flags, cfg.trials);
    a.records = std::move(res.records);
  } else {
    a.aggregate = std::move(res.aggregate);
  }
  return a;
}

// ---- subcommands ---------------------------------------------------------

struct SimulateArgs {
  std::optional<std::string> config;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> emit_timetags;
  std::optional<std::string> qfc;
  std::optional<std::string> engine;
  std::optional<std::string> aggregate_out;
  std::optional<std::string> correlations_out;
};

void apply_overrides(RunConfig& cfg, const std::optional<std::uint64_t>& trials,
                     const std::optional<std::uint64_t>& seed) {
  if (trials) {
    if (*trials == 0) throw UsageError("--trials must be > 0");
    cfg.trials = *trials;
  }
  if (seed) cfg.rng.master_seed = *seed;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  RunConfig cfg = config_or_default(a.config);
  apply_overrides(cfg, a.trials, a.seed);
  if (a.qfc) cfg.source.qfc = *a.qfc == "on";
  if (a.engine) cfg.engine = *a.engine == "sparse" ? mc::Engine::sparse : mc::Engine::direct;
  const std::string hash = cfg.hash();

  mc::ExperimentOptions opts;
  opts.engine = cfg.engine;
  if (a.emit_timetags) opts.emission = cfg.emission();
  const auto res = mc::run_experiment(cfg.source, cfg.trials, cfg.rng, opts);
  if (a.emit_timetags) {
    try {
      write_timetag_file(*a.emit_timetags, res.records);
    } catch (const std::exception& e) {
      throw IoError(*a.emit_timetags, e.what());
    }
  }
  if (a.correlations_out) {
    write_file(*a.correlations_out, correlations_csv(compute_correlations(res.aggregate), hash));
  }
  emit(out, a.aggregate_out, aggregate_csv(res.aggregate, hash));
  return 0;
}

struct AnalyzeArgs {
  std::vector<std::string> inputs;
  std::optional<std::string> windows;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> histogram_out;
  std::optional<std::string> correlations_out;
  std::optional<std::string> aggregate_out;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const RunConfig cfg = config_or_default(a.windows);
  const std::string hash = cfg.hash();
  std::vector<TimeTagRecord> records;
  for (const auto& path : a.inputs) {
    if (!fs::exists(path)) throw IoError(path, "no such file");
    std::vector<TimeTagRecord> part;
    try {
      part = read_timetag_file(path);
    } catch (const std::exception& e) {
      throw DataError(path, e.what());
    }
    records.insert(records.end(), part.begin(), part.end());
  }
  const std::uint64_t trials = a.trials ? *a.trials : infer_trials(records);
  const auto flags = window_select(records, cfg.windows);
  const CountAggregate agg = accumulate(flags, trials);

  if (a.histogram_out) {
    std::ostringstream ss;
    histogram(records, cfg.windows).write_csv(ss, hash);
    write_file(*a.histogram_out, ss.str());
  }
  if (a.aggregate_out) write_file(*a.aggregate_out, aggregate_csv(agg, hash));
  emit(out, a.correlations_out, correlations_csv(compute_correlations(agg), hash));
  return 0;
}

struct EstimateArgs {
  std::string input;
  std::optional<std::string> config;
  std::optional<double> detector_qe;
  std::optional<double> filter_transmittance;
  std::optional<std::string> out;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  const RunConfig cfg = config_or_default(a.config);
  const CountAggregate agg =
      parse_file(a.input, [](std::istream& in) { return read_aggregate_csv(in); });
  auto e = estimation::estimate_from_counts(agg);
  if (a.detector_qe || a.filter_transmittance) {
    if (!a.detector_qe || !a.filter_transmittance) {
      throw UsageError("--detector-qe and --filter-transmittance go together");
    }
    if (!e.eta_asv) throw UsageError("collection probability needs the 780 nm channels");
    e.collection_probability =
        estimation::collection_probability(*e.eta_asv, *a.detector_qe, *a.filter_transmittance);
  }
  emit(out, a.out, dump(estimate_json(e, cfg.hash())));
  return 0;
}

struct PredictArgs {
  std::string correlations;
  std::optional<std::string> config;
  std::optional<std::string> out;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const RunConfig cfg = config_or_default(a.config);
  const CorrelationSet set =
      parse_file(a.correlations, [](std::istream& in) { return read_correlations_csv(in); });
  std::vector<noise::ScenarioPrediction> rows;
  try {
    rows = predict_all(set, cfg);
  } catch (const std::out_of_range& e) {
    throw DataError(a.correlations, fmt::format("missing statistic: {}", e.what()));
  }
  emit(out, a.out, predictions_csv(rows, cfg.hash()));
  return 0;
}

struct HomArgs {
  std::optional<double> g2;
  bool simulate = false;
  std::optional<std::string> config;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
};

int cmd_hom(const HomArgs& a, std::ostream& out) {
  RunConfig cfg = config_or_default(a.config);
  apply_overrides(cfg, a.trials, a.seed);
  json j;
  j["config_hash"] = cfg.hash();
  if (a.g2) {
    if (!(*a.g2 >= 0.0)) throw UsageError("--g2 must be >= 0");
    j["g2"] = *a.g2;
    j["visibility"] = hom::visibility_from_g2(*a.g2);
  } else {
    const auto r = hom::visibility_from_moments(hom::heralded_sampler(cfg.source), cfg.trials,
                                                cfg.rng);
    j["p0"] = r.p0;
    j["p0_err"] = r.p0_err;
    j["p_inf"] = r.p_inf;
    j["p_inf_err"] = r.p_inf_err;
    j["visibility"] = r.visibility;
    j["visibility_err"] = r.visibility_err;
    j["trials"] = r.trials;
  }
  out << dump(j);
  return 0;
}

json matrix_json(const atomic::TransitionMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m.entries(r, c));
    rows.push_back(std::move(row));
  }
  json j;
  j["row_basis"] = m.row_basis;
  j["col_basis"] = m.col_basis;
  j["entries"] = std::move(rows);
  return j;
}

int cmd_atomic(const std::string& format, const std::optional<std::string>& config,
               std::ostream& out) {
  const std::string hash = config_or_default(config).hash();
  const auto mats = atomic::build_matrices();
  const auto res = atomic::polarization_ratio_and_loss(mats);
  const std::array<const atomic::TransitionMatrix*, 5> all{
      &mats.excite_from_ga, &mats.decay_to_gb_plus, &mats.decay_to_gb_minus,
      &mats.excite_from_gb, &mats.decay_to_ga};
  if (format == "csv") {
    out << fmt::format("# config_hash={}\n", hash);
    out << "name,row_mF,col_mF,value\n";
    out << fmt::format("ratio,,,{:.12g}\nloss,,,{:.12g}\n", res.ratio, res.loss);
    out << fmt::format("h_weight,,,{:.12g}\nv_weight,,,{:.12g}\n", res.h_weight, res.v_weight);
    for (const auto* m : all) {
      for (Eigen::Index r = 0; r < m->rows(); ++r) {
        for (Eigen::Index c = 0; c < m->cols(); ++c) {
          out << fmt::format("{},{},{},{:.12g}\n", m->name, m->row_basis[r], m->col_basis[c],
                             m->entries(r, c));
        }
      }
    }
    return 0;
  }
  json j;
  j["config_hash"] = hash;
  j["ratio"] = res.ratio;
  j["loss"] = res.loss;
  j["h_weight"] = res.h_weight;
  j["v_weight"] = res.v_weight;
  json m = json::object();
  for (const auto* t : all) m[t->name] = matrix_json(*t);
  j["matrices"] = std::move(m);
  out << dump(j);
  return 0;
}

struct ReportArgs {
  std::optional<std::string> config;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  RunConfig cfg = config_or_default(a.config);
  apply_overrides(cfg, a.trials, a.seed);
  const fs::path dir = a.out_dir ? fs::path(*a.out_dir) : fs::path(cfg.output_dir);
  const std::string hash = cfg.hash();

  mc::SourceParams off = cfg.source;
  off.qfc = false;
  mc::SourceParams on = cfg.source;
  on.qfc = true;
  mc::RngPlan plan_on = cfg.rng;
  plan_on.master_seed = splitmix64(cfg.rng.master_seed);

  const auto run_off = acquire(off, cfg, cfg.rng, cfg.via_timetags);
  const auto run_on = acquire(on, cfg, plan_on, cfg.via_timetags);

  // The 780 nm run supplies every statistic it can; the converted run adds
  // the rest. The Stokes-only statistics are taken from the 780 nm run.
  CorrelationSet table = compute_correlations(run_off.aggregate);
  table.fill_missing_from(compute_correlations(run_on.aggregate));

  auto est = estimation::estimate_from_counts(run_off.aggregate);
  try {
    est.eta_ast = estimation::estimate_from_counts(run_on.aggregate).eta_ast;
  } catch (const std::exception&) {
    est.eta_ast.reset();
  }

  std::string prediction_status = "ok";
  std::string predictions;
  try {
    predictions = predictions_csv(predict_all(table, cfg), hash);
  } catch (const std::exception& e) {
    prediction_status = e.what();
    predictions = fmt::format("# config_hash={}\n# unavailable: {}\n", hash, e.what());
    predictions += "scenario,zeta,g2_noise,g2_ss_given_ast,g2_ast_ast_given_s\n";
  }

  const std::vector<std::pair<std::string, std::string>> files{
      {"correlations.csv", correlations_csv(table, hash)},
      {"aggregate_780.csv", aggregate_csv(run_off.aggregate, hash)},
      {"aggregate_1522.csv", aggregate_csv(run_on.aggregate, hash)},
      {"estimate.json", dump(estimate_json(est, hash))},
      {"predictions.csv", predictions},
  };
  for (const auto& [name, content] : files) write_file(dir / name, content);

  json prov;
  prov["config_hash"] = hash;
  prov["seed"] = cfg.rng.master_seed;
  prov["seed_converted_run"] = plan_on.master_seed;
  prov["trials_per_run"] = cfg.trials;
  prov["engine"] = cfg.engine == mc::Engine::direct ? "direct" : "sparse";
  prov["via_timetags"] = cfg.via_timetags;
  prov["predictions"] = prediction_status;
  json versions;
  versions["phlab"] = version();
  versions["fmt"] = FMT_VERSION;
  versions["eigen"] = fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                                  EIGEN_MINOR_VERSION);
  versions["nlohmann_json"] = fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR,
                                          NLOHMANN_JSON_VERSION_MINOR,
                                          NLOHMANN_JSON_VERSION_PATCH);
  versions["openssl"] = OPENSSL_VERSION_TEXT;
  prov["versions"] = std::move(versions);
  json outputs;
  for (const auto& [name, content] : files) outputs[name] = sha256_hex(content);
  prov["outputs_sha256"] = std::move(outputs);
  prov["config"] = cfg.canonical();
  const std::string prov_text = dump(prov);
  write_file(dir / "provenance.json", prov_text);

  out << correlations_csv(table, hash);
  return 0;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message,
                  const std::optional<std::string>& file = std::nullopt,
                  std::optional<std::size_t> line = std::nullopt) {
  json j;
  j["error"] = kind;
  j["message"] = message;
  if (file) j["file"] = *file;
  if (line) j["line"] = *line;
  err << j.dump() << "\n";
}

}  // namespace

noise::NoiseMix noise_mix_from(const CorrelationSet& set) {
  using S = Statistic;
  noise::ObservedCorrelations obs{set.value(S::s_asv), set.value(S::s_ast), set.value(S::asv_asv),
                                  set.value(S::ast_ast)};
  const auto sol = noise::solve_zeta_gnoise(obs);
  noise::NoiseMix m;
  m.zeta = sol.zeta;
  m.g2_noise = sol.g2_noise;
  m.g2_signal_auto = obs.g2_signal_auto;
  m.g2_signal_auto_heralded = set.value(S::asv_asv_given_s);
  m.g2_cross_in = obs.g2_cross_in;
  m.g2_ss = set.value(S::s_s);
  m.g2_ss_heralded_in = set.value(S::s_s_given_asv);
  return m;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Photon-pair source simulation and correlation analysis", "phlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo acquisition; writes a count aggregate");
  simulate->add_option("--config", sim.config, "Run configuration file")->check(CLI::ExistingFile);
  simulate->add_option("--trials", sim.trials, "Number of write slots");
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--emit-timetags", sim.emit_timetags,
                       "Write time tags (binary, or CSV for a .csv path)");
  simulate->add_option("--qfc", sim.qfc, "Route anti-Stokes photons through the converter")
      ->check(CLI::IsMember({"on", "off"}));
  simulate->add_option("--engine", sim.engine, "direct or sparse")
      ->check(CLI::IsMember({"direct", "sparse"}));
  simulate->add_option("--aggregate-out", sim.aggregate_out, "Aggregate CSV (default stdout)");
  simulate->add_option("--correlations-out", sim.correlations_out, "Correlation CSV");

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "Time tags to histograms and correlations");
  analyze->add_option("--input", ana.inputs, "Time-tag files of one acquisition")->required();
  analyze->add_option("--windows", ana.windows, "Configuration providing [windows]")
      ->check(CLI::ExistingFile);
  analyze->add_option("--trials", ana.trials, "Analysed slots (default: whole cycles spanned)");
  analyze->add_option("--histogram-out", ana.histogram_out, "Histogram CSV");
  analyze->add_option("--correlations-out", ana.correlations_out,
                      "Correlation CSV (default stdout)");
  analyze->add_option("--aggregate-out", ana.aggregate_out, "Aggregate CSV");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Efficiencies from a count aggregate");
  estimate->add_option("--input", est.input, "Aggregate CSV")->required();
  estimate->add_option("--config", est.config, "Configuration (for the provenance hash)")
      ->check(CLI::ExistingFile);
  estimate->add_option("--detector-qe", est.detector_qe, "780 nm detector efficiency");
  estimate->add_option("--filter-transmittance", est.filter_transmittance,
                       "780 nm filter transmittance");
  estimate->add_option("--out", est.out, "JSON output (default stdout)");

  PredictArgs pre;
  auto* predict = app.add_subcommand("predict", "Noise-model scenario predictions");
  predict->add_option("--correlations", pre.correlations, "Correlation CSV")->required();
  predict->add_option("--config", pre.config, "Configuration providing [scenarios]")
      ->check(CLI::ExistingFile);
  predict->add_option("--out", pre.out, "Prediction CSV (default stdout)");

  HomArgs ho;
  auto* hom_cmd = app.add_subcommand("hom", "Two-source interference visibility");
  auto* g2_opt = hom_cmd->add_option("--g2", ho.g2, "Heralded autocorrelation");
  auto* sim_flag = hom_cmd->add_flag("--simulate", ho.simulate, "Sample heralded photons");
  g2_opt->excludes(sim_flag);
  hom_cmd->add_option("--config", ho.config, "Source configuration")->check(CLI::ExistingFile);
  hom_cmd->add_option("--trials", ho.trials, "Heralded pairs to sample");
  hom_cmd->add_option("--seed", ho.seed, "Master seed");

  std::string atomic_format = "json";
  std::optional<std::string> atomic_config;
  auto* atomic_cmd = app.add_subcommand("atomic", "Sublevel transition matrices and loss");
  atomic_cmd->add_option("--format", atomic_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  atomic_cmd->add_option("--config", atomic_config, "Configuration (for the provenance hash)")
      ->check(CLI::ExistingFile);

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Simulate, analyze, estimate and predict");
  report->add_option("--config", rep.config, "Run configuration")->check(CLI::ExistingFile);
  report->add_option("--trials", rep.trials, "Slots per run");
  report->add_option("--seed", rep.seed, "Master seed");
  report->add_option("--out-dir", rep.out_dir, "Output directory (default [io] output_dir)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "UsageError", e.what());
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (analyze->parsed()) return cmd_analyze(ana, out);
    if (estimate->parsed()) return cmd_estimate(est, out);
    if (predict->parsed()) return cmd_predict(pre, out);
    if (hom_cmd->parsed()) {
      if (!ho.g2 && !ho.simulate) throw UsageError("hom needs --g2 or --simulate");
      return cmd_hom(ho, out);
    }
    if (atomic_cmd->parsed()) return cmd_atomic(atomic_format, atomic_config, out);
    if (report->parsed()) return cmd_report(rep, out);
  } catch (const UsageError& e) {
    report_error(err, "UsageError", e.what());
    return 2;
  } catch (const ConfigError& e) {
    report_error(err, "ConfigError", e.what(), e.file(),
                 e.line() ? std::optional<std::size_t>(e.line()) : std::nullopt);
    return 3;
  } catch (const IoError& e) {
    report_error(err, "IoError", e.what(), e.file());
    return 4;
  } catch (const DataError& e) {
    report_error(err, "DataError", e.what(), e.file());
    return 5;
  } catch (const std::exception& e) {
    report_error(err, "Error", e.what());
    return 1;
  }
  return 1;
}

}  // namespace phlab::cli
