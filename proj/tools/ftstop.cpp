// ftstop: optimal stopping time of a monitored process from a functional time series.

#include "ftstop/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace ftstop;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

struct ModelFlags {
  std::string input;
  std::string layout = "rows=time";
  std::string kernel = "bartlett";
  std::optional<double> bandwidth;
  std::optional<long> components;
  std::string order;
  std::string window;
  std::string kpss = "level";
  unsigned threads = 1;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--input,-i", f.input, "CSV file of curves")->required();
  cmd->add_option("--layout", f.layout, "rows=time (grid in first row) or cols=time");
  cmd->add_option("--kernel", f.kernel, "long-run covariance kernel: bartlett | flat_top");
  cmd->add_option("--bandwidth", f.bandwidth, "fixed kernel bandwidth (plug-in if omitted)");
  cmd->add_option("--components", f.components, "fixed number of components");
  cmd->add_option("--order", f.order, "fixed score model order p,d,q (auto-ARIMA if omitted)");
  cmd->add_option("--window", f.window, "fixed:<w> for a rolling window of w curves");
  cmd->add_option("--kpss", f.kpss, "KPSS null used to pick d: level | trend");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

ArimaOrder parse_order(const std::string& text) {
  ArimaOrder o;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> o.p >> c1 >> o.d >> c2 >> o.q) || c1 != ',' || c2 != ',' || !in.eof() ||
      o.p < 0 || o.d < 0 || o.q < 0 || o.p > 5 || o.q > 5 || o.d > 2) {
    throw InputError("--order expects p,d,q with p,q in 0..5 and d in 0..2, got '" + text + "'");
  }
  return o;
}

DetectorOptions detector_options(const ModelFlags& f) {
  DetectorOptions opts;
  try {
    opts.model.kernel = parse_kernel_type(f.kernel);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (f.bandwidth) {
    if (!(*f.bandwidth > 0.0)) throw InputError("--bandwidth must be positive");
    opts.model.bandwidth = *f.bandwidth;
  }
  if (f.components) {
    if (*f.components < 1) throw InputError("--components must be >= 1");
    opts.model.components = *f.components;
  }
  if (!f.order.empty()) opts.model.scores.order = parse_order(f.order);
  if (f.kpss == "level") {
    opts.model.scores.search.kpss = KpssType::level;
  } else if (f.kpss == "trend") {
    opts.model.scores.search.kpss = KpssType::trend;
  } else {
    throw InputError("--kpss expects level or trend");
  }
  if (!f.window.empty() && f.window != "expanding") {
    const std::string prefix = "fixed:";
    long w = 0;
    if (f.window.rfind(prefix, 0) != 0) throw InputError("--window expects fixed:<w> or expanding");
    try {
      std::size_t used = 0;
      w = std::stol(f.window.substr(prefix.size()), &used);
      if (used != f.window.size() - prefix.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InputError("--window expects fixed:<w>, got '" + f.window + "'");
    }
    if (w < kFirstWindow) throw InputError("--window size must be at least 3");
    opts.fixed_window = w;
  }
  opts.threads = f.threads;
  return opts;
}

nlohmann::json config_echo(const ModelFlags& f, const DetectorOptions& o) {
  nlohmann::json j;
  j["input"] = f.input;
  j["layout"] = f.layout;
  j["kernel"] = to_string(o.model.kernel);
  j["bandwidth"] = o.model.bandwidth ? nlohmann::json(*o.model.bandwidth) : nlohmann::json("plugin");
  j["components"] =
      o.model.components ? nlohmann::json(*o.model.components) : nlohmann::json("eigenvalue-ratio");
  j["order"] = o.model.scores.order ? to_string(*o.model.scores.order) : "auto";
  j["window"] = o.fixed_window ? "fixed:" + std::to_string(*o.fixed_window) : "expanding";
  j["kpss"] = f.kpss;
  j["min_segment"] = o.min_segment;
  return j;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

void emit_report(const DetectionReport& report, const std::string& path) {
  const std::string text = to_json(report).dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    open_output(path) << text;
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ftstop - optimal stopping time from a functional time series"};
  app.require_subcommand(1);

  ModelFlags detect_flags;
  std::string detect_report, detect_isfe;
  auto* detect = app.add_subcommand("detect", "expanding-window ISFE and SSR breakpoint");
  add_model_flags(detect, detect_flags);
  detect->add_option("--report,-o", detect_report, "report JSON (stdout if omitted)");
  detect->add_option("--isfe-csv", detect_isfe, "holdout_index,isfe,ssr_candidate table");

  ModelFlags boot_flags;
  std::string boot_report, boot_isfe, boot_freq;
  BootstrapConfig boot_cfg;
  auto* boot = app.add_subcommand("bootstrap", "stopping-time distribution by bootstrap");
  add_model_flags(boot, boot_flags);
  boot->add_option("--B,-B", boot_cfg.replications, "bootstrap replications")
      ->check(CLI::PositiveNumber);
  boot->add_option("--seed", boot_cfg.seed, "master seed");
  boot->add_flag("--deep-bootstrap", boot_cfg.deep, "refit the model inside each replication");
  boot->add_option("--report,-o", boot_report, "report JSON (stdout if omitted)");
  boot->add_option("--isfe-csv", boot_isfe, "holdout_index,isfe,ssr_candidate table");
  boot->add_option("--frequency-csv", boot_freq, "stopping_time,count table");

  std::string sim_config, sim_csv, sim_table;
  std::optional<int> sim_reps;
  std::optional<std::uint64_t> sim_seed;
  unsigned sim_threads = 1;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo study over a configuration grid");
  sim->add_option("--config,-c", sim_config, "key = value experiment file")->required();
  sim->add_option("--reps", sim_reps, "replications per configuration (overrides file)");
  sim->add_option("--seed", sim_seed, "master seed (overrides file)");
  sim->add_option("--threads", sim_threads, "worker threads (0 = all cores)");
  sim->add_option("--csv", sim_csv, "summary CSV path");
  sim->add_option("--table", sim_table, "aligned text table path (stdout if omitted)");

  ModelFlags fc_flags;
  int fc_h = 1;
  std::string fc_out;
  auto* fc = app.add_subcommand("forecast", "h-step curve forecast from the whole series");
  add_model_flags(fc, fc_flags);
  fc->add_option("--horizon", fc_h, "forecast horizon")->check(CLI::PositiveNumber);
  fc->add_option("--output,-o", fc_out, "forecast CSV (stdout if omitted)");

  int gen_dgp = 1;
  Dgp1Config gen1;
  Dgp2Config gen2;
  std::string gen_structure = "band", gen_out;
  std::optional<double> gen_alpha;
  auto* gen = app.add_subcommand("generate", "write one simulated series as CSV");
  gen->add_option("--dgp", gen_dgp, "1, 2 or 3")->check(CLI::Range(1, 3));
  gen->add_option("--n", gen1.n, "number of curves");
  gen->add_option("--omega", gen1.omega, "DGP1 noise scale");
  gen->add_option("--snr", gen2.snr, "DGP2/3 signal-to-noise ratio");
  gen->add_option("--structure", gen_structure, "DGP2/3 VAR structure: diag | band");
  gen->add_option("--alpha", gen_alpha, "DGP3 gradual-change exponent");
  gen->add_option("--seed", gen1.seed, "seed");
  gen->add_option("--output,-o", gen_out, "CSV path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitInput;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    if (detect->parsed() || boot->parsed() || fc->parsed()) {
      const ModelFlags& f = detect->parsed() ? detect_flags : boot->parsed() ? boot_flags : fc_flags;
      const DetectorOptions opts = detector_options(f);
      const IngestResult data = ingest_csv(f.input, parse_layout(f.layout));

      if (fc->parsed()) {
        const FtsModel model = fit_fts(data.fts, opts.model);
        std::vector<Vector> curves;
        for (int h = 1; h <= fc_h; ++h) curves.push_back(forecast_curve(model, h));
        if (fc_out.empty() || fc_out == "-") {
          write_forecast_csv(std::cout, data.fts.grid(), curves);
        } else {
          auto out = open_output(fc_out);
          write_forecast_csv(out, data.fts.grid(), curves);
        }
        return kExitOk;
      }

      if (data.fts.size() < 5) throw InputError("need at least 5 curves, found " +
                                                std::to_string(data.fts.size()));
      nlohmann::json echo = config_echo(f, opts);
      StoppingTimeReport result;
      std::optional<BootstrapSummary> summary;
      std::optional<StoppingTimeDistribution> dist;
      if (boot->parsed()) {
        boot_cfg.threads = f.threads;
        const BootstrapResult br = bootstrap_stopping_distribution(data.fts, boot_cfg, opts);
        result = br.plan.point;
        dist = br.distribution;
        summary = make_bootstrap_summary(br.distribution, boot_cfg);
        echo["B"] = boot_cfg.replications;
        echo["seed"] = boot_cfg.seed;
        echo["deep_bootstrap"] = boot_cfg.deep;
      } else {
        result = stopping_time(data.fts, opts);
      }

      DetectionReport report = make_report(result, data.fts);
      report.command = detect->parsed() ? "detect" : "bootstrap";
      report.config = echo;
      report.bootstrap = summary;
      report.label_column_ignored = data.label_column;
      if (data.label_column) {
        std::cerr << "note: leading label column ignored; curves treated as equally spaced\n";
      }
      const std::string& isfe_path = detect->parsed() ? detect_isfe : boot_isfe;
      if (!isfe_path.empty()) {
        auto out = open_output(isfe_path);
        write_isfe_csv(out, result);
      }
      if (dist && !boot_freq.empty()) {
        auto out = open_output(boot_freq);
        write_frequency_csv(out, *dist);
      }
      report.runtime_seconds = seconds_since(start);
      emit_report(report, detect->parsed() ? detect_report : boot_report);
      return kExitOk;
    }

    if (sim->parsed()) {
      ExperimentGrid grid = load_experiment_config(sim_config);
      if (sim_reps) grid.replications = *sim_reps;
      if (sim_seed) grid.seed = *sim_seed;
      if (grid.replications < 1) throw InputError("replications must be >= 1");
      const std::vector<McSummary> rows = run_monte_carlo(grid, {}, sim_threads);
      if (!sim_csv.empty()) {
        auto out = open_output(sim_csv);
        write_summary_csv(out, rows);
      }
      if (sim_table.empty() || sim_table == "-") {
        write_summary_table(std::cout, rows);
      } else {
        auto out = open_output(sim_table);
        write_summary_table(out, rows);
      }
      return kExitOk;
    }

    if (gen->parsed()) {
      SimulatedSeries s;
      if (gen_dgp == 1) {
        s = gen_dgp1(gen1);
      } else {
        gen2.n = gen1.n;
        gen2.seed = gen1.seed;
        try {
          gen2.structure = parse_var_structure(gen_structure);
        } catch (const std::invalid_argument& e) {
          throw InputError(e.what());
        }
        if (gen_dgp == 3) {
          gen2.alpha = gen_alpha.value_or(0.45);
          s = gen_dgp3(gen2);
        } else {
          s = gen_dgp2(gen2);
        }
      }
      std::cerr << "true_tau=" << s.true_tau << "\n";
      if (gen_out.empty() || gen_out == "-") {
        write_csv(std::cout, s.fts);
      } else {
        auto out = open_output(gen_out);
        write_csv(out, s.fts);
      }
      return kExitOk;
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
