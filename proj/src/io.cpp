#include "ftstop/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ftstop {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::string cell_error(std::size_t row, std::size_t col, const std::string& what) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col) + ": " + what;
}

}  // namespace

CsvLayout parse_layout(const std::string& flag) {
  if (flag == "rows=time" || flag == "rows") return CsvLayout::rows_time;
  if (flag == "cols=time" || flag == "cols") return CsvLayout::cols_time;
  throw InputError("unknown layout '" + flag + "' (expected rows=time or cols=time)");
}

IngestResult read_csv(std::istream& in, CsvLayout layout) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    rows.push_back(split(line, ','));
    line_numbers.push_back(line_no);
  }
  if (rows.size() < 2) {
    throw InputError("csv needs a grid row and at least one curve");
  }
  const std::size_t width = rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw InputError("row " + std::to_string(line_numbers[r]) + ": expected " +
                       std::to_string(width) + " cells, found " + std::to_string(rows[r].size()));
    }
  }

  IngestResult out;
  // rows=time files may carry a leading label column announced by a non-numeric header cell
  std::size_t first_col = 0;
  if (layout == CsvLayout::rows_time && !parse_number(rows[0][0]) && width > 2) {
    first_col = 1;
    out.label_column = true;
  }

  Matrix cells(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(width - first_col));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = first_col; c < width; ++c) {
      const auto v = parse_number(rows[r][c]);
      if (!v) {
        const std::string& raw = rows[r][c];
        throw InputError(cell_error(line_numbers[r], c + 1,
                                    raw.empty() ? "missing value"
                                                : "non-numeric cell '" + raw + "'"));
      }
      if (!std::isfinite(*v)) {
        throw InputError(cell_error(line_numbers[r], c + 1, "non-finite value"));
      }
      cells(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - first_col)) = *v;
    }
  }

  std::vector<long> labels;
  Vector grid_points;
  Matrix curves;
  if (layout == CsvLayout::rows_time) {
    grid_points = cells.row(0).transpose();
    curves = cells.bottomRows(cells.rows() - 1);
  } else {
    if (cells.cols() < 2) {
      throw InputError("cols=time layout needs a grid column and at least one curve column");
    }
    grid_points = cells.col(0);
    curves = cells.rightCols(cells.cols() - 1).transpose();
  }
  for (Eigen::Index i = 1; i < grid_points.size(); ++i) {
    if (!(grid_points(i) > grid_points(i - 1))) {
      const std::size_t where = layout == CsvLayout::rows_time
                                    ? line_numbers[0]
                                    : line_numbers[static_cast<std::size_t>(i)];
      throw InputError("row " + std::to_string(where) + ": grid is not strictly increasing at point " +
                       std::to_string(i + 1));
    }
  }
  try {
    out.fts = FunctionalTimeSeries(Grid(std::move(grid_points)), std::move(curves), labels);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return out;
}

IngestResult ingest_csv(const std::string& path, CsvLayout layout) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open '" + path + "'");
  }
  return read_csv(in, layout);
}

void write_csv(std::ostream& out, const FunctionalTimeSeries& fts) {
  out << std::setprecision(17);
  const Vector& g = fts.grid().points();
  for (Eigen::Index i = 0; i < g.size(); ++i) out << (i ? "," : "") << g(i);
  out << '\n';
  for (Eigen::Index t = 0; t < fts.size(); ++t) {
    for (Eigen::Index i = 0; i < g.size(); ++i) out << (i ? "," : "") << fts.values()(t, i);
    out << '\n';
  }
}

void write_isfe_csv(std::ostream& out, const StoppingTimeReport& report) {
  std::map<long, double> ssr;
  const auto& bp = report.breakpoint;
  for (std::size_t i = 0; i < bp.candidates.size(); ++i) ssr[bp.candidates[i]] = bp.ssr_profile[i];
  out << "holdout_index,isfe,ssr_candidate\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.isfe.errors.size(); ++i) {
    const long idx = report.isfe.holdout_index[i];
    out << idx << ',' << report.isfe.errors[i] << ',';
    if (auto it = ssr.find(idx); it != ssr.end()) out << it->second;
    out << '\n';
  }
}

void write_frequency_csv(std::ostream& out, const StoppingTimeDistribution& dist) {
  out << "stopping_time,count\n";
  for (const auto& [value, count] : dist.frequency) out << value << ',' << count << '\n';
}

void write_forecast_csv(std::ostream& out, const Grid& grid, const std::vector<Vector>& curves) {
  out << "u";
  for (std::size_t h = 0; h < curves.size(); ++h) out << ",h" << (h + 1);
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    out << grid.points()(i);
    for (const Vector& c : curves) out << ',' << c(i);
    out << '\n';
  }
}

DetectionReport make_report(const StoppingTimeReport& result, const FunctionalTimeSeries& fts) {
  DetectionReport r;
  r.n_curves = static_cast<long>(fts.size());
  r.grid_size = static_cast<long>(fts.grid_size());
  r.stopping_time = result.breakpoint.stopping_time;
  r.pre_mean = result.breakpoint.pre_mean;
  r.post_mean = result.breakpoint.post_mean;
  r.holdout_index = result.isfe.holdout_index;
  r.isfe = result.isfe.errors;
  r.components.assign(result.isfe.components.begin(), result.isfe.components.end());
  r.candidates = result.breakpoint.candidates;
  r.ssr_profile = result.breakpoint.ssr_profile;
  return r;
}

BootstrapSummary make_bootstrap_summary(const StoppingTimeDistribution& dist,
                                        const BootstrapConfig& config) {
  BootstrapSummary s;
  s.replications = config.replications;
  s.seed = config.seed;
  s.deep = config.deep;
  s.failures = dist.failures;
  s.mode = dist.mode;
  s.mode_ties = dist.mode_ties;
  s.frequency = dist.frequency;
  if (!dist.samples.empty()) {
    for (const auto& [name, prob] : std::initializer_list<std::pair<const char*, double>>{
             {"q05", 0.05}, {"q25", 0.25}, {"q50", 0.5}, {"q75", 0.75}, {"q95", 0.95}}) {
      s.quantiles[name] = sample_quantile(dist.samples, prob);
    }
  }
  return s;
}

nlohmann::json to_json(const DetectionReport& r) {
  nlohmann::json j;
  j["schema"] = r.schema;
  j["command"] = r.command;
  j["config"] = r.config;
  j["n_curves"] = r.n_curves;
  j["grid_size"] = r.grid_size;
  j["stopping_time"] = r.stopping_time;
  j["regime_means"] = {r.pre_mean, r.post_mean};
  j["isfe"] = {{"holdout_index", r.holdout_index}, {"errors", r.isfe}, {"components", r.components}};
  j["ssr_profile"] = {{"candidates", r.candidates}, {"ssr", r.ssr_profile}};
  if (r.bootstrap) {
    const BootstrapSummary& b = *r.bootstrap;
    nlohmann::json freq = nlohmann::json::array();
    for (const auto& [value, count] : b.frequency) freq.push_back({value, count});
    j["bootstrap"] = {{"replications", b.replications}, {"seed", b.seed},
                      {"deep", b.deep},                 {"failures", b.failures},
                      {"mode", b.mode},                 {"mode_ties", b.mode_ties},
                      {"frequency", freq},              {"quantiles", b.quantiles}};
  }
  j["label_column_ignored"] = r.label_column_ignored;
  j["runtime_seconds"] = r.runtime_seconds;
  return j;
}

DetectionReport report_from_json(const nlohmann::json& j) {
  DetectionReport r;
  r.schema = j.at("schema").get<std::string>();
  if (r.schema != kReportSchema) {
    throw InputError("unsupported report schema '" + r.schema + "'");
  }
  r.command = j.at("command").get<std::string>();
  r.config = j.at("config");
  r.n_curves = j.at("n_curves").get<long>();
  r.grid_size = j.at("grid_size").get<long>();
  r.stopping_time = j.at("stopping_time").get<long>();
  r.pre_mean = j.at("regime_means").at(0).get<double>();
  r.post_mean = j.at("regime_means").at(1).get<double>();
  r.holdout_index = j.at("isfe").at("holdout_index").get<std::vector<long>>();
  r.isfe = j.at("isfe").at("errors").get<std::vector<double>>();
  r.components = j.at("isfe").at("components").get<std::vector<long>>();
  r.candidates = j.at("ssr_profile").at("candidates").get<std::vector<long>>();
  r.ssr_profile = j.at("ssr_profile").at("ssr").get<std::vector<double>>();
  if (j.contains("bootstrap")) {
    const auto& jb = j.at("bootstrap");
    BootstrapSummary b;
    b.replications = jb.at("replications").get<int>();
    b.seed = jb.at("seed").get<std::uint64_t>();
    b.deep = jb.at("deep").get<bool>();
    b.failures = jb.at("failures").get<int>();
    b.mode = jb.at("mode").get<long>();
    b.mode_ties = jb.at("mode_ties").get<std::vector<long>>();
    for (const auto& pair : jb.at("frequency")) b.frequency[pair.at(0).get<long>()] = pair.at(1).get<long>();
    b.quantiles = jb.at("quantiles").get<std::map<std::string, double>>();
    r.bootstrap = std::move(b);
  }
  r.label_column_ignored = j.at("label_column_ignored").get<bool>();
  r.runtime_seconds = j.at("runtime_seconds").get<double>();
  return r;
}

namespace {

std::vector<std::string> list_values(std::string value) {
  value = trim(value);
  if (!value.empty() && value.front() == '[') value.erase(0, 1);
  if (!value.empty() && value.back() == ']') value.pop_back();
  std::vector<std::string> out;
  for (std::string& item : split(value, ',')) {
    std::string t = trim(item);
    if (t.size() >= 2 && t.front() == '\'' && t.back() == '\'') t = t.substr(1, t.size() - 2);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

double to_double(const std::string& key, const std::string& s, std::size_t line) {
  const auto v = parse_number(s);
  if (!v) throw InputError("config line " + std::to_string(line) + ": bad number '" + s + "' for " + key);
  return *v;
}

long to_long(const std::string& key, const std::string& s, std::size_t line) {
  const double v = to_double(key, s, line);
  if (v != std::floor(v)) {
    throw InputError("config line " + std::to_string(line) + ": " + key + " must be an integer");
  }
  return static_cast<long>(v);
}

}  // namespace

ExperimentGrid parse_experiment_config(std::istream& in) {
  ExperimentGrid grid;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::vector<std::string> values = list_values(line.substr(eq + 1));
    if (values.empty()) {
      throw InputError("config line " + std::to_string(line_no) + ": empty value for " + key);
    }
    if (key == "dgp") {
      grid.dgp = static_cast<int>(to_long(key, values.front(), line_no));
    } else if (key == "n") {
      grid.n.clear();
      for (const auto& v : values) grid.n.push_back(to_long(key, v, line_no));
    } else if (key == "omega") {
      grid.omega.clear();
      for (const auto& v : values) grid.omega.push_back(to_double(key, v, line_no));
    } else if (key == "snr") {
      grid.snr.clear();
      for (const auto& v : values) grid.snr.push_back(to_double(key, v, line_no));
    } else if (key == "alpha") {
      grid.alpha.clear();
      for (const auto& v : values) grid.alpha.push_back(to_double(key, v, line_no));
    } else if (key == "structure" || key == "A") {
      grid.structure.clear();
      try {
        for (const auto& v : values) grid.structure.push_back(parse_var_structure(v));
      } catch (const std::invalid_argument& e) {
        throw InputError("config line " + std::to_string(line_no) + ": " + e.what());
      }
    } else if (key == "trace") {
      try {
        grid.trace = parse_trace_convention(values.front());
      } catch (const std::invalid_argument& e) {
        throw InputError("config line " + std::to_string(line_no) + ": " + e.what());
      }
    } else if (key == "replications" || key == "reps") {
      grid.replications = static_cast<int>(to_long(key, values.front(), line_no));
    } else if (key == "seed") {
      grid.seed = static_cast<std::uint64_t>(to_long(key, values.front(), line_no));
    } else if (key == "break_direction" || key == "k") {
      grid.break_direction = static_cast<int>(to_long(key, values.front(), line_no));
    } else {
      throw InputError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (grid.dgp < 1 || grid.dgp > 3) {
    throw InputError("config: dgp must be 1, 2 or 3");
  }
  return grid;
}

ExperimentGrid load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open '" + path + "'");
  }
  return parse_experiment_config(in);
}

void write_summary_csv(std::ostream& out, const std::vector<McSummary>& rows) {
  out << "dgp,structure,n,omega,snr,alpha,replications,failures,mean_true_tau,median_true_tau,"
         "mean_tau_hat,median_tau_hat,count_tau_hat_ge_tau\n";
  out << std::setprecision(10);
  for (const McSummary& s : rows) {
    out << s.dgp << ',' << (s.dgp == 1 ? "" : to_string(s.structure)) << ',' << s.n << ','
        << s.omega << ',' << s.snr << ',' << s.alpha << ',' << s.replications << ','
        << s.failures << ',' << s.mean_true_tau << ',' << s.median_true_tau << ','
        << s.mean_tau_hat << ',' << s.median_tau_hat << ',' << s.count_at_or_after << '\n';
  }
}

void write_summary_table(std::ostream& out, const std::vector<McSummary>& rows) {
  const auto flags = out.flags();
  out << std::fixed;
  if (!rows.empty() && rows.front().dgp == 1) {
    out << std::setw(6) << "n" << std::setw(8) << "tau" << std::setw(8) << "omega"
        << std::setw(12) << "mean_hat" << std::setw(12) << "median_hat" << std::setw(10)
        << "#(>=tau)" << std::setw(8) << "fail" << '\n';
    for (const McSummary& s : rows) {
      out << std::setw(6) << s.n << std::setw(8) << std::setprecision(1) << s.median_true_tau
          << std::setw(8) << std::setprecision(2) << s.omega << std::setw(12)
          << std::setprecision(3) << s.mean_tau_hat << std::setw(12) << std::setprecision(1)
          << s.median_tau_hat << std::setw(10) << s.count_at_or_after << std::setw(8)
          << s.failures << '\n';
    }
  } else {
    out << std::setw(6) << "A" << std::setw(8) << "snr" << std::setw(8) << "alpha"
        << std::setw(6) << "n" << std::setw(11) << "mean_tau" << std::setw(11) << "med_tau"
        << std::setw(11) << "mean_hat" << std::setw(11) << "med_hat" << std::setw(10)
        << "#(>=tau)" << std::setw(6) << "fail" << '\n';
    for (const McSummary& s : rows) {
      out << std::setw(6) << to_string(s.structure) << std::setw(8) << std::setprecision(3)
          << s.snr << std::setw(8) << std::setprecision(2) << (s.dgp == 3 ? s.alpha : 0.0)
          << std::setw(6) << s.n << std::setw(11) << std::setprecision(2) << s.mean_true_tau
          << std::setw(11) << std::setprecision(1) << s.median_true_tau << std::setw(11)
          << std::setprecision(2) << s.mean_tau_hat << std::setw(11) << std::setprecision(1)
          << s.median_tau_hat << std::setw(10) << s.count_at_or_after << std::setw(6)
          << s.failures << '\n';
    }
  }
  out.flags(flags);
}

}  // namespace ftstop
