#pragma once

#include "ftstop/bootstrap.hpp"
#include "ftstop/simulate.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ftstop {

/// Input/parse problems (CLI exit code 1), as opposed to numerical failures.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CsvLayout {
  rows_time,  // first row = grid, following rows = curves in time order
  cols_time,  // first column = grid, following columns = curves
};

CsvLayout parse_layout(const std::string& flag);

struct IngestResult {
  FunctionalTimeSeries fts;
  /// A non-numeric leading label/timestamp column was found and not used for spacing.
  bool label_column = false;
};

IngestResult read_csv(std::istream& in, CsvLayout layout);
IngestResult ingest_csv(const std::string& path, CsvLayout layout);

void write_csv(std::ostream& out, const FunctionalTimeSeries& fts);

/// holdout_index,isfe,ssr_candidate
void write_isfe_csv(std::ostream& out, const StoppingTimeReport& report);

/// stopping_time,count
void write_frequency_csv(std::ostream& out, const StoppingTimeDistribution& dist);

/// u,h1,...,hH
void write_forecast_csv(std::ostream& out, const Grid& grid, const std::vector<Vector>& curves);

inline constexpr const char* kReportSchema = "ftstop.report/1";

struct BootstrapSummary {
  int replications = 0;
  std::uint64_t seed = 0;
  bool deep = false;
  int failures = 0;
  long mode = 0;
  std::vector<long> mode_ties;
  std::map<long, long> frequency;
  std::map<std::string, double> quantiles;

  bool operator==(const BootstrapSummary&) const = default;
};

struct DetectionReport {
  std::string schema = kReportSchema;
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  long n_curves = 0;
  long grid_size = 0;
  long stopping_time = 0;
  double pre_mean = 0.0;
  double post_mean = 0.0;
  std::vector<long> holdout_index;
  std::vector<double> isfe;
  std::vector<long> components;
  std::vector<long> candidates;
  std::vector<double> ssr_profile;
  std::optional<BootstrapSummary> bootstrap;
  bool label_column_ignored = false;
  double runtime_seconds = 0.0;

  bool operator==(const DetectionReport&) const = default;
};

DetectionReport make_report(const StoppingTimeReport& result, const FunctionalTimeSeries& fts);
BootstrapSummary make_bootstrap_summary(const StoppingTimeDistribution& dist,
                                        const BootstrapConfig& config);

nlohmann::json to_json(const DetectionReport& report);
DetectionReport report_from_json(const nlohmann::json& j);

/// Plain `key = value` experiment description; lists as `[a, b]` or `a, b`.
ExperimentGrid parse_experiment_config(std::istream& in);
ExperimentGrid load_experiment_config(const std::string& path);

void write_summary_csv(std::ostream& out, const std::vector<McSummary>& rows);
void write_summary_table(std::ostream& out, const std::vector<McSummary>& rows);

}  // namespace ftstop
