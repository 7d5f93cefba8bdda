#pragma once

#include "ftstop/detector.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ftstop {

/// Pointwise FAR(1) whose coefficient jumps from rho to rho + c_post after curve ceil(n/2);
/// the observed curves are the relative absolute increments of that process.
struct Dgp1Config {
  Eigen::Index n = 101;
  double omega = 0.1;
  double rho = 0.2;
  double c_post = 0.7;
  Eigen::Index grid_points = 101;
  std::uint64_t seed = 1;
};

enum class VarStructure { diagonal, banded };

/// How tr(C_eps) enters the SNR calibration: the operator trace by quadrature, or the plain
/// sum of the diagonal of the discretised surface (roughly p times larger on [0, 1]).
enum class TraceConvention { quadrature, grid_sum };

TraceConvention parse_trace_convention(const std::string& name);
std::string to_string(TraceConvention t);

VarStructure parse_var_structure(const std::string& name);
std::string to_string(VarStructure s);

/// VAR(1) scores on resampled Fourier functions plus a mean break of given SNR.
/// With `alpha` set the break grows like sqrt(t) n^alpha / sqrt(n) (gradual change).
struct Dgp2Config {
  Eigen::Index n = 100;
  VarStructure structure = VarStructure::banded;
  double snr = 0.1;
  int break_direction = 1;
  int basis_size = 21;
  double correlation = 0.5;
  double noise_sd = 0.1;
  Eigen::Index grid_points = 101;
  int burn_in = 50;
  std::optional<double> alpha;
  TraceConvention trace = TraceConvention::quadrature;
  std::uint64_t seed = 1;
};

struct SimulatedSeries {
  FunctionalTimeSeries fts;
  long true_tau = 0;
  double c_magnitude = 0.0;
  /// Injected break function delta(u) (DGP2/3 only).
  Vector break_function;
  /// Explosive VAR draws rejected before acceptance.
  int redraws = 0;
  /// DGP1 only: the underlying process X_1..X_n (rows) before the increment transform.
  Matrix latent;
};

/// Standard Brownian motion sampled on `grid` (B(u_0) = 0).
Vector brownian_motion(const Grid& grid, std::mt19937_64& rng);

/// Element `index` of {1, sqrt2 sin(2 pi w u), sqrt2 cos(2 pi w u)}, w = 1, 2, ...
Vector fourier_function(const Grid& grid, int index);

SimulatedSeries gen_dgp1(const Dgp1Config& config);

/// Break constant c for a target signal-to-noise ratio.
double snr_to_c(double snr, double p_frac, double trace_lrc);
double c_to_snr(double c, double p_frac, double trace_lrc);

SimulatedSeries gen_dgp2(const Dgp2Config& config);

/// Gradual-change variant; requires config.alpha in (0, 1/2).
SimulatedSeries gen_dgp3(const Dgp2Config& config);

struct ExperimentGrid {
  int dgp = 1;
  std::vector<Eigen::Index> n{101};
  std::vector<double> omega{0.1};
  std::vector<double> snr{0.1};
  std::vector<double> alpha{0.45};
  std::vector<VarStructure> structure{VarStructure::banded};
  int break_direction = 1;
  TraceConvention trace = TraceConvention::quadrature;
  int replications = 100;
  std::uint64_t seed = 1;
};

struct McSummary {
  int dgp = 1;
  Eigen::Index n = 0;
  double omega = 0.0;
  double snr = 0.0;
  double alpha = 0.0;
  VarStructure structure = VarStructure::banded;

  int replications = 0;
  int failures = 0;
  double mean_true_tau = 0.0;
  double median_true_tau = 0.0;
  double mean_tau_hat = 0.0;
  double median_tau_hat = 0.0;
  /// #(estimated >= true)
  int count_at_or_after = 0;
  std::vector<long> tau_hat;
  std::vector<long> true_tau;
};

/// Seed for replication `rep` of configuration `config_index`.
std::uint64_t replication_seed(std::uint64_t master, std::size_t config_index, std::size_t rep);

/// Generates and analyses `replications` series per configuration of the grid.
/// Replications run on `threads` workers; results do not depend on scheduling.
std::vector<McSummary> run_monte_carlo(const ExperimentGrid& grid,
                                       const DetectorOptions& detector = {},
                                       unsigned threads = 1);

double median(std::vector<double> values);

}  // namespace ftstop
