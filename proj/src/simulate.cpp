#include "ftstop/simulate.hpp"

#include "ftstop/bootstrap.hpp"
#include "ftstop/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ftstop {

VarStructure parse_var_structure(const std::string& name) {
  if (name == "diag" || name == "diagonal") return VarStructure::diagonal;
  if (name == "band" || name == "banded") return VarStructure::banded;
  throw std::invalid_argument("unknown VAR structure '" + name + "'");
}

std::string to_string(VarStructure s) { return s == VarStructure::diagonal ? "diag" : "band"; }

TraceConvention parse_trace_convention(const std::string& name) {
  if (name == "quadrature") return TraceConvention::quadrature;
  if (name == "grid_sum") return TraceConvention::grid_sum;
  throw std::invalid_argument("unknown trace convention '" + name + "'");
}

std::string to_string(TraceConvention t) {
  return t == TraceConvention::quadrature ? "quadrature" : "grid_sum";
}

Vector brownian_motion(const Grid& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vector& u = grid.points();
  Vector b(u.size());
  b(0) = 0.0;
  for (Eigen::Index i = 1; i < u.size(); ++i) {
    b(i) = b(i - 1) + std::sqrt(u(i) - u(i - 1)) * normal(rng);
  }
  return b;
}

Vector fourier_function(const Grid& grid, int index) {
  const Vector& u = grid.points();
  if (index == 0) return Vector::Ones(u.size());
  const int w = (index + 1) / 2;
  const double freq = 2.0 * std::numbers::pi * w;
  Vector out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    out(i) = std::numbers::sqrt2 * (index % 2 == 1 ? std::sin(freq * u(i)) : std::cos(freq * u(i)));
  }
  return out;
}

SimulatedSeries gen_dgp1(const Dgp1Config& config) {
  if (config.n < 2) {
    throw std::invalid_argument("dgp1 needs n >= 2");
  }
  if (!(std::abs(config.rho) < 1.0) || !(std::abs(config.rho + config.c_post) < 1.0)) {
    throw std::invalid_argument("dgp1 is not stationary: need |rho| < 1 and |rho + c| < 1");
  }
  if (config.omega < 0.0) {
    throw std::invalid_argument("dgp1 omega must be non-negative");
  }
  std::mt19937_64 rng = substream(config.seed, 0);
  const Grid grid = Grid::uniform(0.0, 1.0, config.grid_points);
  const Vector& u = grid.points();
  const long tau = static_cast<long>((config.n + 1) / 2);

  // X_0 .. X_n; Y_t uses X_{t-1} and X_t
  Vector prev = (10.0 * u.array() * (1.0 - u.array())).matrix() +
                config.omega * brownian_motion(grid, rng);
  Matrix y(config.n, grid.size());
  Matrix latent(config.n, grid.size());
  for (Eigen::Index t = 1; t <= config.n; ++t) {
    const double coef = config.rho + (t <= tau ? 0.0 : config.c_post);
    const Vector cur = coef * prev + config.omega * brownian_motion(grid, rng);
    y.row(t - 1) = ((prev - cur).array().abs() / (prev.array() + 0.1).abs()).matrix().transpose();
    latent.row(t - 1) = cur.transpose();
    prev = cur;
  }
  SimulatedSeries out{FunctionalTimeSeries(grid, std::move(y)), tau, config.c_post, {}, 0,
                      std::move(latent)};
  return out;
}

double snr_to_c(double snr, double p_frac, double trace_lrc) {
  if (!(p_frac > 0.0 && p_frac < 1.0)) {
    throw std::invalid_argument("snr_to_c: break fraction must lie in (0, 1)");
  }
  if (!(snr > 0.0) || !(trace_lrc > 0.0)) {
    throw std::invalid_argument("snr_to_c: snr and trace must be positive");
  }
  return snr * trace_lrc / (p_frac * (1.0 - p_frac));
}

double c_to_snr(double c, double p_frac, double trace_lrc) {
  if (!(p_frac > 0.0 && p_frac < 1.0)) {
    throw std::invalid_argument("c_to_snr: break fraction must lie in (0, 1)");
  }
  return c * p_frac * (1.0 - p_frac) / trace_lrc;
}

namespace {

double spectral_radius(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SimulatedSeries generate_var_series(const Dgp2Config& config, bool gradual) {
  if (config.n < 4) {
    throw std::invalid_argument("dgp2 needs n >= 4");
  }
  if (config.basis_size < 1 || config.break_direction < 1 ||
      config.break_direction > config.basis_size) {
    throw std::invalid_argument("dgp2 needs 1 <= break_direction <= basis_size");
  }
  if (config.snr < 0.0) {
    throw std::invalid_argument("dgp2 snr must be non-negative");
  }
  double alpha = 0.0;
  if (gradual) {
    if (!config.alpha || !(*config.alpha > 0.0 && *config.alpha < 0.5)) {
      throw std::invalid_argument("gradual change needs alpha in (0, 1/2)");
    }
    alpha = *config.alpha;
  }

  std::mt19937_64 rng = substream(config.seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Grid grid = Grid::uniform(0.0, 1.0, config.grid_points);
  const Eigen::Index n = config.n;
  const int k = config.basis_size;
  const double dn = static_cast<double>(n);

  std::uniform_real_distribution<double> location(0.25 * dn, 0.75 * dn);
  const long lo = static_cast<long>(std::ceil(0.25 * dn));
  const long hi = static_cast<long>(std::floor(0.75 * dn));
  const long tau = std::clamp(static_cast<long>(std::lround(location(rng))), lo, hi);

  std::uniform_int_distribution<int> pick(0, k - 1);
  Matrix basis(k, grid.size());
  for (int j = 0; j < k; ++j) basis.row(j) = fourier_function(grid, pick(rng)).transpose();

  SimulatedSeries out;
  Matrix a = Matrix::Zero(k, k);
  Matrix noise_chol = Matrix::Identity(k, k);
  if (config.structure == VarStructure::diagonal) {
    std::uniform_real_distribution<double> diag(-0.5, 0.5);
    for (int i = 0; i < k; ++i) a(i, i) = diag(rng);
    Matrix cov(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) cov(i, j) = std::pow(config.correlation, std::abs(i - j));
    noise_chol = cov.llt().matrixL();
  } else {
    std::uniform_real_distribution<double> band(-0.3, 0.3);
    while (true) {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) a(i, j) = std::abs(i - j) <= 3 ? band(rng) : 0.0;
      if (spectral_radius(a) < 1.0) break;
      ++out.redraws;
    }
  }

  Vector beta = Vector::Zero(k);
  Vector z(k);
  const auto step = [&] {
    for (int i = 0; i < k; ++i) z(i) = normal(rng);
    beta = a * beta + noise_chol * z;
  };
  for (int b = 0; b < config.burn_in; ++b) step();
  Matrix eps(n, grid.size());
  for (Eigen::Index t = 0; t < n; ++t) {
    step();
    eps.row(t) = beta.transpose() * basis;
    for (Eigen::Index i = 0; i < grid.size(); ++i) eps(t, i) += config.noise_sd * normal(rng);
  }

  const FunctionalTimeSeries eps_series(grid, eps);
  const WhitenedSample sample = whiten(eps_series);
  KernelSpec kernel = KernelSpec::bartlett(1.0);
  kernel.bandwidth = plugin_bandwidth(sample, n, kernel);
  const Matrix core = sample.core(lag_weight_matrix(n, kernel));
  double trace = core.trace();
  if (config.trace == TraceConvention::grid_sum) {
    // diagonal of the unweighted surface: (basis core basis^T)_ii / w_i
    const Matrix bc = sample.basis * core;
    trace = ((bc.array() * sample.basis.array()).rowwise().sum() /
             sample.sqrt_weights.array().square())
                .sum();
  }
  const double p_frac = static_cast<double>(tau) / dn;
  const double c = config.snr > 0.0 ? snr_to_c(config.snr, p_frac, trace) : 0.0;

  Vector delta = Vector::Zero(grid.size());
  for (int w = 0; w < config.break_direction; ++w) delta += basis.row(w).transpose();
  delta /= std::sqrt(static_cast<double>(config.break_direction));
  const double norm = std::sqrt(squared_norm(delta, grid));
  if (norm > 0.0) delta /= norm;
  delta *= std::sqrt(c);

  Matrix x = eps;
  for (Eigen::Index t = tau; t < n; ++t) {
    // row t holds time t + 1 > tau
    const double scale =
        gradual ? std::sqrt(static_cast<double>(t + 1)) * std::pow(dn, alpha) / std::sqrt(dn) : 1.0;
    x.row(t) += scale * delta.transpose();
  }
  const Vector xbar = x.colwise().mean().transpose();
  Matrix y = x.rowwise() + xbar.transpose();

  out.fts = FunctionalTimeSeries(grid, std::move(y));
  out.true_tau = tau;
  out.c_magnitude = c;
  out.break_function = std::move(delta);
  return out;
}

}  // namespace

SimulatedSeries gen_dgp2(const Dgp2Config& config) { return generate_var_series(config, false); }

SimulatedSeries gen_dgp3(const Dgp2Config& config) { return generate_var_series(config, true); }

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t config_index, std::size_t rep) {
  std::mt19937_64 rng = substream(master, (static_cast<std::uint64_t>(config_index) << 32) |
                                              static_cast<std::uint64_t>(rep));
  return rng();
}

std::vector<McSummary> run_monte_carlo(const ExperimentGrid& grid, const DetectorOptions& detector,
                                       unsigned threads) {
  if (grid.replications < 1) {
    throw std::invalid_argument("run_monte_carlo needs replications >= 1");
  }
  if (grid.dgp < 1 || grid.dgp > 3) {
    throw std::invalid_argument("dgp must be 1, 2 or 3");
  }
  std::vector<McSummary> configs;
  for (Eigen::Index n : grid.n) {
    if (grid.dgp == 1) {
      for (double omega : grid.omega) {
        McSummary s;
        s.dgp = 1;
        s.n = n;
        s.omega = omega;
        configs.push_back(s);
      }
      continue;
    }
    for (VarStructure st : grid.structure) {
      for (double snr : grid.snr) {
        if (grid.dgp == 2) {
          McSummary s;
          s.dgp = 2;
          s.n = n;
          s.snr = snr;
          s.structure = st;
          configs.push_back(s);
        } else {
          for (double alpha : grid.alpha) {
            McSummary s;
            s.dgp = 3;
            s.n = n;
            s.snr = snr;
            s.alpha = alpha;
            s.structure = st;
            configs.push_back(s);
          }
        }
      }
    }
  }

  DetectorOptions inner = detector;
  inner.threads = 1;
  const std::size_t reps = static_cast<std::size_t>(grid.replications);
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    McSummary& s = configs[ci];
    std::vector<long> tau_hat(reps, 0);
    std::vector<long> tau(reps, 0);
    std::vector<char> failed(reps, 0);
    parallel_for(reps, threads, [&](std::size_t r) {
      const std::uint64_t seed = replication_seed(grid.seed, ci, r);
      try {
        SimulatedSeries sim;
        if (s.dgp == 1) {
          Dgp1Config cfg;
          cfg.n = s.n;
          cfg.omega = s.omega;
          cfg.seed = seed;
          sim = gen_dgp1(cfg);
        } else {
          Dgp2Config cfg;
          cfg.n = s.n;
          cfg.snr = s.snr;
          cfg.structure = s.structure;
          cfg.break_direction = grid.break_direction;
          cfg.seed = seed;
          cfg.trace = grid.trace;
          if (s.dgp == 3) cfg.alpha = s.alpha;
          sim = s.dgp == 2 ? gen_dgp2(cfg) : gen_dgp3(cfg);
        }
        tau[r] = sim.true_tau;
        tau_hat[r] = stopping_time(sim.fts, inner).breakpoint.stopping_time;
      } catch (const std::exception&) {
        failed[r] = 1;
      }
    });
    s.replications = grid.replications;
    std::vector<double> hats, truths;
    for (std::size_t r = 0; r < reps; ++r) {
      if (failed[r]) {
        ++s.failures;
        continue;
      }
      s.tau_hat.push_back(tau_hat[r]);
      s.true_tau.push_back(tau[r]);
      hats.push_back(static_cast<double>(tau_hat[r]));
      truths.push_back(static_cast<double>(tau[r]));
      if (tau_hat[r] >= tau[r]) ++s.count_at_or_after;
    }
    if (!hats.empty()) {
      const double m = static_cast<double>(hats.size());
      double sh = 0.0, st = 0.0;
      for (std::size_t i = 0; i < hats.size(); ++i) {
        sh += hats[i];
        st += truths[i];
      }
      s.mean_tau_hat = sh / m;
      s.mean_true_tau = st / m;
      s.median_tau_hat = median(hats);
      s.median_true_tau = median(truths);
    }
  }
  return configs;
}

}  // namespace ftstop
