#include "doctest.h"
#include "helpers.hpp"

#include "ftstop/simulate.hpp"

#include <cmath>
#include <set>

using namespace ftstop;

namespace {

double lag1_autocorrelation(const Matrix& y, Eigen::Index col, Eigen::Index from, Eigen::Index to) {
  const Vector x = y.col(col).segment(from, to - from);
  const Vector c = x.array() - x.mean();
  return c.head(c.size() - 1).dot(c.tail(c.size() - 1)) / c.squaredNorm();
}

}  // namespace

TEST_CASE("DGP1 noise-free recursion") {
  Dgp1Config cfg;
  cfg.n = 10;
  cfg.omega = 0.0;
  cfg.grid_points = 11;
  const SimulatedSeries s = gen_dgp1(cfg);
  REQUIRE(s.true_tau == 5);
  const Vector u = s.fts.grid().points();
  const Vector x0 = (10.0 * u.array() * (1.0 - u.array())).matrix();
  // X_t = rho^t X_0 up to tau, then (rho + c)^(t - tau) X_tau
  auto x = [&](int t) -> Vector {
    const double f = t <= 5 ? std::pow(0.2, t) : std::pow(0.2, 5) * std::pow(0.9, t - 5);
    return f * x0;
  };
  for (int t = 1; t <= 10; ++t) {
    const Vector expected =
        ((x(t - 1) - x(t)).array().abs() / (x(t - 1).array() + 0.1).abs()).matrix();
    CHECK((s.latent.row(t - 1).transpose() - x(t)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.fts.curve(t - 1).transpose() - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("DGP1 configuration") {
  Dgp1Config cfg;
  cfg.n = 400;
  CHECK(gen_dgp1(cfg).true_tau == 200);
  cfg.n = 101;
  const SimulatedSeries s = gen_dgp1(cfg);
  CHECK(s.true_tau == 51);
  CHECK(s.fts.size() == 101);
  CHECK(s.fts.grid_size() == 101);
  CHECK(gen_dgp1(cfg).fts.values() == s.fts.values());

  Dgp1Config explosive;
  explosive.rho = 0.5;
  CHECK_THROWS_WITH(gen_dgp1(explosive), doctest::Contains("stationary"));
  Dgp1Config negative;
  negative.omega = -1.0;
  CHECK_THROWS(gen_dgp1(negative));
}

TEST_CASE("DGP1 dependence is stronger after the break") {
  Dgp1Config cfg;
  cfg.n = 2000;
  cfg.seed = 3;
  const SimulatedSeries s = gen_dgp1(cfg);
  REQUIRE(s.latent.rows() == 2000);
  const double before = lag1_autocorrelation(s.latent, 50, 0, 1000);
  const double after = lag1_autocorrelation(s.latent, 50, 1000, 2000);
  MESSAGE("lag-1 autocorrelation at mid-grid: " << before << " before, " << after << " after");
  CHECK(after > before);
  CHECK(before == doctest::Approx(0.2).epsilon(0.5));
  CHECK(after == doctest::Approx(0.9).epsilon(0.1));
}

TEST_CASE("SNR calibration") {
  CHECK(snr_to_c(0.1, 0.5, 1.0) == doctest::Approx(0.4).epsilon(1e-15));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> snr(1e-3, 2.0), p(0.05, 0.95), tr(1e-2, 50.0);
  for (int i = 0; i < 100; ++i) {
    const double s = snr(rng), f = p(rng), t = tr(rng);
    CHECK(std::abs(c_to_snr(snr_to_c(s, f, t), f, t) - s) < 1e-12);
  }
  CHECK_THROWS(snr_to_c(0.1, 0.0, 1.0));
  CHECK_THROWS(snr_to_c(0.1, 1.0, 1.0));
  CHECK_THROWS(c_to_snr(0.1, 1.5, 1.0));
}

TEST_CASE("Fourier system is orthonormal on the grid") {
  const Grid g = Grid::uniform(0.0, 1.0, 101);
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) {
      const double ip = inner_product(fourier_function(g, i), fourier_function(g, j), g);
      CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-3);
    }
  }
}

TEST_CASE("DGP2 break injection") {
  Dgp2Config cfg;
  cfg.seed = 5;
  const SimulatedSeries a = gen_dgp2(cfg);
  CHECK(squared_norm(a.break_function, a.fts.grid()) == doctest::Approx(a.c_magnitude).epsilon(1e-8));

  SUBCASE("break norm scales with sqrt(snr)") {
    Dgp2Config weak = cfg;
    weak.snr = 0.01;
    const SimulatedSeries b = gen_dgp2(weak);
    CHECK(b.true_tau == a.true_tau);
    const double ratio = std::sqrt(squared_norm(a.break_function, a.fts.grid()) /
                                   squared_norm(b.break_function, b.fts.grid()));
    CHECK(ratio == doctest::Approx(std::sqrt(10.0)).epsilon(1e-10));
  }
  SUBCASE("zero snr injects nothing") {
    Dgp2Config none = cfg;
    none.snr = 0.0;
    const SimulatedSeries b = gen_dgp2(none);
    CHECK(b.c_magnitude == 0.0);
    CHECK(b.break_function.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("grid-sum trace is about p times the quadrature trace") {
    Dgp2Config gs = cfg;
    gs.trace = TraceConvention::grid_sum;
    const double ratio = gen_dgp2(gs).c_magnitude / a.c_magnitude;
    MESSAGE("c ratio grid_sum / quadrature: " << ratio);
    CHECK(ratio > 80.0);
    CHECK(ratio < 120.0);
  }
  SUBCASE("diagonal structure") {
    Dgp2Config diag = cfg;
    diag.structure = VarStructure::diagonal;
    const SimulatedSeries d = gen_dgp2(diag);
    CHECK(d.redraws == 0);
    CHECK(d.fts.values().allFinite());
  }
  SUBCASE("bad configurations") {
    Dgp2Config bad = cfg;
    bad.break_direction = 0;
    CHECK_THROWS(gen_dgp2(bad));
    bad = cfg;
    bad.n = 3;
    CHECK_THROWS(gen_dgp2(bad));
    CHECK_THROWS(gen_dgp3(cfg));  // alpha missing
    bad = cfg;
    bad.alpha = 0.5;
    CHECK_THROWS(gen_dgp3(bad));
  }
}

TEST_CASE("DGP2 break location") {
  double total = 0.0;
  const int draws = 1000;
  for (int s = 0; s < draws; ++s) {
    Dgp2Config cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    const long tau = gen_dgp2(cfg).true_tau;
    CHECK(tau >= 25);
    CHECK(tau <= 75);
    total += static_cast<double>(tau);
  }
  // U(25, 75) has mean 50 and sd 14.4, so the mean of 1000 draws is within 1.5 of 50
  MESSAGE("mean true tau over 1000 draws: " << total / draws);
  CHECK(std::abs(total / draws - 50.0) < 1.5);
}

TEST_CASE("DGP3 gradual change") {
  Dgp2Config base;
  base.seed = 21;
  base.alpha = 0.3;
  Dgp2Config none = base;
  none.snr = 0.0;
  const Matrix y0 = gen_dgp3(none).fts.values();

  // Y(alpha) - Y(no break) = S_t + mean(S) with S_t = 0 up to tau
  auto signal = [&](double alpha, SimulatedSeries& out) {
    Dgp2Config cfg = base;
    cfg.alpha = alpha;
    out = gen_dgp3(cfg);
    const Matrix d = out.fts.values() - y0;
    return Matrix(d.rowwise() - d.row(0));
  };
  SimulatedSeries lo, hi;
  const Matrix s_lo = signal(0.3, lo);
  const Matrix s_hi = signal(0.45, hi);
  REQUIRE(lo.true_tau == hi.true_tau);
  const long tau = lo.true_tau;
  const Grid& g = lo.fts.grid();
  const double n = 100.0;

  for (long t = 0; t < tau; ++t) CHECK(s_lo.row(t).cwiseAbs().maxCoeff() < 1e-12);
  for (long t = tau; t < 100; ++t) {
    const double a = std::sqrt(squared_norm(s_lo.row(t).transpose(), g));
    const double b = std::sqrt(squared_norm(s_hi.row(t).transpose(), g));
    CHECK(b > a);
  }
  const double first = std::sqrt(squared_norm(s_hi.row(tau).transpose(), g));
  const double expected = std::sqrt(tau + 1.0) * std::pow(n, 0.45 - 0.5) * std::sqrt(hi.c_magnitude);
  CHECK(first == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("Monte Carlo runner") {
  ExperimentGrid grid;
  grid.dgp = 1;
  grid.n = {24};
  grid.omega = {0.1, 0.5};
  grid.replications = 4;
  grid.seed = 11;
  const auto a = run_monte_carlo(grid);
  REQUIRE(a.size() == 2);
  const auto b = run_monte_carlo(grid);
  const auto c = run_monte_carlo(grid, {}, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].tau_hat == b[i].tau_hat);
    CHECK(a[i].tau_hat == c[i].tau_hat);
    CHECK(a[i].true_tau == c[i].true_tau);
    CHECK(a[i].replications == 4);
    CHECK(a[i].failures + static_cast<int>(a[i].tau_hat.size()) == 4);
    int count = 0;
    for (std::size_t r = 0; r < a[i].tau_hat.size(); ++r) count += a[i].tau_hat[r] >= a[i].true_tau[r];
    CHECK(count == a[i].count_at_or_after);
  }
  CHECK(a[0].omega == 0.1);
  CHECK(a[1].omega == 0.5);

  ExperimentGrid bad = grid;
  bad.dgp = 4;
  CHECK_THROWS(run_monte_carlo(bad));
  bad = grid;
  bad.replications = 0;
  CHECK_THROWS(run_monte_carlo(bad));
}

TEST_CASE("replication seeds and medians") {
  std::set<std::uint64_t> seeds;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t r = 0; r < 50; ++r) seeds.insert(replication_seed(9, c, r));
  CHECK(seeds.size() == 150);
  CHECK(replication_seed(9, 1, 2) == replication_seed(9, 1, 2));
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(std::isnan(median({})));
}
