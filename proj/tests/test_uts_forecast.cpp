#include "doctest.h"
#include "helpers.hpp"

#include "ftstop/arima.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace ftstop;

namespace {

std::vector<double> iid(std::size_t n, std::uint64_t seed) { return test::ar1(n, 0.0, seed); }

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[std::min(lo + 1, v.size() - 1)] - v[lo]);
}

std::vector<double> ar2_series(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> y(600, 0.0);
  for (std::size_t t = 2; t < y.size(); ++t) y[t] = 0.5 * y[t - 1] - 0.3 * y[t - 2] + z(rng);
  y.erase(y.begin(), y.begin() + 100);
  return y;
}

// textbook KPSS level statistic, written independently of the library
double kpss_oracle(const std::vector<double>& y, int lags) {
  const double n = static_cast<double>(y.size());
  double mean = 0.0;
  for (double v : y) mean += v / n;
  double s = 0.0, eta = 0.0;
  for (double v : y) {
    s += v - mean;
    eta += s * s;
  }
  double lrv = 0.0;
  for (int j = 0; j <= lags; ++j) {
    double g = 0.0;
    for (std::size_t t = static_cast<std::size_t>(j); t < y.size(); ++t) g += (y[t] - mean) * (y[t - j] - mean);
    lrv += (j == 0 ? 1.0 : 2.0 * (1.0 - j / (lags + 1.0))) * g / n;
  }
  return eta / (n * n * lrv);
}

}  // namespace

TEST_CASE("kpss statistic matches the textbook formula") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const std::vector<double> y = test::ar1(150, 0.6, 40 + s);
    CHECK(kpss_level_test(y).statistic == doctest::Approx(kpss_oracle(y, 4)).epsilon(1e-12));
  }
}

TEST_CASE("kpss basics") {
  const std::vector<double> flat(50, 3.25);
  const KpssResult r = kpss_level_test(flat);
  CHECK(r.statistic == 0.0);
  CHECK_FALSE(r.reject_stationarity);
  CHECK(r.critical_value == 0.463);

  CHECK_THROWS_WITH(kpss_level_test(std::vector<double>(7, 1.0)),
                    doctest::Contains("series too short"));

  // lags = floor(4 (n/100)^(1/4))
  CHECK(kpss_level_test(iid(200, 1)).lags == 4);
  CHECK(kpss_level_test(iid(100, 1)).lags == 4);
  CHECK(kpss_level_test(iid(50, 1)).lags == 3);

  std::vector<double> x = iid(120, 5);
  const double base = kpss_level_test(x).statistic;
  for (double& v : x) v += 1234.5;
  CHECK(std::abs(kpss_level_test(x).statistic - base) < 1e-10);

  for (std::uint64_t s = 0; s < 20; ++s) {
    const KpssResult k = kpss_level_test(test::ar1(60, 0.3, s));
    CHECK(k.reject_stationarity == (k.statistic > k.critical_value));
  }
}

TEST_CASE("kpss null distribution and power") {
  std::vector<double> stats;
  stats.reserve(10000);
  for (std::uint64_t s = 0; s < 10000; ++s) stats.push_back(kpss_level_test(iid(200, 100 + s)).statistic);
  const double q95 = quantile(stats, 0.95);
  MESSAGE("simulated 95th percentile at n=200: " << q95);
  CHECK(q95 >= 0.44);
  CHECK(q95 <= 0.49);

  int rejected = 0;
  for (std::size_t s = 0; s < 1000; ++s) rejected += stats[s] > kKpssLevelCritical5;
  CHECK(rejected >= 30);
  CHECK(rejected <= 70);

  // the standard test's power here is about 0.946 (cross-checked against statsmodels)
  int power = 0;
  for (std::uint64_t s = 0; s < 4000; ++s)
    power += kpss_level_test(test::random_walk(200, 7 + s)).reject_stationarity;
  MESSAGE("random-walk rejection rate: " << power / 4000.0);
  CHECK(power >= 3720);

  // trend variant: a deterministic trend plus noise is trend-stationary
  int trend_rejects = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    std::vector<double> y = iid(200, 9000 + s);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] += 0.05 * static_cast<double>(t);
    trend_rejects += kpss_test(y, KpssType::trend).reject_stationarity;
    CHECK(kpss_test(y, KpssType::trend).critical_value == 0.146);
  }
  CHECK(trend_rejects <= 30);
}

TEST_CASE("select_d") {
  int stationary = 0;
  int walk = 0;
  // a walk reaches d = 1 with about power * (1 - size); short-lag KPSS also over-rejects AR(1)
  for (std::uint64_t s = 0; s < 1000; ++s) {
    stationary += select_d(test::ar1(200, 0.5, s)) == 0;
    walk += select_d(test::random_walk(200, 500 + s)) == 1;
  }
  MESSAGE("select_d: AR(1) d=0 rate " << stationary / 1000.0 << ", walk d=1 rate " << walk / 1000.0);
  CHECK(stationary >= 850);
  CHECK(walk >= 850);
  CHECK_THROWS(select_d(std::vector<double>(9, 0.0), 2));
}

TEST_CASE("differencing round trip") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(-50, 50);
  std::vector<double> x(40);
  for (double& v : x) v = pick(rng);
  for (int d = 0; d <= 3; ++d) {
    const std::vector<double> w = difference(x, d);
    CHECK(w.size() == x.size() - static_cast<std::size_t>(d));
    const std::vector<double> back =
        undifference(w, std::span<const double>(x.data(), static_cast<std::size_t>(d)), d);
    CHECK(back == x);
  }
  const std::vector<double> sq{1, 4, 9, 16, 25};
  CHECK(difference(sq, 2) == std::vector<double>{2, 2, 2});
}

TEST_CASE("fit_arima calibration") {
  SUBCASE("white noise variance") {
    const ArimaModel m = fit_arima(iid(500, 42), {0, 0, 0}, true);
    CHECK(m.sigma2 >= 0.85);
    CHECK(m.sigma2 <= 1.15);
    CHECK(m.residuals.size() == 500);
  }
  SUBCASE("AR(1) coefficient") {
    const ArimaModel m = fit_arima(test::ar1(500, 0.6, 17), {1, 0, 0}, true);
    REQUIRE(m.ar.size() == 1);
    CHECK(m.ar[0] >= 0.5);
    CHECK(m.ar[0] <= 0.7);
    CHECK(m.parameter_count() == 3);
    const double n = 500.0;
    const double k = 3.0;
    CHECK(m.aicc == doctest::Approx(-2.0 * m.loglik + 2.0 * k * n / (n - k - 1.0)));
  }
  SUBCASE("residual mean under a drift fit") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      std::vector<double> y = test::ar1(300, 0.4, 60 + s);
      for (double& v : y) v += 5.0;
      const ArimaModel m = fit_arima(y, {1, 0, 1}, true);
      const double mean =
          std::accumulate(m.residuals.begin(), m.residuals.end(), 0.0) / m.residuals.size();
      CHECK(std::abs(mean) < 3.0 * std::sqrt(m.sigma2 / 300.0));
    }
  }
  SUBCASE("exact linear series under (0,2,0)") {
    std::vector<double> y(30);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = 3.0 + 0.5 * static_cast<double>(t);
    const ArimaModel m = fit_arima(y, {0, 2, 0}, false);
    CHECK(m.residuals.size() == 28);
    CHECK(std::all_of(m.residuals.begin(), m.residuals.end(),
                      [](double r) { return std::abs(r) < 1e-12; }));
    CHECK(m.sigma2 == kSigma2Floor);
  }
  SUBCASE("quadratic series under (0,2,0) leaves the constant second difference") {
    std::vector<double> y(20);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = static_cast<double>(t * t);
    const ArimaModel m = fit_arima(y, {0, 2, 0}, true);
    CHECK_FALSE(m.drift);  // no constant once d = 2
    for (double r : m.residuals) CHECK(r == doctest::Approx(2.0));
  }
  SUBCASE("errors") {
    CHECK_THROWS(fit_arima(iid(50, 1), {6, 0, 0}, false));
    CHECK_THROWS(fit_arima(iid(5, 1), {2, 0, 2}, false));
  }
}

TEST_CASE("fit_arima AR(1) mean over seeds") {
  double acc = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) acc += fit_arima(test::ar1(500, 0.6, 1000 + s), {1, 0, 0}, true).ar[0];
  const double mean = acc / 50.0;
  CHECK(mean >= 0.55);
  CHECK(mean <= 0.65);
}

TEST_CASE("auto_arima") {
  SUBCASE("white noise selects (0,0,0) mostly") {
    int hits = 0;
    for (std::uint64_t s = 0; s < 40; ++s) {
      const ArimaModel m = auto_arima(iid(300, 300 + s));
      hits += m.order == ArimaOrder{0, 0, 0};
    }
    CHECK(hits >= 28);
  }
  SUBCASE("AR(2): chosen model is AICc-minimal among everything evaluated") {
    int picked_two = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
      const std::vector<double> y = ar2_series(700 + s);
      std::vector<ArimaCandidate> trace;
      const ArimaModel m = auto_arima(y, {}, &trace);
      for (const ArimaCandidate& c : trace)
        if (c.ok) CHECK(m.aicc <= c.aicc);
      CHECK(min_root_modulus(m) >= 1.01);
      if (m.order == ArimaOrder{2, 0, 0}) {
        ++picked_two;
        CHECK(std::abs(m.ar[0] - 0.5) < 0.15);
        CHECK(std::abs(m.ar[1] + 0.3) < 0.15);
      }
    }
    MESSAGE("stepwise picked (2,0,0) in " << picked_two << " of 5 draws");
  }
  SUBCASE("AR(2): exhaustive search never loses to the true-order fit") {
    AutoArimaOptions opts;
    opts.stepwise = false;
    for (std::uint64_t s = 0; s < 5; ++s) {
      const std::vector<double> y = ar2_series(700 + s);
      const ArimaModel m = auto_arima(y, opts);
      for (bool c : {false, true}) {
        const ArimaModel truth = fit_arima(y, {2, m.order.d, 0}, c);
        if (min_root_modulus(truth) >= 1.01) CHECK(m.aicc <= truth.aicc + 1e-9);
      }
    }
  }
  SUBCASE("random walk is differenced") {
    const ArimaModel m = auto_arima(test::random_walk(200, 3));
    CHECK(m.order.d >= 1);
  }
  SUBCASE("too short") { CHECK_THROWS(auto_arima(iid(9, 1))); }
}

TEST_CASE("forecast identities") {
  SUBCASE("random walk is flat") {
    std::vector<double> y = test::random_walk(30, 4);
    y.back() = 7.3;
    const ArimaModel m = evaluate_arima(y, {0, 1, 0}, false, {}, {}, 0.0);
    for (double f : forecast(m, 5)) CHECK(f == doctest::Approx(7.3).epsilon(1e-14));
  }
  SUBCASE("(0,2,0) extrapolates linearly") {
    const std::vector<double> y{1.0, 1.5, 3.0, 4.0, 6.0};
    const ArimaModel m = evaluate_arima(y, {0, 2, 0}, false, {}, {}, 0.0);
    const auto f = forecast(m, 3);
    CHECK(f[0] == doctest::Approx(8.0));
    CHECK(f[1] == doctest::Approx(10.0));
    CHECK(f[2] == doctest::Approx(12.0));
  }
  SUBCASE("AR(1) decays geometrically") {
    const std::vector<double> y{0.3, -1.0, 0.7, 1.1, 2.0};
    const ArimaModel m = evaluate_arima(y, {1, 0, 0}, false, std::vector<double>{0.5}, {}, 0.0);
    const auto f = forecast(m, 3);
    CHECK(f[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f[2] == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("horizons are prefix-consistent") {
    const ArimaModel m = fit_arima(test::ar1(200, 0.7, 8), {2, 1, 1}, true);
    const auto f1 = forecast(m, 1);
    const auto f2 = forecast(m, 2);
    const auto f6 = forecast(m, 6);
    CHECK(f2[0] == f1[0]);
    for (int i = 0; i < 2; ++i) CHECK(f6[i] == f2[i]);
    CHECK_THROWS(forecast(m, 0));
  }
}
