#include "doctest.h"
#include "helpers.hpp"

#include "ftstop/detector.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace ftstop;

namespace {

IsfeSeries from_errors(const std::vector<double>& e) {
  IsfeSeries s;
  s.errors = e;
  for (std::size_t i = 0; i < e.size(); ++i) s.holdout_index.push_back(static_cast<long>(i) + 4);
  s.components.assign(e.size(), 1);
  return s;
}

// ISFE whose first differences are the given sequence
IsfeSeries from_differences(const std::vector<double>& d, double start = 0.0) {
  std::vector<double> e{start};
  for (double v : d) e.push_back(e.back() + v);
  return from_errors(e);
}

// exhaustive split of the difference sequence, written independently of the library
long brute_force_break(const IsfeSeries& s, int ms) {
  std::vector<double> d;
  for (std::size_t i = 0; i + 1 < s.errors.size(); ++i) d.push_back(s.errors[i + 1] - s.errors[i]);
  const int m = static_cast<int>(d.size());
  double best = std::numeric_limits<double>::infinity();
  long arg = -1;
  for (int j = ms; j <= m - ms; ++j) {
    double ssr = 0.0;
    for (auto [lo, hi] : {std::pair{0, j}, std::pair{j, m}}) {
      double mean = 0.0;
      for (int i = lo; i < hi; ++i) mean += d[i];
      mean /= hi - lo;
      for (int i = lo; i < hi; ++i) ssr += (d[i] - mean) * (d[i] - mean);
    }
    if (ssr < best) {
      best = ssr;
      arg = s.holdout_index[j];
    }
  }
  return arg;
}

double trapezoid(const Vector& f, const Vector& u) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i + 1 < f.size(); ++i) acc += 0.5 * (f(i) + f(i + 1)) * (u(i + 1) - u(i));
  return acc;
}

}  // namespace

TEST_CASE("step in the differences is split exactly") {
  const IsfeSeries s = from_differences({0, 0, 0, 5, 5, 5});
  const BreakpointResult r = detect_breakpoint(s);
  // first regime is the differences at holdouts 5, 6, 7
  CHECK(r.break_index == 7);
  CHECK(r.stopping_time == 7);
  CHECK(r.pre_mean == 0.0);
  CHECK(r.post_mean == 5.0);
  const auto it = std::find(r.candidates.begin(), r.candidates.end(), 7L);
  REQUIRE(it != r.candidates.end());
  CHECK(r.ssr_profile[it - r.candidates.begin()] == 0.0);
}

TEST_CASE("breakpoint agrees with an exhaustive oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(5, 50);
  std::normal_distribution<double> z;
  int agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> e(len(rng));
    for (auto& v : e) v = std::exp(z(rng));
    const IsfeSeries s = from_errors(e);
    agree += detect_breakpoint(s).break_index == brute_force_break(s, 2);
  }
  CHECK(agree == 1000);
}

TEST_CASE("breakpoint invariances and profile") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> e(30);
    for (auto& v : e) v = z(rng) * z(rng);
    const BreakpointResult r = detect_breakpoint(from_errors(e));

    std::vector<double> scaled = e, shifted = e;
    for (auto& v : scaled) v *= 4.0;
    for (auto& v : shifted) v += 8.0;
    CHECK(detect_breakpoint(from_errors(scaled)).break_index == r.break_index);
    CHECK(detect_breakpoint(from_errors(shifted)).break_index == r.break_index);

    // reported break carries the smallest SSR, both regimes keep two differences
    const auto best = std::min_element(r.ssr_profile.begin(), r.ssr_profile.end());
    CHECK(r.candidates[best - r.ssr_profile.begin()] == r.break_index);
    CHECK(r.candidates.front() == 4 + 2);
    CHECK(r.candidates.back() == 4 + 29 - 2);
  }
}

TEST_CASE("slope change in the error series is localised") {
  // ISFE flat with noise until holdout 30, then rising linearly
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 0.3);
    std::vector<double> e;
    for (long h = 4; h <= 60; ++h) e.push_back(1.0 + (h > 30 ? 0.5 * (h - 30) : 0.0) + z(rng));
    const long b = detect_breakpoint(from_errors(e)).break_index;
    hits += b >= 28 && b <= 33;
  }
  MESSAGE("break in [28, 33] for " << hits << " of 50 seeds");
  CHECK(hits >= 45);
}

TEST_CASE("breakpoint input validation") {
  CHECK_THROWS_WITH(detect_breakpoint(from_errors({1, 2, 3, 4})),
                    doctest::Contains("insufficient errors for split"));
  CHECK_NOTHROW(detect_breakpoint(from_errors({1, 2, 3, 4, 5})));
  CHECK_THROWS(detect_breakpoint(from_errors({1, 2, 3, 4, 5, 6}), 3));
  CHECK_NOTHROW(detect_breakpoint(from_errors({1, 2, 3, 4, 5, 6, 7}), 3));
}

TEST_CASE("rolling ISFE indexing") {
  const FunctionalTimeSeries fts = test::random_series(72, 15, 3);
  const IsfeSeries s = rolling_isfe(fts);
  REQUIRE(s.errors.size() == 69);
  CHECK(s.holdout_index.front() == 4);
  CHECK(s.holdout_index.back() == 72);
  for (std::size_t i = 0; i < s.errors.size(); ++i) {
    CHECK(s.holdout_index[i] == static_cast<long>(i) + 4);
    CHECK(s.errors[i] >= 0.0);
    CHECK(std::isfinite(s.errors[i]));
  }
  CHECK_THROWS(rolling_isfe(test::random_series(3, 15, 3)));
}

TEST_CASE("rolling ISFE on a six-curve toy matches a hand computation") {
  // short windows forecast scores by their last value; with every component retained the
  // forecast is the last training curve itself
  const FunctionalTimeSeries fts = test::random_series(6, 9, 11);
  DetectorOptions opts;
  opts.model.components = 100;
  const IsfeSeries s = rolling_isfe(fts, opts);
  REQUIRE(s.errors.size() == 3);
  for (int gamma = 3; gamma <= 5; ++gamma) {
    const Vector diff = (fts.curve(gamma) - fts.curve(gamma - 1)).transpose();
    const double oracle = trapezoid(diff.cwiseAbs2(), fts.grid().points());
    CHECK(s.errors[gamma - 3] == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("perfectly predictable series has zero ISFE") {
  std::vector<double> scores(30);
  for (std::size_t t = 0; t < scores.size(); ++t) scores[t] = 1.0 + 0.25 * static_cast<double>(t);
  DetectorOptions opts;
  opts.model.scores.order = ArimaOrder{0, 2, 0};
  const IsfeSeries s = rolling_isfe(test::rank1_series(scores), opts);
  for (double e : s.errors) CHECK(e < 1e-8);
}

TEST_CASE("training windows") {
  DetectorOptions expanding;
  CHECK(training_window(3, expanding) == std::pair<Eigen::Index, Eigen::Index>{0, 3});
  CHECK(training_window(40, expanding) == std::pair<Eigen::Index, Eigen::Index>{0, 40});
  DetectorOptions fixed;
  fixed.fixed_window = 10;
  CHECK(training_window(5, fixed) == std::pair<Eigen::Index, Eigen::Index>{0, 5});
  CHECK(training_window(40, fixed) == std::pair<Eigen::Index, Eigen::Index>{30, 10});

  const FunctionalTimeSeries fts = test::random_series(30, 11, 5);
  const IsfeSeries a = rolling_isfe(fts, fixed);
  CHECK(a.errors.size() == 27);
}

TEST_CASE("thread count does not change results") {
  const FunctionalTimeSeries fts = test::far1_series(40, 21, 0.5, 9);
  DetectorOptions one, many;
  many.threads = 4;
  const StoppingTimeReport a = stopping_time(fts, one);
  const StoppingTimeReport b = stopping_time(fts, many);
  CHECK(a.isfe.errors == b.isfe.errors);
  CHECK(a.breakpoint.break_index == b.breakpoint.break_index);
  CHECK(a.breakpoint.ssr_profile == b.breakpoint.ssr_profile);
}

TEST_CASE("window errors name the window") {
  const WindowError e(17, "boom");
  CHECK(e.gamma() == 17);
  CHECK(std::string(e.what()) == "window gamma=17: boom");
}
