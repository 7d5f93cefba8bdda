#include "ftstop/arima.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace ftstop {

namespace {

using Params = std::vector<double>;

// Partial autocorrelations tanh(raw) mapped to the coefficients of a causal AR polynomial
// (Durbin-Levinson recursion).
std::vector<double> pacf_to_coefficients(std::span<const double> raw) {
  const std::size_t m = raw.size();
  std::vector<double> phi(m);
  std::vector<double> work(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double r = std::tanh(raw[k]);
    phi[k] = r;
    for (std::size_t j = 0; j < k; ++j) work[j] = phi[j] - r * phi[k - j - 1];
    for (std::size_t j = 0; j < k; ++j) phi[j] = work[j];
  }
  return phi;
}

struct FilterOutput {
  double ssq = 0.0;
  double sumlog = 0.0;
  std::vector<double> innovations;  // standardised by sqrt(F_t)
  std::vector<double> state;
};

// Stationary state covariance P = T P T' + R R' for the Harvey state-space form.
Eigen::MatrixXd stationary_covariance(const std::vector<double>& phi,
                                      const std::vector<double>& rvec) {
  const int r = static_cast<int>(rvec.size());
  if (r == 1) {
    const double f = phi[0];
    return Eigen::MatrixXd::Constant(1, 1, 1.0 / (1.0 - f * f));
  }
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    t(i, 0) = phi[i];
    if (i + 1 < r) t(i, i + 1) = 1.0;
  }
  const int rr = r * r;
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(rr, rr);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k)
        for (int l = 0; l < r; ++l) system(i * r + k, j * r + l) -= t(i, j) * t(k, l);
  Eigen::VectorXd rhs(rr);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < r; ++k) rhs(i * r + k) = rvec[i] * rvec[k];
  const Eigen::VectorXd sol = system.partialPivLu().solve(rhs);
  Eigen::MatrixXd p(r, r);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < r; ++k) p(i, k) = sol(i * r + k);
  return 0.5 * (p + p.transpose());
}

// Kalman filter for a zero-mean ARMA(p, q) in Harvey form, state dimension max(p, q + 1).
// Switches to the steady-state recursion once the prediction variance reaches 1.
FilterOutput arma_filter(std::span<const double> w, std::span<const double> ar,
                         std::span<const double> ma, bool keep_innovations) {
  const int p = static_cast<int>(ar.size());
  const int q = static_cast<int>(ma.size());
  const int r = std::max(p, q + 1);
  std::vector<double> phi(r, 0.0);
  std::vector<double> rvec(r, 0.0);
  std::copy(ar.begin(), ar.end(), phi.begin());
  rvec[0] = 1.0;
  for (int j = 0; j < q; ++j) rvec[j + 1] = ma[j];

  Eigen::MatrixXd pm = stationary_covariance(phi, rvec);
  std::vector<double> a(r, 0.0);
  std::vector<double> anew(r, 0.0);
  Eigen::MatrixXd m(r, r);

  FilterOutput out;
  if (keep_innovations) out.innovations.reserve(w.size());
  bool steady = false;
  for (double obs : w) {
    const double v = obs - a[0];
    if (steady) {
      for (int i = 0; i < r; ++i) a[i] += rvec[i] * v;
      out.ssq += v * v;
      if (keep_innovations) out.innovations.push_back(v);
    } else {
      const double f = pm(0, 0);
      if (!(f > 0.0) || !std::isfinite(f)) {
        out.ssq = std::numeric_limits<double>::infinity();
        return out;
      }
      out.ssq += v * v / f;
      out.sumlog += std::log(f);
      if (keep_innovations) out.innovations.push_back(v / std::sqrt(f));
      for (int i = 0; i < r; ++i) a[i] += pm(i, 0) * v / f;
      const Eigen::VectorXd col = pm.col(0);
      pm.noalias() -= col * col.transpose() / f;
      // predicted covariance T P T' + R R'
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) m(i, j) = phi[i] * pm(0, j) + (i + 1 < r ? pm(i + 1, j) : 0.0);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
          pm(i, j) = m(i, 0) * phi[j] + (j + 1 < r ? m(i, j + 1) : 0.0) + rvec[i] * rvec[j];
      if (std::abs(pm(0, 0) - 1.0) < 1e-9) steady = true;
    }
    // state prediction a <- T a
    for (int i = 0; i < r; ++i) anew[i] = phi[i] * a[0] + (i + 1 < r ? a[i + 1] : 0.0);
    std::swap(a, anew);
  }
  // a holds the one-step prediction; store it for forecasting
  out.state = a;
  return out;
}

double concentrated_loglik(const FilterOutput& f, std::size_t n) {
  const double dn = static_cast<double>(n);
  const double sigma2 = std::max(f.ssq / dn, kSigma2Floor);
  return -0.5 * (dn * std::log(2.0 * std::numbers::pi * sigma2) + dn + f.sumlog);
}

struct Layout {
  int p = 0;
  int q = 0;
  bool mean = false;
  double mean_center = 0.0;
  double mean_scale = 1.0;

  int size() const { return p + q + (mean ? 1 : 0); }

  void unpack(const Params& raw, std::vector<double>& ar, std::vector<double>& ma,
              double& mu) const {
    ar = pacf_to_coefficients(std::span<const double>(raw.data(), p));
    const auto c = pacf_to_coefficients(std::span<const double>(raw.data() + p, q));
    ma.resize(q);
    for (int j = 0; j < q; ++j) ma[j] = -c[j];
    mu = mean ? mean_center + mean_scale * raw[p + q] : 0.0;
  }
};

double css_objective(const Params& raw, const Layout& layout, std::span<const double> w) {
  std::vector<double> ar, ma;
  double mu = 0.0;
  layout.unpack(raw, ar, ma, mu);
  const std::size_t n = w.size();
  const std::size_t start = static_cast<std::size_t>(layout.p);
  std::vector<double> e(n, 0.0);
  double ssq = 0.0;
  for (std::size_t t = start; t < n; ++t) {
    double pred = mu;
    for (int i = 0; i < layout.p; ++i) pred += ar[i] * (w[t - i - 1] - mu);
    for (int j = 0; j < layout.q; ++j)
      if (t >= static_cast<std::size_t>(j + 1)) pred += ma[j] * e[t - j - 1];
    e[t] = w[t] - pred;
    ssq += e[t] * e[t];
  }
  const double count = static_cast<double>(n - start);
  return 0.5 * std::log(std::max(ssq / count, kSigma2Floor));
}

double ml_objective(const Params& raw, const Layout& layout, std::span<const double> w,
                    std::vector<double>& scratch) {
  std::vector<double> ar, ma;
  double mu = 0.0;
  layout.unpack(raw, ar, ma, mu);
  scratch.resize(w.size());
  for (std::size_t t = 0; t < w.size(); ++t) scratch[t] = w[t] - mu;
  const FilterOutput f = arma_filter(scratch, ar, ma, false);
  if (!std::isfinite(f.ssq)) return std::numeric_limits<double>::infinity();
  const double ll = concentrated_loglik(f, w.size());
  return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
}

// Nelder-Mead simplex minimiser.
Params nelder_mead(const std::function<double(const Params&)>& f, Params x0, int max_evals,
                   double step = 0.1, double tol = 1e-9) {
  const std::size_t m = x0.size();
  if (m == 0) return x0;
  std::vector<Params> simplex(m + 1, x0);
  std::vector<double> values(m + 1);
  for (std::size_t i = 0; i < m; ++i) simplex[i + 1][i] += step;
  int evals = 0;
  for (std::size_t i = 0; i <= m; ++i) {
    values[i] = f(simplex[i]);
    ++evals;
  }
  std::vector<std::size_t> idx(m + 1);
  Params centroid(m), trial(m), trial2(m);
  while (evals < max_evals) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return values[a] < values[b];
    });
    const std::size_t best = idx.front();
    const std::size_t worst = idx.back();
    const std::size_t second = idx[m - 1];
    if (std::isfinite(values[worst]) &&
        values[worst] - values[best] <= tol * (std::abs(values[best]) + tol)) {
      break;
    }
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < m; ++k) centroid[k] += simplex[i][k] / static_cast<double>(m);
    }
    for (std::size_t k = 0; k < m; ++k) trial[k] = centroid[k] + (centroid[k] - simplex[worst][k]);
    const double fr = f(trial);
    ++evals;
    if (fr < values[best]) {
      for (std::size_t k = 0; k < m; ++k)
        trial2[k] = centroid[k] + 2.0 * (centroid[k] - simplex[worst][k]);
      const double fe = f(trial2);
      ++evals;
      if (fe < fr) {
        simplex[worst] = trial2;
        values[worst] = fe;
      } else {
        simplex[worst] = trial;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = trial;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    for (std::size_t k = 0; k < m; ++k) {
      const double towards = outside ? trial[k] : simplex[worst][k];
      trial2[k] = centroid[k] + 0.5 * (towards - centroid[k]);
    }
    const double fc = f(trial2);
    ++evals;
    if (fc < std::min(fr, values[worst])) {
      simplex[worst] = trial2;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < m; ++k)
        simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
      values[i] = f(simplex[i]);
      ++evals;
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  return simplex[static_cast<std::size_t>(it - values.begin())];
}

double aicc_of(double loglik, int k, std::size_t n_eff) {
  const double dn = static_cast<double>(n_eff);
  const double denom = dn - k - 1.0;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return -2.0 * loglik + 2.0 * k * dn / denom;
}

double min_modulus(const std::vector<double>& poly_tail, double sign) {
  // roots of 1 + sign * sum c_i z^i, via the reciprocal companion matrix
  int deg = static_cast<int>(poly_tail.size());
  while (deg > 0 && poly_tail[deg - 1] == 0.0) --deg;
  if (deg == 0) return std::numeric_limits<double>::infinity();
  // z^deg * P(1/z) = z^deg + sign * sum c_i z^(deg - i); its roots are 1/root of P
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) comp(0, i) = -sign * poly_tail[i];
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  double max_inv = 0.0;
  for (int i = 0; i < deg; ++i) max_inv = std::max(max_inv, std::abs(es.eigenvalues()(i)));
  return max_inv > 0.0 ? 1.0 / max_inv : std::numeric_limits<double>::infinity();
}

}  // namespace

std::string to_string(const ArimaOrder& order) {
  return "ARIMA(" + std::to_string(order.p) + "," + std::to_string(order.d) + "," +
         std::to_string(order.q) + ")";
}

double ArimaModel::intercept() const {
  const double sum = std::accumulate(ar.begin(), ar.end(), 0.0);
  return constant * (1.0 - sum);
}

int ArimaModel::parameter_count() const {
  return order.p + order.q + (drift ? 1 : 0) + 1;
}

std::vector<double> difference(std::span<const double> x, int d) {
  std::vector<double> out(x.begin(), x.end());
  for (int k = 0; k < d; ++k) {
    if (out.empty()) break;
    for (std::size_t t = 0; t + 1 < out.size(); ++t) out[t] = out[t + 1] - out[t];
    out.pop_back();
  }
  return out;
}

std::vector<double> undifference(std::span<const double> diffs, std::span<const double> head,
                                 int d) {
  if (static_cast<int>(head.size()) != d) {
    throw std::invalid_argument("undifference: need exactly d initial values");
  }
  // initial value of each differencing level: level k starts at (Delta^k x)_0
  std::vector<double> starts(d);
  std::vector<double> level(head.begin(), head.end());
  for (int k = 0; k < d; ++k) {
    starts[k] = level[0];
    for (std::size_t t = 0; t + 1 < level.size(); ++t) level[t] = level[t + 1] - level[t];
    level.pop_back();
  }
  std::vector<double> cur(diffs.begin(), diffs.end());
  for (int k = d - 1; k >= 0; --k) {
    std::vector<double> up(cur.size() + 1);
    up[0] = starts[k];
    for (std::size_t t = 0; t < cur.size(); ++t) up[t + 1] = up[t] + cur[t];
    cur = std::move(up);
  }
  return cur;
}

int select_d(std::span<const double> series, int max_d, KpssType type) {
  if (static_cast<int>(series.size()) - max_d < 8) {
    throw std::invalid_argument("series too short");
  }
  std::vector<double> x(series.begin(), series.end());
  for (int d = 0; d < max_d; ++d) {
    if (!kpss_test(x, type).reject_stationarity) return d;
    x = difference(x, 1);
  }
  return max_d;
}

ArimaModel evaluate_arima(std::span<const double> series, ArimaOrder order, bool drift,
                          std::span<const double> ar, std::span<const double> ma,
                          double constant) {
  if (static_cast<int>(ar.size()) != order.p || static_cast<int>(ma.size()) != order.q) {
    throw std::invalid_argument("evaluate_arima: coefficient count does not match order");
  }
  if (static_cast<int>(series.size()) <= order.d) {
    throw std::invalid_argument("evaluate_arima: series shorter than differencing order");
  }
  const bool use_const = drift && order.d < 2;
  const std::vector<double> w = difference(series, order.d);
  std::vector<double> centred(w.size());
  const double mu = use_const ? constant : 0.0;
  for (std::size_t t = 0; t < w.size(); ++t) centred[t] = w[t] - mu;
  FilterOutput f = arma_filter(centred, ar, ma, true);
  if (!std::isfinite(f.ssq)) {
    throw std::runtime_error("estimation failed");
  }
  ArimaModel model;
  model.order = order;
  model.drift = use_const;
  model.constant = mu;
  model.ar.assign(ar.begin(), ar.end());
  model.ma.assign(ma.begin(), ma.end());
  model.sigma2 = std::max(f.ssq / static_cast<double>(w.size()), kSigma2Floor);
  model.residuals = std::move(f.innovations);
  model.loglik = concentrated_loglik(f, w.size());
  model.aicc = aicc_of(model.loglik, model.parameter_count(), w.size());
  model.series.assign(series.begin(), series.end());
  model.state = std::move(f.state);
  return model;
}

ArimaModel fit_arima(std::span<const double> series, ArimaOrder order, bool drift) {
  if (order.p < 0 || order.q < 0 || order.d < 0 || order.p > 5 || order.q > 5) {
    throw std::invalid_argument("fit_arima: orders must satisfy 0 <= p, q <= 5 and d >= 0");
  }
  const int n_eff = static_cast<int>(series.size()) - order.d;
  if (n_eff <= order.p + order.q + 1) {
    throw std::invalid_argument("fit_arima: series too short for " + to_string(order));
  }
  const std::vector<double> w = difference(series, order.d);

  Layout layout;
  layout.p = order.p;
  layout.q = order.q;
  layout.mean = drift && order.d < 2;
  if (layout.mean) {
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    double ss = 0.0;
    for (double v : w) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(w.size()));
    layout.mean_center = mean;
    layout.mean_scale = std::max(sd / std::sqrt(static_cast<double>(w.size())),
                                 1e-8 * (std::abs(mean) + 1.0));
  }
  const int dim = layout.size();
  const int budget = 200 + 150 * dim;

  const auto css = [&](const Params& raw) { return css_objective(raw, layout, w); };
  std::vector<double> scratch;
  const auto ml = [&](const Params& raw) { return ml_objective(raw, layout, w, scratch); };

  const Params zero(static_cast<std::size_t>(dim), 0.0);
  std::vector<Params> starts;
  if (order.p + order.q > 0) starts.push_back(nelder_mead(css, zero, budget));
  starts.push_back(zero);

  bool have = false;
  Params best;
  double best_value = std::numeric_limits<double>::infinity();
  for (const Params& start : starts) {
    if (!std::isfinite(ml(start))) continue;
    Params opt = nelder_mead(ml, start, budget);
    // one restart around the optimum tightens the simplex solution
    if (dim > 0) opt = nelder_mead(ml, opt, budget / 2, 0.02);
    const double value = ml(opt);
    if (std::isfinite(value) && value < best_value) {
      best_value = value;
      best = opt;
      have = true;
    }
    if (have) break;
  }
  if (!have) {
    throw std::runtime_error("estimation failed");
  }
  std::vector<double> ar, ma;
  double mu = 0.0;
  layout.unpack(best, ar, ma, mu);
  return evaluate_arima(series, order, layout.mean, ar, ma, mu);
}

double min_root_modulus(const ArimaModel& model) {
  return std::min(min_modulus(model.ar, -1.0), min_modulus(model.ma, 1.0));
}

ArimaModel auto_arima(std::span<const double> series, const AutoArimaOptions& options,
                      std::vector<ArimaCandidate>* trace) {
  if (series.size() < 10) {
    throw std::invalid_argument("auto_arima needs at least 10 observations");
  }
  const int max_d = std::min(options.max_d, static_cast<int>(series.size()) - 8);
  const int d = select_d(series, max_d, options.kpss);
  const bool allow_const = d < 2;
  const int n_eff = static_cast<int>(series.size()) - d;

  std::map<std::tuple<int, int, bool>, std::pair<double, int>> seen;  // -> (aicc, model slot)
  std::vector<ArimaModel> fitted;
  const auto evaluate = [&](int p, int q, bool c) -> double {
    if (p < 0 || q < 0 || p > options.max_p || q > options.max_q) {
      return std::numeric_limits<double>::infinity();
    }
    if (c && !allow_const) return std::numeric_limits<double>::infinity();
    const auto key = std::make_tuple(p, q, c);
    if (auto it = seen.find(key); it != seen.end()) return it->second.first;
    double score = std::numeric_limits<double>::infinity();
    int slot = -1;
    ArimaCandidate cand{{p, d, q}, c, score, false};
    const int k = p + q + (c ? 1 : 0) + 1;
    if (n_eff > p + q + 1 && n_eff - k - 1 > 0) {
      try {
        ArimaModel m = fit_arima(series, {p, d, q}, c);
        if (std::isfinite(m.aicc) && min_root_modulus(m) >= 1.01) {
          score = m.aicc;
          slot = static_cast<int>(fitted.size());
          fitted.push_back(std::move(m));
          cand.ok = true;
          cand.aicc = score;
        }
      } catch (const std::exception&) {
      }
    }
    if (trace) trace->push_back(cand);
    seen[key] = {score, slot};
    return score;
  };

  struct Point {
    int p, q;
    bool c;
  };
  Point best{0, 0, allow_const};
  double best_score = std::numeric_limits<double>::infinity();
  for (const Point& s : {Point{2, 2, allow_const}, Point{0, 0, allow_const},
                         Point{1, 0, allow_const}, Point{0, 1, allow_const}}) {
    const double v = evaluate(s.p, s.q, s.c);
    if (v < best_score) {
      best_score = v;
      best = s;
    }
  }
  if (!options.stepwise) {
    for (int p = 0; p <= options.max_p; ++p)
      for (int q = 0; q <= options.max_q; ++q)
        for (bool c : {false, true}) {
          const double v = evaluate(p, q, c);
          if (v < best_score) {
            best_score = v;
            best = {p, q, c};
          }
        }
  }
  if (std::isfinite(best_score)) {
    while (options.stepwise) {
      Point next = best;
      double next_score = best_score;
      const Point moves[] = {{best.p - 1, best.q, best.c}, {best.p + 1, best.q, best.c},
                             {best.p, best.q - 1, best.c}, {best.p, best.q + 1, best.c},
                             {best.p, best.q, !best.c}};
      for (const Point& mv : moves) {
        const double v = evaluate(mv.p, mv.q, mv.c);
        if (v < next_score) {
          next_score = v;
          next = mv;
        }
      }
      if (!(next_score < best_score)) break;
      best = next;
      best_score = next_score;
    }
    const int slot = seen[std::make_tuple(best.p, best.q, best.c)].second;
    return fitted[static_cast<std::size_t>(slot)];
  }
  return evaluate_arima(series, {0, d, 0}, false, {}, {}, 0.0);
}

std::vector<double> forecast(const ArimaModel& model, int h) {
  if (h < 1) {
    throw std::invalid_argument("forecast horizon must be >= 1");
  }
  const int r = static_cast<int>(model.state.size());
  std::vector<double> a = model.state;
  std::vector<double> anew(a.size());
  std::vector<double> phi(static_cast<std::size_t>(r), 0.0);
  std::copy(model.ar.begin(), model.ar.end(), phi.begin());

  std::vector<double> diffs(static_cast<std::size_t>(h));
  for (int step = 0; step < h; ++step) {
    diffs[step] = a[0] + model.constant;
    for (int i = 0; i < r; ++i) anew[i] = phi[i] * a[0] + (i + 1 < r ? a[i + 1] : 0.0);
    std::swap(a, anew);
  }

  // integrate from the tail: last value of every differencing level
  const int d = model.order.d;
  std::vector<double> tails(static_cast<std::size_t>(d));
  std::vector<double> level = model.series;
  for (int k = 0; k < d; ++k) {
    tails[k] = level.back();
    level = difference(level, 1);
  }
  std::vector<double> out = diffs;
  for (int k = d - 1; k >= 0; --k) {
    double prev = tails[k];
    for (double& v : out) {
      prev += v;
      v = prev;
    }
  }
  return out;
}

}  // namespace ftstop
