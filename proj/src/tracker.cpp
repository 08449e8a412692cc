#include "noontrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace noontrack {

namespace {

struct Params {
  double c, a, tau;
};

double sum_squared_residuals(const Params& p, std::span<const double> t,
                             std::span<const double> y, double t_ref) {
  double ssr = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = p.c + p.a * std::exp(-(t[i] - t_ref) / p.tau) - y[i];
    ssr += r * r;
  }
  return ssr;
}

// Solve the 3x3 system A x = b with partial pivoting; false if singular.
bool solve3(double a[3][3], double b[3], double x[3]) {
  int idx[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::fabs(a[idx[r]][col]) > std::fabs(a[idx[pivot]][col])) pivot = r;
    std::swap(idx[col], idx[pivot]);
    const double d = a[idx[col]][col];
    if (std::fabs(d) < 1e-300) return false;
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[idx[r]][col] / d;
      for (int c = col; c < 3; ++c) a[idx[r]][c] -= f * a[idx[col]][c];
      b[idx[r]] -= f * b[idx[col]];
    }
  }
  for (int row = 2; row >= 0; --row) {
    double s = b[idx[row]];
    for (int c = row + 1; c < 3; ++c) s -= a[idx[row]][c] * x[c];
    x[row] = s / a[idx[row]][row];
  }
  return true;
}

// One damped least-squares descent from the given start; returns the refined
// parameters and whether the step tolerance was met.
bool levenberg_descend(Params& p, std::span<const double> t, std::span<const double> y,
                       double t_ref) {
  constexpr int kMaxIter = 100;
  constexpr double kStepTol = 1e-8;
  const std::size_t n = t.size();

  double lambda = 1e-3;
  double ssr = sum_squared_residuals(p, t, y, t_ref);
  for (int iter = 0; iter < kMaxIter; ++iter) {
    // Normal equations J^T J and J^T r for the current point.
    double h[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double g[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(-(t[i] - t_ref) / p.tau);
      const double r = p.c + p.a * e - y[i];
      const double j[3] = {1.0, e, p.a * e * (t[i] - t_ref) / (p.tau * p.tau)};
      for (int u = 0; u < 3; ++u) {
        g[u] += j[u] * r;
        for (int w = 0; w < 3; ++w) h[u][w] += j[u] * j[w];
      }
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 16; ++attempt) {
      double hd[3][3];
      double b[3] = {-g[0], -g[1], -g[2]};
      for (int u = 0; u < 3; ++u)
        for (int w = 0; w < 3; ++w) hd[u][w] = h[u][w];
      for (int u = 0; u < 3; ++u) hd[u][u] += lambda * std::max(h[u][u], 1e-12);

      double step[3];
      if (!solve3(hd, b, step)) {
        lambda *= 10.0;
        continue;
      }
      Params cand{p.c + step[0], p.a + step[1], p.tau + step[2]};
      if (!(cand.tau > 0.0) || !std::isfinite(cand.tau) || !std::isfinite(cand.c) ||
          !std::isfinite(cand.a)) {
        lambda *= 10.0;
        continue;
      }
      const double cand_ssr = sum_squared_residuals(cand, t, y, t_ref);
      if (cand_ssr <= ssr) {
        const bool small_step = std::fabs(step[0]) <= kStepTol * (std::fabs(p.c) + 1e-12) &&
                                std::fabs(step[1]) <= kStepTol * (std::fabs(p.a) + 1e-12) &&
                                std::fabs(step[2]) <= kStepTol * (std::fabs(p.tau) + 1e-12);
        p = cand;
        ssr = cand_ssr;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        if (small_step) return true;
        break;
      }
      lambda *= 4.0;
    }
    if (!stepped) {
      // No downhill step found at any damping: treat the current point as
      // stationary.
      return true;
    }
  }
  return false;
}

void fill_uncertainties(FitResult& fit, std::span<const double> t, std::span<const double> y) {
  const std::size_t n = t.size();
  if (n <= 3) return;
  double h[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(-(t[i] - fit.t_ref) / fit.tau_hat);
    const double r = fit.phi_inf + fit.amplitude * e - y[i];
    ssr += r * r;
    const double j[3] = {1.0, e,
                         fit.amplitude * e * (t[i] - fit.t_ref) / (fit.tau_hat * fit.tau_hat)};
    for (int u = 0; u < 3; ++u)
      for (int w = 0; w < 3; ++w) h[u][w] += j[u] * j[w];
  }
  const double sigma2 = ssr / static_cast<double>(n - 3);
  // tau variance = sigma^2 [ (J^T J)^{-1} ]_{tau,tau} via the solve.
  double b[3] = {0, 0, 1};
  double col[3];
  double hc[3][3];
  for (int u = 0; u < 3; ++u)
    for (int w = 0; w < 3; ++w) hc[u][w] = h[u][w];
  if (solve3(hc, b, col) && col[2] > 0.0) {
    fit.tau_sd = std::sqrt(sigma2 * col[2]);
    fit.rate_sd = fit.tau_sd / (fit.tau_hat * fit.tau_hat);
  }
}

}  // namespace

const char* to_string(PredictionMode mode) {
  switch (mode) {
    case PredictionMode::none: return "none";
    case PredictionMode::interpolation: return "interpolation";
    case PredictionMode::exponential_fit: return "exponential-fit";
  }
  return "unknown";
}

double FitResult::eval(double t) const {
  return phi_inf + amplitude * std::exp(-(t - t_ref) / tau_hat);
}

FitResult fit_offset_exponential(std::span<const double> t, std::span<const double> y,
                                 double t_ref) {
  if (t.size() != y.size() || t.size() < 4)
    throw std::invalid_argument("fit_offset_exponential: need >= 4 samples");

  const std::size_t n = t.size();
  const double span = std::max(t[n - 1] - t[0], 1e-9);

  // Initialization: offset from the newest sample, tau from the log-slope of
  // the two samples preceding it.
  const double c0 = y[n - 1];
  double tau0 = span;
  const double r1 = y[n - 3] - c0;
  const double r2 = y[n - 2] - c0;
  if (r1 * r2 > 0.0 && std::fabs(r1) > std::fabs(r2)) {
    const double guess = (t[n - 2] - t[n - 3]) / std::log(r1 / r2);
    if (std::isfinite(guess) && guess > 0.0) tau0 = guess;
  }

  FitResult best;
  double best_ssr = std::numeric_limits<double>::infinity();
  for (double scale : {1.0, 4.0, 0.25, span / tau0}) {
    Params p{c0, y[0] - c0, tau0 * scale};
    if (!(p.tau > 0.0)) continue;
    const bool converged = levenberg_descend(p, t, y, t_ref);
    const double ssr = sum_squared_residuals(p, t, y, t_ref);
    if (converged && ssr < best_ssr) {
      best_ssr = ssr;
      best.phi_inf = p.c;
      best.amplitude = p.a;
      best.tau_hat = p.tau;
      best.t_ref = t_ref;
      best.converged = true;
      best.residual_rms = std::sqrt(ssr / static_cast<double>(n));
    }
  }
  if (best.converged) fill_uncertainties(best, t, y);
  return best;
}

Prediction predict_phase(std::span<const Estimate> history, double t_next) {
  for (std::size_t i = 1; i < history.size(); ++i)
    if (!(history[i].t > history[i - 1].t))
      throw std::invalid_argument("predict_phase: history timestamps must increase");
  if (!history.empty() && !(t_next > history.back().t))
    throw std::invalid_argument("predict_phase: t_next must be later than the history");

  const std::size_t n = history.size();
  if (n == 0) return {0.0, PredictionMode::none};
  if (n == 1) return {history[0].phi_hat, PredictionMode::interpolation};

  const auto linear = [&]() {
    const Estimate& a = history[n - 2];
    const Estimate& b = history[n - 1];
    const double slope = (b.phi_hat - a.phi_hat) / (b.t - a.t);
    return b.phi_hat + slope * (t_next - b.t);
  };
  if (n <= 3) return {linear(), PredictionMode::interpolation};

  std::vector<double> ts(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = history[i].t;
    ys[i] = history[i].phi_hat;
  }
  const FitResult fit = fit_offset_exponential(ts, ys, ts.front());
  if (fit.converged) return {fit.eval(t_next), PredictionMode::exponential_fit};
  return {linear(), PredictionMode::interpolation};
}

MeasurementSetting choose_setting(double phi_p) {
  return MeasurementSetting((kPi / 4.0 - 2.0 * phi_p) / 8.0);
}

Estimate estimate_with_retry(const CountBatch& batch, double window_center,
                             const EstimatorConfig& config, bool* recentered) {
  EstimateResult result = estimate_batch(batch, window_center, config);
  if (recentered) *recentered = false;
  if (result.estimate.bimodal) {
    EstimateResult retry = estimate_batch(batch, result.estimate.phi_hat, config);
    if (recentered) *recentered = true;
    return retry.estimate;
  }
  return result.estimate;
}

TrackRecord track(BatchSource& source, const KineticsModel& conversion,
                  const TrackerConfig& config) {
  conversion.validate();
  TrackRecord record;
  std::vector<Estimate> history;

  // Comparison mode: carry one posterior across batches on a fixed window.
  std::unique_ptr<PosteriorGrid> carried;

  while (auto t_next = source.next_time()) {
    const Prediction pred = predict_phase(history, *t_next);
    const MeasurementSetting setting =
        (config.adaptive && pred.mode != PredictionMode::none)
            ? choose_setting(pred.phi_p)
            : MeasurementSetting(config.default_theta0);

    CountBatch batch;
    try {
      batch = source.measure(setting);
    } catch (const std::exception& e) {
      record.aborted = true;
      record.abort_reason = e.what();
      break;
    }

    TrackPoint point;
    point.phi_p = pred.phi_p;
    point.mode = pred.mode;
    const double center =
        pred.mode != PredictionMode::none ? pred.phi_p : config.default_window_center;

    if (config.estimator.sequential_prior) {
      if (!carried)
        carried = std::make_unique<PosteriorGrid>(config.default_window_center,
                                                  config.estimator.n_phi, config.estimator.n_v);
      carried->update(batch, config.estimator.prob_floor);
      Estimate est = carried->point_estimate();
      est.t = batch.t;
      est.n_events = batch.total();
      est.theta0 = batch.setting.theta0();
      point.estimate = est;
    } else {
      point.estimate = estimate_with_retry(batch, center, config.estimator, &point.recentered);
    }

    point.c_s = conversion.concentration_from_phase(point.estimate.phi_hat);
    point.c_s_sd = conversion.c_initial_molar * point.estimate.phi_sd /
                   std::fabs(conversion.phi_initial - conversion.phi_final);

    history.push_back(point.estimate);
    record.points.push_back(point);
  }
  return record;
}

std::vector<Prediction> replay_predictions(const TrackRecord& record) {
  std::vector<Prediction> out;
  std::vector<Estimate> prefix;
  for (const auto& point : record.points) {
    out.push_back(predict_phase(prefix, point.estimate.t));
    prefix.push_back(point.estimate);
  }
  return out;
}

}  // namespace noontrack
