#include "noontrack/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace noontrack {

namespace {

// cos(8 theta_k + 2 phi) for the four settings collapses to {c, -s, -c, s}
// with c = cos(x), s = sin(x), x = 8 theta0 + 2 phi.
inline std::array<double, 4> fringe_cosines(double c, double s) {
  return {c, -s, -c, s};
}

}  // namespace

PosteriorGrid::PosteriorGrid(double phi_center, std::size_t n_phi, std::size_t n_v)
    : phi_center_(phi_center), n_phi_(n_phi), n_v_(n_v) {
  if (n_phi_ < 2 || n_v_ < 2) throw std::invalid_argument("posterior grid: need >= 2 points per axis");
  phi_spacing_ = kPhasePeriod / static_cast<double>(n_phi_);
  v_spacing_ = 1.0 / static_cast<double>(n_v_ - 1);
  weights_.assign(n_phi_ * n_v_, 1.0 / static_cast<double>(n_phi_ * n_v_));
}

double PosteriorGrid::weight_sum() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

void PosteriorGrid::update(const CountBatch& batch, double prob_floor) {
  const long long total = batch.total();
  if (total == 0) return;  // flat likelihood, grid unchanged

  const double n0 = static_cast<double>(batch.counts[0]);
  const double n1 = static_cast<double>(batch.counts[1]);
  const double n2 = static_cast<double>(batch.counts[2]);
  const double n3 = static_cast<double>(batch.counts[3]);
  const double base = 8.0 * batch.setting.theta0();

  std::vector<double> loglik(weights_.size());
  const long long rows = static_cast<long long>(n_phi_);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < rows; ++i) {
    const double x = base + 2.0 * phi_at(static_cast<std::size_t>(i));
    const double c = std::cos(x);
    const double s = std::sin(x);
    double* row = loglik.data() + static_cast<std::size_t>(i) * n_v_;
    for (std::size_t j = 0; j < n_v_; ++j) {
      const double v = v_at(j);
      double ll = 0.0;
      if (n0 != 0.0) ll += n0 * std::log(std::max(0.25 * (1.0 + v * c), prob_floor));
      if (n1 != 0.0) ll += n1 * std::log(std::max(0.25 * (1.0 - v * s), prob_floor));
      if (n2 != 0.0) ll += n2 * std::log(std::max(0.25 * (1.0 - v * c), prob_floor));
      if (n3 != 0.0) ll += n3 * std::log(std::max(0.25 * (1.0 + v * s), prob_floor));
      row[j] = ll;
    }
  }

  // Normalization stays serial and index-ordered so that results do not
  // depend on the thread count.
  double max_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < weights_.size(); ++idx)
    if (weights_[idx] > 0.0 && loglik[idx] > max_ll) max_ll = loglik[idx];
  if (!std::isfinite(max_ll)) throw std::runtime_error("posterior update: degenerate grid");

  double sum = 0.0;
  for (std::size_t idx = 0; idx < weights_.size(); ++idx) {
    if (weights_[idx] > 0.0) weights_[idx] *= std::exp(loglik[idx] - max_ll);
    sum += weights_[idx];
  }
  if (!(sum > 0.0)) throw std::runtime_error("posterior update: zero total mass");
  const double inv = 1.0 / sum;
  for (double& w : weights_) w *= inv;
}

Estimate PosteriorGrid::point_estimate() const {
  std::vector<double> m_phi(n_phi_, 0.0), m_v(n_v_, 0.0);
  for (std::size_t i = 0; i < n_phi_; ++i) {
    const double* row = weights_.data() + i * n_v_;
    double s = 0.0;
    for (std::size_t j = 0; j < n_v_; ++j) {
      s += row[j];
      m_v[j] += row[j];
    }
    m_phi[i] = s;
  }

  Estimate est;
  est.window_center = phi_center_;

  // Circular mean over the pi-wide period via the doubled angle.
  double cs = 0.0, sn = 0.0;
  for (std::size_t i = 0; i < n_phi_; ++i) {
    cs += m_phi[i] * std::cos(2.0 * phi_at(i));
    sn += m_phi[i] * std::sin(2.0 * phi_at(i));
  }
  const double resultant = std::hypot(cs, sn);
  if (resultant < 0.1) {
    est.uninformative = true;
    est.phi_hat = phi_center_;
  } else {
    const double raw = 0.5 * std::atan2(sn, cs);
    est.phi_hat = phi_center_ + wrap_signed(raw - phi_center_, kPhasePeriod);
  }

  double var_phi = 0.0;
  for (std::size_t i = 0; i < n_phi_; ++i) {
    const double d = wrap_signed(phi_at(i) - est.phi_hat, kPhasePeriod);
    var_phi += m_phi[i] * d * d;
  }
  const double quantization = phi_spacing_ / std::sqrt(12.0);
  est.phi_sd = std::max(std::sqrt(var_phi), quantization);

  double mean_v = 0.0;
  for (std::size_t j = 0; j < n_v_; ++j) mean_v += m_v[j] * v_at(j);
  double var_v = 0.0;
  for (std::size_t j = 0; j < n_v_; ++j) {
    const double d = v_at(j) - mean_v;
    var_v += m_v[j] * d * d;
  }
  est.v_hat = mean_v;
  est.v_sd = std::sqrt(var_v);

  // Two comparable, separated local maxima of the phi marginal => bimodal.
  const double peak = *std::max_element(m_phi.begin(), m_phi.end());
  if (peak > 0.0) {
    const double height_floor = 0.3 * peak;
    const std::size_t min_sep = std::max<std::size_t>(8, n_phi_ / 64);
    std::vector<std::size_t> modes;
    for (std::size_t i = 0; i < n_phi_; ++i) {
      const double prev = m_phi[(i + n_phi_ - 1) % n_phi_];
      const double next = m_phi[(i + 1) % n_phi_];
      if (m_phi[i] >= height_floor && m_phi[i] > prev && m_phi[i] >= next) modes.push_back(i);
    }
    for (std::size_t a = 0; a + 1 < modes.size() && !est.bimodal; ++a)
      for (std::size_t b = a + 1; b < modes.size(); ++b) {
        const std::size_t gap = modes[b] - modes[a];
        const std::size_t circ = std::min(gap, n_phi_ - gap);
        if (circ >= min_sep) {
          est.bimodal = true;
          break;
        }
      }
  }
  return est;
}

double log_likelihood(const CountBatch& batch, double phi, double v, double prob_floor) {
  const auto p = setting_probabilities(batch.setting, phi, v);
  double ll = 0.0;
  for (std::size_t k = 0; k < 4; ++k)
    if (batch.counts[k] != 0)
      ll += static_cast<double>(batch.counts[k]) * std::log(std::max(p[k], prob_floor));
  return ll;
}

void update_posterior(PosteriorGrid& grid, const CountBatch& batch, double prob_floor) {
  grid.update(batch, prob_floor);
}

Estimate point_estimate(const PosteriorGrid& grid) { return grid.point_estimate(); }

std::array<std::array<double, 2>, 2> fisher_matrix(double theta0, double phi, double v) {
  if (!(v > 0.0 && v < 1.0))
    throw std::domain_error("fisher_matrix: requires visibility in (0, 1)");
  const double x = 8.0 * theta0 + 2.0 * phi;
  const auto cosines = fringe_cosines(std::cos(x), std::sin(x));
  // sin(8 theta_k + 2 phi) follows the same shift pattern.
  const auto sines = fringe_cosines(std::sin(x), -std::cos(x));

  std::array<std::array<double, 2>, 2> f{{{0.0, 0.0}, {0.0, 0.0}}};
  for (std::size_t k = 0; k < 4; ++k) {
    const double p = std::max(0.25 * (1.0 + v * cosines[k]), 1e-12);
    const double dp_dphi = -0.5 * v * sines[k];
    const double dp_dv = 0.25 * cosines[k];
    f[0][0] += dp_dphi * dp_dphi / p;
    f[0][1] += dp_dphi * dp_dv / p;
    f[1][1] += dp_dv * dp_dv / p;
  }
  f[1][0] = f[0][1];
  return f;
}

double fisher_optimal_phase_information(double v) {
  return 4.0 * v * v / (2.0 - v * v);
}

BoundsReport bounds_report(const ProbeModel& probe, long long events) {
  probe.validate();
  if (events < 1) throw std::invalid_argument("bounds_report: events must be >= 1");

  const double n = static_cast<double>(probe.photon_number);
  const double m = static_cast<double>(events);
  const double v = probe.visibility;
  const double eta = probe.efficiency;

  BoundsReport r;
  r.photon_number = probe.photon_number;
  r.visibility = v;
  r.efficiency = eta;
  r.events = events;
  r.bound_heisenberg_product = 1.0 / std::sqrt(m);
  r.bound_classical = 1.0 / std::sqrt(n * m);
  r.crb_phase_noon = 1.0 / (n * std::sqrt(m));
  r.crb_phase_noon_operational =
      v > 0.0 ? 1.0 / (n * v * std::sqrt(m)) : std::numeric_limits<double>::infinity();
  r.crb_phase_fisher = (probe.photon_number == 2 && v > 0.0)
                           ? std::sqrt(2.0 - v * v) / (2.0 * v * std::sqrt(m))
                           : std::numeric_limits<double>::quiet_NaN();
  r.bound_classical_lossy = 1.0 / std::sqrt(n * eta * m);
  r.crb_phase_noon_lossy =
      v > 0.0 ? 1.0 / (n * v * std::sqrt(std::pow(eta, n) * m))
              : std::numeric_limits<double>::infinity();
  r.v_threshold = std::sqrt(1.0 / (eta * n));
  r.advantage = v > r.v_threshold;
  return r;
}

EstimateResult estimate_batch(const CountBatch& batch, double window_center,
                              const EstimatorConfig& config) {
  std::size_t n_phi = config.n_phi;
  PosteriorGrid grid(window_center, n_phi, config.n_v);
  grid.update(batch, config.prob_floor);
  Estimate est = grid.point_estimate();

  if (config.refine) {
    const long long total = std::max<long long>(batch.total(), 1);
    // The measured sd saturates near the cell size when under-resolved; the
    // ideal-probe bound 1/(2 sqrt(M)) gives a resolution guide that cannot
    // overshoot the true posterior width.
    const double sd_floor = 1.0 / (2.0 * std::sqrt(static_cast<double>(total)));
    while (est.phi_sd < 3.0 * grid.phi_spacing() && n_phi < config.n_phi_max) {
      const double target = std::max(est.phi_sd, sd_floor) / 3.5;
      std::size_t want = next_pow2(static_cast<std::size_t>(std::ceil(kPhasePeriod / target)));
      n_phi = std::clamp(std::max(want, n_phi * 2), config.n_phi, config.n_phi_max);
      grid = PosteriorGrid(window_center, n_phi, config.n_v);
      grid.update(batch, config.prob_floor);
      est = grid.point_estimate();
    }
  }

  est.t = batch.t;
  est.n_events = batch.total();
  est.theta0 = batch.setting.theta0();
  est.window_center = window_center;
  return EstimateResult{est, std::move(grid)};
}

}  // namespace noontrack
