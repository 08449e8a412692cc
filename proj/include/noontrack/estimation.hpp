#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "noontrack/optics.hpp"
#include "noontrack/sim.hpp"

namespace noontrack {

/// Joint point estimate of (phi, V) from one batch.
struct Estimate {
  double t = 0.0;
  double phi_hat = 0.0;
  double phi_sd = 0.0;  // circular standard deviation over the pi-wide window
  double v_hat = 0.0;
  double v_sd = 0.0;
  long long n_events = 0;
  double theta0 = 0.0;
  double window_center = 0.0;
  bool bimodal = false;        // two comparable posterior modes
  bool uninformative = false;  // near-uniform posterior; phi_sd ~ period/sqrt(12)
};

/// Discretized joint posterior over (phi, V). The phi axis holds bin centers
/// tiling one fringe period [center - pi/2, center + pi/2); the V axis spans
/// [0, 1] inclusive. Weights are kept normalized to 1.
class PosteriorGrid {
 public:
  PosteriorGrid(double phi_center, std::size_t n_phi, std::size_t n_v);

  std::size_t n_phi() const { return n_phi_; }
  std::size_t n_v() const { return n_v_; }
  double phi_center() const { return phi_center_; }
  double phi_spacing() const { return phi_spacing_; }
  double v_spacing() const { return v_spacing_; }
  double phi_at(std::size_t i) const {
    return phi_center_ - kPhasePeriod / 2.0 + (static_cast<double>(i) + 0.5) * phi_spacing_;
  }
  double v_at(std::size_t j) const { return static_cast<double>(j) * v_spacing_; }

  /// Row-major weights, index [i * n_v + j].
  const std::vector<double>& weights() const { return weights_; }
  double weight_sum() const;

  /// Multiply by the batch likelihood and renormalize (log-sum-exp based).
  void update(const CountBatch& batch, double prob_floor = 1e-12);

  /// Posterior moments: circular mean/sd for phi, plain mean/sd for V, plus
  /// bimodality and uninformativeness flags. Batch metadata is not filled.
  Estimate point_estimate() const;

 private:
  double phi_center_;
  std::size_t n_phi_, n_v_;
  double phi_spacing_, v_spacing_;
  std::vector<double> weights_;
};

/// Multinomial log-likelihood sum_k n_k log p(theta_k; phi, v), with the
/// probabilities floored at prob_floor (exact zeros occur at V = 1 nulls).
double log_likelihood(const CountBatch& batch, double phi, double v,
                      double prob_floor = 1e-12);

void update_posterior(PosteriorGrid& grid, const CountBatch& batch,
                      double prob_floor = 1e-12);
Estimate point_estimate(const PosteriorGrid& grid);

/// Per-event Fisher information of the four-outcome design for (phi, V),
///   F_ab = sum_k (d_a p_k)(d_b p_k) / p_k.
/// Requires v in (0, 1): the matrix is singular at v = 0 and p_k can vanish
/// at v = 1. Throws std::domain_error outside the open interval.
std::array<std::array<double, 2>, 2> fisher_matrix(double theta0, double phi, double v);

/// phi-phi Fisher information at the optimal operating point
/// 8 theta0 + 2 phi = pi/4 (mod pi/2): 4 v^2 / (2 - v^2) per event.
double fisher_optimal_phase_information(double v);

/// Phase-uncertainty bounds for a probe and M detected events.
struct BoundsReport {
  int photon_number = 2;
  double visibility = 1.0;
  double efficiency = 1.0;
  long long events = 0;

  double bound_heisenberg_product = 0.0;  // dphi * dN >= 1/sqrt(M)
  double bound_classical = 0.0;           // 1 / sqrt(N M)
  double crb_phase_noon = 0.0;            // 1 / (N sqrt(M))
  double crb_phase_noon_operational = 0.0;  // 1 / (N V sqrt(M))
  double crb_phase_fisher = 0.0;  // sqrt(2 - V^2) / (2 V sqrt(M)); NaN unless N = 2
  double bound_classical_lossy = 0.0;   // 1 / sqrt(N eta M)
  double crb_phase_noon_lossy = 0.0;    // 1 / (N V sqrt(eta^N M))
  double v_threshold = 0.0;             // sqrt(1 / (eta N))
  bool advantage = false;               // V > v_threshold
};

BoundsReport bounds_report(const ProbeModel& probe, long long events);

struct EstimatorConfig {
  std::size_t n_phi = 512;
  std::size_t n_v = 101;
  std::size_t n_phi_max = 32768;
  double prob_floor = 1e-12;
  bool refine = true;  // re-grid at higher phi resolution until phi_sd >= 3 cells
  bool sequential_prior = false;  // carry the posterior between batches (comparison mode)
};

struct EstimateResult {
  Estimate estimate;
  PosteriorGrid grid;
};

/// Fresh-prior estimate of one batch on a window centered at window_center,
/// refining the phi resolution until the posterior sd spans >= 3 grid cells.
EstimateResult estimate_batch(const CountBatch& batch, double window_center,
                              const EstimatorConfig& config);

}  // namespace noontrack
