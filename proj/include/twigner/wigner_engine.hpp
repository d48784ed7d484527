#pragma once

// Truncated-Wigner Monte Carlo for the ring: Wigner sampling of the initial
// state, deterministic trajectories, multitime moment estimators and the
// response-corrected time-normal two-point function.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "twigner/errors.hpp"
#include "twigner/model.hpp"

namespace twigner {

using Rng = std::mt19937_64;
using PhasePoint = std::vector<cplx>;  // a_k, one entry per site

/// Generator of trajectory `index`, derived only from (master_seed, index).
Rng trajectory_rng(std::uint64_t master_seed, std::uint64_t index);

/// alpha = alpha0 + eta, eta complex Gaussian with E|eta|^2 = 1/2 (coherent,
/// vacuum) or nbar + 1/2 (thermal). Throws UnsupportedState for nbar < 0.
PhasePoint sample_initial(const InitialStateSpec& spec, Rng& rng);

/// n_points equally spaced times 0, ..., t_max.
struct TimeGrid {
  double t_max = 1.0;
  int n_points = 2;

  std::vector<double> times() const;
  double spacing() const { return n_points > 1 ? t_max / (n_points - 1) : 0.0; }
  /// Index of a grid time; throws TimeOffGrid.
  std::size_t index_of(double t) const;
};

struct EnsembleConfig {
  int n_traj = 1000;
  std::uint64_t master_seed = 1;
  double dt = 1e-3;
  int threads = 0;  // 0: OpenMP default
};

struct SimulationConfig {
  BHParams params;
  InitialStateSpec initial;
  SourceProfile src;
  TimeGrid grid;
  EnsembleConfig ensemble;
};

/// RK4 integration of
///   i da_k/dt = (w0 - kappa) a_k + kappa |a_k|^2 a_k - J (a_{k+1} + a_{k-1}) - s_k(t)
/// returning a_k at every grid time. Kicks jump a_k -> a_k + i*amplitude and
/// are seen at times strictly after the kick. Throws StepMismatch unless dt
/// divides the grid spacing and every kick time is a multiple of dt.
std::vector<PhasePoint> integrate_trajectory(const PhasePoint& alpha0, const BHParams& p,
                                             const SourceProfile& src, const TimeGrid& grid, double dt);

struct TrajectoryEnsemble {
  int n_traj = 0;
  int n_sites = 0;
  std::uint64_t master_seed = 0;
  double dt = 0.0;
  TimeGrid grid;
  SourceProfile kicks;
  std::vector<cplx> paths;  // [trajectory][grid point][site]

  cplx at(int traj, std::size_t point, int site) const {
    return paths[(static_cast<std::size_t>(traj) * static_cast<std::size_t>(grid.n_points) + point) *
                     static_cast<std::size_t>(n_sites) +
                 static_cast<std::size_t>(site)];
  }
};

TrajectoryEnsemble run_ensemble(const SimulationConfig& cfg);

struct Probe {
  int site = 0;
  bool dagger = false;
  double time = 0.0;
};

enum class RequestOrdering { TimeSymmetric, TimeNormalTwoPoint };

struct CorrelatorRequest {
  std::vector<Probe> factors;
  RequestOrdering ordering = RequestOrdering::TimeSymmetric;
};

struct EstimatorResult {
  cplx mean;
  cplx std_error;  // componentwise sample std-dev / sqrt(n)
  int n_traj = 0;
};

/// Mean and componentwise standard error of per-trajectory samples.
EstimatorResult summarize(const std::vector<cplx>& samples);

/// Ensemble mean of the product of a / a* factors: estimates the
/// time-symmetric average (coinciding times give its continuity limit).
/// Throws TimeOffGrid.
EstimatorResult estimate_time_symmetric(const TrajectoryEnsemble& ens, const CorrelatorRequest& req);

enum class Wirtinger { Source, ConjugateSource };  // d/ds or d/ds*

struct ResponseResult {
  EstimatorResult value;   // Richardson-extrapolated derivative
  EstimatorResult coarse;  // finite difference at epsilon
  EstimatorResult fine;    // finite difference at epsilon / 2
  double epsilon = 0.0;
  double bias_estimate = 0.0;  // |coarse - extrapolated|
  std::vector<cplx> samples;   // per-trajectory extrapolated derivative
};

/// Default kick size: 1e-3 times the rms initial amplitude (at least 1e-3).
double default_epsilon(const InitialStateSpec& spec);

/// d<A_obs(t_obs)>/ds_k(t_kick) (or d/ds*) by central differences of kicked
/// runs (+-eps, +-i*eps) sharing the random numbers of trajectory i.
/// Throws TimeOffGrid. epsilon <= 0 selects default_epsilon.
ResponseResult response_derivative(const SimulationConfig& cfg, int kick_site, double kick_time,
                                   const Probe& observe, Wirtinger wrt, double epsilon = 0.0);

struct TimeNormalResult {
  EstimatorResult symmetric;       // <T^W A_k^+(t) A_k'(t')>
  EstimatorResult correction;      // (i/2)[...] response term
  EstimatorResult time_normal;     // assembled value
  ResponseResult response;         // the non-vanishing derivative
  double bias_estimate = 0.0;
};

/// Time-normal <A_k^+(t) A_k'(t')> assembled from the symmetric estimate and
/// the linear response to a source. Throws EqualTime if t == t'.
TimeNormalResult time_normal_two_point(int k, double t, int k_prime, double t_prime,
                                       const SimulationConfig& cfg, double epsilon = 0.0);

/// The nonzero third-order cumulants (kappa a / 2, kappa a* / 2) of the noise
/// dropped by the truncation. Data only.
std::pair<cplx, cplx> third_order_cumulants(cplx a, double kappa);

double total_norm(const PhasePoint& a);

/// sum_k [w0|a_k|^2 + kappa/2 |a_k|^4 - kappa |a_k|^2] - J sum_bonds (a_k^* a_{k+1} + c.c.)
double classical_energy(const PhasePoint& a, const BHParams& p);

}  // namespace twigner
