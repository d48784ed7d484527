#include "twigner/wigner_engine.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace twigner {

namespace {

constexpr cplx kI(0.0, 1.0);

// Fixed-step RK4 over the lattice t_j = j * dt with per-step kick lookup.
class Stepper {
 public:
  Stepper(const BHParams& p, const SourceProfile& src, double dt) : p_(p), src_(src), dt_(dt) {
    const auto n = static_cast<std::size_t>(p.n_sites);
    k1_.resize(n);
    k2_.resize(n);
    k3_.resize(n);
    k4_.resize(n);
    tmp_.resize(n);
    for (const auto& k : src.kicks) {
      const double j = k.time / dt;
      const double jr = std::round(j);
      if (std::abs(j - jr) > 1e-9 * std::max(1.0, std::abs(j)) || jr < 0) {
        throw StepMismatch("kick time " + std::to_string(k.time) + " is not a multiple of dt");
      }
      if (k.site < 0 || k.site >= p.n_sites) throw Error("kick site out of range");
      kick_steps_.emplace_back(static_cast<long>(jr), &k);
    }
    std::sort(kick_steps_.begin(), kick_steps_.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
  }

  // Advance from step j0 to j1; kicks at step j act when leaving t_j.
  void advance(PhasePoint& a, long j0, long j1) {
    auto kick = std::lower_bound(kick_steps_.begin(), kick_steps_.end(), j0,
                                 [](const auto& x, long j) { return x.first < j; });
    for (long j = j0; j < j1; ++j) {
      while (kick != kick_steps_.end() && kick->first == j) {
        a[static_cast<std::size_t>(kick->second->site)] += kI * kick->second->amplitude;
        ++kick;
      }
      step(a, static_cast<double>(j) * dt_);
    }
  }

 private:
  void drift(const PhasePoint& a, double t, PhasePoint& out) const {
    const int n = p_.n_sites;
    for (int k = 0; k < n; ++k) {
      const cplx ak = a[static_cast<std::size_t>(k)];
      cplx rhs = (p_.omega0 - p_.kappa) * ak + p_.kappa * std::norm(ak) * ak;
      if (n > 1) {
        rhs -= p_.hop_J * (a[static_cast<std::size_t>((k + 1) % n)] +
                           a[static_cast<std::size_t>((k + n - 1) % n)]);
      }
      if (!src_.smooth.empty()) rhs -= src_.smooth_at(k, t);
      out[static_cast<std::size_t>(k)] = -kI * rhs;
    }
  }

  void step(PhasePoint& a, double t) {
    const double h = dt_;
    const std::size_t n = a.size();
    drift(a, t, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = a[i] + 0.5 * h * k1_[i];
    drift(tmp_, t + 0.5 * h, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = a[i] + 0.5 * h * k2_[i];
    drift(tmp_, t + 0.5 * h, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = a[i] + h * k3_[i];
    drift(tmp_, t + h, k4_);
    for (std::size_t i = 0; i < n; ++i) a[i] += (h / 6.0) * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

  const BHParams& p_;
  const SourceProfile& src_;
  double dt_;
  std::vector<std::pair<long, const Kick*>> kick_steps_;
  PhasePoint k1_, k2_, k3_, k4_, tmp_;
};

// Number of dt steps in `span`; throws unless it is an integer.
long steps_in(double span, double dt) {
  if (!(dt > 0.0)) throw StepMismatch("dt must be positive");
  const double r = span / dt;
  const double rr = std::round(r);
  if (std::abs(r - rr) > 1e-9 * std::max(1.0, r)) {
    throw StepMismatch("dt = " + std::to_string(dt) + " does not divide " + std::to_string(span));
  }
  return static_cast<long>(rr);
}

void check_sites(const SimulationConfig& cfg) {
  if (static_cast<int>(cfg.initial.size()) != cfg.params.n_sites) {
    throw UnsupportedState("initial state must list one entry per site");
  }
}

int thread_count(int requested) { return requested > 0 ? requested : omp_get_max_threads(); }

cplx observe(const PhasePoint& a, const Probe& p) {
  const cplx v = a[static_cast<std::size_t>(p.site)];
  return p.dagger ? std::conj(v) : v;
}

}  // namespace

Rng trajectory_rng(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

PhasePoint sample_initial(const InitialStateSpec& spec, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  PhasePoint out;
  out.reserve(spec.size());
  for (const auto& s : spec) {
    cplx mean{};
    double var = 0.5;  // E|eta|^2
    if (const auto* c = std::get_if<Coherent>(&s)) {
      mean = c->alpha0;
    } else if (const auto* th = std::get_if<Thermal>(&s)) {
      if (!(th->nbar >= 0.0)) throw UnsupportedState("thermal occupation must be >= 0");
      var = th->nbar + 0.5;
    }
    const double sd = std::sqrt(var / 2.0);
    const double x = gauss(rng);
    const double y = gauss(rng);
    out.push_back(mean + sd * cplx(x, y));
  }
  return out;
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> t(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) t[static_cast<std::size_t>(i)] = i == n_points - 1 ? t_max : i * spacing();
  return t;
}

std::size_t TimeGrid::index_of(double t) const {
  const double tol = 1e-9 * std::max(1.0, t_max);
  if (n_points == 1) {
    if (std::abs(t) <= tol) return 0;
  } else {
    const double r = t / spacing();
    const double rr = std::round(r);
    if (rr >= 0 && rr < n_points && std::abs(t - rr * spacing()) <= tol) return static_cast<std::size_t>(rr);
  }
  throw TimeOffGrid("time " + std::to_string(t) + " is not on the grid");
}

std::vector<PhasePoint> integrate_trajectory(const PhasePoint& alpha0, const BHParams& p,
                                             const SourceProfile& src, const TimeGrid& grid, double dt) {
  if (static_cast<int>(alpha0.size()) != p.n_sites) throw Error("integrate_trajectory: size mismatch");
  const long stride = grid.n_points > 1 ? steps_in(grid.spacing(), dt) : 0;
  Stepper stepper(p, src, dt);
  std::vector<PhasePoint> path;
  path.reserve(static_cast<std::size_t>(grid.n_points));
  PhasePoint a = alpha0;
  path.push_back(a);
  for (int i = 1; i < grid.n_points; ++i) {
    stepper.advance(a, (i - 1) * stride, i * stride);
    path.push_back(a);
  }
  return path;
}

TrajectoryEnsemble run_ensemble(const SimulationConfig& cfg) {
  check_sites(cfg);
  TrajectoryEnsemble ens;
  ens.n_traj = cfg.ensemble.n_traj;
  ens.n_sites = cfg.params.n_sites;
  ens.master_seed = cfg.ensemble.master_seed;
  ens.dt = cfg.ensemble.dt;
  ens.grid = cfg.grid;
  ens.kicks = cfg.src;
  const std::size_t per = static_cast<std::size_t>(cfg.grid.n_points) * static_cast<std::size_t>(ens.n_sites);
  ens.paths.assign(per * static_cast<std::size_t>(ens.n_traj), cplx{});
  // Validate step/grid compatibility once, outside the parallel region.
  if (cfg.grid.n_points > 1) steps_in(cfg.grid.spacing(), cfg.ensemble.dt);
  { Stepper probe(cfg.params, cfg.src, cfg.ensemble.dt); }

#pragma omp parallel for schedule(static) num_threads(thread_count(cfg.ensemble.threads))
  for (int i = 0; i < ens.n_traj; ++i) {
    Rng rng = trajectory_rng(cfg.ensemble.master_seed, static_cast<std::uint64_t>(i));
    const PhasePoint a0 = sample_initial(cfg.initial, rng);
    const auto path = integrate_trajectory(a0, cfg.params, cfg.src, cfg.grid, cfg.ensemble.dt);
    cplx* out = ens.paths.data() + per * static_cast<std::size_t>(i);
    for (const auto& pt : path)
      for (const auto& v : pt) *out++ = v;
  }
  return ens;
}

EstimatorResult summarize(const std::vector<cplx>& samples) {
  EstimatorResult r;
  r.n_traj = static_cast<int>(samples.size());
  if (samples.empty()) return r;
  cplx sum{};
  for (const auto& s : samples) sum += s;
  const double n = static_cast<double>(samples.size());
  r.mean = sum / n;
  if (samples.size() < 2) return r;
  double vr = 0.0, vi = 0.0;
  for (const auto& s : samples) {
    vr += (s.real() - r.mean.real()) * (s.real() - r.mean.real());
    vi += (s.imag() - r.mean.imag()) * (s.imag() - r.mean.imag());
  }
  r.std_error = {std::sqrt(vr / (n - 1.0) / n), std::sqrt(vi / (n - 1.0) / n)};
  return r;
}

EstimatorResult estimate_time_symmetric(const TrajectoryEnsemble& ens, const CorrelatorRequest& req) {
  if (req.ordering != RequestOrdering::TimeSymmetric) {
    throw Error("estimate_time_symmetric: request is not time-symmetric");
  }
  std::vector<std::pair<std::size_t, const Probe*>> where;
  for (const auto& f : req.factors) {
    if (f.site < 0 || f.site >= ens.n_sites) throw Error("estimate_time_symmetric: site out of range");
    where.emplace_back(ens.grid.index_of(f.time), &f);
  }
  std::vector<cplx> samples(static_cast<std::size_t>(ens.n_traj));
  for (int i = 0; i < ens.n_traj; ++i) {
    cplx prod = 1.0;
    for (const auto& [pt, f] : where) {
      const cplx v = ens.at(i, pt, f->site);
      prod *= f->dagger ? std::conj(v) : v;
    }
    samples[static_cast<std::size_t>(i)] = prod;
  }
  return summarize(samples);
}

double default_epsilon(const InitialStateSpec& spec) {
  double ms = 0.0;
  for (const auto& s : spec) {
    if (const auto* c = std::get_if<Coherent>(&s)) ms += std::norm(c->alpha0) + 0.5;
    else if (const auto* th = std::get_if<Thermal>(&s)) ms += th->nbar + 0.5;
    else ms += 0.5;
  }
  const double rms = spec.empty() ? 1.0 : std::sqrt(ms / static_cast<double>(spec.size()));
  return 1e-3 * std::max(1.0, rms);
}

ResponseResult response_derivative(const SimulationConfig& cfg, int kick_site, double kick_time,
                                   const Probe& obs, Wirtinger wrt, double epsilon) {
  check_sites(cfg);
  cfg.grid.index_of(kick_time);
  cfg.grid.index_of(obs.time);
  if (kick_site < 0 || kick_site >= cfg.params.n_sites || obs.site < 0 || obs.site >= cfg.params.n_sites) {
    throw Error("response_derivative: site out of range");
  }
  const double eps = epsilon > 0.0 ? epsilon : default_epsilon(cfg.initial);
  const double dt = cfg.ensemble.dt;
  const long jk = steps_in(kick_time, dt);
  const long jo = steps_in(obs.time, dt);
  { Stepper probe(cfg.params, cfg.src, dt); }

  const int n = cfg.ensemble.n_traj;
  std::vector<cplx> coarse(static_cast<std::size_t>(n)), fine(static_cast<std::size_t>(n)),
      extrap(static_cast<std::size_t>(n));
  const cplx sign = wrt == Wirtinger::Source ? -kI : kI;

#pragma omp parallel for schedule(static) num_threads(thread_count(cfg.ensemble.threads))
  for (int i = 0; i < n; ++i) {
    Rng rng = trajectory_rng(cfg.ensemble.master_seed, static_cast<std::uint64_t>(i));
    PhasePoint base = sample_initial(cfg.initial, rng);
    Stepper stepper(cfg.params, cfg.src, dt);
    cplx d[2]{};
    if (jo > jk) {
      // A kick acts only on later times, so earlier observations do not respond.
      stepper.advance(base, 0, jk);
      auto run = [&](cplx amp) {
        PhasePoint a = base;
        a[static_cast<std::size_t>(kick_site)] += kI * amp;
        stepper.advance(a, jk, jo);
        return observe(a, obs);
      };
      for (int level = 0; level < 2; ++level) {
        const double e = level == 0 ? eps : eps / 2.0;
        const cplx dx = (run(e) - run(-e)) / (2.0 * e);
        const cplx dy = (run(kI * e) - run(-kI * e)) / (2.0 * e);
        d[level] = 0.5 * (dx + sign * dy);
      }
    }
    const auto idx = static_cast<std::size_t>(i);
    coarse[idx] = d[0];
    fine[idx] = d[1];
    extrap[idx] = (4.0 * d[1] - d[0]) / 3.0;
  }

  ResponseResult r;
  r.epsilon = eps;
  r.coarse = summarize(coarse);
  r.fine = summarize(fine);
  r.value = summarize(extrap);
  r.bias_estimate = std::abs(r.coarse.mean - r.value.mean);
  r.samples = std::move(extrap);
  return r;
}

TimeNormalResult time_normal_two_point(int k, double t, int k_prime, double t_prime,
                                       const SimulationConfig& cfg, double epsilon) {
  if (t == t_prime) throw EqualTime("time_normal_two_point: t and t' must differ");
  check_sites(cfg);
  const TrajectoryEnsemble ens = run_ensemble(cfg);
  CorrelatorRequest sym{{Probe{k, true, t}, Probe{k_prime, false, t_prime}}, RequestOrdering::TimeSymmetric};
  const std::size_t it = ens.grid.index_of(t), itp = ens.grid.index_of(t_prime);

  TimeNormalResult r;
  // Only the derivative whose source precedes its observation survives.
  cplx factor;
  if (t_prime > t) {
    r.response = response_derivative(cfg, k, t, Probe{k_prime, false, t_prime}, Wirtinger::Source, epsilon);
    factor = 0.5 * kI;
  } else {
    r.response =
        response_derivative(cfg, k_prime, t_prime, Probe{k, true, t}, Wirtinger::ConjugateSource, epsilon);
    factor = -0.5 * kI;
  }
  const auto n = static_cast<std::size_t>(ens.n_traj);
  std::vector<cplx> s(n), c(n), tn(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = std::conj(ens.at(static_cast<int>(i), it, k)) * ens.at(static_cast<int>(i), itp, k_prime);
    c[i] = factor * r.response.samples[i];
    tn[i] = s[i] + c[i];
  }
  r.symmetric = summarize(s);
  r.correction = summarize(c);
  r.time_normal = summarize(tn);
  r.bias_estimate = 0.5 * r.response.bias_estimate;
  return r;
}

std::pair<cplx, cplx> third_order_cumulants(cplx a, double kappa) {
  return {0.5 * kappa * a, 0.5 * kappa * std::conj(a)};
}

double total_norm(const PhasePoint& a) {
  double s = 0.0;
  for (const auto& v : a) s += std::norm(v);
  return s;
}

double classical_energy(const PhasePoint& a, const BHParams& p) {
  const int n = static_cast<int>(a.size());
  double e = 0.0;
  for (int k = 0; k < n; ++k) {
    const double nk = std::norm(a[static_cast<std::size_t>(k)]);
    e += p.omega0 * nk + 0.5 * p.kappa * nk * nk - p.kappa * nk;
  }
  if (n > 1) {
    for (int k = 0; k < n; ++k) {
      const cplx hop = std::conj(a[static_cast<std::size_t>(k)]) * a[static_cast<std::size_t>((k + 1) % n)];
      e -= p.hop_J * 2.0 * hop.real();
    }
  }
  return e;
}

}  // namespace twigner
