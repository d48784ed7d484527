#include "twigner/fock_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace twigner {

namespace {

DenseOperator kron(const DenseOperator& a, const DenseOperator& b) {
  DenseOperator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// exp(-i H t) for Hermitian H.
DenseOperator hermitian_exp(const DenseOperator& h, double t) {
  Eigen::SelfAdjointEigenSolver<DenseOperator> es(h);
  const Eigen::VectorXcd phases =
      (es.eigenvalues().cast<cplx>() * cplx(0.0, -t)).array().exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// rho_site = sum_i w_i |v_i><v_i|
std::vector<std::pair<double, Eigen::VectorXcd>> site_components(const SiteState& s, int cutoff) {
  const int d = cutoff + 1;
  if (const auto* c = std::get_if<Coherent>(&s)) {
    Eigen::VectorXcd psi(d);
    cplx amp = 1.0;
    for (int n = 0; n < d; ++n) {
      if (n > 0) amp *= c->alpha0 / std::sqrt(static_cast<double>(n));
      psi(n) = amp;
    }
    psi.normalize();
    return {{1.0, psi}};
  }
  std::vector<std::pair<double, Eigen::VectorXcd>> out;
  if (const auto* th = std::get_if<Thermal>(&s)) {
    const double r = th->nbar / (1.0 + th->nbar);
    double p = 1.0, total = 0.0;
    for (int n = 0; n < d; ++n, p *= r) {
      out.emplace_back(p, Eigen::VectorXcd::Unit(d, n));
      total += p;
    }
    for (auto& c : out) c.first /= total;
    return out;
  }
  out.emplace_back(1.0, Eigen::VectorXcd::Unit(d, 0));
  return out;
}

DenseOperator site_density(const SiteState& s, int cutoff) {
  DenseOperator rho = DenseOperator::Zero(cutoff + 1, cutoff + 1);
  for (const auto& [w, v] : site_components(s, cutoff)) rho += w * v * v.adjoint();
  return rho;
}

}  // namespace

// ------------------------------------------------------------------ FockBasis

FockBasis::FockBasis(const BHParams& params) : n_sites_(params.n_sites), cutoff_(params.cutoff) {
  if (n_sites_ < 1) throw DimensionLimit("FockBasis: n_sites must be >= 1");
  if (cutoff_ < 1) throw DimensionLimit("FockBasis: cutoff must be >= 1");
  double dim = 1.0;
  for (int k = 0; k < n_sites_; ++k) dim *= cutoff_ + 1;
  if (dim > static_cast<double>(params.dimension_limit)) {
    throw DimensionLimit("FockBasis: dimension " + std::to_string(static_cast<long long>(dim)) +
                         " exceeds limit " + std::to_string(params.dimension_limit));
  }
  dim_ = static_cast<std::size_t>(dim);
}

std::vector<int> FockBasis::occupation(std::size_t index) const {
  std::vector<int> occ(static_cast<std::size_t>(n_sites_));
  for (int k = n_sites_ - 1; k >= 0; --k) {
    occ[static_cast<std::size_t>(k)] = static_cast<int>(index % static_cast<std::size_t>(cutoff_ + 1));
    index /= static_cast<std::size_t>(cutoff_ + 1);
  }
  return occ;
}

std::size_t FockBasis::index(const std::vector<int>& occupation) const {
  std::size_t idx = 0;
  for (int n : occupation) idx = idx * static_cast<std::size_t>(cutoff_ + 1) + static_cast<std::size_t>(n);
  return idx;
}

DenseOperator annihilation(const FockBasis& basis, int site) {
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  DenseOperator a = DenseOperator::Zero(dim, dim);
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    auto occ = basis.occupation(i);
    const int n = occ[static_cast<std::size_t>(site)];
    if (n == 0) continue;
    occ[static_cast<std::size_t>(site)] = n - 1;
    a(static_cast<Eigen::Index>(basis.index(occ)), static_cast<Eigen::Index>(i)) =
        std::sqrt(static_cast<double>(n));
  }
  return a;
}

DenseOperator build_hamiltonian(const BHParams& p) {
  const FockBasis basis(p);
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  DenseOperator h = DenseOperator::Zero(dim, dim);
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const auto occ = basis.occupation(i);
    const auto col = static_cast<Eigen::Index>(i);
    for (int k = 0; k < p.n_sites; ++k) {
      const double n = occ[static_cast<std::size_t>(k)];
      h(col, col) += p.omega0 * n + 0.5 * p.kappa * n * (n - 1.0);
    }
    if (p.n_sites < 2) continue;
    // -J (a_k^+ a_l + a_l^+ a_k) for each bond (k, k+1), applied to |occ>
    for (int k = 0; k < p.n_sites; ++k) {
      const auto l = static_cast<std::size_t>((k + 1) % p.n_sites);
      const auto kk = static_cast<std::size_t>(k);
      for (auto [from, to] : {std::pair{l, kk}, std::pair{kk, l}}) {
        if (occ[from] == 0 || occ[to] == p.cutoff) continue;
        auto m = occ;
        const double amp = std::sqrt(static_cast<double>(m[from]) * (m[to] + 1.0));
        --m[from];
        ++m[to];
        h(static_cast<Eigen::Index>(basis.index(m)), col) -= p.hop_J * amp;
      }
    }
  }
  return h;
}

DenseOperator initial_density(const FockBasis& basis, const InitialStateSpec& spec) {
  if (static_cast<int>(spec.size()) != basis.n_sites()) {
    throw UnsupportedState("initial_density: one state per site required");
  }
  DenseOperator rho = DenseOperator::Identity(1, 1);
  for (const auto& s : spec) rho = kron(rho, site_density(s, basis.cutoff()));
  return rho;
}

// ----------------------------------------------------------------- FockOracle

FockOracle::FockOracle(const BHParams& params, const InitialStateSpec& initial, SourceProfile src)
    : params_(params), basis_(params), src_(std::move(src)) {
  for (int k = 0; k < params.n_sites; ++k) {
    a_.push_back(annihilation(basis_, k));
    a_sparse_.push_back(a_.back().sparseView());
  }
  h_ = build_hamiltonian(params);
  rho0_ = initial_density(basis_, initial);

  components_ = {{1.0, Eigen::VectorXcd::Ones(1)}};
  for (const auto& s : initial) {
    std::vector<std::pair<double, Eigen::VectorXcd>> next;
    for (const auto& [w, v] : components_) {
      for (const auto& [ws, vs] : site_components(s, params.cutoff)) {
        Eigen::VectorXcd kv(v.size() * vs.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) kv.segment(i * vs.size(), vs.size()) = v(i) * vs;
        next.emplace_back(w * ws, std::move(kv));
      }
    }
    components_ = std::move(next);
  }
  std::erase_if(components_, [](const auto& c) { return c.first < 1e-18; });

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_.real());
  energies_ = es.eigenvalues();
  eigvecs_ = es.eigenvectors();

  std::sort(src_.kicks.begin(), src_.kicks.end(),
            [](const Kick& x, const Kick& y) { return x.time < y.time; });
  for (const auto& k : src_.kicks) {
    if (k.site < 0 || k.site >= params.n_sites) throw Error("FockOracle: kick site out of range");
    if (k.time < 0.0) throw Error("FockOracle: kick before the initial time");
    kick_unitaries_.push_back(kick_unitary(k));
  }
}

Eigen::VectorXcd FockOracle::apply_static(double dt, const Eigen::VectorXcd& v) const {
  if (dt == 0.0) return v;
  // V is real: keep the products real.
  const Eigen::VectorXd re = eigvecs_.transpose() * v.real();
  const Eigen::VectorXd im = eigvecs_.transpose() * v.imag();
  Eigen::VectorXd wr(re.size()), wi(re.size());
  for (Eigen::Index i = 0; i < re.size(); ++i) {
    const cplx w = cplx(re(i), im(i)) * std::polar(1.0, -energies_(i) * dt);
    wr(i) = w.real();
    wi(i) = w.imag();
  }
  Eigen::VectorXcd out(re.size());
  out.real() = eigvecs_ * wr;
  out.imag() = eigvecs_ * wi;
  return out;
}

Eigen::VectorXcd FockOracle::apply_propagator(double t, const Eigen::VectorXcd& v, bool adjoint) const {
  if (!src_.smooth.empty()) {
    const DenseOperator u = propagator(t);
    return adjoint ? Eigen::VectorXcd(u.adjoint() * v) : Eigen::VectorXcd(u * v);
  }
  if (src_.kicks.empty()) return apply_static(adjoint ? -t : t, v);
  if (t < 0.0) throw OrderViolation("propagator: backward evolution with sources");
  // Segments [0, tau_1), ..., [tau_m, t) for kicks with tau < t.
  std::size_t m = 0;
  while (m < src_.kicks.size() && src_.kicks[m].time < t) ++m;
  Eigen::VectorXcd w = v;
  if (!adjoint) {
    double prev = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      w = kick_unitaries_[i] * apply_static(src_.kicks[i].time - prev, w);
      prev = src_.kicks[i].time;
    }
    return apply_static(t - prev, w);
  }
  double next = t;
  for (std::size_t i = m; i-- > 0;) {
    w = kick_unitaries_[i].adjoint() * apply_static(-(next - src_.kicks[i].time), w);
    next = src_.kicks[i].time;
  }
  return apply_static(-next, w);
}

DenseOperator FockOracle::static_propagator(double dt) const {
  const Eigen::VectorXcd phases = (energies_.cast<cplx>() * cplx(0.0, -dt)).array().exp().matrix();
  const DenseOperator v = eigvecs_.cast<cplx>();
  return v * phases.asDiagonal() * v.transpose();
}

DenseOperator FockOracle::kick_unitary(const Kick& kick) const {
  // exp(i G) with G = a^+ eps + a eps^*
  const DenseOperator& a = a_[static_cast<std::size_t>(kick.site)];
  const DenseOperator g = kick.amplitude * DenseOperator(a.adjoint()) + std::conj(kick.amplitude) * a;
  return hermitian_exp(g, -1.0);
}

DenseOperator FockOracle::evolve_segment(double t1, double t0) const {
  if (src_.empty()) return static_propagator(t1 - t0);
  if (t1 < t0) throw OrderViolation("propagator: backward evolution with sources");
  const auto dim = static_cast<Eigen::Index>(basis_.dimension());
  DenseOperator u = DenseOperator::Identity(dim, dim);

  auto free_part = [&](double from, double to) {
    if (to <= from) return;
    if (src_.smooth.empty()) {
      u = static_propagator(to - from) * u;
      return;
    }
    const int steps = std::max(1, static_cast<int>(std::ceil((to - from) / smooth_substep - 1e-9)));
    const double h = (to - from) / steps;
    for (int s = 0; s < steps; ++s) {
      const double tm = from + (s + 0.5) * h;
      DenseOperator hp = h_;
      for (int k = 0; k < params_.n_sites; ++k) {
        const cplx sk = src_.smooth_at(k, tm);
        if (sk == cplx{}) continue;
        const DenseOperator& a = a_[static_cast<std::size_t>(k)];
        hp -= sk * DenseOperator(a.adjoint()) + std::conj(sk) * a;
      }
      u = hermitian_exp(hp, h) * u;
    }
  };

  // A kick at time tau acts on every time strictly after tau.
  double t = t0;
  for (const auto& k : src_.kicks) {
    if (k.time < t0 || k.time >= t1) continue;
    free_part(t, k.time);
    u = kick_unitary(k) * u;
    t = k.time;
  }
  free_part(t, t1);
  return u;
}

DenseOperator FockOracle::propagator(double t) const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = u_cache_.find(t);
    if (it != u_cache_.end()) return *it->second;
  }
  auto u = std::make_shared<const DenseOperator>(evolve_segment(t, 0.0));
  std::lock_guard<std::mutex> lock(cache_mutex_);
  u_cache_.emplace(t, u);
  return *u;
}

DenseOperator FockOracle::propagator(double t1, double t0) const { return evolve_segment(t1, t0); }

DenseOperator FockOracle::heisenberg(int site, bool dagger, double t) const {
  if (site < 0 || site >= params_.n_sites) throw Error("heisenberg: site out of range");
  const auto key = std::make_tuple(site, dagger, t);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = h_cache_.find(key);
    if (it != h_cache_.end()) return *it->second;
  }
  const DenseOperator u = propagator(t);
  DenseOperator op = u.adjoint() * a_[static_cast<std::size_t>(site)] * u;
  if (dagger) op.adjointInPlace();
  auto ptr = std::make_shared<const DenseOperator>(std::move(op));
  std::lock_guard<std::mutex> lock(cache_mutex_);
  h_cache_.emplace(key, ptr);
  return *ptr;
}

cplx FockOracle::trace_product(const FactorList& word) const {
  for (const auto& f : word) {
    if (f.mode < 0 || f.mode >= params_.n_sites) throw Error("multitime_average: site out of range");
  }
  cplx sum = 0.0;
  for (const auto& [w, psi] : components_) {
    Eigen::VectorXcd v = psi;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
      const auto& a = a_sparse_[static_cast<std::size_t>(it->mode)];
      v = apply_propagator(it->time, v, false);
      v = it->dagger ? Eigen::VectorXcd(a.adjoint() * v) : Eigen::VectorXcd(a * v);
      v = apply_propagator(it->time, v, true);
    }
    sum += w * psi.dot(v);
  }
  return sum;
}

cplx FockOracle::multitime_average(const FactorList& factors, Arrangement arrangement,
                                   CoincidentTimes coincident) const {
  switch (arrangement) {
    case Arrangement::ExplicitOrder:
      return trace_product(factors);
    case Arrangement::DoubleTimeOrdered: {
      FactorList minus, plus;
      for (const auto& f : factors) {
        if (!f.branch) throw MissingBranchTag("multitime_average: double-time order needs branch tags");
        (*f.branch == Branch::Reverse ? minus : plus).push_back(f);
      }
      return trace_product(double_time_ordered(minus, plus).terms().begin()->first);
    }
    case Arrangement::TimeNormal: {
      FactorList creators, annihilators;
      for (const auto& f : factors) (f.dagger ? creators : annihilators).push_back(f);
      return trace_product(double_time_ordered(creators, annihilators).terms().begin()->first);
    }
    case Arrangement::TimeSymmetric:
      break;
  }
  if (factors.empty()) return rho0_.trace();

  FactorList ordered = factors;
  if (coincident == CoincidentTimes::ContinuityLimit) {
    // Rank by (time, position): equal times are resolved as a limit from one side.
    std::vector<std::size_t> idx(factors.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t i, std::size_t j) { return factors[i].time < factors[j].time; });
    for (std::size_t r = 0; r < idx.size(); ++r) ordered[idx[r]].generic_order = static_cast<long>(r);
  }
  cplx sum = 0.0;
  const auto words = schwinger_enumerate(ordered);
  for (const auto& w : words) sum += trace_product(w.factors);
  return sum / static_cast<double>(words.size());
}

cplx FockOracle::kubo_response_exact(int k, double t_probe, int k_prime, double t_source) const {
  if (!(t_probe > t_source)) throw OrderViolation("kubo_response_exact: t_probe must exceed t_source");
  const FactorList fwd{ann(k_prime, t_probe), cre(k, t_source)};
  const FactorList bwd{cre(k, t_source), ann(k_prime, t_probe)};
  return cplx(0.0, 1.0) * (trace_product(fwd) - trace_product(bwd));
}

// ------------------------------------------------------------- free functions

DenseOperator evolve(const DenseOperator& rho, double t0, double t1, const BHParams& params,
                     const SourceProfile& src) {
  const FockOracle oracle(params, InitialStateSpec(static_cast<std::size_t>(params.n_sites), Vacuum{}), src);
  const DenseOperator u = oracle.propagator(t1, t0);
  return u * rho * u.adjoint();
}

cplx multitime_average(const InitialStateSpec& initial, const FactorList& factors,
                       Arrangement arrangement, const BHParams& params, const SourceProfile& src) {
  return FockOracle(params, initial, src).multitime_average(factors, arrangement);
}

cplx kubo_response_exact(int k, double t_probe, int k_prime, double t_source,
                         const BHParams& params, const InitialStateSpec& initial) {
  return FockOracle(params, initial).kubo_response_exact(k, t_probe, k_prime, t_source);
}

}  // namespace twigner
