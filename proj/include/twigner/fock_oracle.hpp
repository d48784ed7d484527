#pragma once

// Exact reference dynamics of the ring in a truncated Fock space.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "twigner/model.hpp"
#include "twigner/operator_algebra.hpp"

namespace twigner {

using DenseOperator = Eigen::MatrixXcd;

/// Occupation vectors (n_0, ..., n_{N-1}), 0 <= n_k <= cutoff; site 0 is the
/// most significant digit of the index.
class FockBasis {
 public:
  /// Throws DimensionLimit if (cutoff+1)^n_sites exceeds params.dimension_limit.
  explicit FockBasis(const BHParams& params);

  int n_sites() const { return n_sites_; }
  int cutoff() const { return cutoff_; }
  std::size_t dimension() const { return dim_; }
  std::vector<int> occupation(std::size_t index) const;
  std::size_t index(const std::vector<int>& occupation) const;

 private:
  int n_sites_;
  int cutoff_;
  std::size_t dim_;
};

DenseOperator annihilation(const FockBasis& basis, int site);

/// sum_k [w0 n_k + kappa/2 a_k^+2 a_k^2] - J sum_k (a_k^+ a_{k+1} + h.c.).
DenseOperator build_hamiltonian(const BHParams& params);

/// Product state over sites. Coherent states are truncated and renormalized;
/// thermal states use p_n = nbar^n / (1 + nbar)^(n+1), renormalized.
DenseOperator initial_density(const FockBasis& basis, const InitialStateSpec& spec);

enum class Arrangement { ExplicitOrder, DoubleTimeOrdered, TimeSymmetric, TimeNormal };

/// Coincident times in a time-symmetric request: rejected, or evaluated as the
/// continuity limit (ties broken by input position).
enum class CoincidentTimes { Reject, ContinuityLimit };

class FockOracle {
 public:
  /// The initial state is prepared at t = 0; all requested times must be >= 0.
  FockOracle(const BHParams& params, const InitialStateSpec& initial, SourceProfile src = {});

  const BHParams& params() const { return params_; }
  const FockBasis& basis() const { return basis_; }
  const DenseOperator& hamiltonian() const { return h_; }
  const DenseOperator& density() const { return rho0_; }

  /// U(t, 0) including sources. Cached; thread-safe.
  DenseOperator propagator(double t) const;

  /// U(t1, t0), t1 >= t0.
  DenseOperator propagator(double t1, double t0) const;

  /// U^+(t) a_k U(t) (or its adjoint).
  DenseOperator heisenberg(int site, bool dagger, double t) const;

  /// Tr(rho X_1 ... X_n) for the arrangement of the given factors:
  ///  ExplicitOrder      factors as listed
  ///  DoubleTimeOrdered  T-(reverse-tagged) T+(forward-tagged)
  ///  TimeSymmetric      2^{-(N-1)} sum over Schwinger products
  ///  TimeNormal         T-(creators) T+(annihilators)
  cplx multitime_average(const FactorList& factors, Arrangement arrangement,
                         CoincidentTimes coincident = CoincidentTimes::Reject) const;

  /// i <[A_{k'}(t_probe), A_k^+(t_source)]>. Throws OrderViolation unless
  /// t_probe > t_source.
  cplx kubo_response_exact(int k, double t_probe, int k_prime, double t_source) const;

  /// Substep used for smooth source profiles.
  double smooth_substep = 1e-3;

 private:
  DenseOperator static_propagator(double dt) const;
  DenseOperator kick_unitary(const Kick& kick) const;
  DenseOperator evolve_segment(double t1, double t0) const;
  Eigen::VectorXcd apply_static(double dt, const Eigen::VectorXcd& v) const;
  // U(t,0) v or U(t,0)^+ v.
  Eigen::VectorXcd apply_propagator(double t, const Eigen::VectorXcd& v, bool adjoint) const;
  cplx trace_product(const FactorList& word) const;

  BHParams params_;
  FockBasis basis_;
  SourceProfile src_;
  std::vector<DenseOperator> a_;
  std::vector<Eigen::SparseMatrix<cplx>> a_sparse_;
  DenseOperator h_;
  DenseOperator rho0_;
  // rho0 = sum_i w_i |psi_i><psi_i|
  std::vector<std::pair<double, Eigen::VectorXcd>> components_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd eigvecs_;  // H is real symmetric
  std::vector<DenseOperator> kick_unitaries_;

  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const DenseOperator>> u_cache_;
  mutable std::map<std::tuple<int, bool, double>, std::shared_ptr<const DenseOperator>> h_cache_;
};

/// rho(t1) = U(t1,t0) rho U^+(t1,t0) for the given model and sources.
DenseOperator evolve(const DenseOperator& rho, double t0, double t1, const BHParams& params,
                     const SourceProfile& src);

cplx multitime_average(const InitialStateSpec& initial, const FactorList& factors,
                       Arrangement arrangement, const BHParams& params,
                       const SourceProfile& src = {});

cplx kubo_response_exact(int k, double t_probe, int k_prime, double t_source,
                         const BHParams& params, const InitialStateSpec& initial);

}  // namespace twigner
