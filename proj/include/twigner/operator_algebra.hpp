#pragma once

// Symbolic bosonic ladder-operator algebra.
//
// Factors are free-field Heisenberg operators a_k(t) = a_k e^{-i w0 t},
// a_k^+(t) = a_k^+ e^{+i w0 t}. Products are kept verbatim until normal_form,
// which commutes them into creation-left order mode by mode and folds the
// time dependence into the coefficient.

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twigner/contractions.hpp"
#include "twigner/errors.hpp"
#include "twigner/model.hpp"

namespace twigner {

struct LadderFactor {
  int mode = 0;
  bool dagger = false;
  double time = 0.0;
  std::optional<Branch> branch;
  // When set, replaces `time` in every ordering decision.
  std::optional<long> generic_order;

  friend bool operator==(const LadderFactor&, const LadderFactor&) = default;
  friend auto operator<=>(const LadderFactor&, const LadderFactor&) = default;
};

LadderFactor ann(int mode, double t);
LadderFactor cre(int mode, double t);
LadderFactor with_branch(LadderFactor f, Branch b);
LadderFactor with_rank(LadderFactor f, long rank);

using FactorList = std::vector<LadderFactor>;

struct OperatorMonomial {
  cplx coeff{1.0, 0.0};
  FactorList factors;
};

class OperatorSum {
 public:
  static constexpr double kMergeTolerance = 1e-12;

  OperatorSum() = default;
  static OperatorSum identity(cplx c = 1.0);
  static OperatorSum monomial(FactorList factors, cplx c = 1.0);

  void add(const FactorList& factors, cplx c);
  const std::map<FactorList, cplx>& terms() const { return terms_; }
  std::vector<OperatorMonomial> monomials() const;
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  OperatorSum& operator+=(const OperatorSum& o);
  OperatorSum& operator-=(const OperatorSum& o);
  OperatorSum& operator*=(cplx c);
  friend OperatorSum operator+(OperatorSum a, const OperatorSum& b) { return a += b; }
  friend OperatorSum operator-(OperatorSum a, const OperatorSum& b) { return a -= b; }
  friend OperatorSum operator*(OperatorSum a, cplx c) { return a *= c; }
  friend OperatorSum operator*(cplx c, OperatorSum a) { return a *= c; }
  /// Operator product (concatenation of factor lists).
  friend OperatorSum operator*(const OperatorSum& a, const OperatorSum& b);

  /// Hermitian conjugate. Branch tags are swapped: the conjugate of a
  /// T- x T+ product is again of that shape with the roles exchanged.
  OperatorSum adjoint() const;

  /// Drop terms with |coeff| <= tol.
  void prune(double tol = kMergeTolerance);

 private:
  std::map<FactorList, cplx> terms_;
};

/// Largest |coeff| difference over the union of monomials (no canonicalization).
double max_coeff_deviation(const OperatorSum& a, const OperatorSum& b);

struct FreeFieldConvention {
  double omega0 = 0.0;
  // Phase phi(rank) for factors carrying generic_order; a(tau) = e^{-i phi} a.
  std::function<double(long)> rank_phase;

  /// Phase phi of a single factor's time dependence.
  double phase_of(const LadderFactor& f) const;
};

/// Ordering key (rank if present, else time). Throws if a list mixes ranked
/// and unranked factors.
double order_key(const LadderFactor& f);

/// Nested anticommutators applied in order of decreasing time:
/// 2^{-(N-1)} times a sum of 2^{N-1} monomials. Throws DuplicateTime.
OperatorSum time_symmetric_expand(const FactorList& factors);

/// All 2^{N-1} Schwinger products, each with coefficient 1, read off the
/// closed time contour. Throws DuplicateTime.
std::vector<OperatorMonomial> schwinger_enumerate(const FactorList& factors);

/// Creation-left normal order mode by mode, time dependence folded into the
/// coefficient. Output factors carry time 0 and no tags; modes ascending.
OperatorSum normal_form(const OperatorSum& expr, const FreeFieldConvention& conv);

/// true iff normal forms agree coefficientwise within tol.
bool equivalent(const OperatorSum& a, const OperatorSum& b, const FreeFieldConvention& conv,
                double tol = OperatorSum::kMergeTolerance);

/// Equal-weight average of all distinct orderings of m annihilators and n
/// creators of one mode. Throws SizeLimit if m + n > 8.
OperatorSum weyl_symmetric_form(int m, int n, int mode = 0);

struct FreeFieldReduction {
  cplx phase;
  OperatorSum weyl;
};

/// T^W of free fields = phase x symmetric (Weyl) ordering. Throws DuplicateTime.
FreeFieldReduction reduce_free_field(const FactorList& factors, const FreeFieldConvention& conv);

/// Symmetric form of the interaction part of the ring Hamiltonian:
///   sum_k kappa [W(a^+2 a^2)/2 - W(a^+ a) + 1/4] - J sum_bonds (a_k^+ a_{k+1} + h.c.)
OperatorSum bh_interaction_weyl(const BHParams& params);

/// Literal double-time-ordered product T-(minus) T+(plus): minus factors in
/// increasing time left to right, then plus factors in decreasing time.
OperatorSum double_time_ordered(const FactorList& minus_branch, const FactorList& plus_branch);

/// -i G for an (annihilator, creator) pair.
using ContractionSet = std::function<cplx(const LadderFactor& annihilator, const LadderFactor& creator)>;

/// Free-oscillator kernels chosen by the branch tags of the pair.
ContractionSet free_field_contractions(double omega0,
                                       std::optional<Regularization> reg = std::nullopt);

/// Generalized kernels on ranks: -i G(rank_a, rank_c) with the given phase.
ContractionSet generalized_contractions(std::function<double(long)> phase);

/// Symmetric Wick expansion of T-(minus) T+(plus): sum over all partial
/// pairings of equal-mode (annihilator, creator) pairs of the kernel product
/// times T^W of the unpaired factors. Every factor must carry a branch tag
/// matching its list (MissingBranchTag); times distinct (DuplicateTime).
OperatorSum wick_expand(const FactorList& minus_branch, const FactorList& plus_branch,
                        const ContractionSet& kernels);

/// Text form, e.g. `0.5 * a2†(1.3) a1(0.7) + (0,1) * a0(1.3,+)`; see README.
std::string to_text(const OperatorSum& expr);
std::string to_text(const LadderFactor& f);
/// Inverse of to_text. Throws ParseError.
OperatorSum parse_text(const std::string& text);

}  // namespace twigner
