#pragma once

// Two-time c-number kernels of the symmetric Wick theorem.
//
// Convention: a pair (annihilator at t, creator at t') on branches (c, c')
// contracts to -i G^W_{cc'}(t - t'). For a free oscillator of frequency w0
//
//   -i G_PP(t) =  eps(t) e^{-i w0 t}     -i G_MP(t) =  1/2 e^{-i w0 t}
//   -i G_MM(t) = -eps(t) e^{-i w0 t}     -i G_PM(t) = -1/2 e^{-i w0 t}
//
// with eps the odd step function, eps(0) = 0. All four decompose through the
// retarded function G_R(t) = i theta(t) e^{-i w0 t}, theta(0) = 0.

#include <complex>
#include <functional>
#include <optional>

#include "twigner/errors.hpp"

namespace twigner {

using cplx = std::complex<double>;

/// Contour branch: Forward (+) runs -inf -> +inf, Reverse (-) runs back.
enum class Branch { Forward, Reverse };

enum class KernelKind { PP, MM, MP, PM, Retarded };

/// Causal smoothing factor (1 - e^{-gamma t})^m applied to G_R.
struct Regularization {
  double gamma = 1e3;
  int m = 2;

  /// gamma = 1e3 * max(omega0, 1), m = 2.
  static Regularization defaults_for(double omega0);
};

struct ContractionKernel {
  KernelKind kind = KernelKind::PP;
  double omega0 = 0.0;
  std::optional<Regularization> regularization;
};

/// i theta(t) [(1 - e^{-gamma t})^m] e^{-i w0 t}. Throws KindMismatch unless
/// kind == Retarded.
cplx retarded_green(double t, const ContractionKernel& k);

/// Returns -i G^W_kind(t). Same-branch kinds honour the kernel's
/// regularization through the retarded decomposition; it is never applied to
/// the mixed-branch kinds MP/PM, which stay continuous at t = 0.
/// Throws KindMismatch for kind == Retarded.
cplx symmetric_contraction(double t, const ContractionKernel& k);

/// Kernel kind for an annihilator on branch `ann` contracted with a creator on
/// branch `cre`.
KernelKind kind_for(Branch ann, Branch cre);

/// Checks G_PP = -G_MM = (G_R(t) + G_R*(-t))/2 and
/// G_MP = -G_PM = (G_R(t) - G_R*(-t))/2 at t to within 1e-14.
/// At t = 0 the mixed kinds are compared against the (two-sided) limit of the
/// decomposition, since theta(0) = 0 makes the literal right-hand side vanish.
bool decompose_check(double t, double omega0);

/// Phase phi(tau) of the generalized free field a(tau) = e^{-i phi(tau)} a.
template <class Tau>
using PhaseFunction = std::function<double(const Tau&)>;

/// Generalized single-mode contraction G(tau, tau') on a linearly ordered set:
///   (i/2) e^{-i phi(tau) + i phi(tau')} [theta(tau,tau') - theta(tau',tau)],
/// where theta(x,y) = 1 iff succeeds(x, y). Throws EqualRank if neither
/// argument succeeds the other.
template <class Tau, class Succeeds>
cplx generalized_contraction(const Tau& tau, const Tau& tau_prime,
                             const PhaseFunction<Tau>& phi, Succeeds&& succeeds) {
  const bool after = succeeds(tau, tau_prime);
  const bool before = succeeds(tau_prime, tau);
  if (after == before) {
    throw EqualRank("generalized_contraction: arguments are not strictly ordered");
  }
  const double sign = after ? 1.0 : -1.0;
  return cplx(0.0, 0.5 * sign) * std::polar(1.0, -phi(tau) + phi(tau_prime));
}

}  // namespace twigner
