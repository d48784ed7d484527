#include "twigner/contractions.hpp"

#include <algorithm>
#include <cmath>

namespace twigner {

namespace {

double odd_step(double t) {
  if (t > 0.0) return 0.5;
  if (t < 0.0) return -0.5;
  return 0.0;
}

cplx free_phase(double omega0, double t) { return std::polar(1.0, -omega0 * t); }

cplx retarded_unchecked(double t, double omega0, const std::optional<Regularization>& reg) {
  if (!(t > 0.0)) return {0.0, 0.0};
  double smooth = 1.0;
  if (reg) smooth = std::pow(-std::expm1(-reg->gamma * t), reg->m);
  return cplx(0.0, smooth) * free_phase(omega0, t);
}

}  // namespace

Regularization Regularization::defaults_for(double omega0) {
  return Regularization{1e3 * std::max(std::abs(omega0), 1.0), 2};
}

cplx retarded_green(double t, const ContractionKernel& k) {
  if (k.kind != KernelKind::Retarded) {
    throw KindMismatch("retarded_green: kernel kind is not Retarded");
  }
  return retarded_unchecked(t, k.omega0, k.regularization);
}

cplx symmetric_contraction(double t, const ContractionKernel& k) {
  const cplx minus_i(0.0, -1.0);
  switch (k.kind) {
    case KernelKind::PP:
    case KernelKind::MM: {
      const double sign = k.kind == KernelKind::PP ? 1.0 : -1.0;
      if (!k.regularization) return sign * odd_step(t) * free_phase(k.omega0, t);
      const cplx g = 0.5 * (retarded_unchecked(t, k.omega0, k.regularization) +
                            std::conj(retarded_unchecked(-t, k.omega0, k.regularization)));
      return sign * minus_i * g;
    }
    case KernelKind::MP:
      return 0.5 * free_phase(k.omega0, t);
    case KernelKind::PM:
      return -0.5 * free_phase(k.omega0, t);
    case KernelKind::Retarded:
      break;
  }
  throw KindMismatch("symmetric_contraction: Retarded is not a symmetric contraction");
}

KernelKind kind_for(Branch ann, Branch cre) {
  if (ann == Branch::Forward) return cre == Branch::Forward ? KernelKind::PP : KernelKind::PM;
  return cre == Branch::Forward ? KernelKind::MP : KernelKind::MM;
}

bool decompose_check(double t, double omega0) {
  constexpr double tol = 1e-14;
  const cplx i_unit(0.0, 1.0);
  // G = i * (-iG)
  auto g_of = [&](KernelKind kind) {
    return i_unit * symmetric_contraction(t, ContractionKernel{kind, omega0, std::nullopt});
  };
  const cplx gr = retarded_unchecked(t, omega0, std::nullopt);
  const cplx gr_rev = std::conj(retarded_unchecked(-t, omega0, std::nullopt));

  const cplx same = 0.5 * (gr + gr_rev);
  cplx mixed = 0.5 * (gr - gr_rev);
  if (t == 0.0) {
    // lim_{t->0+} (G_R(t) - 0)/2 = lim_{t->0-} (0 - G_R*(-t))/2 = i/2
    mixed = cplx(0.0, 0.5);
  }

  const bool ok = std::abs(g_of(KernelKind::PP) - same) < tol &&
                  std::abs(g_of(KernelKind::MM) + same) < tol &&
                  std::abs(g_of(KernelKind::MP) - mixed) < tol &&
                  std::abs(g_of(KernelKind::PM) + mixed) < tol;
  return ok;
}

}  // namespace twigner
