#pragma once

// Shared model description: Bose-Hubbard ring parameters, per-site initial
// states and external c-number sources. Used by both the exact oracle and the
// phase-space engine so the two always simulate the same Hamiltonian.

#include <complex>
#include <cstddef>
#include <variant>
#include <vector>

namespace twigner {

using cplx = std::complex<double>;

/// Ring of anharmonic oscillators
///   H = sum_k [ w0 n_k + (kappa/2) a_k^+2 a_k^2 - J (a_k^+ a_{k+1} + h.c.) ],
/// site indices mod n_sites. The bond sum runs over k = 0..n_sites-1, so a
/// two-site ring carries the bond twice; a one-site ring has no hopping.
struct BHParams {
  int n_sites = 1;
  double omega0 = 0.0;
  double kappa = 0.0;
  double hop_J = 0.0;
  int cutoff = 1;                    // max occupation per site (oracle only)
  std::size_t dimension_limit = 4096;
};

/// Neighbour sites entering the hopping term of site k (with multiplicity).
std::vector<int> ring_neighbours(int k, int n_sites);

struct Coherent {
  cplx alpha0{0.0, 0.0};
};
struct Thermal {
  double nbar = 0.0;
};
struct Vacuum {};

/// Positive-Wigner single-site state.
using SiteState = std::variant<Coherent, Thermal, Vacuum>;
using InitialStateSpec = std::vector<SiteState>;

/// Instantaneous source s_k(t) = amplitude * delta(t - time). Applied as
///   a_k -> a_k + i*amplitude   (phase space)
///   exp(i (a_k^+ amplitude + a_k amplitude^*))   (Hilbert space).
/// A kick at time t affects observables at times strictly later than t.
struct Kick {
  int site = 0;
  double time = 0.0;
  cplx amplitude{0.0, 0.0};
};

/// Tabulated smooth source on one site, linearly interpolated, zero outside
/// the table.
struct SmoothSource {
  int site = 0;
  std::vector<double> times;
  std::vector<cplx> values;

  cplx at(double t) const;
};

struct SourceProfile {
  std::vector<Kick> kicks;
  std::vector<SmoothSource> smooth;

  bool empty() const { return kicks.empty() && smooth.empty(); }
  /// Sum of smooth components acting on `site` at time t.
  cplx smooth_at(int site, double t) const;
};

}  // namespace twigner
