#include "twigner/model.hpp"

#include <algorithm>

namespace twigner {

std::vector<int> ring_neighbours(int k, int n_sites) {
  if (n_sites <= 1) return {};
  return {(k + 1) % n_sites, (k + n_sites - 1) % n_sites};
}

cplx SmoothSource::at(double t) const {
  if (times.empty() || t < times.front() || t > times.back()) return {};
  auto hi = std::upper_bound(times.begin(), times.end(), t);
  if (hi == times.end()) return values.back();
  const auto i = static_cast<std::size_t>(hi - times.begin());
  const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return (1.0 - w) * values[i - 1] + w * values[i];
}

cplx SourceProfile::smooth_at(int site, double t) const {
  cplx s{};
  for (const auto& p : smooth) {
    if (p.site == site) s += p.at(t);
  }
  return s;
}

}  // namespace twigner
