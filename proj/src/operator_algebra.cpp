#include "twigner/operator_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace twigner {

LadderFactor ann(int mode, double t) { return LadderFactor{mode, false, t, std::nullopt, std::nullopt}; }
LadderFactor cre(int mode, double t) { return LadderFactor{mode, true, t, std::nullopt, std::nullopt}; }

LadderFactor with_branch(LadderFactor f, Branch b) {
  f.branch = b;
  return f;
}

LadderFactor with_rank(LadderFactor f, long rank) {
  f.generic_order = rank;
  return f;
}

// ---------------------------------------------------------------- OperatorSum

OperatorSum OperatorSum::identity(cplx c) { return monomial({}, c); }

OperatorSum OperatorSum::monomial(FactorList factors, cplx c) {
  OperatorSum s;
  s.add(factors, c);
  return s;
}

void OperatorSum::add(const FactorList& factors, cplx c) {
  auto [it, inserted] = terms_.try_emplace(factors, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) <= kMergeTolerance) terms_.erase(it);
}

std::vector<OperatorMonomial> OperatorSum::monomials() const {
  std::vector<OperatorMonomial> out;
  out.reserve(terms_.size());
  for (const auto& [f, c] : terms_) out.push_back({c, f});
  return out;
}

OperatorSum& OperatorSum::operator+=(const OperatorSum& o) {
  for (const auto& [f, c] : o.terms_) add(f, c);
  return *this;
}

OperatorSum& OperatorSum::operator-=(const OperatorSum& o) {
  for (const auto& [f, c] : o.terms_) add(f, -c);
  return *this;
}

OperatorSum& OperatorSum::operator*=(cplx c) {
  for (auto& kv : terms_) kv.second *= c;
  prune();
  return *this;
}

OperatorSum operator*(const OperatorSum& a, const OperatorSum& b) {
  OperatorSum out;
  for (const auto& [fa, ca] : a.terms()) {
    for (const auto& [fb, cb] : b.terms()) {
      FactorList f = fa;
      f.insert(f.end(), fb.begin(), fb.end());
      out.add(f, ca * cb);
    }
  }
  return out;
}

OperatorSum OperatorSum::adjoint() const {
  OperatorSum out;
  for (const auto& [f, c] : terms_) {
    FactorList g(f.rbegin(), f.rend());
    for (auto& x : g) {
      x.dagger = !x.dagger;
      if (x.branch) x.branch = *x.branch == Branch::Forward ? Branch::Reverse : Branch::Forward;
    }
    out.add(g, std::conj(c));
  }
  return out;
}

void OperatorSum::prune(double tol) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) <= tol) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
}

double max_coeff_deviation(const OperatorSum& a, const OperatorSum& b) {
  double dev = 0.0;
  for (const auto& [f, c] : a.terms()) {
    auto it = b.terms().find(f);
    dev = std::max(dev, std::abs(c - (it == b.terms().end() ? cplx{} : it->second)));
  }
  for (const auto& [f, c] : b.terms()) {
    if (!a.terms().count(f)) dev = std::max(dev, std::abs(c));
  }
  return dev;
}

// ------------------------------------------------------------------- ordering

double FreeFieldConvention::phase_of(const LadderFactor& f) const {
  if (f.generic_order) {
    if (!rank_phase) return 0.0;
    return rank_phase(*f.generic_order);
  }
  return omega0 * f.time;
}

double order_key(const LadderFactor& f) {
  return f.generic_order ? static_cast<double>(*f.generic_order) : f.time;
}

namespace {

// Indices sorted by decreasing order key; throws on ties or mixed keys.
std::vector<std::size_t> by_decreasing_time(const FactorList& factors) {
  if (!factors.empty()) {
    const bool ranked = factors.front().generic_order.has_value();
    for (const auto& f : factors) {
      if (f.generic_order.has_value() != ranked) {
        throw Error("ordering: ranked and unranked factors cannot be mixed");
      }
    }
  }
  std::vector<std::size_t> idx(factors.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    return order_key(factors[i]) > order_key(factors[j]);
  });
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (order_key(factors[idx[i]]) == order_key(factors[idx[i - 1]])) {
      throw DuplicateTime("ordering: two factors share the time " +
                          std::to_string(order_key(factors[idx[i]])));
    }
  }
  return idx;
}

}  // namespace

OperatorSum time_symmetric_expand(const FactorList& factors) {
  if (factors.empty()) return OperatorSum::identity();
  const auto idx = by_decreasing_time(factors);

  // Innermost is the latest factor; each earlier one is anticommuted around it.
  std::vector<FactorList> words{{factors[idx[0]]}};
  for (std::size_t r = 1; r < idx.size(); ++r) {
    const LadderFactor& x = factors[idx[r]];
    std::vector<FactorList> next;
    next.reserve(words.size() * 2);
    for (const auto& w : words) {
      FactorList left{x};
      left.insert(left.end(), w.begin(), w.end());
      FactorList right = w;
      right.push_back(x);
      next.push_back(std::move(left));
      next.push_back(std::move(right));
    }
    words = std::move(next);
  }
  const double weight = std::ldexp(1.0, -static_cast<int>(factors.size() - 1));
  OperatorSum out;
  for (const auto& w : words) out.add(w, weight);
  return out;
}

std::vector<OperatorMonomial> schwinger_enumerate(const FactorList& factors) {
  if (factors.empty()) return {OperatorMonomial{1.0, {}}};
  const auto idx = by_decreasing_time(factors);
  const std::size_t n = factors.size();

  // The latest factor sits at the tip of the contour on the forward branch.
  // Every other factor goes to either branch; reading the contour from its
  // reverse end gives reverse-branch factors with increasing time, then
  // forward-branch factors with decreasing time.
  std::vector<OperatorMonomial> out;
  out.reserve(std::size_t{1} << (n - 1));
  for (unsigned long mask = 0; mask < (1ul << (n - 1)); ++mask) {
    FactorList reverse, forward{factors[idx[0]]};
    for (std::size_t r = 1; r < n; ++r) {
      if (mask & (1ul << (r - 1))) {
        reverse.push_back(factors[idx[r]]);
      } else {
        forward.push_back(factors[idx[r]]);
      }
    }
    FactorList word(reverse.rbegin(), reverse.rend());
    word.insert(word.end(), forward.begin(), forward.end());
    out.push_back(OperatorMonomial{1.0, std::move(word)});
  }
  return out;
}

// ---------------------------------------------------------------- normal form

namespace {

// a^+p a^q of a single mode.
using ModePoly = std::map<std::pair<int, int>, cplx>;

void right_multiply(ModePoly& poly, bool dagger) {
  ModePoly next;
  for (const auto& [pq, c] : poly) {
    const auto [p, q] = pq;
    if (!dagger) {
      next[{p, q + 1}] += c;
    } else {
      // a^+p a^q a^+ = a^+(p+1) a^q + q a^+p a^(q-1)
      next[{p + 1, q}] += c;
      if (q > 0) next[{p, q - 1}] += c * static_cast<double>(q);
    }
  }
  poly = std::move(next);
}

}  // namespace

OperatorSum normal_form(const OperatorSum& expr, const FreeFieldConvention& conv) {
  OperatorSum out;
  for (const auto& [factors, coeff] : expr.terms()) {
    double phase = 0.0;
    std::map<int, ModePoly> per_mode;
    for (const auto& f : factors) {
      phase += f.dagger ? conv.phase_of(f) : -conv.phase_of(f);
      auto [it, fresh] = per_mode.try_emplace(f.mode);
      if (fresh) it->second[{0, 0}] = 1.0;
      right_multiply(it->second, f.dagger);
    }
    std::vector<std::pair<FactorList, cplx>> partial{{{}, coeff * std::polar(1.0, phase)}};
    for (const auto& [mode, poly] : per_mode) {
      std::vector<std::pair<FactorList, cplx>> next;
      for (const auto& [prefix, c] : partial) {
        for (const auto& [pq, pc] : poly) {
          FactorList f = prefix;
          for (int i = 0; i < pq.first; ++i) f.push_back(LadderFactor{mode, true, 0.0, {}, {}});
          for (int i = 0; i < pq.second; ++i) f.push_back(LadderFactor{mode, false, 0.0, {}, {}});
          next.emplace_back(std::move(f), c * pc);
        }
      }
      partial = std::move(next);
    }
    for (const auto& [f, c] : partial) out.add(f, c);
  }
  out.prune();
  return out;
}

bool equivalent(const OperatorSum& a, const OperatorSum& b, const FreeFieldConvention& conv,
                double tol) {
  return max_coeff_deviation(normal_form(a, conv), normal_form(b, conv)) < tol;
}

OperatorSum weyl_symmetric_form(int m, int n, int mode) {
  if (m < 0 || n < 0) throw SizeLimit("weyl_symmetric_form: negative power");
  if (m + n > 8) throw SizeLimit("weyl_symmetric_form: m + n must not exceed 8");
  // Distinct arrangements of the multiset {a x m, a^+ x n}.
  std::vector<bool> pattern(static_cast<std::size_t>(m), false);
  pattern.insert(pattern.end(), static_cast<std::size_t>(n), true);
  std::vector<FactorList> words;
  do {
    FactorList w;
    for (bool d : pattern) w.push_back(LadderFactor{mode, d, 0.0, {}, {}});
    words.push_back(std::move(w));
  } while (std::next_permutation(pattern.begin(), pattern.end()));
  OperatorSum out;
  const double weight = 1.0 / static_cast<double>(words.size());
  for (const auto& w : words) out.add(w, weight);
  return out;
}

FreeFieldReduction reduce_free_field(const FactorList& factors, const FreeFieldConvention& conv) {
  by_decreasing_time(factors);
  double phase = 0.0;
  std::map<int, std::pair<int, int>> counts;  // mode -> (#ann, #cre)
  for (const auto& f : factors) {
    phase += f.dagger ? conv.phase_of(f) : -conv.phase_of(f);
    auto& c = counts[f.mode];
    (f.dagger ? c.second : c.first) += 1;
  }
  OperatorSum weyl = OperatorSum::identity();
  for (const auto& [mode, mn] : counts) weyl = weyl * weyl_symmetric_form(mn.first, mn.second, mode);
  return {std::polar(1.0, phase), weyl};
}

OperatorSum bh_interaction_weyl(const BHParams& params) {
  OperatorSum out;
  for (int k = 0; k < params.n_sites; ++k) {
    out += weyl_symmetric_form(2, 2, k) * cplx(params.kappa / 2.0);
    out -= weyl_symmetric_form(1, 1, k) * cplx(params.kappa);
    out += OperatorSum::identity(params.kappa / 4.0);
  }
  if (params.n_sites > 1) {
    for (int k = 0; k < params.n_sites; ++k) {
      const int l = (k + 1) % params.n_sites;
      out.add({LadderFactor{k, true, 0.0, {}, {}}, LadderFactor{l, false, 0.0, {}, {}}}, -params.hop_J);
      out.add({LadderFactor{l, true, 0.0, {}, {}}, LadderFactor{k, false, 0.0, {}, {}}}, -params.hop_J);
    }
  }
  out.prune();
  return out;
}

// ----------------------------------------------------------------------- Wick

OperatorSum double_time_ordered(const FactorList& minus_branch, const FactorList& plus_branch) {
  FactorList word;
  const auto mi = by_decreasing_time(minus_branch);
  for (auto it = mi.rbegin(); it != mi.rend(); ++it) word.push_back(minus_branch[*it]);
  for (std::size_t i : by_decreasing_time(plus_branch)) word.push_back(plus_branch[i]);
  return OperatorSum::monomial(word);
}

ContractionSet free_field_contractions(double omega0, std::optional<Regularization> reg) {
  return [omega0, reg](const LadderFactor& a, const LadderFactor& c) {
    if (!a.branch || !c.branch) throw MissingBranchTag("contraction needs branch tags");
    ContractionKernel k{kind_for(*a.branch, *c.branch), omega0, reg};
    return symmetric_contraction(a.time - c.time, k);
  };
}

ContractionSet generalized_contractions(std::function<double(long)> phase) {
  return [phase](const LadderFactor& a, const LadderFactor& c) {
    if (!a.generic_order || !c.generic_order) {
      throw EqualRank("generalized contraction needs ranked factors");
    }
    const PhaseFunction<long> phi = phase;
    const cplx g = generalized_contraction<long>(*a.generic_order, *c.generic_order, phi,
                                                 [](long x, long y) { return x > y; });
    return cplx(0.0, -1.0) * g;
  };
}

namespace {

void check_tags(const FactorList& list, Branch expected, const char* name) {
  for (const auto& f : list) {
    if (!f.branch) throw MissingBranchTag(std::string("wick_expand: untagged factor in ") + name);
    if (*f.branch != expected) {
      throw MissingBranchTag(std::string("wick_expand: wrong branch tag in ") + name);
    }
  }
}

struct PairingWalker {
  const FactorList& all;
  const ContractionSet& kernels;
  std::vector<bool> used;
  std::vector<bool> paired;
  OperatorSum result;

  void walk(std::size_t i, cplx weight) {
    while (i < all.size() && used[i]) ++i;
    if (i == all.size()) {
      FactorList rest;
      for (std::size_t k = 0; k < all.size(); ++k) {
        if (!paired[k]) rest.push_back(all[k]);
      }
      result += time_symmetric_expand(rest) * weight;
      return;
    }
    used[i] = true;
    walk(i + 1, weight);  // all[i] stays unpaired
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (used[j] || all[j].mode != all[i].mode || all[j].dagger == all[i].dagger) continue;
      const LadderFactor& a = all[i].dagger ? all[j] : all[i];
      const LadderFactor& c = all[i].dagger ? all[i] : all[j];
      const cplx g = kernels(a, c);
      if (g == cplx{}) continue;
      used[j] = paired[i] = paired[j] = true;
      walk(i + 1, weight * g);
      used[j] = paired[i] = paired[j] = false;
    }
    used[i] = false;
  }
};

}  // namespace

OperatorSum wick_expand(const FactorList& minus_branch, const FactorList& plus_branch,
                        const ContractionSet& kernels) {
  check_tags(minus_branch, Branch::Reverse, "minus branch");
  check_tags(plus_branch, Branch::Forward, "plus branch");
  FactorList all = minus_branch;
  all.insert(all.end(), plus_branch.begin(), plus_branch.end());
  by_decreasing_time(all);
  PairingWalker w{all, kernels, std::vector<bool>(all.size()), std::vector<bool>(all.size()), {}};
  w.walk(0, 1.0);
  w.result.prune();
  return w.result;
}

}  // namespace twigner
