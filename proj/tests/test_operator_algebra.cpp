#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "support/matrix_oracle.hpp"
#include "twigner/operator_algebra.hpp"

using namespace twigner;

namespace {

const FreeFieldConvention kStatic{0.0, {}};

LadderFactor A(double t) { return ann(0, t); }
LadderFactor Ad(double t) { return cre(0, t); }
LadderFactor a0() { return ann(0, 0.0); }
LadderFactor ad0() { return cre(0, 0.0); }

OperatorSum word(FactorList f, cplx c = 1.0) { return OperatorSum::monomial(std::move(f), c); }

std::set<FactorList> term_set(const OperatorSum& s) {
  std::set<FactorList> out;
  for (const auto& [f, c] : s.terms()) out.insert(f);
  return out;
}

}  // namespace

TEST_CASE("normal form of small words") {
  CHECK(max_coeff_deviation(normal_form(word({a0(), ad0()}), kStatic),
                            word({ad0(), a0()}) + OperatorSum::identity()) < 1e-12);

  const OperatorSum target = word({ad0(), a0(), a0()}) + word({a0()});
  const OperatorSum half = word({a0(), a0(), ad0()}, 0.5) + word({ad0(), a0(), a0()}, 0.5);
  CHECK(max_coeff_deviation(normal_form(half, kStatic), target) < 1e-12);

  const OperatorSum quarter = word({a0(), a0(), ad0()}, 0.25) + word({ad0(), a0(), a0()}, 0.25) +
                              word({a0(), ad0(), a0()}, 0.5);
  CHECK(max_coeff_deviation(normal_form(quarter, kStatic), target) < 1e-12);
}

TEST_CASE("normal form agrees with truncated matrices") {
  std::mt19937_64 rng(11);
  const oracle::Ladder lad{2, 9};
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 1 + rep % 6;
    const FactorList f = oracle::random_factors(rng, n, 2, 3.0);
    const double w0 = 0.37 * (rep % 4);
    const OperatorSum s = word(f, cplx(0.3, -1.1));
    const OperatorSum nf = normal_form(s, FreeFieldConvention{w0, {}});
    CHECK(lad.low_block_deviation(lad.eval(s, w0), lad.eval(nf, w0), 8 - n) < 1e-10);
  }
}

TEST_CASE("normal form is idempotent and a congruence") {
  std::mt19937_64 rng(5);
  const FreeFieldConvention conv{1.3, {}};
  for (int rep = 0; rep < 30; ++rep) {
    const OperatorSum x = word(oracle::random_factors(rng, 1 + rep % 4, 2, 2.0), cplx(0.5, 0.2)) +
                          word(oracle::random_factors(rng, 2, 2, 2.0));
    const OperatorSum y = word(oracle::random_factors(rng, 1 + rep % 3, 2, 2.0));
    const OperatorSum nx = normal_form(x, conv);
    CHECK(max_coeff_deviation(normal_form(nx, conv), nx) < 1e-12);
    CHECK(max_coeff_deviation(normal_form(x * y, conv),
                              normal_form(nx * normal_form(y, conv), conv)) < 1e-12);
  }
}

TEST_CASE("time-symmetric product of one and two factors") {
  CHECK(max_coeff_deviation(time_symmetric_expand({A(1.0)}), word({A(1.0)})) == 0.0);
  const OperatorSum expect = word({A(2.0), Ad(1.0)}, 0.5) + word({Ad(1.0), A(2.0)}, 0.5);
  CHECK(max_coeff_deviation(time_symmetric_expand({A(2.0), Ad(1.0)}), expect) < 1e-15);
  CHECK(max_coeff_deviation(time_symmetric_expand({Ad(1.0), A(2.0)}), expect) < 1e-15);
}

TEST_CASE("three-factor products keep the earliest factor at an end") {
  const double t1 = 3.0, t2 = 2.0, t3 = 1.0;
  {  // t1 > t2 > t3
    const OperatorSum s = time_symmetric_expand({A(t1), A(t2), Ad(t3)});
    const std::set<FactorList> listed{{A(t1), A(t2), Ad(t3)},
                                      {Ad(t3), A(t1), A(t2)},
                                      {A(t2), A(t1), Ad(t3)},
                                      {Ad(t3), A(t2), A(t1)}};
    CHECK(term_set(s) == listed);
    for (const auto& [f, c] : s.terms()) CHECK(c == cplx(0.25));
    CHECK(s.terms().count({A(t1), Ad(t3), A(t2)}) == 0);
    CHECK(s.terms().count({A(t2), Ad(t3), A(t1)}) == 0);
  }
  {  // t1 > t3 > t2
    const double s3 = 2.0, s2 = 1.0;
    const OperatorSum s = time_symmetric_expand({A(t1), A(s2), Ad(s3)});
    const std::set<FactorList> listed{{A(t1), Ad(s3), A(s2)},
                                      {Ad(s3), A(t1), A(s2)},
                                      {A(s2), A(t1), Ad(s3)},
                                      {A(s2), Ad(s3), A(t1)}};
    CHECK(term_set(s) == listed);
  }
}

TEST_CASE("Schwinger enumeration") {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 8; ++n) {
    const FactorList f = oracle::random_factors(rng, n, 2, 5.0);
    const auto products = schwinger_enumerate(f);
    CHECK(products.size() == (std::size_t{1} << (n - 1)));
    std::set<FactorList> distinct;
    for (const auto& m : products) distinct.insert(m.factors);
    CHECK(distinct.size() == products.size());
    const auto brute = oracle::schwinger_by_permutation(f);
    CHECK(std::set<FactorList>(brute.begin(), brute.end()) == distinct);
  }
}

TEST_CASE("nested anticommutators equal the Schwinger sum") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 1 + rep % 6;
    const FactorList f = oracle::random_factors(rng, n, 2, 5.0);
    OperatorSum sum;
    for (const auto& m : schwinger_enumerate(f)) sum.add(m.factors, m.coeff);
    sum *= std::ldexp(1.0, -(n - 1));
    CHECK(max_coeff_deviation(time_symmetric_expand(f), sum) == 0.0);
  }
}

TEST_CASE("coincident times are rejected") {
  CHECK_THROWS_AS(time_symmetric_expand({A(1.0), Ad(1.0)}), DuplicateTime);
  CHECK_THROWS_AS(schwinger_enumerate({A(1.0), ann(1, 1.0)}), DuplicateTime);
  CHECK_THROWS_AS(reduce_free_field({A(0.5), A(0.5)}, kStatic), DuplicateTime);
  CHECK_THROWS_AS(wick_expand({with_branch(A(1.0), Branch::Reverse)},
                              {with_branch(Ad(1.0), Branch::Forward)}, free_field_contractions(1.0)),
                  DuplicateTime);
}

TEST_CASE("conjugation of time-symmetric products") {
  std::mt19937_64 rng(23);
  const FreeFieldConvention conv{0.8, {}};
  for (int rep = 0; rep < 30; ++rep) {
    const FactorList f = oracle::random_factors(rng, 1 + rep % 6, 2, 4.0);
    FactorList g(f.rbegin(), f.rend());
    for (auto& x : g) x.dagger = !x.dagger;
    CHECK(max_coeff_deviation(normal_form(time_symmetric_expand(f).adjoint(), conv),
                              normal_form(time_symmetric_expand(g), conv)) < 1e-12);
  }
}

TEST_CASE("symmetric (Weyl) forms") {
  const OperatorSum w11 = weyl_symmetric_form(1, 1);
  CHECK(max_coeff_deviation(w11, word({ad0(), a0()}, 0.5) + word({a0(), ad0()}, 0.5)) < 1e-15);
  CHECK(max_coeff_deviation(normal_form(w11, kStatic),
                            word({ad0(), a0()}) + OperatorSum::identity(0.5)) < 1e-12);

  const OperatorSum w22 = weyl_symmetric_form(2, 2);
  CHECK(w22.size() == 6);
  for (const auto& [f, c] : w22.terms()) CHECK(std::abs(c - 1.0 / 6.0) < 1e-15);
  CHECK(max_coeff_deviation(normal_form(w22, kStatic), word({ad0(), ad0(), a0(), a0()}) +
                                                           word({ad0(), a0()}, 2.0) +
                                                           OperatorSum::identity(0.5)) < 1e-12);

  CHECK(max_coeff_deviation(weyl_symmetric_form(1, 0), word({a0()})) == 0.0);
  CHECK(max_coeff_deviation(weyl_symmetric_form(0, 0), OperatorSum::identity()) == 0.0);
  CHECK(weyl_symmetric_form(4, 4).size() == 70);
  CHECK_THROWS_AS(weyl_symmetric_form(5, 4), SizeLimit);
}

TEST_CASE("free-field reduction") {
  const FreeFieldConvention conv{1.7, {}};
  SUBCASE("three factors, both time orders") {
    const double t1 = 2.5, t2 = 1.5, t3 = 0.4;
    const cplx phase = std::polar(1.0, -1.7 * (t1 + t2 - t3));
    const auto r1 = reduce_free_field({A(t1), A(t2), Ad(t3)}, conv);
    CHECK(std::abs(r1.phase - phase) < 1e-14);
    const OperatorSum half = word({a0(), a0(), ad0()}, 0.5) + word({ad0(), a0(), a0()}, 0.5);
    CHECK(equivalent(r1.weyl, half, kStatic));
    CHECK(equivalent(time_symmetric_expand({A(t1), A(t2), Ad(t3)}), half * phase, conv));

    // t1 > t3 > t2
    const double s2 = 0.4, s3 = 1.5;
    const OperatorSum quarter = word({a0(), a0(), ad0()}, 0.25) +
                                word({ad0(), a0(), a0()}, 0.25) + word({a0(), ad0(), a0()}, 0.5);
    const cplx phase2 = std::polar(1.0, -1.7 * (t1 + s2 - s3));
    CHECK(equivalent(time_symmetric_expand({A(t1), A(s2), Ad(s3)}), quarter * phase2, conv));
    CHECK(equivalent(half, quarter, kStatic));
  }
  SUBCASE("single factor") {
    const auto r = reduce_free_field({A(0.9)}, conv);
    CHECK(std::abs(r.phase - std::polar(1.0, -1.7 * 0.9)) < 1e-15);
    CHECK(max_coeff_deviation(r.weyl, word({a0()})) == 0.0);
  }
  SUBCASE("random products") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 100; ++rep) {
      const FactorList f = oracle::random_factors(rng, 1 + rep % 6, 2, 5.0);
      const auto r = reduce_free_field(f, conv);
      CHECK(equivalent(time_symmetric_expand(f), r.weyl * r.phase, conv));
    }
  }
}

TEST_CASE("symmetric interaction Hamiltonian") {
  SUBCASE("single site normal-orders to kappa/2 a^+2 a^2") {
    BHParams p;
    p.n_sites = 1;
    p.kappa = 0.7;
    CHECK(max_coeff_deviation(normal_form(bh_interaction_weyl(p), kStatic),
                              word({ad0(), ad0(), a0(), a0()}, 0.35)) < 1e-12);
  }
  SUBCASE("kappa = 1 carries +1/4 per site") {
    BHParams p;
    p.n_sites = 3;
    p.kappa = 1.0;
    const OperatorSum h = bh_interaction_weyl(p);
    CHECK(std::abs(h.terms().at({}) - 0.75) < 1e-15);
  }
  SUBCASE("kappa = 0 leaves only hopping") {
    BHParams p;
    p.n_sites = 3;
    p.hop_J = 0.4;
    const OperatorSum h = bh_interaction_weyl(p);
    OperatorSum hop;
    for (int k = 0; k < 3; ++k) {
      const int l = (k + 1) % 3;
      hop.add({cre(k, 0), ann(l, 0)}, -0.4);
      hop.add({cre(l, 0), ann(k, 0)}, -0.4);
    }
    CHECK(max_coeff_deviation(h, hop) == 0.0);
  }
  SUBCASE("ring with interaction and hopping matches its normal-ordered form") {
    BHParams p;
    p.n_sites = 3;
    p.kappa = 0.3;
    p.hop_J = 1.1;
    OperatorSum expect;
    for (int k = 0; k < 3; ++k) {
      expect.add({cre(k, 0), cre(k, 0), ann(k, 0), ann(k, 0)}, 0.15);
      const int l = (k + 1) % 3;
      expect.add({cre(k, 0), ann(l, 0)}, -1.1);
      expect.add({cre(l, 0), ann(k, 0)}, -1.1);
    }
    CHECK(max_coeff_deviation(normal_form(bh_interaction_weyl(p), kStatic),
                              normal_form(expect, kStatic)) < 1e-12);
  }
}

TEST_CASE("Wick expansion of a pair") {
  const double w0 = 1.3, t = 2.0, tp = 0.5;
  const auto K = free_field_contractions(w0);
  const FreeFieldConvention conv{w0, {}};
  SUBCASE("forward branch") {
    const auto p = with_branch(A(t), Branch::Forward);
    const auto q = with_branch(Ad(tp), Branch::Forward);
    const OperatorSum w = wick_expand({}, {q, p}, K);
    const OperatorSum expect =
        OperatorSum::identity(0.5 * std::polar(1.0, -w0 * (t - tp))) + time_symmetric_expand({p, q});
    CHECK(max_coeff_deviation(w, expect) < 1e-15);
    CHECK(equivalent(w, word({p, q}), conv));
  }
  SUBCASE("annihilator on the reverse branch") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ut(0.0, 5.0);
    for (int rep = 0; rep < 20; ++rep) {
      const double a = ut(rng), b = ut(rng);
      const auto m = with_branch(A(a), Branch::Reverse);
      const auto q = with_branch(Ad(b), Branch::Forward);
      const OperatorSum w = wick_expand({m}, {q}, K);
      const OperatorSum expect =
          OperatorSum::identity(0.5 * std::polar(1.0, -w0 * (a - b))) + time_symmetric_expand({m, q});
      CHECK(max_coeff_deviation(w, expect) < 1e-15);
      CHECK(equivalent(w, word({m, q}), conv));
    }
  }
  SUBCASE("single factor") {
    const auto p = with_branch(A(t), Branch::Forward);
    CHECK(max_coeff_deviation(wick_expand({}, {p}, K), word({p})) == 0.0);
  }
}

TEST_CASE("Wick expansion reproduces double-time-ordered products") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> un(1, 6);
  for (double w0 : {0.0, 1.0, 2.7}) {
    const FreeFieldConvention conv{w0, {}};
    const auto K = free_field_contractions(w0);
    for (int rep = 0; rep < 40; ++rep) {
      const int n = un(rng);
      FactorList f = oracle::random_factors(rng, n, 1, 5.0);
      std::uniform_int_distribution<int> split(0, n);
      const int k = split(rng);
      FactorList minus(f.begin(), f.begin() + k), plus(f.begin() + k, f.end());
      for (auto& x : minus) x.branch = Branch::Reverse;
      for (auto& x : plus) x.branch = Branch::Forward;
      const OperatorSum lhs = normal_form(wick_expand(minus, plus, K), conv);
      const OperatorSum rhs = normal_form(double_time_ordered(minus, plus), conv);
      CHECK(max_coeff_deviation(lhs, rhs) < 1e-12);
    }
  }
}

TEST_CASE("Wick expansion with two modes") {
  std::mt19937_64 rng(7);
  const FreeFieldConvention conv{0.6, {}};
  const auto K = free_field_contractions(0.6);
  for (int rep = 0; rep < 30; ++rep) {
    FactorList f = oracle::random_factors(rng, 1 + rep % 6, 2, 5.0);
    FactorList minus, plus;
    for (std::size_t i = 0; i < f.size(); ++i) {
      (i % 2 ? minus : plus).push_back(with_branch(f[i], i % 2 ? Branch::Reverse : Branch::Forward));
    }
    CHECK(equivalent(wick_expand(minus, plus, K), double_time_ordered(minus, plus), conv));
  }
}

TEST_CASE("conjugating a Wick expansion swaps the branches") {
  std::mt19937_64 rng(19);
  const auto K = free_field_contractions(2.1);
  for (int rep = 0; rep < 30; ++rep) {
    FactorList f = oracle::random_factors(rng, 2 + rep % 5, 1, 5.0);
    const std::size_t k = static_cast<std::size_t>(rep) % f.size();
    FactorList minus(f.begin(), f.begin() + static_cast<long>(k)), plus(f.begin() + static_cast<long>(k), f.end());
    for (auto& x : minus) x.branch = Branch::Reverse;
    for (auto& x : plus) x.branch = Branch::Forward;
    auto conj_list = [](FactorList l) {
      for (auto& x : l) {
        x.dagger = !x.dagger;
        x.branch = *x.branch == Branch::Forward ? Branch::Reverse : Branch::Forward;
      }
      return l;
    };
    const OperatorSum lhs = wick_expand(minus, plus, K).adjoint();
    const OperatorSum rhs = wick_expand(conj_list(plus), conj_list(minus), K);
    CHECK(max_coeff_deviation(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("branch tags are required") {
  const auto K = free_field_contractions(1.0);
  CHECK_THROWS_AS(wick_expand({}, {A(1.0)}, K), MissingBranchTag);
  CHECK_THROWS_AS(wick_expand({with_branch(A(1.0), Branch::Forward)}, {}, K), MissingBranchTag);
}

TEST_CASE("ranked factors on an abstract ordered set") {
  // Ranks label points of an ordered set; phases are supplied per rank.
  const std::vector<double> phi{0.3, -1.2, 2.2, 0.1, 0.75, -0.4};
  const auto phase = [phi](long r) { return phi[static_cast<std::size_t>(r)]; };
  const FreeFieldConvention conv{0.0, phase};
  std::mt19937_64 rng(31);
  std::bernoulli_distribution coin(0.5);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 1 + rep % 6;
    FactorList f;
    for (int r = 0; r < n; ++r) {
      f.push_back(with_branch(with_rank(LadderFactor{0, coin(rng), 0.0, {}, {}}, r), Branch::Forward));
    }
    std::shuffle(f.begin(), f.end(), rng);
    const OperatorSum lhs = wick_expand({}, f, generalized_contractions(phase));
    CHECK(equivalent(lhs, double_time_ordered({}, f), conv));
  }
}

TEST_CASE("text form round-trips") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    FactorList f = oracle::random_factors(rng, 1 + rep % 5, 3, 5.0);
    if (rep % 3 == 1) f[0].branch = Branch::Reverse;
    if (rep % 4 == 2) f[0].generic_order = rep;
    OperatorSum s = word(f, cplx(0.1 * rep, rep % 2 ? -1.0 / 3.0 : 0.0)) + OperatorSum::identity(-0.25);
    const OperatorSum back = parse_text(to_text(s));
    CHECK(max_coeff_deviation(back, s) == 0.0);
    CHECK(back.size() == s.size());
  }
  CHECK(to_text(word({cre(2, 1.3), ann(1, 0.7)}, 0.5)) == "0.5 * a2\xE2\x80\xA0(1.3) a1(0.7)");
  CHECK(parse_text("0").empty());
  CHECK(parse_text("0.5 * a0^+(1,+) a0(2,-,#4)").size() == 1);
  CHECK_THROWS_AS(parse_text("0.5 * b0(1)"), ParseError);
  CHECK_THROWS_AS(parse_text("0.5 a0(1)"), ParseError);
}
