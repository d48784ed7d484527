#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "twigner/contractions.hpp"

using namespace twigner;

namespace {

ContractionKernel kernel(KernelKind k, double w0, std::optional<Regularization> r = std::nullopt) {
  return ContractionKernel{k, w0, r};
}

const cplx I(0.0, 1.0);

}  // namespace

TEST_CASE("retarded Green function") {
  const auto gr = kernel(KernelKind::Retarded, 1.3);
  CHECK(retarded_green(-1.0, gr) == cplx{});
  CHECK(retarded_green(0.0, gr) == cplx{});
  CHECK(std::abs(retarded_green(0.5, gr) - I * std::polar(1.0, -0.65)) < 1e-15);

  const auto reg = kernel(KernelKind::Retarded, 0.0, Regularization{10.0, 2});
  const double s = 1.0 - std::exp(-10.0);
  CHECK(std::abs(retarded_green(1.0, reg) - I * s * s) < 1e-15);
  CHECK(retarded_green(0.0, reg) == cplx{});
  // (1 - e^{-G t})^m ~ (G t)^m near 0
  CHECK(std::abs(retarded_green(1e-6, reg)) < 1e-9);

  CHECK_THROWS_AS(retarded_green(1.0, kernel(KernelKind::PP, 1.0)), KindMismatch);
}

TEST_CASE("symmetric contractions") {
  const double w0 = 1.0;
  CHECK(std::abs(symmetric_contraction(0.4, kernel(KernelKind::PP, w0)) - 0.5 * std::polar(1.0, -0.4)) < 1e-15);
  CHECK(symmetric_contraction(0.0, kernel(KernelKind::PP, w0)) == cplx{});
  CHECK(symmetric_contraction(0.0, kernel(KernelKind::MM, w0)) == cplx{});
  CHECK(std::abs(symmetric_contraction(-2.0, kernel(KernelKind::MP, w0)) - 0.5 * std::polar(1.0, 2.0)) < 1e-15);
  CHECK(std::abs(symmetric_contraction(-2.0, kernel(KernelKind::PM, w0)) + 0.5 * std::polar(1.0, 2.0)) < 1e-15);
  CHECK(std::abs(symmetric_contraction(-0.3, kernel(KernelKind::MM, w0)) - 0.5 * std::polar(1.0, 0.3)) < 1e-15);
  CHECK_THROWS_AS(symmetric_contraction(1.0, kernel(KernelKind::Retarded, w0)), KindMismatch);

  CHECK(kind_for(Branch::Forward, Branch::Forward) == KernelKind::PP);
  CHECK(kind_for(Branch::Reverse, Branch::Reverse) == KernelKind::MM);
  CHECK(kind_for(Branch::Reverse, Branch::Forward) == KernelKind::MP);
  CHECK(kind_for(Branch::Forward, Branch::Reverse) == KernelKind::PM);
}

TEST_CASE("jumps and continuity at t = 0") {
  for (double w0 : {0.0, 0.8, 2.7}) {
    const double h = 1e-12;
    for (auto k : {KernelKind::PP, KernelKind::MM}) {
      const cplx jump = symmetric_contraction(h, kernel(k, w0)) - symmetric_contraction(-h, kernel(k, w0));
      CHECK(std::abs(std::abs(jump) - 1.0) < 1e-10);
    }
    for (auto k : {KernelKind::MP, KernelKind::PM}) {
      const cplx jump = symmetric_contraction(h, kernel(k, w0)) - symmetric_contraction(-h, kernel(k, w0));
      CHECK(std::abs(jump) < 1e-10);
    }
  }
}

TEST_CASE("decomposition through the retarded function") {
  CHECK(decompose_check(0.0, 1.0));
  CHECK(decompose_check(0.7, 2.0));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ut(-10.0, 10.0), uw(0.0, 3.0);
  for (int i = 0; i < 200; ++i) CHECK(decompose_check(ut(rng), uw(rng)));
}

TEST_CASE("conjugation relations") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> ut(-6.0, 6.0);
  for (double w0 : {0.0, 1.0, 2.7}) {
    for (int i = 0; i < 100; ++i) {
      const double t = ut(rng);
      CHECK(std::abs(symmetric_contraction(t, kernel(KernelKind::MM, w0)) -
                     std::conj(symmetric_contraction(-t, kernel(KernelKind::PP, w0)))) < 1e-14);
      for (auto k : {KernelKind::MP, KernelKind::PM}) {
        CHECK(std::abs(symmetric_contraction(t, kernel(k, w0)) -
                       std::conj(symmetric_contraction(-t, kernel(k, w0)))) < 1e-14);
      }
    }
  }
}

TEST_CASE("regularization") {
  SUBCASE("converges pointwise and monotonically") {
    for (double t : {0.01, 0.1, 0.5, 2.0}) {
      const cplx bare = retarded_green(t, kernel(KernelKind::Retarded, 0.0));
      double prev = std::numeric_limits<double>::infinity();
      for (double g : {10.0, 100.0, 1000.0}) {
        const auto k = kernel(KernelKind::Retarded, 0.0, Regularization{g, 2});
        const double err = std::abs(retarded_green(t, k) - bare);
        CHECK(err <= prev);
        CHECK(std::abs(retarded_green(t, k)) <= 1.0);
        prev = err;
      }
      CHECK(prev < 2.0 * std::exp(-1000.0 * t) + 1e-15);
    }
  }
  SUBCASE("leaves mixed kinds alone") {
    const auto r = Regularization::defaults_for(1.5);
    CHECK(r.gamma == 1500.0);
    CHECK(r.m == 2);
    for (double t : {-0.4, 0.0, 1e-5, 0.9}) {
      for (auto k : {KernelKind::MP, KernelKind::PM}) {
        CHECK(symmetric_contraction(t, kernel(k, 1.5, r)) == symmetric_contraction(t, kernel(k, 1.5)));
      }
    }
  }
  SUBCASE("regularized same-branch kernels vanish smoothly at 0") {
    const auto r = Regularization{100.0, 3};
    CHECK(symmetric_contraction(0.0, kernel(KernelKind::PP, 1.0, r)) == cplx{});
    CHECK(std::abs(symmetric_contraction(1e-4, kernel(KernelKind::PP, 1.0, r))) < 1e-5);
    CHECK(std::abs(symmetric_contraction(3.0, kernel(KernelKind::PP, 1.0, r)) -
                   symmetric_contraction(3.0, kernel(KernelKind::PP, 1.0))) < 1e-12);
  }
}

TEST_CASE("generalized contraction") {
  const PhaseFunction<double> zero = [](const double&) { return 0.0; };
  const auto after = [](double x, double y) { return x > y; };
  CHECK(std::abs(-I * generalized_contraction<double>(2.0, 1.0, zero, after) - 0.5) < 1e-15);
  CHECK(std::abs(-I * generalized_contraction<double>(1.0, 2.0, zero, after) + 0.5) < 1e-15);
  CHECK_THROWS_AS(generalized_contraction<double>(1.0, 1.0, zero, after), EqualRank);

  SUBCASE("real line reproduces the forward kernel") {
    const double w0 = 1.7;
    const PhaseFunction<double> phi = [w0](const double& t) { return w0 * t; };
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ut(-5.0, 5.0);
    for (int i = 0; i < 50; ++i) {
      const double t = ut(rng), tp = ut(rng);
      CHECK(std::abs(-I * generalized_contraction<double>(t, tp, phi, after) -
                     symmetric_contraction(t - tp, kernel(KernelKind::PP, w0))) < 1e-14);
    }
  }

  SUBCASE("closed contour reproduces all four kernels") {
    struct Point {
      double t;
      Branch b;
    };
    // Forward branch ordered by t; every reverse point later than every
    // forward point, ordered by decreasing t.
    const auto succeeds = [](const Point& x, const Point& y) {
      if (x.b != y.b) return x.b == Branch::Reverse;
      return x.b == Branch::Forward ? x.t > y.t : x.t < y.t;
    };
    const double w0 = 0.9;
    const PhaseFunction<Point> phi = [w0](const Point& p) { return w0 * p.t; };
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ut(0.0, 5.0);
    for (int i = 0; i < 50; ++i) {
      const double t = ut(rng), tp = ut(rng);
      for (Branch ba : {Branch::Forward, Branch::Reverse}) {
        for (Branch bc : {Branch::Forward, Branch::Reverse}) {
          const cplx g = -I * generalized_contraction<Point>({t, ba}, {tp, bc}, phi, succeeds);
          const cplx expect = symmetric_contraction(t - tp, kernel(kind_for(ba, bc), w0));
          CHECK(std::abs(g - expect) < 1e-14);
        }
      }
      // Same real time on different branches.
      CHECK(std::abs(-I * generalized_contraction<Point>({t, Branch::Reverse}, {t, Branch::Forward}, phi,
                                                         succeeds) -
                     0.5) < 1e-14);
      CHECK(std::abs(-I * generalized_contraction<Point>({t, Branch::Forward}, {t, Branch::Reverse}, phi,
                                                         succeeds) +
                     0.5) < 1e-14);
    }
  }
}
