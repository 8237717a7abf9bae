#include <doctest.h>

#include <cmath>
#include <random>

#include "growthlab/flow.hpp"
#include "growthlab/growth.hpp"

using namespace growthlab;

namespace {

const FlowMap& flow(int levels) {
  static const FlowPtr zero =
      build_flow(DeltaFunction(build_schedule(TargetSequence::linear(), 0), 1e-10));
  static const FlowPtr one =
      build_flow(DeltaFunction(build_schedule(TargetSequence::linear(), 1), 1e-10));
  return levels == 0 ? *zero : *one;
}

// Midpoint rule for the integral of h over [-3; 3].
double core_mass() {
  const int n = 600000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += base_h(-3.0 + 6.0 * (i + 0.5) / n);
  return sum * 6.0 / n;
}

}  // namespace

TEST_CASE("flow normalisation and symmetry") {
  for (int levels : {0, 1}) {
    const FlowMap& fm = flow(levels);
    CHECK(fm.a(0.0).x == 0.5);
    CHECK(fm.norm() == doctest::Approx(fm.integrability().total).epsilon(1e-9));
    std::mt19937_64 rng(levels + 3);
    std::uniform_real_distribution<double> u(-5000.0, 5000.0);
    for (int i = 0; i < 100; ++i) {
      const double eta = u(rng);
      CHECK(fm.a(eta).x + fm.a(-eta).x == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(fm.a(eta).x == doctest::Approx(fm.a(-eta).xc).epsilon(1e-13));
    }
  }
}

TEST_CASE("flow cumulative map against direct quadrature") {
  // Left tail of h beyond 3 is 1/log 3; the rest is the core integral.
  const double tail = 1.0 / std::log(3.0);
  const double core = core_mass();
  const double expected = (tail + core) / (2.0 * tail + core);
  const FlowMap& fm = flow(0);
  CHECK(fm.a(3.0).x == doctest::Approx(expected).epsilon(1e-9));
  CHECK(fm.norm() == doctest::Approx(2.0 * tail + core).epsilon(1e-9));
}

TEST_CASE("flow inverse and conjugation to translation") {
  const FlowMap& fm = flow(1);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ue(-1e5, 1e5);
  for (int i = 0; i < 200; ++i) {
    const double eta = ue(rng);
    CHECK(fm.a_inv(fm.a(eta)) ==
          doctest::Approx(eta).epsilon(1e-9).scale(1e-9));
  }
  std::uniform_real_distribution<double> ux(0.02, 0.98);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const UnitPoint p = UnitPoint::at(ux(rng));
    worst = std::max(worst, std::abs(fm.a_inv(fm.apply(p)) - fm.a_inv(p) - 1.0));
  }
  CHECK(worst <= 1e-8);
  CHECK(std::isinf(fm.a_inv(UnitPoint::at(1e-6))));
  CHECK(fm.apply(UnitPoint::at(1e-6)) == UnitPoint::at(1e-6));
}

TEST_CASE("flow iterates are translations") {
  const FlowMap& fm = flow(1);
  for (double x : {0.1, 0.37, 0.5, 0.81}) {
    UnitPoint p = UnitPoint::at(x);
    for (long n = 1; n <= 20; ++n) {
      p = fm.apply(p);
      const UnitPoint q = fm.iterate(UnitPoint::at(x), n);
      CHECK(q.xc == doctest::Approx(p.xc).epsilon(1e-10));
    }
    const UnitPoint back = fm.iterate(fm.iterate(UnitPoint::at(x), 7), -7);
    CHECK(back.x == doctest::Approx(x).epsilon(1e-12));
  }
  CHECK(fm.apply(UnitPoint::left_end()) == UnitPoint::left_end());
  CHECK(fm.apply(UnitPoint::right_end()) == UnitPoint::right_end());
}

TEST_CASE("flow derivatives") {
  const FlowMap& fm = flow(1);
  for (double x : {0.2, 0.5, 0.7, 0.93}) {
    const double step = 1e-6;
    const double fd = (fm(x + step) - fm(x - step)) / (2 * step);
    CHECK(*fm.derivative(1, UnitPoint::at(x)) == doctest::Approx(fd).epsilon(1e-6));
    CHECK(std::exp(fm.log_deriv(UnitPoint::at(x))) ==
          doctest::Approx(fd).epsilon(1e-6));
    for (int k = 1; k < fm.max_order(); ++k) {
      const double up = *fm.derivative(k, UnitPoint::at(x + step));
      const double dn = *fm.derivative(k, UnitPoint::at(x - step));
      CHECK(*fm.derivative(k + 1, UnitPoint::at(x)) ==
            doctest::Approx((up - dn) / (2 * step)).epsilon(1e-4).scale(1e-3));
    }
  }
  CHECK(!fm.derivative(fm.max_order() + 1, UnitPoint::at(0.5)));
  CHECK(*fm.derivative(1, UnitPoint::right_end()) == 1.0);
  CHECK(*fm.derivative(3, UnitPoint::left_end()) == 0.0);
}

TEST_CASE("flow growth against orbit growth") {
  CHECK(flow_growth(flow(0), 0) == 1.0);
  for (int levels : {0, 1}) {
    const FlowMap& fm = flow(levels);
    GridSpec grid;
    grid.uniform = 512;
    grid.ladder_depth = 20;
    const long n_max = 30;
    const auto records = growth_sequence(fm, n_max, grid);
    for (long n = 1; n <= n_max; ++n) {
      const double g = flow_growth(fm, n);
      CHECK(records[n - 1].gamma_n == doctest::Approx(g).epsilon(0.05));
      CHECK(records[n - 1].gamma_n <= g * (1 + 1e-9));
    }
    CHECK(flow_growth(fm, -5) == flow_growth(fm, 5));
  }
}

TEST_CASE("subsequence bound and endpoint flatness") {
  const SubsequenceReport zero = verify_subsequence_bound(flow(0));
  CHECK(zero.levels.empty());

  const FlowMap& fm = flow(1);
  const SubsequenceReport rep = verify_subsequence_bound(fm);
  REQUIRE(rep.levels.size() == 1);
  CHECK(rep.levels[0].tau == 2981);
  CHECK(rep.levels[0].gamma <= 2981.0);
  CHECK(rep.levels[0].ratio <= 1.0);
  CHECK(rep.levels[0].ok);
  CHECK(rep.flatness.flat());

  // |f'(x) - 1| along x = a(10^j) is g_0 - 1 at eta = 10^j.
  double prev = 1.0;
  for (int j = 3; j <= 5; ++j) {
    const double eta = std::pow(10.0, j);
    const double v = std::abs(*fm.derivative(1, fm.a(eta)) - 1.0);
    CHECK(v == doctest::Approx(std::abs(g0_minus_one(fm.delta(), eta)))
                   .epsilon(1e-6));
    CHECK(v < prev);
    prev = v;
  }
  // With one level the hump at tau_1 makes g_1 rise between 10^3 and 10^4.
  CHECK(!rep.ladder_decreasing);

  const FlatnessReport direct = flatness_report(fm, fm.max_order(), 1e-4);
  CHECK(direct.flat());
  CHECK(!direct.left.fixed_point_order);
}
