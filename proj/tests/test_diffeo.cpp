#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "growthlab/errors.hpp"
#include "growthlab/growth.hpp"
#include "growthlab/interval_diffeo.hpp"

using namespace growthlab;

namespace {

// Closed form of the n-th iterate of the Moebius map with parameter lambda.
double mobius_iterate(double lambda, int n, double x) {
  const double ln = std::pow(lambda, n);
  return ln * x / (1.0 + (ln - 1.0) * x);
}

double central_difference(const IntervalDiffeo& f, long n, double x,
                          double h) {
  return (eval_iterate(f, n, x + h) - eval_iterate(f, n, x - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("mobius iterates match the closed form") {
  const MobiusMap f(2.0);
  CHECK(eval_iterate(f, 3, 0.5) == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  for (int n = -6; n <= 6; ++n) {
    for (double x : {0.01, 0.3, 0.77, 0.999}) {
      CHECK(eval_iterate(f, n, x) ==
            doctest::Approx(mobius_iterate(2.0, n, x)).epsilon(1e-13));
    }
  }
}

TEST_CASE("zeroth iterate is the identity") {
  const PolyPerturbationMap f(1, 0.1);
  CHECK(eval_iterate(f, 0, 0.3) == 0.3);
}

TEST_CASE("negative iterates invert positive ones") {
  const PolyPerturbationMap f1(1, 0.1);
  const PolyPerturbationMap f2(2, 0.5);
  const MobiusMap f3(3.5);
  for (const IntervalDiffeo* f :
       std::initializer_list<const IntervalDiffeo*>{&f1, &f2, &f3}) {
    for (double x : {1e-3, 0.2, 0.5, 0.8, 0.999}) {
      const double y = eval_iterate(*f, 5, x);
      CHECK(eval_iterate(*f, -5, y) == doctest::Approx(x).epsilon(1e-10));
    }
  }
}

TEST_CASE("endpoints are fixed and maps are increasing") {
  const PolyPerturbationMap f1(1, 0.1);
  const PolyPerturbationMap f2(3, 2.0);
  const MobiusMap f3(0.25);
  for (const IntervalDiffeo* f :
       std::initializer_list<const IntervalDiffeo*>{&f1, &f2, &f3}) {
    CHECK((*f)(0.0) == 0.0);
    CHECK((*f)(1.0) == 1.0);
    double prev = -1.0;
    for (int i = 0; i <= 2000; ++i) {
      const double y = (*f)(i / 2000.0);
      CHECK(y > prev);
      prev = y;
      CHECK(f->deriv(i / 2000.0) > 0.0);
    }
  }
}

TEST_CASE("poly construction rejects non-monotone parameters") {
  CHECK_THROWS_AS(PolyPerturbationMap(1, 100.0), PreconditionError);
  CHECK_THROWS_AS(MobiusMap(-1.0), PreconditionError);
}

TEST_CASE("log orbit derivative") {
  const MobiusMap mob(2.0);
  CHECK(log_orbit_derivative(mob, 5, 0.0) ==
        doctest::Approx(5.0 * std::log(2.0)).epsilon(1e-14));
  const IdentityMap id;
  CHECK(log_orbit_derivative(id, 17, 0.42) == 0.0);

  const PolyPerturbationMap par(1, 0.1);
  const double fd = central_difference(par, 10, 0.5, 1e-5);
  CHECK(std::exp(log_orbit_derivative(par, 10, 0.5)) ==
        doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("log orbit derivative matches finite differences on random pairs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.05, 0.95);
  std::uniform_int_distribution<int> un(-20, 20);
  const PolyPerturbationMap f1(1, 0.1);
  const PolyPerturbationMap f2(2, 1.0);
  const MobiusMap f3(2.0);
  for (const IntervalDiffeo* f :
       std::initializer_list<const IntervalDiffeo*>{&f1, &f2, &f3}) {
    for (int k = 0; k < 100; ++k) {
      const double x = ux(rng);
      const long n = un(rng);
      // Step scaled to keep the orbit inside the chart where it is smooth.
      const double h = 1e-6 * std::min(x, 1.0 - x);
      const double fd = central_difference(*f, n, x, h);
      const double exact = std::exp(log_orbit_derivative(*f, n, x));
      CHECK(exact == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("higher derivative oracles agree with differences of lower ones") {
  const PolyPerturbationMap f(2, 0.7);
  const MobiusMap g(3.0);
  for (const IntervalDiffeo* m :
       std::initializer_list<const IntervalDiffeo*>{&f, &g}) {
    for (double x : {0.13, 0.5, 0.81}) {
      for (int k = 1; k < 5; ++k) {
        const double h = 1e-5;
        const double lo = *m->derivative(k, UnitPoint::at(x - h));
        const double hi = *m->derivative(k, UnitPoint::at(x + h));
        const double d = *m->derivative(k + 1, UnitPoint::at(x));
        CHECK((hi - lo) / (2 * h) ==
              doctest::Approx(d).epsilon(1e-6).scale(1.0));
      }
    }
  }
}

TEST_CASE("wrappers") {
  auto base = std::make_shared<PolyPerturbationMap>(1, 0.3);
  const InverseMap inv(base);
  const IterateMap it(base, 3);
  const SupportedMap sup(std::make_shared<MobiusMap>(2.0), 1.0 / 3, 2.0 / 3);
  for (double x : {0.1, 0.4, 0.9}) {
    CHECK((*base)(inv(x)) == doctest::Approx(x).epsilon(1e-12));
    CHECK(it(x) == doctest::Approx(eval_iterate(*base, 3, x)).epsilon(1e-14));
    CHECK(inv.deriv(x) * base->deriv(inv(x)) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(sup(0.2) == 0.2);
  CHECK(sup(0.9) == 0.9);
  CHECK(sup(0.5) == doctest::Approx(1.0 / 3 + mobius_iterate(2.0, 1, 0.5) / 3));
  CHECK(sup.deriv(1.0 / 3 + 1e-12) == doctest::Approx(2.0).epsilon(1e-9));
}
