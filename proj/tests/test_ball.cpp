#include <doctest.h>

#include <cmath>
#include <random>

#include "growthlab/ball.hpp"
#include "growthlab/errors.hpp"

using namespace growthlab;

namespace {

DiffeoPtr supported_parabolic(double c = 1.0) {
  return std::make_shared<SupportedMap>(
      std::make_shared<PolyPerturbationMap>(1, c), kAnnulusInner, kAnnulusOuter);
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("radial map construction") {
  CHECK_NOTHROW(build_radial(std::make_shared<IdentityMap>(), 3));
  CHECK_THROWS_AS(build_radial(std::make_shared<PolyPerturbationMap>(1, 0.1), 2),
                  PreconditionError);
  CHECK_THROWS_AS(build_radial(supported_parabolic(), 0), PreconditionError);
  const RadialMap g = build_radial(supported_parabolic(), 2);
  CHECK_THROWS_AS(g({0.9, 0.9}), PreconditionError);
  CHECK_THROWS_AS(g({0.1, 0.1, 0.1}), PreconditionError);
}

TEST_CASE("radial map is the identity off the annulus") {
  const RadialMap g = build_radial(supported_parabolic(), 3);
  const std::vector<double> x{0.2, 0.0, 0.0};
  CHECK(g(x) == x);
  const std::vector<double> y{0.0, -0.12, 0.16};  // |y| = 0.2
  CHECK(g.iterate(y, 17) == y);
  const std::vector<double> z{0.5, 0.5, 0.5};  // |z| > 2/3
  CHECK(g.iterate(z, -4) == z);

  const RadialMap id = build_radial(std::make_shared<IdentityMap>(), 2);
  CHECK(id({0.3, 0.4}) == std::vector<double>{0.3, 0.4});
  CHECK(radial_growth(id, 7) == 1.0);
}

TEST_CASE("one-dimensional ball is the odd extension") {
  const DiffeoPtr h = supported_parabolic();
  const RadialMap g = build_radial(h, 1);
  for (double x : {0.4, 0.5, 0.6, -0.45, -0.55}) {
    const double expected = x > 0 ? (*h)(x) : -(*h)(-x);
    CHECK(g({x})[0] == doctest::Approx(expected).epsilon(1e-15));
  }
  const auto recs = radial_growth_sequence(g, 20);
  for (const auto& r : recs) CHECK(r.gamma_g == r.gamma_h);
}

TEST_CASE("radial map preserves directions and iterates") {
  const RadialMap g = build_radial(supported_parabolic(), 3);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ur(0.34, 0.66);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x{nd(rng), nd(rng), nd(rng)};
    const double scale = ur(rng) / norm(x);
    for (double& v : x) v *= scale;
    const auto y = g.iterate(x, 5);
    const double r = norm(x);
    CHECK(norm(y) == doctest::Approx(eval_iterate(g.profile(), 5, r)).epsilon(1e-14));
    for (int k = 0; k < 3; ++k) {
      CHECK(y[k] * r == doctest::Approx(x[k] * norm(y)).epsilon(1e-12).scale(1e-14));
    }
    auto z = x;
    for (int s = 0; s < 5; ++s) z = g(z);
    for (int k = 0; k < 3; ++k) CHECK(z[k] == doctest::Approx(y[k]).epsilon(1e-12));
    const auto back = g.iterate(y, -5);
    for (int k = 0; k < 3; ++k) CHECK(back[k] == doctest::Approx(x[k]).epsilon(1e-12));
  }
}

TEST_CASE("differential is diagonal with the two factors") {
  const RadialMap g = build_radial(supported_parabolic(), 3);
  const std::vector<double> x{0.25, 0.2, 0.3};
  const double r = norm(x);
  const long n = 12;
  const auto f = g.factors(r, n);
  const double eps = 1e-6;
  // Directional derivatives along x/|x| and along a vector orthogonal to x.
  auto directional = [&](const std::vector<double>& v) {
    std::vector<double> p(x), m(x);
    for (int k = 0; k < 3; ++k) {
      p[k] += eps * v[k];
      m[k] -= eps * v[k];
    }
    const auto gp = g.iterate(p, n), gm = g.iterate(m, n);
    std::vector<double> d(3);
    for (int k = 0; k < 3; ++k) d[k] = (gp[k] - gm[k]) / (2 * eps);
    return d;
  };
  const std::vector<double> radial{x[0] / r, x[1] / r, x[2] / r};
  const auto dr = directional(radial);
  for (int k = 0; k < 3; ++k) {
    CHECK(dr[k] == doctest::Approx(f.radial * radial[k]).epsilon(1e-6));
  }
  std::vector<double> t{0.2, -0.25, 0.0};
  const double tn = norm(t);
  for (double& v : t) v /= tn;
  const auto dt = directional(t);
  for (int k = 0; k < 3; ++k) {
    CHECK(dt[k] == doctest::Approx(f.tangential * t[k]).epsilon(1e-6).scale(1e-9));
  }
}

TEST_CASE("growth sandwich on the ball") {
  const RadialMap g = build_radial(supported_parabolic(), 2);
  const auto recs = radial_growth_sequence(g, 200);
  bool saw_small = false, saw_large = false;
  for (const auto& rec : recs) {
    CHECK(rec.ok());
    CHECK(rec.rho_min >= 0.5);
    CHECK(rec.rho_max <= 2.0);
    CHECK(rec.gamma_h <= rec.gamma_g);
    CHECK(rec.gamma_g <= std::max(2.0, rec.gamma_h));
    if (rec.gamma_h > 1.3 && rec.gamma_h < 1.9) {
      saw_small = true;
      CHECK(rec.gamma_g >= rec.gamma_h);
      CHECK(rec.gamma_g <= 2.0);
    }
    if (rec.gamma_h > 8.0 && rec.gamma_h < 12.0) {
      saw_large = true;
      CHECK(rec.gamma_g == rec.gamma_h);
    }
  }
  CHECK(saw_small);
  CHECK(saw_large);
  CHECK(radial_growth(g, 0) == 1.0);
  CHECK(radial_growth(g, 30) == recs[29].gamma_g);
}
