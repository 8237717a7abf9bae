#include "growthlab/numerics.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace growthlab {

double sorted_compensated_sum(std::span<double> terms) {
  std::sort(terms.begin(), terms.end(),
            [](double a, double b) { return std::abs(a) > std::abs(b); });
  CompensatedSum s;
  for (double t : terms) s.add(t);
  return s.value();
}

namespace {

struct SimpsonPanel {
  double a, m, b, fa, fm, fb, whole;
};

double simpson_recurse(const std::function<double(double)>& f,
                       const SimpsonPanel& p, double tol, int depth,
                       double& err, bool& converged) {
  const double lm = 0.5 * (p.a + p.m);
  const double rm = 0.5 * (p.m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (p.m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
  const double right = (p.b - p.m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
  const double delta = left + right - p.whole;
  if (std::abs(delta) <= 15.0 * tol) {
    err += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (depth <= 0) {
    converged = false;
    err += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, {p.a, lm, p.m, p.fa, flm, p.fm, left}, 0.5 * tol,
                         depth - 1, err, converged) +
         simpson_recurse(f, {p.m, rm, p.b, p.fm, frm, p.fb, right}, 0.5 * tol,
                         depth - 1, err, converged);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f,
                                  double a, double b, double tol,
                                  int max_depth) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  QuadratureResult r;
  r.value = simpson_recurse(f, {a, m, b, fa, fm, fb, whole}, tol, max_depth,
                            r.error, r.converged);
  return r;
}

QuadratureResult gauss_kronrod(const std::function<double(double)>& f,
                               double a, double b, double rel_tol,
                               unsigned max_depth) {
  QuadratureResult r;
  double l1 = 0.0;
  r.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, max_depth, rel_tol, &r.error, &l1);
  r.converged = r.error <= std::max(rel_tol * l1, 1e-300) * 10.0 ||
                r.error <= 1e-15 * std::abs(r.value);
  return r;
}

std::pair<double, double> golden_section_max(
    const std::function<double(double)>& f, double a, double b,
    int iterations) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc > fd ? std::pair{c, fc} : std::pair{d, fd};
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GROWTHLAB_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (...) {
      // Malformed values leave the hardware default in place.
    }
  }
  return n;
}

std::size_t chunk_count(std::size_t n) {
  if (n == 0) return 0;
  return std::min<std::size_t>(worker_count(), n);
}

std::size_t parallel_chunks(
    std::size_t n,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t chunks = chunk_count(n);
  if (chunks <= 1) {
    if (n > 0) body(0, 0, n);
    return chunks;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(chunks);
  pool.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    pool.emplace_back([&body, &failures, c, begin, end] {
      try {
        body(c, begin, end);
      } catch (...) {
        failures[c] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return chunks;
}

}  // namespace growthlab
