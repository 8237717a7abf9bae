// One line per acceptance criterion: PASS or FAIL, the measured quantities
// and the wall time. Exit status is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "growthlab/ball.hpp"
#include "growthlab/delta.hpp"
#include "growthlab/errors.hpp"
#include "growthlab/fit.hpp"
#include "growthlab/flow.hpp"
#include "growthlab/gap_analysis.hpp"
#include "growthlab/growth.hpp"

using namespace growthlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body,
               double time_limit = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit > 0.0 && secs >= time_limit) {
    o.pass = false;
    o.detail += "; over the " + fmt("%.0f", time_limit) + " s budget";
  }
  if (!o.pass) ++failures;
  std::printf("%s [%2d] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title,
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

// Shared fixtures, built on first use.
const GapCertificate& certificate(int p, double c) {
  static std::vector<std::pair<std::pair<int, double>,
                               std::unique_ptr<GapCertificate>>>
      cache;
  for (auto& e : cache) {
    if (e.first == std::make_pair(p, c)) return *e.second;
  }
  const PolyPerturbationMap f(p, c);
  cache.emplace_back(std::make_pair(p, c),
                     std::make_unique<GapCertificate>(certify_gap(f, 10000)));
  return *cache.back().second;
}

const DeltaFunction& delta(int levels) {
  static std::vector<std::unique_ptr<DeltaFunction>> cache(4);
  if (!cache[levels]) {
    cache[levels] = std::make_unique<DeltaFunction>(
        build_schedule(TargetSequence::linear(), levels), 1e-10);
  }
  return *cache[levels];
}

const FlowMap& flow(int levels) {
  static std::vector<FlowPtr> cache(4);
  if (!cache[levels]) cache[levels] = build_flow(delta(levels));
  return *cache[levels];
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(std::abs(v[i]) < std::abs(v[i - 1]))) return false;
  }
  return true;
}

std::string triple(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += (i ? ", " : "") + fmt("%.3g", std::abs(v[i]));
  }
  return s;
}

}  // namespace

int main() {
  criterion(1, "Mobius exactness", [] {
    const MobiusMap f(2.0);
    const auto recs = growth_sequence(f, 40);
    double worst = 0.0;
    for (const auto& r : recs) {
      worst = std::max(worst, std::abs(r.gamma_n / std::ldexp(1.0, r.n) - 1.0));
    }
    const GammaEstimate g = gamma_exponent(f, 40);
    const bool pass = worst <= 1e-8 && std::abs(g.gamma - 2.0) <= 1e-3;
    return Outcome{pass, "max rel err " + fmt("%.2e", worst) + " over n<=40, gamma " +
                             fmt("%.9f", g.gamma)};
  }, 1.0);

  criterion(2, "quadratic growth, p=1", [] {
    const auto& cert = certificate(1, 0.1);
    const FitReport r = fit_exponent(cert.records, 1000, 10000);
    return Outcome{r.slope >= 1.85 && r.slope <= 2.15,
                   "poly:p=1,c=0.1 slope " + fmt("%.4f", r.slope) +
                       " on [1e3,1e4], target [1.85,2.15]"};
  }, 60.0);

  criterion(3, "exponent (p+1)/p for p=2", [] {
    const FitReport r = fit_exponent(certificate(2, 1.0).records, 1000, 10000);
    const FitReport small = fit_exponent(certificate(2, 0.1).records, 1000, 10000);
    return Outcome{r.slope >= 1.40 && r.slope <= 1.60,
                   "poly:p=2,c=1 slope " + fmt("%.4f", r.slope) +
                       " on [1e3,1e4], target [1.40,1.60]; c=0.1 gives " +
                       fmt("%.4f", small.slope) + " (pre-asymptotic)"};
  }, 60.0);

  criterion(4, "gap theorem bound", [] {
    std::string detail;
    bool pass = true;
    for (auto [p, c] : {std::pair{1, 0.1}, std::pair{2, 0.1}, std::pair{2, 1.0}}) {
      const auto& cert = certificate(p, c);
      pass = pass && cert.bound_violations.empty() && !cert.hyperbolic;
      double worst = -1e300;
      for (const auto& r : cert.records) {
        worst = std::max(worst, r.log_gamma - log_bound(cert.regularity.c_const, r.n));
      }
      detail += "p=" + std::to_string(p) + ",c=" + fmt("%g", c) + ": C=" +
                fmt("%.4g", cert.regularity.c_const) + ", " +
                std::to_string(cert.bound_violations.size()) +
                " violations, max log(Gamma/bound) " + fmt("%.3f", worst) + "; ";
    }
    return Outcome{pass, detail + "n<=1e4"};
  });

  criterion(5, "almost-convexity", [] {
    std::string detail;
    bool pass = true;
    for (auto [p, c] : {std::pair{1, 0.1}, std::pair{2, 0.1}, std::pair{2, 1.0}}) {
      const auto& cert = certificate(p, c);
      pass = pass && cert.convexity_violations.empty();
      detail += "p=" + std::to_string(p) + ",c=" + fmt("%g", c) + ": " +
                std::to_string(cert.convexity_violations.size()) +
                " violations (max grid slack " + fmt("%.1e", cert.max_grid_slack) +
                "); ";
    }
    const PolyPerturbationMap p3(3, 0.1);
    const auto recs3 = growth_sequence(p3, 2000);
    const auto v3 = near_convexity_check(recs3, regularity_constants(p3));
    pass = pass && v3.empty();
    detail += "p=3,c=0.1 (n<=2000): " + std::to_string(v3.size()) + " violations; ";
    const IdentityMap id;
    const auto vid = near_convexity_check(growth_sequence(id, 100),
                                          regularity_constants(id));
    pass = pass && vid.empty();
    detail += "identity: " + std::to_string(vid.size()) + "; tolerance 1e-6";
    return Outcome{pass, detail};
  });

  criterion(6, "growth lemma classifier", [] {
    const double c = 8.0;
    const long len = 200;
    RealSequence zero{std::vector<double>(len, 0.0), c};
    RealSequence lin{{}, c};
    RealSequence h{{}, c};
    for (long n = 0; n < len; ++n) {
      lin.values.push_back(n * std::log(2.0));
      h.values.push_back(log_bound(c, n));
    }
    const auto vz = growth_lemma_classify(zero);
    const auto vl = growth_lemma_classify(lin);
    const auto vh = growth_lemma_classify(h);
    const bool zero_ok = vz.verdict == Verdict::LogBound;
    const bool lin_verdict = vl.verdict == Verdict::LinearGrowth;
    const bool lin_witness = vl.witness && *vl.witness == 10;
    const bool h_ok = vh.verdict == Verdict::NotSubsolution;
    const std::string w = vl.witness ? std::to_string(*vl.witness) : "none";
    return Outcome{zero_ok && lin_verdict && lin_witness && h_ok,
                   "zero -> " + to_string(vz.verdict) + "; n*log2 -> " +
                       to_string(vl.verdict) + " witness " + w +
                       " (expected 10; a_9=6.238 > h_9=2log19=5.889 already); "
                       "h_n -> " + to_string(vh.verdict)};
  });

  criterion(7, "Denjoy distortion suite", [] {
    std::vector<DiffeoPtr> families{std::make_shared<MobiusMap>(2.0),
                                    std::make_shared<PolyPerturbationMap>(1, 0.1),
                                    std::make_shared<PolyPerturbationMap>(2, 0.1),
                                    std::make_shared<PolyPerturbationMap>(2, 1.0)};
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ux(0.02, 0.98), ut(0.05, 0.95);
    std::uniform_int_distribution<long> un(1, 50);
    int total = 0, bad = 0;
    double worst = 0.0;
    for (const auto& f : families) {
      const RegularityData reg = regularity_constants(*f);
      int cases = 0;
      while (cases < 100) {
        const double x = ux(rng), fx = (*f)(x), t = ut(rng);
        const double lo = fx > x ? x : x - t * (x - fx);
        const double hi = fx > x ? x + t * (fx - x) : x;
        DenjoyReport r;
        try {
          r = denjoy_check(*f, lo, hi, un(rng), 64, reg);
        } catch (const PreconditionError&) {
          continue;
        }
        ++cases;
        if (!r.ok) ++bad;
        worst = std::max(worst, std::max(std::log(r.max_ratio), -std::log(r.min_ratio)) /
                                    reg.variation);
      }
      total += cases;
    }
    return Outcome{bad == 0, std::to_string(total) + " cases over 4 families, " +
                                 std::to_string(bad) +
                                 " violations; max |log ratio| / v = " +
                                 fmt("%.3f", worst) + ", slack 1e-9"};
  });

  criterion(8, "Delta construction, u(n)=n, 2 levels", [] {
    const DeltaFunction& d = delta(2);
    bool sandwiches = true, ratio_ok = true;
    std::string ratios;
    for (int i = 1; i <= d.schedule().levels(); ++i) {
      const RatioReport r = verify_ratio_bound(d, i);
      sandwiches = sandwiches && r.phi_sandwich && r.theta_sandwich && r.phi_exact;
      ratio_ok = ratio_ok && r.ok;
      ratios += fmt("%.4g", r.sup_ratio) + "/" + fmt("%.0f", r.bound) + " ";
    }
    const IntegrabilityReport integ = verify_integrability(d);
    const double stab = std::abs(integ.doubled_total - integ.total) / integ.total;
    std::vector<double> g0, g1;
    for (double t : {1e3, 1e4, 1e5}) {
      const GValues g = g_values(d, t);
      g0.push_back(g.g0_minus_one);
      g1.push_back(g.g[1]);
    }
    const bool dec = strictly_decreasing(g0) && strictly_decreasing(g1);
    return Outcome{sandwiches && ratio_ok && stab <= 1e-6 && dec,
                   std::to_string(d.terms().size()) + " terms; (a) sandwiches " +
                       (sandwiches ? "hold" : "fail") + "; (b) sup ratio " + ratios +
                       "; (c) T-doubling rel change " + fmt("%.1e", stab) +
                       "; (d) |g0-1| " + triple(g0) + ", |g1| " + triple(g1)};
  }, 120.0);

  criterion(9, "subsequence bound and flow vs orbit growth", [] {
    const FlowMap& f2 = flow(2);
    const SubsequenceReport rep = verify_subsequence_bound(f2);
    bool levels_ok = !rep.levels.empty();
    std::string lv;
    for (const auto& l : rep.levels) {
      levels_ok = levels_ok && l.ok;
      lv += "Gamma_" + std::to_string(l.tau) + "=" + fmt("%.4g", l.gamma) + " <= " +
            fmt("%.0f", l.u_tau) + "; ";
    }
    const FlowMap& f1 = flow(1);
    GridSpec grid;
    grid.uniform = 1024;
    grid.ladder_depth = 20;
    const auto recs = growth_sequence(f1, 100, grid);
    double worst = 0.0;
    for (long n = 1; n <= 100; ++n) {
      worst = std::max(worst, std::abs(recs[n - 1].gamma_n / flow_growth(f1, n) - 1.0));
    }
    return Outcome{levels_ok && worst <= 0.05,
                   lv + "orbit vs flow (1 level, n<=100) max rel diff " +
                       fmt("%.2e", worst)};
  });

  criterion(10, "reciprocal-sum property", [] {
    std::vector<DiffeoPtr> families{std::make_shared<MobiusMap>(2.0),
                                    std::make_shared<PolyPerturbationMap>(1, 0.1),
                                    std::make_shared<PolyPerturbationMap>(2, 0.1),
                                    std::make_shared<PolyPerturbationMap>(2, 1.0),
                                    std::make_shared<PolyPerturbationMap>(3, 0.1)};
    bool pass = true;
    std::string detail;
    for (const auto& f : families) {
      const auto rep = orbit_gap_bound(*f, UnitPoint::at(0.5), 1000);
      pass = pass && rep.ok();
      detail += f->name() + ": " + std::to_string(rep.violations.size()) + "; ";
    }
    // The flow map: Gamma_n from the supremum formula.
    const FlowMap& fm = flow(1);
    std::vector<GrowthRecord> recs;
    for (long n = 1; n <= 1000; ++n) {
      GrowthRecord r;
      r.n = n;
      r.gamma_n = flow_growth(fm, n);
      r.log_gamma = std::log(r.gamma_n);
      recs.push_back(r);
    }
    const auto rep = orbit_gap_bound(fm, UnitPoint::at(0.5), recs);
    pass = pass && rep.ok();
    detail += "flow (1 level): " + std::to_string(rep.violations.size()) +
              " violations; n<=1000, partial sums monotone and <= 1/delta_0";
    return Outcome{pass, detail};
  });

  criterion(11, "ball sandwich", [] {
    bool pass = true;
    long eq_count = 0;
    for (int dim : {2, 3}) {
      for (double c : {1.0, 3.0}) {
        const RadialMap g = build_radial(
            std::make_shared<SupportedMap>(std::make_shared<PolyPerturbationMap>(1, c),
                                           kAnnulusInner, kAnnulusOuter),
            dim);
        for (const auto& r : radial_growth_sequence(g, 200)) {
          pass = pass && r.ok();
          if (r.gamma_h > 2.0) ++eq_count;
        }
      }
    }
    return Outcome{pass, "dims 2,3, poly:p=1 (c=1,3) on [1/3;2/3], n<=200; "
                         "equality checked at " + std::to_string(eq_count) +
                         " indices with Gamma_n(h) > 2"};
  });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures;
}
