// One line per acceptance criterion; exit status 1 if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "obliq/comparison.hpp"
#include "obliq/suites.hpp"

using namespace obliq;

namespace {

constexpr std::uint64_t seed = 1;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Runs suites at their default tolerances under one time budget (none if budget <= 0).
Outcome suites_within(const std::vector<std::string>& names, double budget, std::size_t count = 0) {
  const auto start = std::chrono::steady_clock::now();
  bool passed = true;
  std::string detail;
  for (const std::string& name : names) {
    SuiteOptions o;
    o.seed = seed;
    o.count = count;
    const SuiteResult r = run_suite(name, o);
    passed = passed && r.passed();
    detail += name + fmt(" n=%.0f fail=%.0f err=%.0f", static_cast<double>(r.instances.size()),
                         static_cast<double>(r.failures), static_cast<double>(r.errors)) +
              fmt(" worst=%.3g; ", r.max_violation);
  }
  const double secs = seconds_since(start);
  if (budget > 0.0) detail += fmt("%.2fs (budget %.0fs)", secs, budget);
  else detail += fmt("%.2fs", secs);
  return {passed && (budget <= 0.0 || secs < budget), detail};
}

Outcome counterexample_criterion() {
  const auto start = std::chrono::steady_clock::now();
  const Counterexample c = counterexample_positive_offdiag(0.5);
  double worst = 0.0;
  for (std::size_t k = 0; k < c.times.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    worst = std::max(worst, std::abs(c.z(1, col) - (1.0 + 0.5 * c.times[k])));
    worst = std::max(worst, std::abs(c.zbar(1, col) - 1.0));
  }
  const double secs = seconds_since(start);
  const bool ok = worst <= 1e-12 && c.identity_residual <= 1e-12 && c.violation_certified && secs < 1.0;
  return {ok, fmt("max |Z2-(1+0.5t)|,|Zbar2-1| = %.3g, Z2(1)-Zbar2(1) = %.3g, %.3fs", worst, c.margin_at_end, secs)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"counterexample r21=0.5", counterexample_criterion},
      {"oracle equivalence", [] { return suites_within({"oracle"}, 60.0, 100); }},
      {"comparison theorem (Skorokhod)", [] { return suites_within({"thm31"}, 30.0, 200); }},
      {"comparison theorem (particles)", [] { return suites_within({"thm32"}, 30.0, 200); }},
      {"corollary suites",
       [] {
         return suites_within({"right-removal", "two-sided-removal", "initial-shift", "q-increase", "drift"}, 120.0,
                              100);
       }},
      {"gap/SRBM consistency", [] { return suites_within({"gap-srbm"}, 60.0, 50); }},
      {"convergence ladder", [] { return suites_within({"convergence"}, 60.0, 1); }},
      {"matrix lemmas", [] { return suites_within({"matrix-lemmas"}, 10.0, 500); }},
      {"exact-solver identities", [] { return suites_within({"identities"}, 0.0, 200); }},
  };

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::printf("criterion %zu: %s  %s  [%s]\n", k + 1, o.passed ? "PASS" : "FAIL", criteria[k].name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
