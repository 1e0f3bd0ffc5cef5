// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "polarcorr/bounds.hpp"
#include "polarcorr/cli.hpp"
#include "polarcorr/correlation.hpp"
#include "polarcorr/index.hpp"
#include "polarcorr/oracle.hpp"
#include "polarcorr/parallel.hpp"
#include "polarcorr/polarize.hpp"
#include "polarcorr/verify.hpp"

using namespace polarcorr;

namespace {

const double kGrid[] = {0.1, 0.3, 0.5, 0.7, 0.9};

// Rounding slack for comparisons where the bound and the exact value coincide
// mathematically (singletons, pairs).
constexpr double kBracketSlack = 1e-12;

struct Result {
  bool passed;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

Result oracle_equivalence() {
  double worst_z = 0.0, worst_cov = 0.0, worst_rho = 0.0;
  std::size_t rho_cases = 0;
  for (double eps : kGrid) {
    for (int n = 1; n <= 4; ++n) {
      const ExactStats ex = exact_stats(eps, n);
      const ZTree tree(ChannelParam(eps), n);
      const std::size_t dim = ex.dim();
      for (std::size_t s = 0; s < dim; ++s) {
        worst_z = std::max(worst_z, std::abs(tree.z(n, s) - ex.z[s]));
        const SignSequence ss = SignSequence::from_index(s, n);
        for (std::size_t t = 0; t < dim; ++t) {
          const SignSequence ts = SignSequence::from_index(t, n);
          worst_cov = std::max(worst_cov, std::abs(cov_pair(tree, ss, ts) - ex.cov_at(s, t)));
          if (ex.cov_at(s, s) > 1e-12 && ex.cov_at(t, t) > 1e-12) {
            const double exact_rho = ex.cov_at(s, t) / std::sqrt(ex.cov_at(s, s) * ex.cov_at(t, t));
            worst_rho = std::max(worst_rho, std::abs(rho_pair(tree, ss, ts) - exact_rho));
            ++rho_cases;
          }
        }
      }
    }
  }
  const bool ok = worst_z <= 1e-10 && worst_cov <= 1e-10 && worst_rho <= 1e-10;
  return {ok, fmt("max |dZ|=%.3g max |dCov|=%.3g max |dRho|=%.3g", worst_z, worst_cov, worst_rho) +
                  " over " + std::to_string(rho_cases) + " rho pairs"};
}

Result one_third_anchor() {
  const ZTree tree(ChannelParam(0.5), 1);
  const double rho = rho_pair(tree, SignSequence::parse("-"), SignSequence::parse("+"));
  const double dev = std::abs(rho - 1.0 / 3.0);
  return {dev <= 1e-15, fmt("rho=%.17g |dev|=%.3g", rho, dev)};
}

Result two_event_exactness() {
  double worst = 0.0;
  std::size_t cases = 0;
  for (double eps : kGrid) {
    for (int n = 1; n <= 4; ++n) {
      const ExactStats ex = exact_stats(eps, n);
      const ZTree tree(ChannelParam(eps), n);
      for (std::uint64_t a = 0; a < ex.dim(); ++a) {
        for (std::uint64_t b = a + 1; b < ex.dim(); ++b) {
          const std::vector<std::uint64_t> set = {a, b};
          const CodeSpec code(eps, n, set);
          worst = std::max(worst, std::abs(ie_lower(code, tree) - ex.union_probability(set)));
          ++cases;
        }
      }
    }
  }
  return {worst <= 1e-10, fmt("max |ie - exact|=%.3g over ", worst) + std::to_string(cases) + " sets"};
}

Result bound_bracketing() {
  std::size_t cases = 0, violations = 0;
  double worst = 0.0;
  auto check = [&](double eps, int n, const ZTree& tree, const ExactStats& ex, const std::vector<std::uint64_t>& set) {
    const CodeSpec code(eps, n, set);
    const BoundsReport r = compute_bounds(code, tree);
    const double exact = ex.union_probability(set);
    const double slacks[] = {r.trivial_lower - exact, r.ie_lower - exact, exact - r.union_upper_clamped()};
    for (double s : slacks) {
      worst = std::max(worst, s);
      if (s > kBracketSlack) ++violations;
    }
    ++cases;
  };
  for (double eps : kGrid) {
    for (int n = 1; n <= 3; ++n) {
      const ExactStats ex = exact_stats(eps, n);
      const ZTree tree(ChannelParam(eps), n);
      for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << ex.dim()); ++mask) {
        std::vector<std::uint64_t> set;
        for (std::uint64_t s = 0; s < ex.dim(); ++s) {
          if ((mask >> s) & 1U) set.push_back(s);
        }
        check(eps, n, tree, ex, set);
      }
    }
  }
  std::mt19937_64 gen(20240611);
  for (double eps : kGrid) {
    const ExactStats ex = exact_stats(eps, 4);
    const ZTree tree(ChannelParam(eps), 4);
    for (int i = 0; i < 200; ++i) {
      std::uint64_t mask = 0;
      while (mask == 0) mask = gen() & 0xFFFFU;
      std::vector<std::uint64_t> set;
      for (std::uint64_t s = 0; s < 16; ++s) {
        if ((mask >> s) & 1U) set.push_back(s);
      }
      check(eps, 4, tree, ex, set);
    }
  }
  return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(cases) +
                               fmt(" sets, worst excess %.3g", worst)};
}

Result property_suite() {
  std::string failed;
  const int workers = default_workers();
  for (int n = 1; n <= 12; ++n) {
    const ZTree tree(ChannelParam(0.5), n);
    const PropertyReport report = check_properties(tree, workers);
    for (const PropertyCheck& c : report.checks) {
      if (!c.passed) failed += " n=" + std::to_string(n) + ":" + c.name;
    }
  }
  return {failed.empty(), failed.empty() ? "all properties hold for n=1..12" : "failed:" + failed};
}

Result monte_carlo_consistency() {
  MonteCarloVerifyConfig cfg;
  cfg.epsilon = 0.5;
  cfg.n = 8;
  cfg.trials = 1000000;
  cfg.seed = 12345;
  cfg.info_size = info_size_for_rate(8, 0.25);
  cfg.pair_count = 100;
  cfg.workers = default_workers();
  const VerificationReport report = verify_monte_carlo(cfg);
  std::string detail;
  for (const auto& c : report.checks) detail += c.name + fmt("=%.2f/%.0f ", c.observed, c.limit);
  return {report.passed(), detail};
}

Result tightness_trend() {
  double gap8 = 0.0, gap14 = 0.0;
  bool above_trivial = true;
  std::string detail;
  for (int n : {8, 10, 12, 14}) {
    const ZTree tree(ChannelParam(0.5), n);
    const CodeSpec code = construct_info_set(tree, info_size_for_rate(n, 0.25));
    const BoundsReport r = compute_bounds(code, tree, default_workers());
    const double gap = (r.union_upper - r.ie_lower) / r.union_upper;
    if (n == 8) gap8 = gap;
    if (n == 14) gap14 = gap;
    above_trivial = above_trivial && r.ie_lower > r.trivial_lower;
    detail += "n=" + std::to_string(n) + fmt(" gap=%.3g ", gap);
  }
  return {gap14 < gap8 && above_trivial, detail};
}

std::string capture(const std::vector<std::string>& args, int& code) {
  std::vector<const char*> argv = {"polarcorr"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

Result cli_determinism() {
  const std::vector<std::vector<std::string>> cases = {
      {"zvec", "--n", "10", "--epsilon", "0.37"},
      {"rho", "--n", "6", "--s=-+-++-", "--t=-++--+"},
      {"rho-matrix", "--n", "6", "--format", "binary", "--workers", "3"},
      {"rho-matrix", "--n", "4", "--format", "json"},
      {"construct", "--n", "10", "--rate", "0.5"},
      {"bounds", "--n", "10", "--rate", "0.25", "--delta", "0.05", "--workers", "3"},
      {"bounds", "--n", "4", "--k", "5", "--exact", "--format", "json"},
      {"table", "--n", "9", "--rates", "0.1,0.2,0.3,0.4"},
      {"verify", "--n", "3", "--exact"},
      {"verify", "--n", "6", "--trials", "20000", "--seed", "9"},
      {"simulate", "--n", "6", "--trials", "20000", "--seed", "3", "--rate", "0.25", "--sample-pairs", "10",
       "--workers", "2"},
  };
  std::size_t mismatches = 0, errors = 0;
  for (const auto& args : cases) {
    int c1 = 0, c2 = 0;
    const std::string a = capture(args, c1);
    const std::string b = capture(args, c2);
    if (a != b) ++mismatches;
    if (c1 != c2 || (c1 != cli::kExitOk)) ++errors;
  }
  return {mismatches == 0 && errors == 0, std::to_string(cases.size()) + " commands, " + std::to_string(mismatches) +
                                              " mismatches, " + std::to_string(errors) + " nonzero exits"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"1 oracle equivalence", oracle_equivalence},
      {"2 one-third anchor", one_third_anchor},
      {"3 two-event exactness", two_event_exactness},
      {"4 bound bracketing", bound_bracketing},
      {"5 property suite n<=12", property_suite},
      {"6 monte carlo consistency", monte_carlo_consistency},
      {"7 tightness trend", tightness_trend},
      {"8 cli determinism", cli_determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Result r{false, ""};
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  criterion %s: %s (%.1fs)\n", r.passed ? "PASS" : "FAIL", name.c_str(), r.detail.c_str(), secs);
    std::fflush(stdout);
    if (!r.passed) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
