#include "polarcorr/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <new>
#include <sstream>

#include "polarcorr/bounds.hpp"
#include "polarcorr/correlation.hpp"
#include "polarcorr/errors.hpp"
#include "polarcorr/oracle.hpp"
#include "polarcorr/parallel.hpp"
#include "polarcorr/polarize.hpp"
#include "polarcorr/verify.hpp"

namespace polarcorr::cli {

namespace {

using Json = nlohmann::ordered_json;

const std::map<std::string, Command>& command_names() {
  static const std::map<std::string, Command> names = {
      {"zvec", Command::ZVec},           {"rho", Command::Rho},       {"rho-matrix", Command::RhoMatrix},
      {"construct", Command::Construct}, {"bounds", Command::Bounds}, {"table", Command::Table},
      {"verify", Command::Verify},       {"simulate", Command::Simulate},
  };
  return names;
}

const std::map<std::string, Format>& format_names() {
  static const std::map<std::string, Format> names = {
      {"csv", Format::Csv}, {"json", Format::Json}, {"binary", Format::Binary}};
  return names;
}

// Round-trip precision for CSV and text output.
std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string signs(std::uint64_t index, int n) { return SignSequence::from_index(index, n).to_string(); }

void usage_error(const std::string& message) { throw DomainError(message); }

bool takes_code_size(Command c) {
  return c == Command::Construct || c == Command::Bounds || c == Command::Verify || c == Command::Simulate;
}

std::size_t code_size(const RunConfig& config, std::size_t fallback_rate_quarter) {
  if (config.k) return static_cast<std::size_t>(*config.k);
  if (config.rate) return info_size_for_rate(config.n, *config.rate);
  return fallback_rate_quarter;
}

double code_rate(const RunConfig& config, std::size_t k) {
  return config.rate ? *config.rate : std::ldexp(static_cast<double>(k), -config.n);
}

void emit_json(std::ostream& out, const Json& doc) { out << doc.dump(2) << '\n'; }

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void run_zvec(const RunConfig& config, std::ostream& out) {
  const ZTree tree(ChannelParam(config.epsilon), config.n);
  const auto z = tree.level(config.n);
  if (config.format == Format::Json) {
    Json rows = Json::array();
    for (std::size_t s = 0; s < z.size(); ++s) rows.push_back({{"index", s}, {"signs", signs(s, config.n)}, {"z", z[s]}});
    emit_json(out, {{"epsilon", config.epsilon}, {"n", config.n}, {"z", rows}});
    return;
  }
  out << "index,signs,z\n";
  for (std::size_t s = 0; s < z.size(); ++s) out << s << ',' << signs(s, config.n) << ',' << num(z[s]) << '\n';
}

void run_rho(const RunConfig& config, std::ostream& out) {
  const ZTree tree(ChannelParam(config.epsilon), config.n);
  const SignSequence s = SignSequence::parse(config.s);
  const SignSequence t = SignSequence::parse(config.t);
  out << "s=" << s.to_string() << '\n'
      << "t=" << t.to_string() << '\n'
      << "common_prefix=" << common_prefix_len(s, t) << '\n'
      << "z_s=" << num(tree.z(s)) << '\n'
      << "z_t=" << num(tree.z(t)) << '\n'
      << "rho=" << num(rho_pair(tree, s, t)) << '\n'
      << "cov=" << num(cov_pair(tree, s, t)) << '\n';
}

void run_rho_matrix(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const ZTree tree(ChannelParam(config.epsilon), config.n);
  err << "building " << (std::size_t{1} << config.n) << "x" << (std::size_t{1} << config.n) << " correlation matrix\n";
  const CorrelationMatrix rho = build_rho_matrix(tree, config.workers);
  const std::size_t dim = rho.dim();
  switch (config.format) {
    case Format::Binary: {
      out.write(kRhoMagic, sizeof kRhoMagic);
      write_u32(out, kRhoFormatVersion);
      write_u32(out, static_cast<std::uint32_t>(config.n));
      write_f64(out, config.epsilon);
      for (double v : rho.triangle()) write_f64(out, v);
      break;
    }
    case Format::Json: {
      Json tri = Json::array();
      for (double v : rho.triangle()) tri.push_back(v);
      emit_json(out, {{"epsilon", config.epsilon}, {"n", config.n}, {"dim", dim}, {"triangle", tri}});
      break;
    }
    case Format::Csv: {
      out << "row,col,rho\n";
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) out << i << ',' << j << ',' << num(rho(i, j)) << '\n';
      }
      break;
    }
  }
}

void run_construct(const RunConfig& config, std::ostream& out) {
  const ZTree tree(ChannelParam(config.epsilon), config.n);
  const CodeSpec code = construct_info_set(tree, code_size(config, 0));
  if (config.format == Format::Json) {
    Json rows = Json::array();
    for (std::uint64_t s : code.info_set()) {
      rows.push_back({{"index", s}, {"signs", signs(s, config.n)}, {"z", tree.z(config.n, s)}});
    }
    emit_json(out, {{"epsilon", config.epsilon}, {"n", config.n}, {"k", code.k()}, {"rate", code.rate()}, {"info_set", rows}});
    return;
  }
  out << "index,signs,z\n";
  for (std::uint64_t s : code.info_set()) out << s << ',' << signs(s, config.n) << ',' << num(tree.z(config.n, s)) << '\n';
}

void run_bounds(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const ZTree tree(ChannelParam(config.epsilon), config.n);
  const std::size_t k = code_size(config, 0);
  const CodeSpec code = construct_info_set(tree, k);
  err << "bounds for k=" << k << " of " << tree.width(config.n) << " channels\n";
  BoundsReport report = compute_bounds(code, tree, config.workers);
  if (config.exact) report.exact = exact_stats(config.epsilon, config.n, code.info_set()).block_error;
  std::optional<double> asymptotic;
  if (config.delta) asymptotic = asymptotic_lower(tree, code_rate(config, k), *config.delta);

  if (config.format == Format::Json) {
    Json doc = {{"epsilon", config.epsilon}, {"n", config.n},
                {"rate", code_rate(config, k)}, {"k", k},
                {"union_upper", report.union_upper}, {"trivial_lower", report.trivial_lower},
                {"ie_lower", report.ie_lower}, {"union_upper_clamped", report.union_upper_clamped()},
                {"ie_lower_clamped", report.ie_lower_clamped()}};
    if (report.exact) doc["exact"] = *report.exact;
    if (asymptotic) doc["asymptotic_lower"] = *asymptotic;
    emit_json(out, doc);
    return;
  }
  out << "epsilon,n,rate,k,union_upper,trivial_lower,ie_lower,union_upper_clamped,ie_lower_clamped";
  if (report.exact) out << ",exact";
  if (asymptotic) out << ",asymptotic_lower";
  out << '\n'
      << num(config.epsilon) << ',' << config.n << ',' << num(code_rate(config, k)) << ',' << k << ','
      << num(report.union_upper) << ',' << num(report.trivial_lower) << ',' << num(report.ie_lower)
      << ',' << num(report.union_upper_clamped()) << ',' << num(report.ie_lower_clamped());
  if (report.exact) out << ',' << num(*report.exact);
  if (asymptotic) out << ',' << num(*asymptotic);
  out << '\n';
}

void run_table(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const ZTree tree(ChannelParam(config.epsilon), config.n);
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "rate,sum_z,max_z,ie_lower\n";
  for (double rate : config.rates) {
    const std::size_t k = info_size_for_rate(config.n, rate);
    err << "rate " << rate << ": k=" << k << '\n';
    const CodeSpec code = construct_info_set(tree, k);
    const BoundsReport report = compute_bounds(code, tree, config.workers);
    rows.push_back({{"rate", rate}, {"k", k}, {"sum_z", report.union_upper}, {"max_z", report.trivial_lower},
                    {"ie_lower", report.ie_lower}});
    csv << num(rate) << ',' << num(report.union_upper) << ',' << num(report.trivial_lower) << ','
        << num(report.ie_lower) << '\n';
  }
  if (config.format == Format::Json) {
    emit_json(out, {{"epsilon", config.epsilon}, {"n", config.n}, {"rows", rows}});
  } else {
    out << csv.str();
  }
}

int run_verify(const RunConfig& config, std::ostream& out, std::ostream& err) {
  VerificationReport report;
  if (config.exact) {
    report = verify_exact(config.epsilon, config.n);
  } else {
    MonteCarloVerifyConfig mc;
    mc.epsilon = config.epsilon;
    mc.n = config.n;
    mc.trials = config.trials;
    mc.seed = config.seed;
    mc.info_size = code_size(config, info_size_for_rate(config.n, 0.25));
    mc.pair_count = config.sample_pairs == 0 ? 100 : static_cast<std::size_t>(config.sample_pairs);
    mc.workers = config.workers;
    err << "simulating " << config.trials << " trials\n";
    report = verify_monte_carlo(mc);
  }
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"observed", c.observed}, {"limit", c.limit},
                      {"cases", c.cases}});
  }
  emit_json(out, {{"mode", report.mode},
                  {"epsilon", report.epsilon},
                  {"n", report.n},
                  {"checks", checks},
                  {"overall", report.passed() ? "pass" : "fail"}});
  return report.passed() ? kExitOk : kExitVerificationFailed;
}

void run_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const ZTree tree(ChannelParam(config.epsilon), config.n);
  MonteCarloConfig mc;
  mc.epsilon = config.epsilon;
  mc.n = config.n;
  mc.trials = config.trials;
  mc.seed = config.seed;
  mc.workers = config.workers;
  std::optional<BoundsReport> bounds;
  if (config.rate || config.k) {
    const CodeSpec code = construct_info_set(tree, code_size(config, 0));
    mc.info_set.assign(code.info_set().begin(), code.info_set().end());
    bounds = compute_bounds(code, tree, config.workers);
  }
  mc.pairs = sample_pairs(tree, static_cast<std::size_t>(config.sample_pairs), config.seed);
  err << "simulating " << config.trials << " trials\n";
  const MonteCarloResult result = monte_carlo(mc);
  const PairwiseRho rho(tree);
  const int n = config.n;

  if (config.format == Format::Json) {
    Json z = Json::array();
    for (std::size_t s = 0; s < result.z.size(); ++s) {
      z.push_back({{"index", s}, {"signs", signs(s, n)}, {"estimate", result.z[s].value},
                   {"std_error", result.z[s].std_error}, {"reference", tree.z(n, s)}});
    }
    Json pairs = Json::array();
    for (const auto& p : result.pairs) {
      Json row = {{"s", signs(p.s, n)}, {"t", signs(p.t, n)}, {"cov", p.cov.value}, {"cov_std_error", p.cov.std_error},
                  {"cov_reference", cov_pair(tree, SignSequence::from_index(p.s, n), SignSequence::from_index(p.t, n))},
                  {"rho_reference", rho(p.s, p.t)}};
      if (p.rho) {
        row["rho"] = p.rho->value;
        row["rho_std_error"] = p.rho->std_error;
      }
      pairs.push_back(row);
    }
    Json doc = {{"epsilon", config.epsilon}, {"n", n}, {"trials", config.trials}, {"seed", config.seed}, {"z", z},
                {"pairs", pairs}};
    if (result.block_error) {
      doc["block_error"] = {{"k", mc.info_set.size()},
                            {"estimate", result.block_error->value},
                            {"std_error", result.block_error->std_error},
                            {"lower", bounds->ie_lower_clamped()},
                            {"upper", bounds->union_upper_clamped()}};
    }
    emit_json(out, doc);
    return;
  }
  out << "kind,s,t,estimate,std_error,reference_low,reference_high\n";
  for (std::size_t s = 0; s < result.z.size(); ++s) {
    const std::string ref = num(tree.z(n, s));
    out << "z," << signs(s, n) << ",," << num(result.z[s].value) << ',' << num(result.z[s].std_error) << ',' << ref
        << ',' << ref << '\n';
  }
  for (const auto& p : result.pairs) {
    if (!p.rho) continue;
    const std::string ref = num(rho(p.s, p.t));
    out << "rho," << signs(p.s, n) << ',' << signs(p.t, n) << ',' << num(p.rho->value) << ','
        << num(p.rho->std_error) << ',' << ref << ',' << ref << '\n';
  }
  if (result.block_error) {
    out << "block_error,,," << num(result.block_error->value) << ',' << num(result.block_error->std_error) << ','
        << num(bounds->ie_lower_clamped()) << ',' << num(bounds->union_upper_clamped()) << '\n';
  }
}

int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err) {
  switch (config.command) {
    case Command::ZVec: run_zvec(config, out); break;
    case Command::Rho: run_rho(config, out); break;
    case Command::RhoMatrix: run_rho_matrix(config, out, err); break;
    case Command::Construct: run_construct(config, out); break;
    case Command::Bounds: run_bounds(config, out, err); break;
    case Command::Table: run_table(config, out, err); break;
    case Command::Verify: return run_verify(config, out, err);
    case Command::Simulate: run_simulate(config, out, err); break;
  }
  return kExitOk;
}

}  // namespace

void validate(const RunConfig& config) {
  const Command c = config.command;
  if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0)) usage_error("--epsilon must lie in [0,1]");
  if (config.n < 0 || config.n > kMaxSignLength) {
    usage_error("--n must lie in [0, " + std::to_string(kMaxSignLength) + "]");
  }
  if (config.workers < 1) usage_error("--workers must be at least 1");
  if (config.format == Format::Binary && c != Command::RhoMatrix) usage_error("--format binary is only valid for rho-matrix");

  const bool has_rate = config.rate.has_value();
  const bool has_k = config.k.has_value();
  if (has_rate && has_k) usage_error("give either --rate or --k, not both");
  if ((has_rate || has_k) && !takes_code_size(c)) usage_error("--rate/--k do not apply to this command");
  if ((c == Command::Construct || c == Command::Bounds) && !has_rate && !has_k) {
    usage_error("this command needs --rate or --k");
  }
  if (has_rate && !(*config.rate > 0.0 && *config.rate <= 1.0)) usage_error("--rate must lie in (0,1]");
  if (has_k && (*config.k < 1 || *config.k > (std::uint64_t{1} << config.n))) {
    usage_error("--k must lie in [1, 2^n]");
  }

  if (!config.rates.empty() && c != Command::Table) usage_error("--rates only applies to table");
  if (c == Command::Table) {
    if (config.rates.empty()) usage_error("table needs --rates R1,R2,...");
    for (double r : config.rates) {
      if (!(r > 0.0 && r <= 1.0)) usage_error("every rate in --rates must lie in (0,1]");
    }
  }

  if ((!config.s.empty() || !config.t.empty()) && c != Command::Rho) usage_error("--s/--t only apply to rho");
  if (c == Command::Rho) {
    if (config.s.size() != static_cast<std::size_t>(config.n) || config.t.size() != static_cast<std::size_t>(config.n)) {
      usage_error("rho needs --s and --t, each a word of n characters over '-' and '+'");
    }
  }

  if (config.exact && c != Command::Bounds && c != Command::Verify) usage_error("--exact only applies to bounds and verify");
  if (config.delta && c != Command::Bounds) usage_error("--delta only applies to bounds");
  if (config.delta && !(*config.delta > 0.0 && *config.delta < 1.0)) usage_error("--delta must lie in (0,1)");

  if (config.trials > 0 && c != Command::Simulate && c != Command::Verify) usage_error("--trials only applies to simulate and verify");
  if (c == Command::Simulate && config.trials == 0) usage_error("simulate needs --trials T (T >= 1)");
  if (c == Command::Verify && config.exact == (config.trials > 0)) usage_error("verify needs exactly one of --exact or --trials T");
  if (config.sample_pairs > 0 && c != Command::Simulate && c != Command::Verify) {
    usage_error("--sample-pairs only applies to simulate and verify");
  }
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
    if (config.output.empty()) return dispatch(config, out, err);
    std::ofstream file(config.output, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot open output file " << config.output << '\n';
      return kExitResource;
    }
    const int status = dispatch(config, file, err);
    file.flush();
    if (!file) {
      err << "error: failed writing " << config.output << '\n';
      return kExitResource;
    }
    return status;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kExitResource;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const LengthMismatchError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitResource;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Erasure probabilities, correlations and block-error bounds of polarized BECs"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  RunConfig config;
  std::string command;
  std::string format = "csv";
  std::uint64_t k = 0;
  double rate = 0.0;
  double delta = 0.0;

  std::map<std::string, Command> commands = command_names();
  app.add_option("command", command, "zvec | rho | rho-matrix | construct | bounds | table | verify | simulate")
      ->required()
      ->check(CLI::IsMember(commands));
  app.add_option("--epsilon", config.epsilon, "erasure probability of the base BEC")->capture_default_str();
  app.add_option("--n", config.n, "number of polarization steps (N = 2^n)")->capture_default_str();
  auto* rate_opt = app.add_option("--rate", rate, "code rate; k = ceil(N R)");
  auto* k_opt = app.add_option("--k", k, "number of information channels");
  app.add_option("--rates", config.rates, "comma-separated rates for table")->delimiter(',');
  app.add_option("--s", config.s, "first channel as a sign word, e.g. -+-");
  app.add_option("--t", config.t, "second channel as a sign word");
  app.add_flag("--exact", config.exact, "compare against exact enumeration (n <= 4)");
  auto* delta_opt = app.add_option("--delta", delta, "report (1-delta) P(N,(1-delta)R,eps)");
  app.add_option("--trials", config.trials, "Monte Carlo trials");
  app.add_option("--seed", config.seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--sample-pairs", config.sample_pairs, "number of channel pairs to sample");
  app.add_option("--format", format, "csv | json | binary")->check(CLI::IsMember(format_names()))->capture_default_str();
  app.add_option("--output", config.output, "write data to this file instead of standard output");
  config.workers = default_workers();
  app.add_option("--workers", config.workers, "worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  }

  config.command = commands.at(command);
  config.format = format_names().at(format);
  if (*rate_opt) config.rate = rate;
  if (*k_opt) config.k = k;
  if (*delta_opt) config.delta = delta;
  return run(config, out, err);
}

}  // namespace polarcorr::cli
