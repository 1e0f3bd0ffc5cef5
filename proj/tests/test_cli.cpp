#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "polarcorr/cli.hpp"

using namespace polarcorr::cli;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "polarcorr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  return rows;
}

std::vector<double> fields(const std::string& row) {
  std::vector<double> v;
  std::istringstream in(row);
  for (std::string cell; std::getline(in, cell, ',');) v.push_back(std::stod(cell));
  return v;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("zvec csv") {
    const Outcome r = invoke({"zvec", "--n", "1", "--epsilon", "0.5"});
    REQUIRE(r.code == kExitOk);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "index,signs,z");
    CHECK(rows[1] == "0,-,0.75");
    CHECK(rows[2] == "1,+,0.25");
  }

  TEST_CASE("zvec json") {
    const Outcome r = invoke({"zvec", "--n", "2", "--format", "json"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("\"signs\": \"++\"") != std::string::npos);
    CHECK(r.out.find("0.0625") != std::string::npos);
  }

  TEST_CASE("rho reports the pair") {
    const Outcome r = invoke({"rho", "--n", "2", "--s=-+", "--t=+-"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("common_prefix=0") != std::string::npos);
    CHECK(r.out.find("rho=0.2698412698412") != std::string::npos);
  }

  TEST_CASE("construct picks the most reliable channels") {
    const Outcome r = invoke({"construct", "--n", "4", "--k", "4"});
    REQUIRE(r.code == kExitOk);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 5);
    CHECK(rows[1].rfind("11,", 0) == 0);
    CHECK(rows[4].rfind("15,", 0) == 0);
  }

  TEST_CASE("bounds with exact value and asymptotic line") {
    const Outcome r = invoke({"bounds", "--n", "4", "--k", "4", "--exact", "--delta", "0.1"});
    REQUIRE(r.code == kExitOk);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] ==
          "epsilon,n,rate,k,union_upper,trivial_lower,ie_lower,union_upper_clamped,ie_lower_clamped,exact,"
          "asymptotic_lower");
    const auto v = fields(rows[1]);
    REQUIRE(v.size() == 11);
    CHECK(v[3] == 4);
    const double exact = v[9];
    CHECK(exact == doctest::Approx(3571.0 / 65536.0).epsilon(1e-14));
    CHECK(v[5] <= exact);
    CHECK(v[6] <= exact);
    CHECK(exact <= v[4]);
    CHECK(v[8] <= exact);
    CHECK(exact <= v[7]);
  }

  TEST_CASE("bounds near capacity report raw and clamped values") {
    const Outcome r = invoke({"bounds", "--n", "10", "--epsilon", "0.7", "--rate", "0.3", "--format", "json"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("\"union_upper_clamped\": 1.0") != std::string::npos);
    CHECK(r.out.find("\"ie_lower\": -") != std::string::npos);
  }

  TEST_CASE("table orders the bounds") {
    const Outcome r = invoke({"table", "--n", "8", "--rates", "0.1,0.25,0.4"});
    REQUIRE(r.code == kExitOk);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "rate,sum_z,max_z,ie_lower");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto v = fields(rows[i]);
      CHECK(v[2] <= v[3]);
      CHECK(v[3] <= v[1]);
    }
  }

  TEST_CASE("verify exact passes") {
    const Outcome r = invoke({"verify", "--n", "3", "--exact", "--format", "json"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("\"overall\": \"pass\"") != std::string::npos);
  }

  TEST_CASE("simulate emits one row per channel and pair") {
    const Outcome r = invoke({"simulate", "--n", "3", "--trials", "5000", "--seed", "4", "--rate", "0.5",
                              "--sample-pairs", "3"});
    REQUIRE(r.code == kExitOk);
    const auto rows = lines(r.out);
    CHECK(rows[0] == "kind,s,t,estimate,std_error,reference_low,reference_high");
    CHECK(rows[1].rfind("z,---,,", 0) == 0);
    CHECK(rows.back().rfind("block_error,,,", 0) == 0);
  }

  TEST_CASE("usage errors exit with 1") {
    CHECK(invoke({}).code == kExitUsage);
    CHECK(invoke({"bogus"}).code == kExitUsage);
    CHECK(invoke({"zvec", "--epsilon", "1.5"}).code == kExitUsage);
    CHECK(invoke({"construct", "--n", "3"}).code == kExitUsage);
    CHECK(invoke({"construct", "--n", "3", "--k", "9"}).code == kExitUsage);
    CHECK(invoke({"bounds", "--n", "3", "--rate", "0.5", "--k", "2"}).code == kExitUsage);
    CHECK(invoke({"rho", "--n", "2", "--s=-+", "--t=+"}).code == kExitUsage);
    CHECK(invoke({"rho", "--n", "2", "--s=-x", "--t=++"}).code == kExitUsage);
    CHECK(invoke({"zvec", "--format", "binary"}).code == kExitUsage);
    CHECK(invoke({"verify", "--n", "3"}).code == kExitUsage);
    CHECK(invoke({"simulate", "--n", "3"}).code == kExitUsage);
    CHECK(invoke({"table", "--n", "3"}).code == kExitUsage);
    const Outcome r = invoke({"zvec", "--workers", "0"});
    CHECK(r.code == kExitUsage);
    CHECK_FALSE(r.err.empty());
  }

  TEST_CASE("resource limits exit with 2") {
    CHECK(invoke({"bounds", "--n", "5", "--k", "3", "--exact"}).code == kExitResource);
    CHECK(invoke({"rho-matrix", "--n", "15"}).code == kExitResource);
    CHECK(invoke({"verify", "--n", "5", "--exact"}).code == kExitResource);
  }

  TEST_CASE("binary rho matrix layout") {
    const Outcome r = invoke({"rho-matrix", "--n", "1", "--format", "binary"});
    REQUIRE(r.code == kExitOk);
    REQUIRE(r.out.size() == 20 + 3 * 8);
    CHECK(r.out.compare(0, 4, "PRHO") == 0);
    std::uint32_t version = 0;
    std::uint32_t n = 0;
    double eps = 0.0;
    std::memcpy(&version, r.out.data() + 4, 4);
    std::memcpy(&n, r.out.data() + 8, 4);
    std::memcpy(&eps, r.out.data() + 12, 8);
    CHECK(version == kRhoFormatVersion);
    CHECK(n == 1);
    CHECK(eps == 0.5);
    double tri[3];
    std::memcpy(tri, r.out.data() + 20, sizeof tri);
    CHECK(tri[0] == 1.0);
    CHECK(tri[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(tri[2] == 1.0);
  }

  TEST_CASE("rho matrix csv and json agree in size") {
    const Outcome csv = invoke({"rho-matrix", "--n", "2"});
    REQUIRE(csv.code == kExitOk);
    CHECK(lines(csv.out).size() == 1 + 10);
    const Outcome json = invoke({"rho-matrix", "--n", "2", "--format", "json"});
    REQUIRE(json.code == kExitOk);
    CHECK(json.out.find("\"dim\": 4") != std::string::npos);
  }

  TEST_CASE("config file with flag precedence and output file") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto cfg = dir / "polarcorr_cli_test.ini";
    const auto dest = dir / "polarcorr_cli_test.csv";
    {
      std::ofstream f(cfg);
      f << "epsilon=0.25\nn=1\n";
    }
    const Outcome a = invoke({"zvec", "--config", cfg.string()});
    REQUIRE(a.code == kExitOk);
    CHECK(lines(a.out)[1] == "0,-,0.4375");
    const Outcome b = invoke({"zvec", "--config", cfg.string(), "--epsilon", "0.5", "--output", dest.string()});
    REQUIRE(b.code == kExitOk);
    CHECK(b.out.empty());
    std::ifstream in(dest);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(lines(buf.str())[1] == "0,-,0.75");
    std::filesystem::remove(cfg);
    std::filesystem::remove(dest);
  }

  TEST_CASE("repeated runs are byte-identical") {
    const std::vector<std::vector<std::string>> cases = {
        {"zvec", "--n", "6", "--epsilon", "0.3"},
        {"rho-matrix", "--n", "4", "--format", "binary", "--workers", "2"},
        {"bounds", "--n", "9", "--rate", "0.3", "--format", "json"},
        {"simulate", "--n", "4", "--trials", "3000", "--seed", "11", "--rate", "0.25", "--sample-pairs", "4"},
    };
    for (const auto& args : cases) {
      const Outcome first = invoke(args);
      const Outcome second = invoke(args);
      REQUIRE(first.code == kExitOk);
      CHECK(first.out == second.out);
    }
  }
}
