#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include <monorun/cli.hpp>

using namespace monorun;

namespace {

struct Result {
  int status;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "monorun");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

}  // namespace

TEST(Cli, TauRunExample) {
  const auto r = invoke({"runs", "--function", "tau_shift", "--mode", "increasing", "--min-len", "4", "--bound", "100"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("\"2,3,5,7\""), std::string::npos) << r.out;
}

TEST(Cli, MkOneExample) {
  const auto r = invoke({"mk", "--k", "1", "--degree", "2"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "k,degree,bound,certified\n1,2,1,1\n");
}

TEST(Cli, DigitPlanExample) {
  const auto r = invoke({"digits", "plan", "--g", "10", "--K", "2", "--k", "5", "--mode", "constant"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["A"], "1000");
  EXPECT_EQ(j["primes"], (std::vector<u64>{19, 37, 73, 109, 127}));
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).status, 2);
  EXPECT_EQ(invoke({"bogus"}).status, 2);
  EXPECT_EQ(invoke({"runs", "--min-len", "1"}).status, 2);
  EXPECT_EQ(invoke({"runs", "--function", "nope"}).status, 2);
  EXPECT_EQ(invoke({"runs", "--format", "xml"}).status, 2);
  EXPECT_EQ(invoke({"sieve", "--config", "/nonexistent/monorun.cfg"}).status, 2);
  EXPECT_EQ(invoke({"sieve", "--k", "5"}).status, 2);
  EXPECT_EQ(invoke({"digits", "histogram", "--x", "50"}).status, 2);
}

TEST(Cli, InfeasibleExitsThree) {
  const auto r = invoke({"runs", "--function", "phi_shift", "--min-len", "40", "--first", "--cap", "1000"});
  EXPECT_EQ(r.status, 3);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(invoke({"digits", "plan", "--k", "40", "--x", "150"}).status, 3);
}

TEST(Cli, HelpListsFlagsWithDefaults) {
  for (const char* sub : {"runs", "tuple", "sieve", "mk"}) {
    const auto r = invoke({sub, "--help"});
    EXPECT_EQ(r.status, 0) << sub;
    EXPECT_NE(r.out.find("--threads"), std::string::npos) << sub;
    EXPECT_NE(r.out.find("--format"), std::string::npos) << sub;
  }
  const auto runs = invoke({"runs", "--help"});
  EXPECT_NE(runs.out.find("phi_shift"), std::string::npos);
  EXPECT_NE(runs.out.find("1000"), std::string::npos);
  const auto plan = invoke({"digits", "plan", "--help"});
  EXPECT_NE(plan.out.find("constant"), std::string::npos);
  EXPECT_NE(plan.out.find("150"), std::string::npos);
}

TEST(Cli, IdenticalInvocationsAreByteIdentical) {
  const std::vector<std::vector<std::string>> cases = {
      {"runs", "--function", "digit_sum(10)", "--mode", "constant", "--bound", "5000", "--format", "json"},
      {"tuple", "--k", "2", "--intervals", "0.2:0.3,0.2:0.3"},
      {"sieve", "--N", "10000", "--k", "2", "--identity"},
      {"mk", "--kmax", "3", "--dmax", "2", "--format", "json"},
      {"digits", "histogram", "--x", "100000"},
  };
  for (const auto& c : cases) {
    const auto a = invoke(c), b = invoke(c);
    ASSERT_EQ(a.status, 0) << c[0] << ": " << a.err;
    EXPECT_EQ(a.out, b.out) << c[0];
  }
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  const auto a = invoke({"runs", "--function", "omega_shift", "--bound", "200000", "--threads", "1"});
  const auto b = invoke({"runs", "--function", "omega_shift", "--bound", "200000", "--threads", "4"});
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SieveIdentityReport) {
  const auto r = invoke({"sieve", "--N", "10000", "--identity"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["identity"]["equal"], true);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, DefaultTargetsNeedLargerCutoffs) {
  const auto r = invoke({"tuple", "--k", "2"});
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.err.find("infeasible"), std::string::npos);
}

TEST(Cli, TupleAdmissibilityReport) {
  const auto ok = nlohmann::json::parse(invoke({"tuple", "--tuple", "0,2,6"}).out);
  EXPECT_EQ(ok["admissible"], true);
  const auto bad = nlohmann::json::parse(invoke({"tuple", "--tuple", "0,2,4"}).out);
  EXPECT_EQ(bad["admissible"], false);
  EXPECT_EQ(bad["covering_prime"], 3);
}

TEST(Cli, SelftestPasses) {
  const auto r = invoke({"selftest"});
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}
