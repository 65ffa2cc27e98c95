#include "hjbi/experiments.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hjbi;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::io;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, DefaultsPerExperiment) {
  RunConfig a;
  a.resolve();
  EXPECT_EQ(a.scheme, "c0ip");
  EXPECT_EQ(*a.degree, 2);
  EXPECT_EQ(a.meshes, (std::vector<int>{4, 8, 16, 32}));
  EXPECT_EQ(*a.n_alpha, 33);
  RunConfig b;
  b.experiment = "exp2";
  b.resolve();
  EXPECT_EQ(*b.degree, 3);
  EXPECT_EQ(b.meshes, (std::vector<int>{2, 4, 8, 16}));
  EXPECT_EQ(b.sigma_fixed, 0.0125);
  EXPECT_EQ(*b.n_alpha, 17);
}

TEST(Config, ParseAndRoundTrip) {
  const auto j = nlohmann::json::parse(R"({"experiment":"exp1","scheme":"dg","degree":3,"meshes":[2,4],
      "theta":0,"eta1":5,"linear_solver":"sparse_lu","warm_start":false})");
  RunConfig c = parse_config(j);
  EXPECT_EQ(c.scheme, "dg");
  EXPECT_EQ(*c.eta1, 5.0);
  EXPECT_FALSE(c.warm_start);
  const RunConfig d = parse_config(to_json(c));
  EXPECT_EQ(to_json(c), to_json(d));
  c.resolve();
  EXPECT_EQ(c.linear_options().method, LinearMethod::sparse_lu);
  EXPECT_EQ(c.scheme_params(3, 1.0).eta2, 22.5);
}

TEST(Config, Errors) {
  EXPECT_EQ(kind_of([] { parse_config(nlohmann::json::parse(R"({"bogus":1})")); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config(nlohmann::json::parse(R"({"degree":"two"})")); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config(nlohmann::json::parse("[1]")); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { load_config_file("/nonexistent/config.json"); }), ErrorKind::config);
  auto bad = [](const char* text) {
    return kind_of([text] {
      RunConfig c = parse_config(nlohmann::json::parse(text));
      c.resolve();
    });
  };
  EXPECT_EQ(bad(R"({"scheme":"fem"})"), ErrorKind::config);
  EXPECT_EQ(bad(R"({"theta":2})"), ErrorKind::config);
  EXPECT_EQ(bad(R"({"sigmas":[0.01,0.1]})"), ErrorKind::config);
  EXPECT_EQ(bad(R"({"experiment":"custom"})"), ErrorKind::config);
  EXPECT_EQ(bad(R"({"experiment":"custom","problem":"nope"})"), ErrorKind::config);
  EXPECT_EQ(bad(R"({"linear_solver":"cg"})"), ErrorKind::config);
  EXPECT_EQ(bad(R"({"meshes":[0]})"), ErrorKind::config);
}

TEST(Registry, BuiltinsAndRegistration) {
  for (const char* name : {"exp1", "exp2-cell", "linear-constant", "linear-cosine", "zero-c"})
    EXPECT_TRUE(has_problem(name)) << name;
  register_problem("unit-test-problem", [](const RunConfig& c) { return make_problem("linear-cosine", c); });
  EXPECT_TRUE(has_problem("unit-test-problem"));
}

TEST(Runs, CustomExp1IsBitIdenticalToExp1) {
  const auto dir = std::filesystem::temp_directory_path() / "hjbi_unit_custom";
  std::filesystem::remove_all(dir);
  RunConfig c;
  c.meshes = {2, 4};
  c.output = dir.string();
  std::vector<std::string> lines;
  const RunResult a = run_exp1(c, [&](const std::string& l) { lines.push_back(l); });
  c.problem = "exp1";
  const RunResult b = run_custom(c, [](const std::string&) {});
  EXPECT_EQ(a.exit_code, 0);
  EXPECT_EQ(b.exit_code, 0);
  EXPECT_EQ(slurp(dir / "exp1.csv"), slurp(dir / "custom.csv"));
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines.front().rfind("# cordes exp1", 0), 0u);
  std::filesystem::remove_all(dir);
}

TEST(Runs, LinearProblemHitsMachineAccuracy) {
  RunConfig c;
  c.experiment = "custom";
  c.problem = "linear-constant";
  c.meshes = {2, 4};
  const RunResult r = run_custom(c, [](const std::string&) {});
  for (const ConvergenceRow& row : r.convergence) EXPECT_LE(row.error, 1e-11);
}

TEST(Runs, CordesViolationAbortsUnlessAllowed) {
  RunConfig c;
  c.experiment = "custom";
  c.problem = "zero-c";
  c.meshes = {2};
  EXPECT_EQ(kind_of([&] { run_custom(c, [](const std::string&) {}); }), ErrorKind::cordes_violation);
  EXPECT_EQ(kind_of([&] { run_cordes(c, [](const std::string&) {}); }), ErrorKind::cordes_violation);
  c.allow_cordes_violation = true;
  const RunResult r = run_cordes(c, [](const std::string&) {});
  EXPECT_FALSE(r.cordes.holds);
}

TEST(Runs, NonConvergenceExitCode) {
  RunConfig c;
  c.meshes = {4};
  c.max_iter = 1;
  c.tol = 1e-300;
  EXPECT_EQ(run_exp1(c, [](const std::string&) {}).exit_code, 3);
}

TEST(Runs, Exp2SmallRun) {
  RunConfig c;
  c.experiment = "exp2";
  c.meshes = {2, 4};
  c.mesh_fine = 2;
  c.degree_fine = 3;
  c.sigmas = {0.1, 0.05};
  std::vector<std::string> lines;
  const RunResult r = run_exp2(c, [&](const std::string& l) { lines.push_back(l); });
  EXPECT_EQ(r.exit_code, 0);
  ASSERT_EQ(r.mesh_table.size(), 2u);
  ASSERT_EQ(r.sigma_table.size(), 2u);
  EXPECT_NEAR(r.reference_H, 38.9429127, 1e-6);
  EXPECT_EQ(lines.front(), "# H(R) reference = 38.9429127");
  bool header = false;
  for (const auto& l : lines) header = header || l == "N,h_max,H_T_sigma,E_T_sigma,estimator,eoc_estimator,iterations";
  EXPECT_TRUE(header);
}
