#pragma once

#include "hjbi/error_analysis.hpp"
#include "hjbi/homogenization.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hjbi {

/// Flat run configuration. Unset optionals take per-experiment defaults in resolve().
struct RunConfig {
  std::string experiment = "exp1";  ///< exp1 | exp2 | custom
  std::string problem;              ///< registered problem name for custom runs
  std::string scheme;               ///< dg | c0ip
  std::optional<int> degree;
  double theta = 0.5;
  std::optional<double> eta1;
  std::optional<double> eta2;
  std::vector<int> meshes;
  std::optional<int> n_alpha;
  std::optional<int> n_beta;
  std::vector<double> sigmas;
  double sigma_fixed = 0.0125;
  int mesh_fine = 8;
  int degree_fine = 6;
  double tol = 1e-10;
  int max_iter = 50;
  std::string output;  ///< directory for CSV files; empty writes none
  int threads = 0;
  bool allow_cordes_violation = false;
  int cordes_samples = 16;
  std::string linear_solver = "auto";  ///< auto | dense | sparse_lu | gmres
  bool constant_coefficients = false;  ///< exp2 with a1 = 0
  bool warm_start = true;              ///< prolongate the previous mesh's solution as initial guess

  /// Fill per-experiment defaults and check every field. Throws ErrorKind::config.
  void resolve();
  SchemeParams scheme_params(int degree, double lambda) const;
  Continuity continuity() const;
  LinearSolveOptions linear_options() const;
};

/// Unknown keys and wrongly typed values are config errors.
RunConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);
RunConfig load_config_file(const std::string& path);

/// A problem together with its exact solution when known.
struct ProblemInstance {
  HJBIProblem problem;
  std::optional<ExactSolution> exact;
};

/// 0.9 times the largest sampled delta for which the Cordes inequality holds,
/// or 1 when none does (so that validation reports the violation).
double admissible_delta(const HJBIProblem& problem, int samples = 32);

using ProblemFactory = std::function<ProblemInstance(const RunConfig&)>;

/// Process-wide registry used by custom runs. Built-ins: exp1, exp2-cell,
/// linear-constant, linear-cosine, zero-c.
void register_problem(const std::string& name, ProblemFactory factory);
bool has_problem(const std::string& name);
ProblemInstance make_problem(const std::string& name, const RunConfig& config);
std::vector<std::string> problem_names();

using LineSink = std::function<void(const std::string&)>;

struct Exp2MeshRow {
  long N = 0;
  double h_max = 0.0;
  double H_T_sigma = 0.0;
  double E_T_sigma = 0.0;
  double estimator = 0.0;
  std::optional<double> eoc_estimator;
  int iterations = 0;
  bool converged = false;
};

struct RunResult {
  int exit_code = 0;  ///< 0 ok, 3 a solve did not converge
  CordesReport cordes;
  std::vector<ConvergenceRow> convergence;
  std::vector<int> iterations;
  std::vector<Exp2MeshRow> mesh_table;
  std::vector<SigmaRow> sigma_table;
  double reference_H = 0.0;
  double sigma_slope = 0.0;
};

/// Convergence table for a problem over the configured meshes.
RunResult run_exp1(RunConfig config, const LineSink& out);
/// Mesh table at fixed sigma and sigma table on the fine discretization.
RunResult run_exp2(RunConfig config, const LineSink& out);
/// The exp1 pipeline on a registered problem.
RunResult run_custom(RunConfig config, const LineSink& out);
/// Prints the Cordes report for the configured problem; throws on violation
/// unless allow_cordes_violation is set.
RunResult run_cordes(RunConfig config, const LineSink& out);

/// Dispatch by command name (exp1, exp2, custom, cordes).
RunResult run_command(const std::string& command, const RunConfig& config, const LineSink& out);

void write_exp2_mesh_csv(const std::vector<Exp2MeshRow>& rows, std::ostream& os);
std::string format_cordes(const HJBIProblem& problem, const CordesReport& r);

}  // namespace hjbi
