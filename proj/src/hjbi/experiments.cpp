#include "hjbi/experiments.hpp"

#include "hjbi/parallel.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace hjbi {

namespace {

[[noreturn]] void config_error(const std::string& what) { fail(ErrorKind::config, what); }

template <class T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error("config key '" + key + "' has the wrong type: " + v.dump());
  }
}

/// Accept a scalar where a list is expected.
template <class T>
std::vector<T> get_list(const nlohmann::json& v, const std::string& key) {
  if (v.is_array()) return get_as<std::vector<T>>(v, key);
  return {get_as<T>(v, key)};
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    if (v.is_null()) continue;
    if (key == "experiment") c.experiment = get_as<std::string>(v, key);
    else if (key == "problem") c.problem = get_as<std::string>(v, key);
    else if (key == "scheme") c.scheme = get_as<std::string>(v, key);
    else if (key == "degree") c.degree = get_as<int>(v, key);
    else if (key == "theta") c.theta = get_as<double>(v, key);
    else if (key == "eta1") c.eta1 = get_as<double>(v, key);
    else if (key == "eta2") c.eta2 = get_as<double>(v, key);
    else if (key == "meshes" || key == "mesh") c.meshes = get_list<int>(v, key);
    else if (key == "n_alpha") c.n_alpha = get_as<int>(v, key);
    else if (key == "n_beta") c.n_beta = get_as<int>(v, key);
    else if (key == "sigmas") c.sigmas = get_list<double>(v, key);
    else if (key == "sigma_fixed") c.sigma_fixed = get_as<double>(v, key);
    else if (key == "mesh_fine") c.mesh_fine = get_as<int>(v, key);
    else if (key == "degree_fine") c.degree_fine = get_as<int>(v, key);
    else if (key == "tol") c.tol = get_as<double>(v, key);
    else if (key == "max_iter") c.max_iter = get_as<int>(v, key);
    else if (key == "output") c.output = get_as<std::string>(v, key);
    else if (key == "threads") c.threads = get_as<int>(v, key);
    else if (key == "allow_cordes_violation") c.allow_cordes_violation = get_as<bool>(v, key);
    else if (key == "cordes_samples") c.cordes_samples = get_as<int>(v, key);
    else if (key == "linear_solver") c.linear_solver = get_as<std::string>(v, key);
    else if (key == "constant_coefficients") c.constant_coefficients = get_as<bool>(v, key);
    else if (key == "warm_start") c.warm_start = get_as<bool>(v, key);
    else config_error("unknown config key '" + key + "'");
  }
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["experiment"] = c.experiment;
  if (!c.problem.empty()) j["problem"] = c.problem;
  j["scheme"] = c.scheme;
  if (c.degree) j["degree"] = *c.degree;
  j["theta"] = c.theta;
  if (c.eta1) j["eta1"] = *c.eta1;
  if (c.eta2) j["eta2"] = *c.eta2;
  j["meshes"] = c.meshes;
  if (c.n_alpha) j["n_alpha"] = *c.n_alpha;
  if (c.n_beta) j["n_beta"] = *c.n_beta;
  j["sigmas"] = c.sigmas;
  j["sigma_fixed"] = c.sigma_fixed;
  j["mesh_fine"] = c.mesh_fine;
  j["degree_fine"] = c.degree_fine;
  j["tol"] = c.tol;
  j["max_iter"] = c.max_iter;
  j["output"] = c.output;
  j["threads"] = c.threads;
  j["allow_cordes_violation"] = c.allow_cordes_violation;
  j["cordes_samples"] = c.cordes_samples;
  j["linear_solver"] = c.linear_solver;
  j["constant_coefficients"] = c.constant_coefficients;
  j["warm_start"] = c.warm_start;
  return j;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    config_error("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

void RunConfig::resolve() {
  const bool exp2 = experiment == "exp2";
  if (experiment != "exp1" && experiment != "exp2" && experiment != "custom")
    config_error("experiment must be exp1, exp2 or custom (got '" + experiment + "')");
  if (experiment == "custom" && problem.empty()) config_error("custom runs need a problem name");
  if (problem.empty()) problem = exp2 ? "exp2-cell" : "exp1";
  if (scheme.empty()) scheme = "c0ip";
  if (scheme != "dg" && scheme != "c0ip") config_error("scheme must be dg or c0ip (got '" + scheme + "')");
  if (!degree) degree = exp2 ? 3 : 2;
  if (meshes.empty()) meshes = exp2 ? std::vector<int>{2, 4, 8, 16} : std::vector<int>{4, 8, 16, 32};
  if (!n_alpha) n_alpha = exp2 ? 17 : 33;
  if (!n_beta) n_beta = exp2 ? 17 : 33;
  if (sigmas.empty()) sigmas = {1e-1, 5e-2, 2.5e-2, 1.25e-2};

  if (*degree < 2 || *degree > 15) config_error("degree must lie in [2, 15]");
  if (degree_fine < 2 || degree_fine > 15) config_error("degree_fine must lie in [2, 15]");
  if (!(theta >= 0.0 && theta <= 1.0)) config_error("theta must lie in [0, 1]");
  if ((eta1 && !(*eta1 > 0.0)) || (eta2 && !(*eta2 > 0.0))) config_error("eta1 and eta2 must be positive");
  for (int m : meshes)
    if (m < 1 || m > 512) config_error("mesh subdivisions must lie in [1, 512]");
  if (mesh_fine < 1 || mesh_fine > 512) config_error("mesh_fine must lie in [1, 512]");
  if (*n_alpha < 1 || *n_beta < 1) config_error("control grids need at least one sample");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0 && sigmas[i] < 0.5)) config_error("sigmas must lie in (0, 0.5)");
    if (i > 0 && !(sigmas[i] < sigmas[i - 1])) config_error("sigmas must be strictly decreasing");
  }
  if (!(sigma_fixed > 0.0 && sigma_fixed < 0.5)) config_error("sigma_fixed must lie in (0, 0.5)");
  if (!(tol > 0.0)) config_error("tol must be positive");
  if (max_iter < 1) config_error("max_iter must be >= 1");
  if (threads < 0) config_error("threads must be >= 0");
  if (cordes_samples < 1) config_error("cordes_samples must be >= 1");
  if (linear_solver != "auto" && linear_solver != "dense" && linear_solver != "sparse_lu" && linear_solver != "gmres")
    config_error("linear_solver must be auto, dense, sparse_lu or gmres");
  if (experiment != "exp2" && !has_problem(problem)) config_error("unknown problem '" + problem + "'");
}

SchemeParams RunConfig::scheme_params(int p, double lambda) const {
  SchemeParams s = SchemeParams::defaults(p, lambda, theta);
  if (eta1) s.eta1 = *eta1;
  if (eta2) s.eta2 = *eta2;
  return s;
}

Continuity RunConfig::continuity() const { return scheme == "dg" ? Continuity::discontinuous : Continuity::continuous; }

LinearSolveOptions RunConfig::linear_options() const {
  LinearSolveOptions o;
  if (linear_solver == "dense") o.method = LinearMethod::dense;
  else if (linear_solver == "sparse_lu") o.method = LinearMethod::sparse_lu;
  else if (linear_solver == "gmres") o.method = LinearMethod::gmres;
  return o;
}

// ---------------------------------------------------------------- registry

double admissible_delta(const HJBIProblem& problem, int samples) {
  const double d = cordes_check(problem, samples).max_admissible_delta;
  return d > 0.0 ? 0.9 * d : 1.0;
}

namespace {

/// Smooth, y-dependent, uniformly elliptic coefficients of the linear demo problems.
Coefficients linear_demo_coefficients(const Vec2& y) {
  constexpr double tau = 2.0 * std::numbers::pi;
  const double s = std::sin(tau * y.x()), c = std::cos(tau * y.y());
  Coefficients k;
  k.A << 2.0 + 0.5 * s, 0.3 * c, 0.3 * c, 1.5 + 0.25 * c;
  k.b = Vec2(0.2 * c, -0.1 * s);
  k.c = 1.0 + 0.25 * s * s;
  return k;
}

HJBIProblem singleton_problem(std::string name, CoefficientFn fn) {
  HJBIProblem p;
  p.name = std::move(name);
  p.controls.alpha = ControlGrid::singleton(0.0);
  p.controls.beta = ControlGrid::singleton(0.0);
  p.coefficients = std::move(fn);
  p.lambda = 1.0;
  return p;
}

struct Registry {
  std::mutex mutex;
  std::map<std::string, ProblemFactory> factories;

  Registry() {
    factories["exp1"] = [](const RunConfig& c) {
      return ProblemInstance{make_exp1_problem(c.n_alpha.value_or(33), c.n_beta.value_or(33)), cosine_product_solution()};
    };
    factories["exp2-cell"] = [](const RunConfig& c) {
      const EffOperatorData data = make_exp2_data(c.n_alpha.value_or(17), c.n_beta.value_or(17), c.constant_coefficients);
      return ProblemInstance{make_cell_problem(data, Vec2::Zero(), Vec2::Zero(), exp2_matrix_R(), c.sigma_fixed), {}};
    };
    // Linear problem whose exact solution is the constant 2.5.
    factories["linear-constant"] = [](const RunConfig&) {
      HJBIProblem p = singleton_problem("linear-constant", [](const Vec2& y, double, double) {
        Coefficients k = linear_demo_coefficients(y);
        k.f = 2.5 * k.c;
        return k;
      });
      ExactSolution u;
      u.value = [](const Vec2&) { return 2.5; };
      u.gradient = [](const Vec2&) { return Vec2::Zero().eval(); };
      u.hessian = [](const Vec2&) { return Mat2::Zero().eval(); };
      p.delta = admissible_delta(p);
      return ProblemInstance{std::move(p), std::move(u)};
    };
    // Same operator with manufactured solution cos(2 pi y1) cos(2 pi y2).
    factories["linear-cosine"] = [](const RunConfig&) {
      const ExactSolution u = cosine_product_solution();
      HJBIProblem p = singleton_problem("linear-cosine", [u](const Vec2& y, double, double) {
        Coefficients k = linear_demo_coefficients(y);
        k.f = -frobenius(k.A, u.hessian(y)) - k.b.dot(u.gradient(y)) + k.c * u.value(y);
        return k;
      });
      p.delta = admissible_delta(p);
      return ProblemInstance{std::move(p), u};
    };
    // Violates c > 0; kept to exercise validation.
    factories["zero-c"] = [](const RunConfig&) {
      HJBIProblem p = singleton_problem("zero-c", [](const Vec2&, double, double) {
        Coefficients k;
        k.c = 0.0;
        return k;
      });
      return ProblemInstance{std::move(p), {}};
    };
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_problem(const std::string& name, ProblemFactory factory) {
  require(!name.empty(), "problem name must be nonempty");
  require(static_cast<bool>(factory), "problem factory must be callable");
  std::lock_guard lock(registry().mutex);
  registry().factories[name] = std::move(factory);
}

bool has_problem(const std::string& name) {
  std::lock_guard lock(registry().mutex);
  return registry().factories.contains(name);
}

ProblemInstance make_problem(const std::string& name, const RunConfig& config) {
  ProblemFactory factory;
  {
    std::lock_guard lock(registry().mutex);
    const auto it = registry().factories.find(name);
    if (it == registry().factories.end()) config_error("unknown problem '" + name + "'");
    factory = it->second;
  }
  return factory(config);
}

std::vector<std::string> problem_names() {
  std::lock_guard lock(registry().mutex);
  std::vector<std::string> names;
  for (const auto& [name, f] : registry().factories) names.push_back(name);
  return names;
}

// ---------------------------------------------------------------- runners

std::string format_cordes(const HJBIProblem& problem, const CordesReport& r) {
  std::ostringstream s;
  s.precision(6);
  s << "# cordes " << problem.name << ": lambda=" << problem.lambda << " delta=" << r.max_admissible_delta
    << " zeta1=" << r.zeta1 << " zeta2=" << r.zeta2 << " min_c=" << r.min_c << " min_gamma=" << r.min_gamma
    << (r.holds ? " holds" : " FAILS");
  return s.str();
}

namespace {

void emit_csv(const LineSink& out, const std::string& csv) {
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) out(line);
}

void save_csv(const RunConfig& c, const std::string& name, const std::string& csv, const LineSink& out) {
  if (c.output.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(c.output, ec);
  const auto path = std::filesystem::path(c.output) / name;
  std::ofstream f(path);
  if (!f) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  f << csv;
  out("# wrote " + path.string());
}

CordesReport check_cordes(const RunConfig& c, const HJBIProblem& problem, const LineSink& out) {
  const CordesReport r = cordes_check(problem, c.cordes_samples);
  out(format_cordes(problem, r));
  if (!r.holds) {
    if (!c.allow_cordes_violation) validate_problem(problem, c.cordes_samples);
    out("# warning: proceeding despite the Cordes violation (allow_cordes_violation)");
  }
  return r;
}

void apply_threads(const RunConfig& c) {
  if (c.threads > 0) set_thread_count(c.threads);
}

HowardOptions howard_options(const RunConfig& c) {
  HowardOptions o;
  o.tol = c.tol;
  o.max_iter = c.max_iter;
  o.linear = c.linear_options();
  return o;
}

std::shared_ptr<const FESpace> make_space(int m, int degree, Continuity cont) {
  auto mesh = std::make_shared<const PeriodicMesh>(PeriodicMesh::uniform(m));
  return std::make_shared<const FESpace>(mesh, degree, cont);
}

RunResult run_convergence(const RunConfig& c, const std::string& csv_name, const LineSink& out) {
  ProblemInstance inst = make_problem(c.problem, c);
  RunResult result;
  result.cordes = check_cordes(c, inst.problem, out);
  const HowardOptions options = howard_options(c);
  std::optional<DiscreteFunction> previous;
  for (int m : c.meshes) {
    const auto space = make_space(m, *c.degree, c.continuity());
    const Assembler assembler(space);
    const SchemeParams params = c.scheme_params(*c.degree, inst.problem.lambda);
    std::optional<DiscreteFunction> initial;
    if (c.warm_start && previous) initial = prolongate(*previous, space);
    const SolveReport rep = howard_solve(assembler, inst.problem, params, options, initial);
    ConvergenceRow row;
    row.N = space->n_dofs();
    row.h_max = mesh_size_functions(space->mesh()).h_max;
    row.error = inst.exact ? norm_T_lambda(assembler, inst.problem.lambda, rep.solution, *inst.exact) : NAN;
    row.estimator = estimator_eta(assembler, inst.problem, rep.solution);
    result.convergence.push_back(row);
    result.iterations.push_back(rep.iterations);
    std::ostringstream s;
    s << "# m=" << m << " N=" << row.N << " howard_iterations=" << rep.iterations
      << (rep.converged ? "" : " NOT CONVERGED");
    out(s.str());
    if (!rep.converged) result.exit_code = 3;
    previous = rep.solution;
  }
  if (result.convergence.size() >= 2) result.convergence = observed_orders(result.convergence);
  std::ostringstream csv;
  write_convergence_csv(result.convergence, csv);
  emit_csv(out, csv.str());
  save_csv(c, csv_name, csv.str(), out);
  return result;
}

}  // namespace

RunResult run_exp1(RunConfig config, const LineSink& out) {
  config.experiment = "exp1";
  if (config.problem.empty() || config.problem == "exp2-cell") config.problem = "exp1";
  config.resolve();
  apply_threads(config);
  return run_convergence(config, "exp1.csv", out);
}

RunResult run_custom(RunConfig config, const LineSink& out) {
  config.experiment = "custom";
  config.resolve();
  apply_threads(config);
  return run_convergence(config, "custom.csv", out);
}

void write_exp2_mesh_csv(const std::vector<Exp2MeshRow>& rows, std::ostream& os) {
  os.precision(10);
  os << "N,h_max,H_T_sigma,E_T_sigma,estimator,eoc_estimator,iterations\n";
  for (const Exp2MeshRow& r : rows) {
    os << r.N << ',' << r.h_max << ',' << r.H_T_sigma << ',' << r.E_T_sigma << ',' << r.estimator << ',';
    if (r.eoc_estimator) os << *r.eoc_estimator;
    os << ',' << r.iterations << '\n';
  }
}

RunResult run_exp2(RunConfig config, const LineSink& out) {
  config.experiment = "exp2";
  config.resolve();
  apply_threads(config);
  const EffOperatorData data = make_exp2_data(*config.n_alpha, *config.n_beta, config.constant_coefficients);
  const Mat2 R = exp2_matrix_R();
  const Vec2 x = Vec2::Zero(), p = Vec2::Zero();
  RunResult result;
  result.reference_H = config.constant_coefficients ? -frobenius(exp2_matrix_B(), R) - 1.0 : exact_H_exp2(R);
  {
    std::ostringstream s;
    s.precision(9);
    s << "# H(R) reference = " << result.reference_H;
    out(s.str());
  }
  result.cordes = check_cordes(config, make_cell_problem(data, x, p, R, config.sigma_fixed), out);
  const HowardOptions options = howard_options(config);

  // (a) fixed sigma, refining meshes
  {
    std::ostringstream s;
    s << "# mesh table: sigma=" << config.sigma_fixed << " scheme=" << config.scheme << " degree=" << *config.degree;
    out(s.str());
  }
  std::optional<DiscreteFunction> previous;
  for (int m : config.meshes) {
    const auto space = make_space(m, *config.degree, config.continuity());
    const Assembler assembler(space);
    std::optional<DiscreteFunction> initial;
    if (config.warm_start && previous) initial = prolongate(*previous, space);
    const CorrectorSolve s =
        solve_corrector(assembler, data, x, p, R, config.sigma_fixed, config.scheme_params(*config.degree, 1.0),
                        options, initial);
    Exp2MeshRow row;
    row.N = space->n_dofs();
    row.h_max = mesh_size_functions(space->mesh()).h_max;
    row.H_T_sigma = s.query.H_T_sigma;
    row.E_T_sigma = std::abs(s.query.H_T_sigma - result.reference_H) / std::abs(result.reference_H);
    row.estimator = s.query.estimator;
    row.iterations = s.query.iterations;
    row.converged = s.query.converged;
    if (!result.mesh_table.empty()) {
      const Exp2MeshRow& a = result.mesh_table.back();
      if (a.estimator > 0.0 && row.estimator > 0.0 && a.N != row.N)
        row.eoc_estimator = -std::log(row.estimator / a.estimator) / std::log(double(row.N) / double(a.N));
    }
    if (!row.converged) result.exit_code = 3;
    result.mesh_table.push_back(row);
    previous = s.corrector;
  }
  std::ostringstream mesh_csv;
  write_exp2_mesh_csv(result.mesh_table, mesh_csv);
  emit_csv(out, mesh_csv.str());
  save_csv(config, "exp2_mesh.csv", mesh_csv.str(), out);

  // (b) sigma sweep on the fine discretization
  {
    std::ostringstream s;
    s << "# sigma table: scheme=" << config.scheme << " m=" << config.mesh_fine << " degree=" << config.degree_fine
      << " (finest affordable discretization, standing in for a degree-20 reference)";
    out(s.str());
  }
  const auto fine = make_space(config.mesh_fine, config.degree_fine, config.continuity());
  const Assembler fine_assembler(fine);
  result.sigma_table = sigma_sweep(fine_assembler, data, x, p, R, config.sigmas,
                                   config.scheme_params(config.degree_fine, 1.0), options, result.reference_H);
  for (const SigmaRow& r : result.sigma_table)
    if (!r.converged) result.exit_code = 3;
  std::ostringstream sigma_csv;
  write_sigma_csv(result.sigma_table, sigma_csv);
  emit_csv(out, sigma_csv.str());
  save_csv(config, "exp2_sigma.csv", sigma_csv.str(), out);

  std::vector<double> s, e;
  for (const SigmaRow& r : result.sigma_table) {
    s.push_back(r.sigma);
    e.push_back(r.E_T_sigma);
  }
  if (s.size() >= 2 && std::all_of(e.begin(), e.end(), [](double v) { return v > 0.0; })) {
    result.sigma_slope = loglog_slope(s, e);
    std::ostringstream line;
    line << "# log-log slope of E_T_sigma against sigma: " << result.sigma_slope;
    out(line.str());
  }
  return result;
}

RunResult run_cordes(RunConfig config, const LineSink& out) {
  config.resolve();
  RunResult result;
  if (config.experiment == "exp2") {
    const EffOperatorData data = make_exp2_data(*config.n_alpha, *config.n_beta, config.constant_coefficients);
    result.cordes =
        check_cordes(config, make_cell_problem(data, Vec2::Zero(), Vec2::Zero(), exp2_matrix_R(), config.sigma_fixed), out);
  } else {
    result.cordes = check_cordes(config, make_problem(config.problem, config).problem, out);
  }
  return result;
}

RunResult run_command(const std::string& command, const RunConfig& config, const LineSink& out) {
  if (command == "exp1") return run_exp1(config, out);
  if (command == "exp2") return run_exp2(config, out);
  if (command == "custom") return run_custom(config, out);
  if (command == "cordes") return run_cordes(config, out);
  config_error("unknown command '" + command + "'");
}

}  // namespace hjbi
