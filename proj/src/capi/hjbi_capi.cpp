#include "hjbi/hjbi.h"

#include "hjbi/experiments.hpp"
#include "hjbi/parallel.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

struct hjbi_config {
  nlohmann::json values = nlohmann::json::object();
};

struct hjbi_mesh {
  std::shared_ptr<const hjbi::PeriodicMesh> mesh;
};

struct hjbi_space {
  std::shared_ptr<const hjbi::FESpace> space;
};

struct hjbi_problem {
  hjbi::ProblemInstance instance;
  std::shared_ptr<std::atomic<bool>> callback_failed;
};

struct hjbi_solution {
  std::shared_ptr<const hjbi::Assembler> assembler;
  hjbi::ProblemInstance instance;
  hjbi::SolveReport report;
};

namespace {

thread_local std::string g_last_error;

hjbi_status status_of(hjbi::ErrorKind kind) {
  switch (kind) {
    case hjbi::ErrorKind::invalid_argument: return HJBI_INVALID_ARGUMENT;
    case hjbi::ErrorKind::config: return HJBI_CONFIG;
    case hjbi::ErrorKind::not_converged: return HJBI_NOT_CONVERGED;
    case hjbi::ErrorKind::cordes_violation: return HJBI_CORDES;
    case hjbi::ErrorKind::linear_solve: return HJBI_LINEAR_SOLVE;
    case hjbi::ErrorKind::io: return HJBI_IO;
  }
  return HJBI_INTERNAL;
}

hjbi_status set_error(hjbi_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class Fn>
hjbi_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const hjbi::Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(HJBI_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(HJBI_INTERNAL, e.what());
  } catch (...) {
    return set_error(HJBI_INTERNAL, "unknown error");
  }
}

#define HJBI_CHECK_ARG(cond, msg) \
  if (!(cond)) return set_error(HJBI_INVALID_ARGUMENT, msg)

/// Adapts C callbacks. A failing callback yields NaN coefficients and raises a
/// flag, since worker threads cannot propagate exceptions.
hjbi::ProblemInstance instance_from_desc(const hjbi_problem_desc& d, std::shared_ptr<std::atomic<bool>> failed) {
  hjbi::require(d.name && *d.name, "problem name must be nonempty");
  hjbi::require(d.coefficients != nullptr, "coefficient callback must be set");
  hjbi::require(d.n_alpha >= 1 && d.n_beta >= 1, "control grids need at least one sample");
  hjbi::HJBIProblem p;
  p.name = d.name;
  p.lambda = d.lambda > 0.0 ? d.lambda : 1.0;
  p.controls.alpha = hjbi::ControlGrid::interval(d.alpha_min, d.n_alpha == 1 ? d.alpha_min : d.alpha_max, d.n_alpha);
  p.controls.beta = hjbi::ControlGrid::interval(d.beta_min, d.n_beta == 1 ? d.beta_min : d.beta_max, d.n_beta);
  const hjbi_coefficient_fn fn = d.coefficients;
  void* user = d.user;
  p.coefficients = [fn, user, failed](const hjbi::Vec2& y, double a, double b) {
    double A[4] = {1.0, 0.0, 0.0, 1.0}, bv[2] = {0.0, 0.0}, c = 1.0, f = 0.0;
    hjbi::Coefficients k;
    if (fn(y.x(), y.y(), a, b, A, bv, &c, &f, user) != 0) {
      failed->store(true);
      k.A.setConstant(NAN);
      k.c = NAN;
      return k;
    }
    k.A << A[0], A[1], A[2], A[3];
    k.b = hjbi::Vec2(bv[0], bv[1]);
    k.c = c;
    k.f = f;
    return k;
  };
  p.delta = hjbi::admissible_delta(p);
  hjbi::ProblemInstance inst{std::move(p), {}};
  if (d.exact) {
    const hjbi_exact_fn ex = d.exact;
    struct Jet3 {
      double v, g[2], h[4];
    };
    auto at = [ex, user](const hjbi::Vec2& y) {
      Jet3 j{0.0, {0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}};
      ex(y.x(), y.y(), &j.v, j.g, j.h, user);
      return j;
    };
    hjbi::ExactSolution u;
    u.value = [at](const hjbi::Vec2& y) { return at(y).v; };
    u.gradient = [at](const hjbi::Vec2& y) {
      const Jet3 j = at(y);
      return hjbi::Vec2(j.g[0], j.g[1]);
    };
    u.hessian = [at](const hjbi::Vec2& y) {
      const Jet3 j = at(y);
      hjbi::Mat2 h;
      h << j.h[0], j.h[1], j.h[2], j.h[3];
      return h;
    };
    inst.exact = std::move(u);
  }
  return inst;
}

nlohmann::json parse_value(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
  }
  if (text.find(',') != std::string::npos) {
    nlohmann::json list = nlohmann::json::array();
    std::istringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
      try {
        list.push_back(nlohmann::json::parse(item));
      } catch (const nlohmann::json::parse_error&) {
        list.push_back(item);
      }
    }
    return list;
  }
  return text;
}

void merge_checked(hjbi_config* config, const nlohmann::json& patch) {
  if (!patch.is_object()) hjbi::fail(hjbi::ErrorKind::config, "config must be a JSON object");
  nlohmann::json merged = config->values;
  for (const auto& [k, v] : patch.items()) {
    std::string key = k;
    std::replace(key.begin(), key.end(), '-', '_');
    merged[key] = v;
  }
  hjbi::parse_config(merged);
  config->values = std::move(merged);
}

}  // namespace

extern "C" {

const char* hjbi_version(void) { return "0.1.0"; }

const char* hjbi_last_error_message(void) { return g_last_error.c_str(); }

int hjbi_exit_code(hjbi_status status) {
  switch (status) {
    case HJBI_OK: return 0;
    case HJBI_CONFIG: return 2;
    case HJBI_NOT_CONVERGED: return 3;
    case HJBI_CORDES: return 4;
    default: return 1;
  }
}

hjbi_status hjbi_set_threads(int threads) {
  HJBI_CHECK_ARG(threads >= 0, "threads must be >= 0");
  hjbi::set_thread_count(threads);
  return HJBI_OK;
}

hjbi_status hjbi_config_create(hjbi_config** out) {
  HJBI_CHECK_ARG(out, "out must not be NULL");
  return guarded([&] {
    *out = new hjbi_config;
    return HJBI_OK;
  });
}

void hjbi_config_destroy(hjbi_config* config) { delete config; }

hjbi_status hjbi_config_load_file(hjbi_config* config, const char* path) {
  HJBI_CHECK_ARG(config && path, "config and path must not be NULL");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) hjbi::fail(hjbi::ErrorKind::config, std::string("cannot open config file '") + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      hjbi::fail(hjbi::ErrorKind::config, std::string("config file '") + path + "' is not valid JSON: " + e.what());
    }
    merge_checked(config, j);
    return HJBI_OK;
  });
}

hjbi_status hjbi_config_load_json(hjbi_config* config, const char* json) {
  HJBI_CHECK_ARG(config && json, "config and json must not be NULL");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      hjbi::fail(hjbi::ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
    }
    merge_checked(config, j);
    return HJBI_OK;
  });
}

hjbi_status hjbi_config_set(hjbi_config* config, const char* key, const char* value) {
  HJBI_CHECK_ARG(config && key && value, "config, key and value must not be NULL");
  return guarded([&] {
    nlohmann::json patch = nlohmann::json::object();
    patch[key] = parse_value(value);
    merge_checked(config, patch);
    return HJBI_OK;
  });
}

hjbi_status hjbi_config_to_json(const hjbi_config* config, char* buf, size_t size, size_t* needed) {
  HJBI_CHECK_ARG(config, "config must not be NULL");
  return guarded([&] {
    const std::string text = hjbi::to_json(hjbi::parse_config(config->values)).dump();
    if (needed) *needed = text.size();
    if (buf && size > 0) {
      const size_t n = std::min(size - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
    return HJBI_OK;
  });
}

hjbi_status hjbi_run(const hjbi_config* config, const char* command, hjbi_line_fn sink, void* user) {
  HJBI_CHECK_ARG(config && command, "config and command must not be NULL");
  return guarded([&] {
    const hjbi::RunConfig rc = hjbi::parse_config(config->values);
    const hjbi::LineSink out = [&](const std::string& line) {
      if (sink) sink(line.c_str(), user);
    };
    const hjbi::RunResult r = hjbi::run_command(command, rc, out);
    if (r.exit_code == 3) return set_error(HJBI_NOT_CONVERGED, "a Howard iteration did not converge");
    return HJBI_OK;
  });
}

hjbi_status hjbi_register_problem(const hjbi_problem_desc* desc) {
  HJBI_CHECK_ARG(desc, "desc must not be NULL");
  return guarded([&] {
    const hjbi_problem_desc d = *desc;
    const std::string name = d.name ? d.name : "";
    instance_from_desc(d, std::make_shared<std::atomic<bool>>(false));  // validates eagerly
    hjbi::register_problem(name, [d, name](const hjbi::RunConfig&) {
      hjbi_problem_desc copy = d;
      copy.name = name.c_str();
      return instance_from_desc(copy, std::make_shared<std::atomic<bool>>(false));
    });
    return HJBI_OK;
  });
}

hjbi_status hjbi_problem_create(const char* name, hjbi_problem** out) {
  HJBI_CHECK_ARG(name && out, "name and out must not be NULL");
  return guarded([&] {
    hjbi::RunConfig rc;
    rc.experiment = "custom";
    rc.problem = name;
    rc.resolve();
    *out = new hjbi_problem{hjbi::make_problem(name, rc), std::make_shared<std::atomic<bool>>(false)};
    return HJBI_OK;
  });
}

hjbi_status hjbi_problem_from_desc(const hjbi_problem_desc* desc, hjbi_problem** out) {
  HJBI_CHECK_ARG(desc && out, "desc and out must not be NULL");
  return guarded([&] {
    auto failed = std::make_shared<std::atomic<bool>>(false);
    *out = new hjbi_problem{instance_from_desc(*desc, failed), failed};
    return HJBI_OK;
  });
}

void hjbi_problem_destroy(hjbi_problem* problem) { delete problem; }

hjbi_status hjbi_problem_cordes(const hjbi_problem* problem, int n_samples, int* holds, double* max_delta,
                                double* min_gamma) {
  HJBI_CHECK_ARG(problem && n_samples >= 1, "problem must not be NULL and n_samples >= 1");
  return guarded([&] {
    const hjbi::CordesReport r = hjbi::cordes_check(problem->instance.problem, n_samples);
    if (holds) *holds = r.holds ? 1 : 0;
    if (max_delta) *max_delta = r.max_admissible_delta;
    if (min_gamma) *min_gamma = r.min_gamma;
    return HJBI_OK;
  });
}

hjbi_status hjbi_mesh_create(int subdivisions, hjbi_mesh** out) {
  HJBI_CHECK_ARG(out && subdivisions >= 1, "out must not be NULL and subdivisions >= 1");
  return guarded([&] {
    *out = new hjbi_mesh{std::make_shared<const hjbi::PeriodicMesh>(hjbi::PeriodicMesh::uniform(subdivisions))};
    return HJBI_OK;
  });
}

void hjbi_mesh_destroy(hjbi_mesh* mesh) { delete mesh; }

long hjbi_mesh_n_elements(const hjbi_mesh* mesh) { return mesh ? long(mesh->mesh->n_elements()) : -1; }

long hjbi_mesh_n_faces(const hjbi_mesh* mesh) { return mesh ? long(mesh->mesh->n_faces()) : -1; }

hjbi_status hjbi_space_create(const hjbi_mesh* mesh, int degree, int continuous, hjbi_space** out) {
  HJBI_CHECK_ARG(mesh && out, "mesh and out must not be NULL");
  return guarded([&] {
    const auto cont = continuous ? hjbi::Continuity::continuous : hjbi::Continuity::discontinuous;
    *out = new hjbi_space{std::make_shared<const hjbi::FESpace>(mesh->mesh, degree, cont)};
    return HJBI_OK;
  });
}

void hjbi_space_destroy(hjbi_space* space) { delete space; }

long hjbi_space_n_dofs(const hjbi_space* space) { return space ? long(space->space->n_dofs()) : -1; }

hjbi_solve_options hjbi_solve_options_default(void) {
  hjbi_solve_options o;
  o.theta = 0.5;
  o.eta1 = 0.0;
  o.eta2 = 0.0;
  o.tol = 1e-10;
  o.max_iter = 50;
  return o;
}

hjbi_status hjbi_solve(const hjbi_space* space, const hjbi_problem* problem, const hjbi_solve_options* options,
                       hjbi_solution** out) {
  HJBI_CHECK_ARG(space && problem && out, "space, problem and out must not be NULL");
  return guarded([&] {
    const hjbi_solve_options o = options ? *options : hjbi_solve_options_default();
    const hjbi::HJBIProblem& p = problem->instance.problem;
    hjbi::SchemeParams params = hjbi::SchemeParams::defaults(space->space->degree(), p.lambda, o.theta);
    if (o.eta1 > 0.0) params.eta1 = o.eta1;
    if (o.eta2 > 0.0) params.eta2 = o.eta2;
    hjbi::HowardOptions howard;
    howard.tol = o.tol;
    howard.max_iter = o.max_iter;
    auto assembler = std::make_shared<const hjbi::Assembler>(space->space);
    problem->callback_failed->store(false);
    hjbi::SolveReport report = hjbi::howard_solve(*assembler, p, params, howard);
    if (problem->callback_failed->load())
      return set_error(HJBI_INVALID_ARGUMENT, "coefficient callback reported a failure");
    const bool converged = report.converged;
    *out = new hjbi_solution{std::move(assembler), problem->instance, std::move(report)};
    if (!converged) return set_error(HJBI_NOT_CONVERGED, "Howard iteration reached max_iter");
    return HJBI_OK;
  });
}

void hjbi_solution_destroy(hjbi_solution* solution) { delete solution; }

int hjbi_solution_iterations(const hjbi_solution* solution) { return solution ? solution->report.iterations : -1; }

int hjbi_solution_converged(const hjbi_solution* solution) {
  return solution && solution->report.converged ? 1 : 0;
}

long hjbi_solution_coefficients(const hjbi_solution* solution, double* out, long size) {
  if (!solution) return -1;
  const Eigen::VectorXd& c = solution->report.solution.coeffs();
  if (out)
    for (long i = 0; i < std::min<long>(size, c.size()); ++i) out[i] = c[i];
  return long(c.size());
}

hjbi_status hjbi_solution_eval(const hjbi_solution* solution, double y1, double y2, double* value) {
  HJBI_CHECK_ARG(solution && value, "solution and value must not be NULL");
  return guarded([&] {
    *value = solution->report.solution.eval_at(hjbi::Vec2(y1, y2)).value;
    return HJBI_OK;
  });
}

hjbi_status hjbi_solution_error(const hjbi_solution* solution, double* error) {
  HJBI_CHECK_ARG(solution && error, "solution and error must not be NULL");
  HJBI_CHECK_ARG(solution->instance.exact.has_value(), "the problem has no exact solution");
  return guarded([&] {
    *error = hjbi::norm_T_lambda(*solution->assembler, solution->instance.problem.lambda, solution->report.solution,
                                 *solution->instance.exact);
    return HJBI_OK;
  });
}

hjbi_status hjbi_solution_estimator(const hjbi_solution* solution, double* estimator) {
  HJBI_CHECK_ARG(solution && estimator, "solution and estimator must not be NULL");
  return guarded([&] {
    *estimator = hjbi::estimator_eta(*solution->assembler, solution->instance.problem, solution->report.solution);
    return HJBI_OK;
  });
}

}  // extern "C"
