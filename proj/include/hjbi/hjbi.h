#ifndef HJBI_HJBI_H
#define HJBI_HJBI_H

#include <stddef.h>

#if defined(_WIN32)
#define HJBI_API __declspec(dllexport)
#else
#define HJBI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hjbi_status {
  HJBI_OK = 0,
  HJBI_INVALID_ARGUMENT = 1,
  HJBI_CONFIG = 2,
  HJBI_NOT_CONVERGED = 3,
  HJBI_CORDES = 4,
  HJBI_LINEAR_SOLVE = 5,
  HJBI_IO = 6,
  HJBI_INTERNAL = 7
} hjbi_status;

typedef struct hjbi_config hjbi_config;
typedef struct hjbi_mesh hjbi_mesh;
typedef struct hjbi_space hjbi_space;
typedef struct hjbi_problem hjbi_problem;
typedef struct hjbi_solution hjbi_solution;

/* Coefficients of one linear operator at (y1, y2) for controls (alpha, beta).
   A is row-major 2x2. Returns 0 on success. Called concurrently from worker
   threads, so it must be thread-safe. */
typedef int (*hjbi_coefficient_fn)(double y1, double y2, double alpha, double beta, double A[4], double b[2],
                                   double* c, double* f, void* user);

/* Exact solution value, gradient and row-major Hessian at (y1, y2). */
typedef void (*hjbi_exact_fn)(double y1, double y2, double* value, double gradient[2], double hessian[4],
                              void* user);

/* Receives each output line (no trailing newline). */
typedef void (*hjbi_line_fn)(const char* line, void* user);

typedef struct hjbi_problem_desc {
  const char* name;
  hjbi_coefficient_fn coefficients;
  hjbi_exact_fn exact; /* may be NULL */
  void* user;
  double alpha_min, alpha_max;
  int n_alpha; /* 1 means the singleton {alpha_min} */
  double beta_min, beta_max;
  int n_beta;
  double lambda; /* <= 0 selects 1 */
} hjbi_problem_desc;

HJBI_API const char* hjbi_version(void);
/* Message of the last failing call on this thread; empty if none. */
HJBI_API const char* hjbi_last_error_message(void);
/* Process exit code for a status: 0, 2, 3 and 4 map through, everything else is 1. */
HJBI_API int hjbi_exit_code(hjbi_status status);
/* 0 falls back to the HJBI_THREADS environment variable, then to 1. */
HJBI_API hjbi_status hjbi_set_threads(int threads);

/* ---- run configuration ---- */
HJBI_API hjbi_status hjbi_config_create(hjbi_config** out);
HJBI_API void hjbi_config_destroy(hjbi_config* config);
/* Merge the keys of a JSON file or string into the configuration. */
HJBI_API hjbi_status hjbi_config_load_file(hjbi_config* config, const char* path);
HJBI_API hjbi_status hjbi_config_load_json(hjbi_config* config, const char* json);
/* Set one key. Hyphens in the key are read as underscores. The value is parsed
   as JSON when possible; "4,8,16" becomes a list and anything else a string. */
HJBI_API hjbi_status hjbi_config_set(hjbi_config* config, const char* key, const char* value);
/* Copy the configuration as JSON into buf (NUL-terminated, truncated to size).
   Returns the full length through needed when not NULL. */
HJBI_API hjbi_status hjbi_config_to_json(const hjbi_config* config, char* buf, size_t size, size_t* needed);

/* Run a command (exp1, exp2, custom, cordes). Tables and notes go to `sink`. */
HJBI_API hjbi_status hjbi_run(const hjbi_config* config, const char* command, hjbi_line_fn sink, void* user);

/* ---- problems ---- */
/* Make a C problem available to custom runs under desc->name. */
HJBI_API hjbi_status hjbi_register_problem(const hjbi_problem_desc* desc);
/* A registered problem with the default configuration (built-ins: exp1,
   exp2-cell, linear-constant, linear-cosine, zero-c). */
HJBI_API hjbi_status hjbi_problem_create(const char* name, hjbi_problem** out);
HJBI_API hjbi_status hjbi_problem_from_desc(const hjbi_problem_desc* desc, hjbi_problem** out);
HJBI_API void hjbi_problem_destroy(hjbi_problem* problem);
/* Sampled Cordes check on an n_samples x n_samples grid. Outputs may be NULL. */
HJBI_API hjbi_status hjbi_problem_cordes(const hjbi_problem* problem, int n_samples, int* holds,
                                         double* max_delta, double* min_gamma);

/* ---- discretization ---- */
HJBI_API hjbi_status hjbi_mesh_create(int subdivisions, hjbi_mesh** out);
HJBI_API void hjbi_mesh_destroy(hjbi_mesh* mesh);
HJBI_API long hjbi_mesh_n_elements(const hjbi_mesh* mesh);
HJBI_API long hjbi_mesh_n_faces(const hjbi_mesh* mesh);

/* continuous != 0 selects the C0 space. */
HJBI_API hjbi_status hjbi_space_create(const hjbi_mesh* mesh, int degree, int continuous, hjbi_space** out);
HJBI_API void hjbi_space_destroy(hjbi_space* space);
HJBI_API long hjbi_space_n_dofs(const hjbi_space* space);

/* ---- solve ---- */
typedef struct hjbi_solve_options {
  double theta;      /* in [0, 1] */
  double eta1, eta2; /* <= 0 selects the default penalty */
  double tol;        /* relative Howard tolerance */
  int max_iter;
} hjbi_solve_options;

HJBI_API hjbi_solve_options hjbi_solve_options_default(void);
/* Returns HJBI_NOT_CONVERGED with a usable *out when Howard hits max_iter. */
HJBI_API hjbi_status hjbi_solve(const hjbi_space* space, const hjbi_problem* problem,
                                const hjbi_solve_options* options, hjbi_solution** out);
HJBI_API void hjbi_solution_destroy(hjbi_solution* solution);
HJBI_API int hjbi_solution_iterations(const hjbi_solution* solution);
HJBI_API int hjbi_solution_converged(const hjbi_solution* solution);
/* Copies min(size, n_dofs) coefficients; returns n_dofs. */
HJBI_API long hjbi_solution_coefficients(const hjbi_solution* solution, double* out, long size);
HJBI_API hjbi_status hjbi_solution_eval(const hjbi_solution* solution, double y1, double y2, double* value);
/* Error in the lambda-weighted broken H2 norm against the problem's exact solution. */
HJBI_API hjbi_status hjbi_solution_error(const hjbi_solution* solution, double* error);
HJBI_API hjbi_status hjbi_solution_estimator(const hjbi_solution* solution, double* estimator);

#ifdef __cplusplus
}
#endif

#endif
