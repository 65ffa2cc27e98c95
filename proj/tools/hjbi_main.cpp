#include "hjbi/hjbi.h"

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace {

struct KeyOption {
  const char* key;
  const char* help;
};

// Value-taking config keys exposed as flags in both spellings.
const std::vector<KeyOption> kValueKeys = {
    {"problem", "registered problem name"},
    {"scheme", "dg or c0ip"},
    {"degree", "polynomial degree"},
    {"theta", "parameter theta in [0,1]"},
    {"eta1", "value-jump penalty"},
    {"eta2", "gradient-jump penalty"},
    {"meshes", "mesh subdivisions, e.g. 4,8,16,32"},
    {"n_alpha", "samples of the first control set"},
    {"n_beta", "samples of the second control set"},
    {"sigmas", "decreasing sigma values for the sigma table"},
    {"sigma_fixed", "sigma of the mesh table"},
    {"mesh_fine", "subdivisions for the sigma table"},
    {"degree_fine", "degree for the sigma table"},
    {"tol", "relative Howard tolerance"},
    {"max_iter", "Howard iteration limit"},
    {"output", "directory for CSV files"},
    {"cordes_samples", "samples per direction for the Cordes check"},
    {"linear_solver", "auto, dense, sparse_lu or gmres"},
    {"experiment", "exp1 or exp2 (cordes command)"},
};

std::string flag_names(const std::string& key) {
  std::string hyphen = key;
  for (char& c : hyphen)
    if (c == '_') c = '-';
  return hyphen == key ? "--" + key : "--" + key + ",--" + hyphen;
}

struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  bool allow_cordes_violation = false;
  bool constant_coefficients = false;
  bool no_warm_start = false;
};

void add_options(Command& cmd) {
  for (const KeyOption& k : kValueKeys) cmd.app->add_option(flag_names(k.key), cmd.values[k.key], k.help);
  cmd.app->add_flag("--allow-cordes-violation,--allow_cordes_violation", cmd.allow_cordes_violation,
                    "continue when the Cordes check fails");
  cmd.app->add_flag("--constant-coefficients,--constant_coefficients", cmd.constant_coefficients,
                    "exp2 without the oscillating coefficient");
  cmd.app->add_flag("--no-warm-start,--no_warm_start", cmd.no_warm_start, "start every mesh from zero");
}

int report(hjbi_status s) {
  std::fprintf(stderr, "error: %s\n", hjbi_last_error_message());
  return hjbi_exit_code(s);
}

void print_line(const char* line, void*) {
  std::fputs(line, stdout);
  std::fputc('\n', stdout);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite element solver for periodic HJBI problems and effective Hamiltonians"};
  app.require_subcommand(1);
  std::string config_file;
  int threads = 0;
  app.add_option("--config", config_file, "JSON configuration file; flags override its keys")->check(CLI::ExistingFile);
  app.add_option("--threads", threads, "worker threads (default: HJBI_THREADS or 1)")->check(CLI::NonNegativeNumber);
  app.add_flag_callback("--version", [] {
    std::printf("hjbi %s\n", hjbi_version());
    throw CLI::Success();
  });

  std::vector<Command> commands(4);
  const char* names[] = {"exp1", "exp2", "custom", "cordes"};
  const char* help[] = {"convergence table for the manufactured problem",
                        "effective Hamiltonian: mesh table and sigma table",
                        "convergence table for a registered problem (--problem)",
                        "report the Cordes condition of a problem"};
  for (int i = 0; i < 4; ++i) {
    commands[i].app = app.add_subcommand(names[i], help[i]);
    add_options(commands[i]);
    commands[i].app->add_option("--config", config_file, "JSON configuration file")->check(CLI::ExistingFile);
    commands[i].app->add_option("--threads", threads, "worker threads")->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hjbi_exit_code(HJBI_CONFIG);
  }

  Command* cmd = nullptr;
  std::string command;
  for (int i = 0; i < 4; ++i)
    if (commands[i].app->parsed()) {
      cmd = &commands[i];
      command = names[i];
    }

  hjbi_status s = hjbi_set_threads(threads);
  if (s != HJBI_OK) return report(s);

  hjbi_config* config = nullptr;
  if ((s = hjbi_config_create(&config)) != HJBI_OK) return report(s);
  auto finish = [&](hjbi_status status) {
    hjbi_config_destroy(config);
    return status == HJBI_OK ? 0 : report(status);
  };
  if (!config_file.empty() && (s = hjbi_config_load_file(config, config_file.c_str())) != HJBI_OK) return finish(s);
  if (command == "custom" || command == "exp1" || command == "exp2")
    if ((s = hjbi_config_set(config, "experiment", ("\"" + command + "\"").c_str())) != HJBI_OK) return finish(s);

  for (const KeyOption& k : kValueKeys) {
    const std::string& v = cmd->values[k.key];
    if (v.empty()) continue;
    if ((s = hjbi_config_set(config, k.key, v.c_str())) != HJBI_OK) return finish(s);
  }
  if (cmd->allow_cordes_violation && (s = hjbi_config_set(config, "allow_cordes_violation", "true")) != HJBI_OK)
    return finish(s);
  if (cmd->constant_coefficients && (s = hjbi_config_set(config, "constant_coefficients", "true")) != HJBI_OK)
    return finish(s);
  if (cmd->no_warm_start && (s = hjbi_config_set(config, "warm_start", "false")) != HJBI_OK) return finish(s);

  return finish(hjbi_run(config, command.c_str(), print_line, nullptr));
}
