// spingate: command-line front end for simulation, optimization,
// cross-application and robustness runs.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "spingate/experiment.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string preset;
  std::string field;
  std::optional<double> gamma;
};

spingate::ExperimentConfig resolve(const Overrides &o) {
  spingate::ExperimentConfig c;
  if (!o.config.empty()) {
    c = spingate::load_config(o.config);
  } else {
    spingate::apply_preset(c.system, o.preset.empty() ? "one_qubit_n1" : o.preset);
  }
  if (!o.preset.empty() && !o.config.empty()) {
    c.system.frequencies.clear();
    spingate::apply_preset(c.system, o.preset);
  }
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (!o.field.empty()) {
    c.field.source = "csv";
    c.field.path = o.field;
  }
  if (o.gamma) c.system.gamma = *o.gamma;
  spingate::distribute_seed(c);
  spingate::validate_config(c);
  return c;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Optimal control of qubit gates coupled to a spin environment"};
  app.require_subcommand(1);
  Overrides o;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", o.config, "experiment JSON file");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--threads", o.threads, "worker cap (0: all cores)");
    sub->add_option("--preset", o.preset, "one_qubit_n1, one_qubit_nk or cnot_n1");
    sub->add_option("--field", o.field, "control field CSV (t,C)");
    sub->add_option("--gamma", o.gamma, "override the qubit-environment coupling");
  };
  auto *simulate = app.add_subcommand("simulate", "propagate a field and write diagnostics");
  auto *optimize = app.add_subcommand("optimize", "GA search followed by gradient refinement");
  auto *crossapply = app.add_subcommand("crossapply", "evaluate a field on a modified system");
  auto *robustness = app.add_subcommand("robustness", "Monte Carlo ensemble of perturbed systems");
  for (auto *sub : {simulate, optimize, crossapply, robustness}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const spingate::ExperimentConfig config = resolve(o);
    if (*simulate) return spingate::cmd_simulate(config, std::cout);
    if (*optimize) return spingate::cmd_optimize(config, std::cout);
    if (*crossapply) return spingate::cmd_crossapply(config, std::cout);
    return spingate::cmd_robustness(config, std::cout);
  } catch (const spingate::ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const spingate::NumericalError &e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
