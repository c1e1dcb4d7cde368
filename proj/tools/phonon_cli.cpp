#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "phonon/experiments.hpp"

using namespace phonon;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string preset_name;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig c = o.preset_name.empty() ? ExperimentConfig{} : preset(o.preset_name);
  if (!o.config_path.empty()) c = load_config(o.config_path, c);
  if (!o.out_dir.empty()) c.output_dir = o.out_dir;
  if (o.seed_given) {
    c.seed = o.seed;
    c.optimizer.seed = o.seed;
  }
  c.validate();
  return c;
}

int forward(const ExperimentConfig& c) {
  const auto r = run_forward_demo(c);
  std::printf("t_arrival=%.6f t_peak=%.6f files=%zu\n", r.t_arrival, r.t_peak, r.files.size());
  return 0;
}

int diffusion(const ExperimentConfig& c) {
  for (const auto& r : run_diffusion_study(c)) {
    std::printf("eps=%g kappa_bulk=%.6g kappa_settled=%.6g drift=%.3g gap=%.3g ce_residual=%.3g heat_gap=%.3g\n",
                r.epsilon, r.kappa_bulk, r.settled.value, r.settled.drift, r.gap, r.ce_residual, r.heat_gap);
  }
  return 0;
}

int generate(const ExperimentConfig& c) {
  const auto pairs = run_generate_data(c);
  std::printf("pairs=%zu\n", pairs.size());
  return 0;
}

int reconstruct(const ExperimentConfig& c) {
  const auto r = run_reconstruction(c);
  const auto& first = r.state.history.front();
  const auto& last = r.state.history.back();
  std::printf("method=%s n=%d loss=%.6g->%.6g error=%.6g->%.6g skipped=%d clamps=%d\n",
              to_string(c.optimizer.method).c_str(), r.state.n, first.loss_total, last.loss_total, first.error_e,
              last.error_e, r.state.skipped_steps, r.state.clamp_events);
  return 0;
}

int grad_check(const ExperimentConfig& c) {
  const auto r = run_grad_check(c);
  double worst = 0.0;
  for (const auto& f : r.fd) worst = std::max(worst, f.rel_error);
  std::printf("pairs=%zu aligned=%zu fd_worst=%.4g\n", r.gradients.size(), r.aligned, worst);
  return 0;
}

int grad_diagnostics(const ExperimentConfig& c) {
  const auto r = run_grad_diagnostics(c);
  std::printf("min_cosine %.4f -> %.4f, norm_spread %.4g -> %.4g\n", r.raw.min_cosine, r.recombined.min_cosine,
              r.raw.norm_spread, r.recombined.norm_spread);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phonon transport forward solver and relaxation-time reconstruction"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out_dir, "output directory");
  app.add_option_function<std::uint64_t>(
      "--seed",
      [&](const std::uint64_t& s) {
        o.seed = s;
        o.seed_given = true;
      },
      "random seed (overrides the configuration)");
  app.add_option("--preset", o.preset_name, "named parameter set")->check(CLI::IsMember(preset_names()));

  int (*runner)(const ExperimentConfig&) = nullptr;
  app.add_subcommand("forward", "forward snapshots and boundary temperature")->callback([&] { runner = forward; });
  app.add_subcommand("diffusion", "kappa settling across epsilon")->callback([&] { runner = diffusion; });
  app.add_subcommand("generate-data", "synthetic boundary data for the pair family")->callback([&] {
    runner = generate;
  });
  app.add_subcommand("reconstruct", "SGD reconstruction of tau")->callback([&] { runner = reconstruct; });
  app.add_subcommand("grad-check", "adjoint gradients against finite differences")->callback([&] {
    runner = grad_check;
  });
  app.add_subcommand("grad-diagnostics", "gradient geometry and recombination")->callback([&] {
    runner = grad_diagnostics;
  });
  app.fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::fprintf(stderr, "error: usage: %s\n", e.what());
    return 2;
  }
  try {
    return runner(resolve(o));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
