#include "phonon/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "phonon/csv.hpp"

namespace phonon {

namespace fs = std::filesystem;

namespace {

std::string out_path(const ExperimentConfig& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  return (fs::path(c.output_dir) / name).string();
}

std::string tag(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::size_t nearest(std::span<const double> nodes, double v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (std::abs(nodes[i] - v) < std::abs(nodes[best] - v)) best = i;
  }
  return best;
}

}  // namespace

void echo_config(const ExperimentConfig& config) {
  std::ofstream out(out_path(config, "config.ini"));
  if (!out) throw IoError("cannot write config echo in " + config.output_dir);
  out << to_ini(config);
}

ForwardDemoResult run_forward_demo(const ExperimentConfig& config) {
  config.validate();
  echo_config(config);
  const PhaseGrid grid = make_grid(config.grid, config.material.velocity);
  const MaterialModel material = make_material(config, grid, config.material.tau);
  const std::size_t nw = grid.nomega();

  std::vector<std::size_t> steps;
  for (double t : config.forward.snapshot_times) {
    if (t < 0.0 || t > grid.t_nodes().back() + 1e-12) {
      throw ConfigError("forward.snapshot_times entry " + tag(t) + " lies outside the time grid");
    }
    steps.push_back(nearest(grid.t_nodes(), t));
  }
  const bool want_slice = config.forward.slice_t <= grid.t_nodes().back() + 1e-12;
  const std::size_t slice_step = nearest(grid.t_nodes(), config.forward.slice_t);
  const std::size_t slice_ix = nearest(grid.x_nodes(), config.forward.slice_x);
  const std::size_t slice_mu = nearest(grid.mu_nodes(), config.forward.slice_mu);

  ForwardDemoResult res;
  res.boundary_T.assign(grid.nt(), 0.0);
  std::vector<double> mu_w(grid.mu_weights().begin(), grid.mu_weights().end());
  integrate_kinetic(grid, material, source_inflow(grid, material, config.source),
                    [&](std::size_t n, const DistributionField& h) {
                      res.boundary_T[n] = temperature(grid, material, h.slice(0));
                      for (std::size_t s = 0; s < steps.size(); ++s) {
                        if (steps[s] != n) continue;
                        const std::string name = "snapshot_t" + tag(config.forward.snapshot_times[s]) + ".csv";
                        CsvWriter out(out_path(config, name), {"x", "omega", "mean_mu_h"});
                        for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
                          const auto sl = h.slice(ix);
                          for (std::size_t k = 0; k < nw; ++k) {
                            double m = 0.0;
                            for (std::size_t i = 0; i < grid.nmu(); ++i) m += mu_w[i] * sl[i * nw + k];
                            out.row({grid.x_nodes()[ix], grid.omega_nodes()[k], 0.5 * m});
                          }
                        }
                        res.files.push_back(out.path());
                      }
                      if (want_slice && n == slice_step) {
                        CsvWriter out(out_path(config, "omega_slice.csv"), {"t", "x", "mu", "omega", "h", "h_star"});
                        const auto sl = h.slice(slice_ix);
                        for (std::size_t k = 0; k < nw; ++k) {
                          out.row({grid.t_nodes()[n], grid.x_nodes()[slice_ix], grid.mu_nodes()[slice_mu],
                                   grid.omega_nodes()[k], sl[slice_mu * nw + k], material.h_star()[k]});
                        }
                        res.files.push_back(out.path());
                      }
                    });

  {
    CsvWriter out(out_path(config, "boundary_temperature.csv"), {"t", "T"});
    for (std::size_t n = 0; n < grid.nt(); ++n) out.row({grid.t_nodes()[n], res.boundary_T[n]});
    res.files.push_back(out.path());
  }
  // Post-injection maximum: skip the injection pulse itself.
  res.t_arrival = arrival_time(config.source.t0, config.source.mu0, config.source.omega0, config.material.velocity);
  const double after = config.source.t0 + 6.0 * config.source.eps_t;
  std::size_t best = grid.nt();
  for (std::size_t n = 0; n < grid.nt(); ++n) {
    if (grid.t_nodes()[n] < after) continue;
    if (best == grid.nt() || res.boundary_T[n] > res.boundary_T[best]) best = n;
  }
  res.t_peak = best < grid.nt() ? grid.t_nodes()[best] : std::nan("");
  {
    CsvWriter out(out_path(config, "arrival.csv"), {"t_arrival_predicted", "t_peak_simulated"});
    out.row({res.t_arrival, res.t_peak});
  }
  return res;
}

std::vector<DiffusionRow> run_diffusion_study(const ExperimentConfig& config) {
  config.validate();
  echo_config(config);
  std::vector<DiffusionRow> rows;
  for (double eps : config.diffusion.epsilons) {
    GridConfig gc = config.grid;
    gc.epsilon = eps;
    gc.dt = config.diffusion.dt;
    gc.t_end = config.diffusion.t_end;
    const PhaseGrid grid = make_grid(gc, config.material.velocity);
    const MaterialModel material = make_material(config, grid, config.material.tau);
    const std::size_t ce_step = nearest(grid.t_nodes(), config.diffusion.ce_time);
    std::vector<double> g_ce;
    MacroTrace tr = run_macro(grid, material, source_inflow(grid, material, config.source),
                              [&](std::size_t n, const DistributionField& h) {
                                if (n == ce_step) g_ce = to_g(grid, material, h.values());
                              });
    write_macro_csv(out_path(config, "macro_eps" + tag(eps) + ".csv"), tr);

    DiffusionRow row;
    row.epsilon = eps;
    row.kappa_bulk = bulk_kappa(grid, material);
    row.settled = kappa_settling(tr, config.diffusion.probe_x, config.diffusion.settle_time);
    row.gap = std::abs(row.settled.value - row.kappa_bulk) / row.kappa_bulk;
    row.ce_residual = chapman_enskog_residual(grid, material, g_ce);
    row.heat_gap = heat_comparison(tr, row.kappa_bulk / grid.mean_omega(material.g_star()),
                                   config.diffusion.settle_time);
    rows.push_back(row);
  }
  CsvWriter out(out_path(config, "diffusion_summary.csv"),
                {"epsilon", "kappa_bulk", "kappa_settled", "kappa_drift", "kappa_defined", "gap", "ce_residual",
                 "heat_gap"});
  for (const auto& r : rows) {
    out.row({r.epsilon, r.kappa_bulk, r.settled.value, r.settled.drift, r.settled.defined ? 1.0 : 0.0, r.gap,
             r.ce_residual, r.heat_gap});
  }
  return rows;
}

std::vector<SourceTestPair> prepare_pairs(const ExperimentConfig& config, const PhaseGrid& grid) {
  if (!config.data_path.empty()) {
    auto pairs = read_data_csv(config.data_path);
    for (const auto& p : pairs) p.validate(grid.t_nodes().back());
    return pairs;
  }
  auto pairs = build_pairs(grid, config.material.velocity, config.experiments);
  generate_data(grid, make_material(config, grid, config.material.tau), pairs);
  return pairs;
}

std::vector<SourceTestPair> run_generate_data(const ExperimentConfig& config) {
  config.validate();
  echo_config(config);
  const PhaseGrid grid = make_grid(config.grid, config.material.velocity);
  auto pairs = build_pairs(grid, config.material.velocity, config.experiments);
  generate_data(grid, make_material(config, grid, config.material.tau), pairs);
  write_data_csv(out_path(config, "data.csv"), pairs);
  return pairs;
}

ReconstructionResult run_reconstruction(const ExperimentConfig& config) {
  config.validate();
  echo_config(config);
  const PhaseGrid grid = make_grid(config.grid, config.material.velocity);
  const MaterialModel truth = make_material(config, grid, config.material.tau);
  const MaterialModel start = make_material(config, grid, config.initial_tau);
  PairObjective objective(grid, truth, prepare_pairs(config, grid));

  ReconstructionResult res;
  res.tau_star.assign(truth.tau().begin(), truth.tau().end());
  OptimizerSettings settings = config.optimizer;
  settings.tau_min = config.material.bounds.tau_min;
  settings.tau_max = config.material.bounds.tau_max;

  CsvWriter snaps(out_path(config, "tau_snapshots.csv"), {"n", "omega", "tau", "tau_star"});
  auto snapshot = [&](const OptimizerState& st) {
    for (std::size_t k = 0; k < st.tau.size(); ++k) {
      snaps.row({static_cast<double>(st.n), grid.omega_nodes()[k], st.tau[k], res.tau_star[k]});
    }
  };
  res.state = run_optimizer(objective, std::vector<double>(start.tau().begin(), start.tau().end()), res.tau_star,
                            settings, [&](const OptimizerState& st) {
                              if (st.n % config.snapshot_every == 0) snapshot(st);
                            });
  if (res.state.n % config.snapshot_every != 0) snapshot(res.state);

  write_history_csv(out_path(config, "history.csv"), res.state.history);
  write_profile_csv(out_path(config, "tau_final.csv"), grid.omega_nodes(), res.state.tau, "tau");
  CsvWriter events(out_path(config, "events.csv"), {"skipped_steps", "clamp_events"});
  events.row({static_cast<double>(res.state.skipped_steps), static_cast<double>(res.state.clamp_events)});
  return res;
}

std::vector<std::vector<std::size_t>> fd_direction_nodes(const ExperimentConfig& config, std::size_t pairs,
                                                         std::size_t nodes) {
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(config.diagnostics.directions), nodes);
  std::mt19937_64 rng(config.seed + 1);
  std::vector<std::vector<std::size_t>> out(pairs);
  for (auto& pick : out) {
    std::vector<std::size_t> all(nodes);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::shuffle(all.begin(), all.end(), rng);
    pick.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(pick.begin(), pick.end());
  }
  return out;
}

GradCheckResult run_grad_check(const ExperimentConfig& config) {
  config.validate();
  echo_config(config);
  const PhaseGrid grid = make_grid(config.grid, config.material.velocity);
  const MaterialModel truth = make_material(config, grid, config.material.tau);
  const MaterialModel start = make_material(config, grid, config.initial_tau);
  const auto pairs = prepare_pairs(config, grid);
  const std::size_t nw = grid.nomega();

  GradCheckResult res;
  for (const auto& p : pairs) res.gradients.push_back(frechet_gradient(grid, start, p).gradient);

  const auto nodes = fd_direction_nodes(config, pairs.size(), nw);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t k : nodes[i]) {
      std::vector<double> d(nw, 0.0);
      d[k] = 1.0;
      FdComparison c;
      c.pair = i;
      c.node = k;
      c.adjoint = grid.omega_inner(res.gradients[i], d);
      c.fd = fd_gradient_oracle(grid, start, pairs[i], d, config.diagnostics.fd_step);
      c.rel_error = std::abs(c.adjoint - c.fd) / std::max(std::abs(c.fd), std::numeric_limits<double>::epsilon());
      res.fd.push_back(c);
    }
  }

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& g = res.gradients[i];
    std::size_t am = 0;
    for (std::size_t k = 1; k < nw; ++k) {
      if (std::abs(g[k]) > std::abs(g[am])) am = k;
    }
    res.argmax.push_back(am);
    if (am == nearest(grid.omega_nodes(), pairs[i].source.omega0)) ++res.aligned;
    res.norms_tau0.push_back(std::sqrt(grid.omega_inner(g, g)));
    const auto gs = frechet_gradient(grid, truth, pairs[i]).gradient;
    res.norms_star.push_back(std::sqrt(grid.omega_inner(gs, gs)));
  }

  {
    CsvWriter out(out_path(config, "gradients_tau0.csv"), {"pair_id", "omega", "gradient"});
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      for (std::size_t k = 0; k < nw; ++k) {
        out.row({static_cast<double>(i), grid.omega_nodes()[k], res.gradients[i][k]});
      }
    }
  }
  {
    CsvWriter out(out_path(config, "fd_check.csv"), {"pair_id", "direction_omega", "adjoint", "fd", "rel_error"});
    for (const auto& c : res.fd) {
      out.row({static_cast<double>(c.pair), grid.omega_nodes()[c.node], c.adjoint, c.fd, c.rel_error});
    }
  }
  {
    CsvWriter out(out_path(config, "peak_alignment.csv"),
                  {"pair_id", "omega_source", "omega_argmax", "aligned", "norm_tau0", "norm_tau_star"});
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double w = grid.omega_nodes()[res.argmax[i]];
      out.row({static_cast<double>(i), pairs[i].source.omega0, w,
               res.argmax[i] == nearest(grid.omega_nodes(), pairs[i].source.omega0) ? 1.0 : 0.0, res.norms_tau0[i],
               res.norms_star[i]});
    }
  }
  return res;
}

namespace {

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < m.cols(); ++j) header.push_back("c" + std::to_string(j));
  CsvWriter out(path, header);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    out.row(row);
  }
}

}  // namespace

GradDiagnosticsResult run_grad_diagnostics(const ExperimentConfig& config) {
  config.validate();
  echo_config(config);
  const PhaseGrid grid = make_grid(config.grid, config.material.velocity);
  const MaterialModel start = make_material(config, grid, config.initial_tau);
  const auto pairs = prepare_pairs(config, grid);

  GradDiagnosticsResult res;
  for (const auto& p : pairs) res.gradients.push_back(frechet_gradient(grid, start, p).gradient);
  res.raw = gradient_geometry(res.gradients, grid.omega_weights());
  res.recombined = gradient_geometry(recombine_gradients(res.gradients, config.seed + 2), grid.omega_weights());

  const std::size_t probe = pairs.size() / 2;
  res.lipschitz = lipschitz_probe(grid, start, pairs[probe], config.diagnostics.lipschitz_trials,
                                  config.diagnostics.lipschitz_scale, config.seed + 3);
  res.lipschitz_half = lipschitz_probe(grid, start, pairs[probe], config.diagnostics.lipschitz_trials,
                                       0.5 * config.diagnostics.lipschitz_scale, config.seed + 3);

  write_matrix(out_path(config, "cosine_raw.csv"), res.raw.cosine);
  write_matrix(out_path(config, "cosine_recombined.csv"), res.recombined.cosine);
  {
    CsvWriter out(out_path(config, "norms.csv"), {"pair_id", "norm_raw", "norm_recombined"});
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      out.row({static_cast<double>(i), res.raw.norms[i], res.recombined.norms[i]});
    }
  }
  {
    CsvWriter out(out_path(config, "geometry_summary.csv"),
                  {"min_cosine_raw", "min_cosine_recombined", "norm_spread_raw", "norm_spread_recombined",
                   "min_cosine_improved", "norm_spread_improved"});
    out.row({res.raw.min_cosine, res.recombined.min_cosine, res.raw.norm_spread, res.recombined.norm_spread,
             res.recombined.min_cosine > res.raw.min_cosine ? 1.0 : 0.0,
             res.recombined.norm_spread < res.raw.norm_spread ? 1.0 : 0.0});
  }
  {
    CsvWriter out(out_path(config, "lipschitz.csv"), {"scale", "trial", "ratio"});
    for (std::size_t j = 0; j < res.lipschitz.ratios.size(); ++j) {
      out.row({config.diagnostics.lipschitz_scale, static_cast<double>(j), res.lipschitz.ratios[j]});
    }
    for (std::size_t j = 0; j < res.lipschitz_half.ratios.size(); ++j) {
      out.row({0.5 * config.diagnostics.lipschitz_scale, static_cast<double>(j), res.lipschitz_half.ratios[j]});
    }
  }
  return res;
}

}  // namespace phonon
