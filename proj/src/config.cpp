#include "phonon/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "phonon/csv.hpp"

namespace phonon {

CoefficientProfile ProfileSpec::build() const {
  if (kind == "truth") return CoefficientProfile::relaxation_truth();
  if (kind == "initial") return CoefficientProfile::relaxation_initial();
  if (kind == "bose_einstein") return CoefficientProfile::bose_einstein();
  if (kind == "constant") return CoefficientProfile::constant(value);
  if (kind == "table") {
    if (table.empty()) throw ConfigError("profile kind 'table' needs a table path");
    return CoefficientProfile::table(read_profile_csv(table));
  }
  throw ConfigError("unknown profile kind '" + kind + "'");
}

namespace {

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) throw ConfigError("key " + key + ": '" + s + "' is not a number");
  return v;
}

long long to_int(const std::string& key, const std::string& s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("key " + key + ": '" + s + "' is not an integer");
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(to_double(key, item.substr(b, e - b + 1)));
  }
  return out;
}

std::string from_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

struct Field {
  std::string section, key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class T>
Field real(const char* section, const char* key, T ExperimentConfig::*group, double T::*member) {
  const std::string name = std::string(section) + "." + key;
  return {section, key, [=](const ExperimentConfig& c) { return format_double(c.*group.*member); },
          [=](ExperimentConfig& c, const std::string& s) { c.*group.*member = to_double(name, s); }};
}

template <class T, class I>
Field integer(const char* section, const char* key, T ExperimentConfig::*group, I T::*member) {
  const std::string name = std::string(section) + "." + key;
  return {section, key, [=](const ExperimentConfig& c) { return std::to_string(c.*group.*member); },
          [=](ExperimentConfig& c, const std::string& s) { c.*group.*member = static_cast<I>(to_int(name, s)); }};
}

template <class T>
Field list(const char* section, const char* key, T ExperimentConfig::*group, std::vector<double> T::*member) {
  const std::string name = std::string(section) + "." + key;
  return {section, key, [=](const ExperimentConfig& c) { return from_list(c.*group.*member); },
          [=](ExperimentConfig& c, const std::string& s) { c.*group.*member = to_list(name, s); }};
}

void profile_fields(std::vector<Field>& f, const char* section, const std::string& prefix,
                    ProfileSpec& (*access)(ExperimentConfig&)) {
  auto cget = [access](const ExperimentConfig& c) -> const ProfileSpec& {
    return access(const_cast<ExperimentConfig&>(c));
  };
  const std::string name = std::string(section) + "." + prefix;
  f.push_back({section, prefix + "_profile", [=](const ExperimentConfig& c) { return cget(c).kind; },
               [=](ExperimentConfig& c, const std::string& s) { access(c).kind = s; }});
  f.push_back({section, prefix + "_value", [=](const ExperimentConfig& c) { return format_double(cget(c).value); },
               [=](ExperimentConfig& c, const std::string& s) { access(c).value = to_double(name + "_value", s); }});
  f.push_back({section, prefix + "_table", [=](const ExperimentConfig& c) { return cget(c).table; },
               [=](ExperimentConfig& c, const std::string& s) { access(c).table = s; }});
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    using C = ExperimentConfig;
    std::vector<Field> f;
    f.push_back(real("grid", "t_end", &C::grid, &GridConfig::t_end));
    f.push_back(real("grid", "dt", &C::grid, &GridConfig::dt));
    f.push_back(real("grid", "x_end", &C::grid, &GridConfig::x_end));
    f.push_back(real("grid", "dx", &C::grid, &GridConfig::dx));
    f.push_back(real("grid", "omega_min", &C::grid, &GridConfig::omega_min));
    f.push_back(real("grid", "omega_max", &C::grid, &GridConfig::omega_max));
    f.push_back(real("grid", "domega", &C::grid, &GridConfig::domega));
    f.push_back(integer("grid", "n_mu", &C::grid, &GridConfig::n_mu));
    f.push_back(real("grid", "epsilon", &C::grid, &GridConfig::epsilon));

    profile_fields(f, "material", "tau", [](C& c) -> ProfileSpec& { return c.material.tau; });
    profile_fields(f, "material", "g_star", [](C& c) -> ProfileSpec& { return c.material.g_star; });
    profile_fields(f, "material", "initial_tau", [](C& c) -> ProfileSpec& { return c.initial_tau; });
    f.push_back({"material", "velocity_intercept",
                 [](const C& c) { return format_double(c.material.velocity.intercept); },
                 [](C& c, const std::string& s) {
                   c.material.velocity.intercept = to_double("material.velocity_intercept", s);
                 }});
    f.push_back({"material", "velocity_slope", [](const C& c) { return format_double(c.material.velocity.slope); },
                 [](C& c, const std::string& s) { c.material.velocity.slope = to_double("material.velocity_slope", s); }});
    f.push_back({"material", "tau_min", [](const C& c) { return format_double(c.material.bounds.tau_min); },
                 [](C& c, const std::string& s) { c.material.bounds.tau_min = to_double("material.tau_min", s); }});
    f.push_back({"material", "tau_max", [](const C& c) { return format_double(c.material.bounds.tau_max); },
                 [](C& c, const std::string& s) { c.material.bounds.tau_max = to_double("material.tau_max", s); }});

    f.push_back(real("source", "t0", &C::source, &BoundarySource::t0));
    f.push_back(real("source", "mu0", &C::source, &BoundarySource::mu0));
    f.push_back(real("source", "omega0", &C::source, &BoundarySource::omega0));
    f.push_back(real("source", "eps_t", &C::source, &BoundarySource::eps_t));
    f.push_back(real("source", "eps_mu", &C::source, &BoundarySource::eps_mu));
    f.push_back(real("source", "eps_omega", &C::source, &BoundarySource::eps_omega));
    f.push_back(real("source", "amplitude", &C::source, &BoundarySource::amplitude));

    f.push_back(real("experiments", "t0", &C::experiments, &PairFamily::t0));
    f.push_back(real("experiments", "mu0", &C::experiments, &PairFamily::mu0));
    f.push_back(real("experiments", "eps_t", &C::experiments, &PairFamily::eps_t));
    f.push_back(real("experiments", "eps_mu", &C::experiments, &PairFamily::eps_mu));
    f.push_back(real("experiments", "eps_omega", &C::experiments, &PairFamily::eps_omega));
    f.push_back(real("experiments", "eps_window", &C::experiments, &PairFamily::eps_window));
    f.push_back(list("experiments", "omegas", &C::experiments, &PairFamily::omegas));
    f.push_back({"experiments", "data", [](const C& c) { return c.data_path; },
                 [](C& c, const std::string& s) { c.data_path = s; }});

    f.push_back({"optimizer", "method", [](const C& c) { return to_string(c.optimizer.method); },
                 [](C& c, const std::string& s) {
                   if (s == "armijo") c.optimizer.method = Method::armijo;
                   else if (s == "adagrad") c.optimizer.method = Method::adagrad;
                   else throw ConfigError("optimizer.method must be armijo or adagrad, got '" + s + "'");
                 }});
    f.push_back({"optimizer", "sampling", [](const C& c) { return to_string(c.optimizer.sampling); },
                 [](C& c, const std::string& s) {
                   if (s == "iid") c.optimizer.sampling = Sampling::iid;
                   else if (s == "epoch") c.optimizer.sampling = Sampling::epoch;
                   else throw ConfigError("optimizer.sampling must be iid or epoch, got '" + s + "'");
                 }});
    f.push_back(integer("optimizer", "iterations", &C::optimizer, &OptimizerSettings::iterations));
    f.push_back(real("optimizer", "armijo_c", &C::optimizer, &OptimizerSettings::armijo_c));
    f.push_back(real("optimizer", "alpha_max", &C::optimizer, &OptimizerSettings::alpha_max));
    f.push_back(real("optimizer", "adagrad_alpha", &C::optimizer, &OptimizerSettings::adagrad_alpha));
    f.push_back(real("optimizer", "adagrad_delta", &C::optimizer, &OptimizerSettings::adagrad_delta));
    f.push_back(real("optimizer", "grad_tol", &C::optimizer, &OptimizerSettings::grad_tol));
    f.push_back({"optimizer", "snapshot_every", [](const C& c) { return std::to_string(c.snapshot_every); },
                 [](C& c, const std::string& s) {
                   c.snapshot_every = static_cast<int>(to_int("optimizer.snapshot_every", s));
                 }});

    f.push_back(list("forward", "snapshot_times", &C::forward, &ForwardSettings::snapshot_times));
    f.push_back(real("forward", "slice_t", &C::forward, &ForwardSettings::slice_t));
    f.push_back(real("forward", "slice_x", &C::forward, &ForwardSettings::slice_x));
    f.push_back(real("forward", "slice_mu", &C::forward, &ForwardSettings::slice_mu));

    f.push_back(list("diffusion", "epsilons", &C::diffusion, &DiffusionSettings::epsilons));
    f.push_back(real("diffusion", "dt", &C::diffusion, &DiffusionSettings::dt));
    f.push_back(real("diffusion", "t_end", &C::diffusion, &DiffusionSettings::t_end));
    f.push_back(real("diffusion", "probe_x", &C::diffusion, &DiffusionSettings::probe_x));
    f.push_back(real("diffusion", "settle_time", &C::diffusion, &DiffusionSettings::settle_time));
    f.push_back(real("diffusion", "ce_time", &C::diffusion, &DiffusionSettings::ce_time));

    f.push_back(real("diagnostics", "fd_step", &C::diagnostics, &DiagnosticsSettings::fd_step));
    f.push_back(integer("diagnostics", "directions", &C::diagnostics, &DiagnosticsSettings::directions));
    f.push_back(integer("diagnostics", "lipschitz_trials", &C::diagnostics, &DiagnosticsSettings::lipschitz_trials));
    f.push_back(real("diagnostics", "lipschitz_scale", &C::diagnostics, &DiagnosticsSettings::lipschitz_scale));

    f.push_back({"run", "output", [](const C& c) { return c.output_dir; },
                 [](C& c, const std::string& s) { c.output_dir = s; }});
    f.push_back({"run", "seed", [](const C& c) { return std::to_string(c.seed); },
                 [](C& c, const std::string& s) {
                   const long long v = to_int("run.seed", s);
                   if (v < 0) throw ConfigError("run.seed must be nonnegative");
                   c.seed = static_cast<std::uint64_t>(v);
                 }});
    return f;
  }();
  return all;
}

}  // namespace

void ExperimentConfig::validate() const {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0)) throw ConfigError(std::string(key) + " must be positive");
  };
  positive(grid.dt, "grid.dt");
  positive(grid.dx, "grid.dx");
  positive(grid.domega, "grid.domega");
  positive(grid.omega_min, "grid.omega_min");
  positive(grid.epsilon, "grid.epsilon");
  if (grid.omega_max < grid.omega_min) throw ConfigError("grid.omega_max must not be below grid.omega_min");
  if (grid.n_mu < 2 || grid.n_mu % 2 != 0) throw ConfigError("grid.n_mu must be even and at least 2");
  for (const ProfileSpec* p : {&material.tau, &material.g_star, &initial_tau}) p->build();
  if (!(material.bounds.tau_min > 0.0 && material.bounds.tau_max > material.bounds.tau_min)) {
    throw ConfigError("material.tau_min/tau_max must satisfy 0 < tau_min < tau_max");
  }
  source.validate();
  if (!(experiments.mu0 > 0.0 && experiments.mu0 < 1.0)) throw ConfigError("experiments.mu0 must lie in (0, 1)");
  positive(experiments.eps_window, "experiments.eps_window");
  if (optimizer.iterations < 0) throw ConfigError("optimizer.iterations must be nonnegative");
  if (!(optimizer.armijo_c > 0.0 && optimizer.armijo_c < 1.0)) throw ConfigError("optimizer.armijo_c must lie in (0, 1)");
  positive(optimizer.alpha_max, "optimizer.alpha_max");
  positive(optimizer.adagrad_alpha, "optimizer.adagrad_alpha");
  positive(optimizer.adagrad_delta, "optimizer.adagrad_delta");
  if (snapshot_every <= 0) throw ConfigError("optimizer.snapshot_every must be positive");
  if (diffusion.epsilons.empty()) throw ConfigError("diffusion.epsilons must list at least one value");
  for (double e : diffusion.epsilons) positive(e, "diffusion.epsilons");
  positive(diffusion.dt, "diffusion.dt");
  positive(diffusion.t_end, "diffusion.t_end");
  positive(diagnostics.fd_step, "diagnostics.fd_step");
  if (diagnostics.directions <= 0) throw ConfigError("diagnostics.directions must be positive");
  if (diagnostics.lipschitz_trials <= 0) throw ConfigError("diagnostics.lipschitz_trials must be positive");
  positive(diagnostics.lipschitz_scale, "diagnostics.lipschitz_scale");
  if (output_dir.empty()) throw ConfigError("run.output must not be empty");
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "fig1") {
    c.grid.t_end = 0.5;
    c.grid.dt = 4e-4;
    c.diffusion.epsilons = {1.0, 0.1};
    c.output_dir = "out/fig1";
  } else if (name == "fig4") {
    c.output_dir = "out/fig4";
  } else if (name == "fig5") {
    c.grid.epsilon = 0.1;
    c.grid.dt = 4e-4;
    c.grid.t_end = 0.2;
    c.forward.snapshot_times = {0.04, 0.08, 0.12};
    c.output_dir = "out/fig5";
  } else if (name == "sec52") {
    // The two slowest frequencies return after t = 1.5; the horizon is
    // stretched so that every test window fits.
    c.grid.t_end = 1.65;
    c.optimizer.alpha_max = 1e11;
    c.optimizer.adagrad_alpha = 0.1;
    c.optimizer.adagrad_delta = 1e-30;
    c.output_dir = "out/sec52";
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  c.optimizer.seed = c.seed;
  return c;
}

std::vector<std::string> preset_names() { return {"fig1", "fig4", "fig5", "sec52"}; }

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  std::map<std::string, const Field*> index;
  for (const auto& f : fields()) index[f.section + "." + f.key] = &f;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw ConfigError("config key '" + section + "' is outside any section");
    for (const auto& [key, value] : body) {
      const auto it = index.find(section + "." + key);
      if (it == index.end()) throw ConfigError("unknown config key '" + section + "." + key + "'");
      it->second->set(base, value.get_value<std::string>());
    }
  }
  base.optimizer.seed = base.seed;
  base.validate();
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string to_ini(const ExperimentConfig& config) {
  std::ostringstream os;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      os << (section.empty() ? "" : "\n") << "[" << f.section << "]\n";
      section = f.section;
    }
    os << f.key << " = " << f.get(config) << "\n";
  }
  return os.str();
}

PhaseGrid make_grid(const GridConfig& grid, const LinearVelocity& velocity) { return PhaseGrid(grid, velocity); }

MaterialModel make_material(const ExperimentConfig& config, const PhaseGrid& grid, const ProfileSpec& tau) {
  return build_material(tau.build(), config.material.g_star.build(), config.material.velocity, grid.omega_nodes(),
                        config.material.bounds);
}

}  // namespace phonon
