#include "hmhf/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "hmhf/csv.hpp"
#include "hmhf/errors.hpp"

namespace hmhf {
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kSchema = {
    {"run", {"label", "seed", "output_dir"}},
    {"grid", {"type", "degree", "h", "h_core", "r_core", "ratio", "r_max", "half_width",
              "center_x", "center_y"}},
    {"initial", {"kind", "lambda", "amplitude", "boundary_angle", "noise", "center_x",
                 "center_y"}},
    {"flow", {"t_final", "dt_max", "dt_min", "scale_factor", "explicit_factor",
              "snapshot_interval", "gradient_factor", "persist", "concentration_energy",
              "radius_factor", "approach_ratio", "record_stride", "max_steps"}},
    {"analysis", {"discs", "gamma0", "fit_every", "mode", "epsilon", "eta", "c0",
                  "quantization_tolerance"}},
};

template <typename T>
void read(const pt::ptree& tree, const std::string& key, T& out) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return;
  std::istringstream ss(*v);
  T value{};
  ss >> value;
  if (ss.fail() || !(ss >> std::ws).eof())
    throw ConfigError("key '" + key + "': cannot read value '" + *v + "'");
  out = value;
}

void read_string(const pt::ptree& tree, const std::string& key, std::string& out) {
  if (const auto v = tree.get_optional<std::string>(key)) out = *v;
}

std::vector<Point2> parse_discs(const std::string& text) {
  std::vector<Point2> discs;
  std::istringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream ss(item);
    Point2 p;
    if (!(ss >> p.x >> p.y) || !(ss >> std::ws).eof())
      throw ConfigError("key 'analysis.discs': expected 'x y; x y; ...', got '" + text + "'");
    discs.push_back(p);
  }
  if (discs.empty()) throw ConfigError("key 'analysis.discs': no disc centers given");
  return discs;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

double profile(const InitialSpec& s, int k, double r_max, double r) {
  if (s.kind == "bubble") return 2.0 * std::atan(std::pow(r / s.lambda, k));
  if (s.kind == "perturbed-bubble")
    return 2.0 * std::atan(std::pow(r / s.lambda, k)) +
           s.amplitude * std::sin(M_PI * r / r_max) * r / r_max;
  if (s.kind == "ramp") return s.boundary_angle * r / r_max;
  return 0.0;
}

}  // namespace

RunConfig parse_run_config(std::istream& in, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.line() << ": " << e.message();
    throw ConfigError(msg.str());
  }
  for (const auto& [section, body] : tree) {
    const auto known = kSchema.find(section);
    if (known == kSchema.end() || body.empty())
      throw ConfigError(source + ": unknown section '" + section + "'");
    for (const auto& [key, value] : body) {
      if (!known->second.count(key))
        throw ConfigError(source + ": unknown key '" + section + "." + key + "'");
      if (!value.empty())
        throw ConfigError(source + ": key '" + section + "." + key + "' is nested too deeply");
    }
  }

  RunConfig c;
  try {
    read_string(tree, "run.label", c.label);
    read(tree, "run.seed", c.seed);
    if (const auto v = tree.get_optional<std::string>("run.output_dir")) c.output_dir = *v;

    read_string(tree, "grid.type", c.grid.type);
    read(tree, "grid.degree", c.grid.degree);
    read(tree, "grid.h", c.grid.h);
    read(tree, "grid.h_core", c.grid.h_core);
    read(tree, "grid.r_core", c.grid.r_core);
    read(tree, "grid.ratio", c.grid.ratio);
    read(tree, "grid.r_max", c.grid.r_max);
    read(tree, "grid.half_width", c.grid.half_width);
    read(tree, "grid.center_x", c.grid.center.x);
    read(tree, "grid.center_y", c.grid.center.y);

    read_string(tree, "initial.kind", c.initial.kind);
    read(tree, "initial.lambda", c.initial.lambda);
    read(tree, "initial.amplitude", c.initial.amplitude);
    read(tree, "initial.boundary_angle", c.initial.boundary_angle);
    read(tree, "initial.noise", c.initial.noise);
    read(tree, "initial.center_x", c.initial.center.x);
    read(tree, "initial.center_y", c.initial.center.y);

    FlowConfig& f = c.flow;
    read(tree, "flow.t_final", f.t_final);
    read(tree, "flow.dt_max", f.dt_max);
    read(tree, "flow.dt_min", f.dt_min);
    read(tree, "flow.scale_factor", f.scale_factor);
    read(tree, "flow.explicit_factor", f.explicit_factor);
    read(tree, "flow.snapshot_interval", f.snapshot_interval);
    read(tree, "flow.gradient_factor", f.gradient_factor);
    read(tree, "flow.persist", f.persist);
    read(tree, "flow.concentration_energy", f.concentration_energy);
    read(tree, "flow.radius_factor", f.radius_factor);
    read(tree, "flow.approach_ratio", f.approach_ratio);
    read(tree, "flow.record_stride", f.record_stride);
    read(tree, "flow.max_steps", f.max_steps);

    AnalysisSpec& a = c.analysis;
    if (const auto v = tree.get_optional<std::string>("analysis.discs")) a.discs = parse_discs(*v);
    if (tree.get_optional<std::string>("analysis.gamma0")) {
      double g = 0.0;
      read(tree, "analysis.gamma0", g);
      a.gamma0 = g;
    }
    read(tree, "analysis.fit_every", a.fit_every);
    read_string(tree, "analysis.mode", a.mode);
    read(tree, "analysis.epsilon", a.epsilon);
    read(tree, "analysis.eta", a.eta);
    read(tree, "analysis.c0", a.c0);
    read(tree, "analysis.quantization_tolerance", a.quantization_tolerance);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }

  auto check = [&](bool ok, const std::string& what) { require(ok, source + ": " + what); };
  check(!c.label.empty(), "key 'run.label' must not be empty");
  check(c.grid.type == "radial" || c.grid.type == "cartesian",
        "key 'grid.type' must be radial or cartesian");
  check(c.grid.degree >= 1, "key 'grid.degree' must be >= 1");
  check(c.grid.h > 0.0, "key 'grid.h' must be positive");
  check(c.grid.h_core >= 0.0, "key 'grid.h_core' must be >= 0");
  check(c.grid.r_max > 0.0, "key 'grid.r_max' must be positive");
  check(c.grid.half_width > 0.0, "key 'grid.half_width' must be positive");
  check(c.initial.kind == "bubble" || c.initial.kind == "perturbed-bubble" ||
            c.initial.kind == "ramp" || c.initial.kind == "constant",
        "key 'initial.kind' must be bubble, perturbed-bubble, ramp or constant");
  check(c.initial.lambda > 0.0, "key 'initial.lambda' must be positive");
  check(c.initial.noise >= 0.0, "key 'initial.noise' must be >= 0");
  check(c.flow.t_final > 0.0, "key 'flow.t_final' must be positive");
  check(c.flow.dt_max > 0.0, "key 'flow.dt_max' must be positive");
  check(c.flow.record_stride >= 1, "key 'flow.record_stride' must be >= 1");
  check(c.analysis.fit_every >= 1, "key 'analysis.fit_every' must be >= 1");
  check(c.analysis.mode == "auto" || c.analysis.mode == "blow-up" || c.analysis.mode == "global",
        "key 'analysis.mode' must be auto, blow-up or global");
  check(c.analysis.epsilon > 0.0 && c.analysis.epsilon < c.analysis.eta,
        "keys 'analysis.epsilon' and 'analysis.eta' need 0 < epsilon < eta");
  if (c.analysis.gamma0) {
    try {
      Gamma0 g(*c.analysis.gamma0);
      (void)g;
    } catch (const Error& e) {
      throw ConfigError(source + ": key 'analysis.gamma0': " + e.what());
    }
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_run_config(in, path.string());
}

std::string RunConfig::canonical() const {
  std::ostringstream o;
  auto d = [](double v) { return format_double(v); };
  o << "[run]\nlabel = " << label << "\nseed = " << seed << "\noutput_dir = " << output_dir.string()
    << "\n\n[grid]\ntype = " << grid.type << "\ndegree = " << grid.degree << "\nh = " << d(grid.h)
    << "\nh_core = " << d(grid.h_core) << "\nr_core = " << d(grid.r_core)
    << "\nratio = " << d(grid.ratio) << "\nr_max = " << d(grid.r_max)
    << "\nhalf_width = " << d(grid.half_width) << "\ncenter_x = " << d(grid.center.x)
    << "\ncenter_y = " << d(grid.center.y) << "\n\n[initial]\nkind = " << initial.kind
    << "\nlambda = " << d(initial.lambda) << "\namplitude = " << d(initial.amplitude)
    << "\nboundary_angle = " << d(initial.boundary_angle) << "\nnoise = " << d(initial.noise)
    << "\ncenter_x = " << d(initial.center.x) << "\ncenter_y = " << d(initial.center.y)
    << "\n\n[flow]\nt_final = " << d(flow.t_final) << "\ndt_max = " << d(flow.dt_max)
    << "\ndt_min = " << d(flow.dt_min) << "\nscale_factor = " << d(flow.scale_factor)
    << "\nexplicit_factor = " << d(flow.explicit_factor)
    << "\nsnapshot_interval = " << d(flow.snapshot_interval)
    << "\ngradient_factor = " << d(flow.gradient_factor) << "\npersist = " << flow.persist
    << "\nconcentration_energy = " << d(flow.concentration_energy)
    << "\nradius_factor = " << d(flow.radius_factor)
    << "\napproach_ratio = " << d(flow.approach_ratio)
    << "\nrecord_stride = " << flow.record_stride << "\nmax_steps = " << flow.max_steps
    << "\n\n[analysis]\ndiscs = ";
  for (std::size_t i = 0; i < analysis.discs.size(); ++i)
    o << (i ? "; " : "") << d(analysis.discs[i].x) << " " << d(analysis.discs[i].y);
  o << "\n";
  if (analysis.gamma0) o << "gamma0 = " << d(*analysis.gamma0) << "\n";
  o << "fit_every = " << analysis.fit_every << "\nmode = " << analysis.mode
    << "\nepsilon = " << d(analysis.epsilon) << "\neta = " << d(analysis.eta)
    << "\nc0 = " << d(analysis.c0)
    << "\nquantization_tolerance = " << d(analysis.quantization_tolerance) << "\n";
  return o.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a_64(canonical()); }

SphereField make_initial_field(const RunConfig& cfg) {
  const GridSpec& g = cfg.grid;
  const InitialSpec& s = cfg.initial;
  const int k = g.degree;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  try {
    if (g.type == "radial") {
      const RadialGrid grid = g.h_core > 0.0
                                  ? RadialGrid::graded(k, g.h_core, g.r_core, g.r_max, g.ratio)
                                  : RadialGrid::uniform(k, g.h, g.r_max);
      RadialField f = sample_radial(grid, [&](double r) { return profile(s, k, g.r_max, r); },
                                    profile(s, k, g.r_max, 0.0));
      if (s.noise > 0.0)
        for (std::size_t i = 0; i + 1 < f.phi.size(); ++i) f.phi[i] += s.noise * normal(rng);
      return f;
    }
    const Grid2D grid = Grid2D::centered(g.center, g.half_width, g.h);
    CartesianField f = sample_field(grid, [&](const Point2& x) {
      const double dx = x.x - s.center.x, dy = x.y - s.center.y;
      const double r = std::hypot(dx, dy);
      return equivariant_value(profile(s, k, g.half_width, r), k, std::atan2(dy, dx));
    });
    if (s.noise > 0.0) {
      for (auto& v : f.values) v += s.noise * Vec3{normal(rng), normal(rng), normal(rng)};
      f = renormalize(std::move(f));
    }
    return f;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("cannot build initial field: ") + e.what());
  }
}

Gamma0 effective_gamma0(const RunConfig& cfg, double initial_energy) {
  if (!cfg.analysis.gamma0) return Gamma0::for_flow(initial_energy);
  Gamma0::check_flow(*cfg.analysis.gamma0, initial_energy);
  return Gamma0(*cfg.analysis.gamma0);
}

void validate_run_config(const RunConfig& cfg) {
  const SphereField u0 = make_initial_field(cfg);
  try {
    effective_gamma0(cfg, dirichlet_energy(u0));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("key 'analysis.gamma0': ") + e.what());
  }
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream msg;
    msg << path.string() << ":" << e.line() << ": ";
    if (e.message().find("duplicate key") != std::string::npos)
      msg << "duplicate run label";
    else
      msg << e.message();
    throw ConfigError(msg.str());
  }
  ExperimentManifest m;
  for (const auto& [section, body] : tree) {
    if (section == "batch") {
      for (const auto& [key, value] : body) {
        if (key != "width") throw ConfigError(path.string() + ": unknown key 'batch." + key + "'");
        const int w = value.get_value<int>(0);
        if (w < 1) throw ConfigError(path.string() + ": key 'batch.width' must be >= 1");
        m.width = static_cast<std::size_t>(w);
      }
    } else if (section == "runs") {
      for (const auto& [label, value] : body) {
        std::filesystem::path p = value.data();
        if (p.is_relative()) p = path.parent_path() / p;
        m.runs.push_back({label, p});
      }
    } else {
      throw ConfigError(path.string() + ": unknown section '" + section + "'");
    }
  }
  if (m.runs.empty()) throw ConfigError(path.string() + ": manifest lists no runs");
  return m;
}

}  // namespace hmhf
