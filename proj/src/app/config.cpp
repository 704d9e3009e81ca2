#include "ccbm/app/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ccbm/errors.hpp"

namespace ccbm::app {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"truth", {"curve"}},
      {"initial", {"curve"}},
      {"data", {"g", "alpha", "noise", "seed", "refinement"}},
      {"mesh", {"sigma_nodes", "gamma_nodes"}},
      {"descent", {"eta", "mu", "eps_J", "eps_T", "max_iters", "remesh_every", "max_halvings", "gradient"}},
      {"output", {"name", "dir", "log_every"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigurationError(key + ": expected " + (std::is_floating_point_v<T> ? "a number" : "an integer") +
                             ", got '" + s + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ConfigurationError(key + ": value must be finite");
  }
  return v;
}

std::vector<geometry::BoundaryCurve> parse_curves(const std::string& key, const std::string& text) {
  std::vector<geometry::BoundaryCurve> out;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, '|')) {
    try {
      out.push_back(geometry::parse_curve(trim(part)));
    } catch (const ConfigurationError& e) {
      throw ConfigurationError(key + ": " + e.what());
    }
  }
  if (out.empty()) throw ConfigurationError(key + ": no curve given");
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_curves(const std::vector<geometry::BoundaryCurve>& curves) {
  std::string out;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (i > 0) out += " | ";
    out += geometry::to_string(curves[i]);
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (truth.empty()) throw ConfigurationError("truth.curve: missing");
  if (initial.empty()) throw ConfigurationError("initial.curve: missing");
  if (!(alpha > 0.0)) throw ConfigurationError("data.alpha: must be positive");
  if (!(noise >= 0.0)) throw ConfigurationError("data.noise: must be >= 0");
  if (refinement < 2) throw ConfigurationError("data.refinement: must be >= 2 (data and inversion meshes must differ)");
  try {
    (void)g.function();
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(std::string("data.g: ") + e.what());
  }
  if (sigma_nodes < 8) throw ConfigurationError("mesh.sigma_nodes: must be >= 8");
  if (gamma_nodes < 8) throw ConfigurationError("mesh.gamma_nodes: must be >= 8");
  if (!(descent.eta > 0.0 && descent.eta <= 1.0)) throw ConfigurationError("descent.eta: must lie in (0, 1]");
  if (!(descent.mu > 0.0)) throw ConfigurationError("descent.mu: must be positive");
  if (!(descent.eps_J > 0.0)) throw ConfigurationError("descent.eps_J: must be positive");
  if (!(descent.eps_T > 0.0)) throw ConfigurationError("descent.eps_T: must be positive");
  if (descent.max_iters < 0) throw ConfigurationError("descent.max_iters: must be >= 0");
  if (descent.remesh_every < 0) throw ConfigurationError("descent.remesh_every: must be >= 0");
  if (descent.max_halvings < 0) throw ConfigurationError("descent.max_halvings: must be >= 0");
  if (log_every < 1) throw ConfigurationError("output.log_every: must be >= 1");
}

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigurationError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (body.empty()) throw ConfigurationError(section + ": key outside of any section");
      throw ConfigurationError(section + ": unknown section");
    }
    for (const auto& [name, value] : body) {
      const std::string key = section + "." + name;
      if (!it->second.contains(name)) throw ConfigurationError(key + ": unknown key");
      const std::string v = trim(value.data());
      if (section == "truth") {
        c.truth = parse_curves(key, v);
      } else if (section == "initial") {
        c.initial = parse_curves(key, v);
      } else if (key == "data.g") {
        try {
          c.g = data::TraceRule::parse(v);
        } catch (const ConfigurationError& e) {
          throw ConfigurationError(key + ": " + e.what());
        }
      } else if (key == "data.alpha") {
        c.alpha = parse_number<double>(key, v);
      } else if (key == "data.noise") {
        c.noise = parse_number<double>(key, v);
      } else if (key == "data.seed") {
        c.seed = parse_number<std::uint64_t>(key, v);
      } else if (key == "data.refinement") {
        c.refinement = parse_number<int>(key, v);
      } else if (key == "mesh.sigma_nodes") {
        c.sigma_nodes = parse_number<int>(key, v);
      } else if (key == "mesh.gamma_nodes") {
        c.gamma_nodes = parse_number<int>(key, v);
      } else if (key == "descent.eta") {
        c.descent.eta = parse_number<double>(key, v);
      } else if (key == "descent.mu") {
        c.descent.mu = parse_number<double>(key, v);
      } else if (key == "descent.eps_J") {
        c.descent.eps_J = parse_number<double>(key, v);
      } else if (key == "descent.eps_T") {
        c.descent.eps_T = parse_number<double>(key, v);
      } else if (key == "descent.max_iters") {
        c.descent.max_iters = parse_number<int>(key, v);
      } else if (key == "descent.remesh_every") {
        c.descent.remesh_every = parse_number<int>(key, v);
      } else if (key == "descent.max_halvings") {
        c.descent.max_halvings = parse_number<int>(key, v);
      } else if (key == "descent.gradient") {
        try {
          c.descent.scheme = inverse::gradient_scheme_from_string(v);
        } catch (const ConfigurationError& e) {
          throw ConfigurationError(key + ": " + e.what());
        }
      } else if (key == "output.name") {
        c.name = v;
      } else if (key == "output.dir") {
        c.output_dir = v;
      } else if (key == "output.log_every") {
        c.log_every = parse_number<int>(key, v);
      }
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig c = parse_config(buf.str());
  if (c.name.empty()) c.name = path.stem().string();
  return c;
}

std::string to_text(const RunConfig& c) {
  std::ostringstream out;
  out << "[truth]\ncurve = " << join_curves(c.truth) << "\n\n";
  out << "[initial]\ncurve = " << join_curves(c.initial) << "\n\n";
  out << "[data]\n"
      << "g = " << c.g.to_string() << "\n"
      << "alpha = " << format_double(c.alpha) << "\n"
      << "noise = " << format_double(c.noise) << "\n"
      << "seed = " << c.seed << "\n"
      << "refinement = " << c.refinement << "\n\n";
  out << "[mesh]\n"
      << "sigma_nodes = " << c.sigma_nodes << "\n"
      << "gamma_nodes = " << c.gamma_nodes << "\n\n";
  out << "[descent]\n"
      << "eta = " << format_double(c.descent.eta) << "\n"
      << "mu = " << format_double(c.descent.mu) << "\n"
      << "eps_J = " << format_double(c.descent.eps_J) << "\n"
      << "eps_T = " << format_double(c.descent.eps_T) << "\n"
      << "max_iters = " << c.descent.max_iters << "\n"
      << "remesh_every = " << c.descent.remesh_every << "\n"
      << "max_halvings = " << c.descent.max_halvings << "\n"
      << "gradient = " << inverse::to_string(c.descent.scheme) << "\n\n";
  out << "[output]\n";
  if (!c.name.empty()) out << "name = " << c.name << "\n";
  if (!c.output_dir.empty()) out << "dir = " << c.output_dir.string() << "\n";
  out << "log_every = " << c.log_every << "\n";
  return out.str();
}

}  // namespace ccbm::app
