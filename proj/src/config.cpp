#include "lodbs/config.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lodbs {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

json parse_toml_scalar(const std::string& tok) {
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
    return tok.substr(1, tok.size() - 2);
  if (tok == "true") return true;
  if (tok == "false") return false;
  try {
    std::size_t used = 0;
    if (tok.find_first_of(".eE") == std::string::npos) {
      const long long v = std::stoll(tok, &used);
      if (used == tok.size()) return v;
    }
    const double v = std::stod(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: cannot parse value '" + tok + "'");
}

/// Flat TOML subset: key = value lines, # comments, [sections] ignored,
/// values are strings, booleans, numbers or one-line arrays of those.
json parse_toml(const std::string& text) {
  json out = json::object();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') continue;  // flat schema, sections carry no data
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key or value");
    if (value.front() == '[') {
      if (value.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": arrays must close on the same line");
      json arr = json::array();
      std::string inner = trim(value.substr(1, value.size() - 2));
      while (!inner.empty()) {
        std::size_t comma = std::string::npos;
        bool q = false;
        for (std::size_t i = 0; i < inner.size(); ++i) {
          if (inner[i] == '"') q = !q;
          if (inner[i] == ',' && !q) {
            comma = i;
            break;
          }
        }
        const std::string tok = trim(inner.substr(0, comma));
        if (!tok.empty()) arr.push_back(parse_toml_scalar(tok));
        inner = comma == std::string::npos ? "" : trim(inner.substr(comma + 1));
      }
      out[key] = arr;
    } else {
      out[key] = parse_toml_scalar(value);
    }
  }
  return out;
}

template <typename T>
void take(json& j, const char* key, T& slot) {
  if (!j.contains(key)) return;
  slot = j.at(key).get<T>();
  j.erase(key);
}

ExperimentConfig config_from_json(json j) {
  std::string experiment = "custom";
  bool paper_scale = false;
  take(j, "experiment", experiment);
  take(j, "paper_scale", paper_scale);
  ExperimentConfig cfg = preset(experiment_from_name(experiment), paper_scale);

  std::string dynamic = cfg.dynamic == DynamicBoundary::full ? "full" : "bottom";
  take(j, "dynamic_boundary", dynamic);
  if (dynamic == "full")
    cfg.dynamic = DynamicBoundary::full;
  else if (dynamic == "bottom")
    cfg.dynamic = DynamicBoundary::bottom;
  else
    throw std::invalid_argument("config: dynamic_boundary must be full or bottom");

  std::string coefficient = cfg.coefficient == Coefficient::Kind::constant ? "constant"
                            : cfg.coefficient == Coefficient::Kind::smooth ? "smooth"
                                                                           : "random";
  take(j, "coefficient", coefficient);
  if (coefficient == "constant")
    cfg.coefficient = Coefficient::Kind::constant;
  else if (coefficient == "smooth")
    cfg.coefficient = Coefficient::Kind::smooth;
  else if (coefficient == "random")
    cfg.coefficient = Coefficient::Kind::random;
  else
    throw std::invalid_argument("config: unknown coefficient kind '" + coefficient + "'");

  take(j, "epsilon", cfg.epsilon);
  take(j, "coefficient_value", cfg.coefficient_value);
  take(j, "seed", cfg.seed);
  take(j, "kappa", cfg.kappa);
  take(j, "tau", cfg.tau);
  take(j, "t_end", cfg.t_end);
  take(j, "h_levels", cfg.h_levels);
  take(j, "m_policy", cfg.m_policy);
  take(j, "m_fixed", cfg.m_fixed);

  std::string interpolation =
      cfg.interpolation == InterpolationKind::nodal ? "nodal" : "clement";
  take(j, "interpolation", interpolation);
  if (interpolation == "nodal")
    cfg.interpolation = InterpolationKind::nodal;
  else if (interpolation == "clement")
    cfg.interpolation = InterpolationKind::clement;
  else
    throw std::invalid_argument("config: interpolation must be nodal or clement");

  std::string form = cfg.form == CorrectorForm::plain ? "plain" : "shifted";
  take(j, "form", form);
  if (form == "plain")
    cfg.form = CorrectorForm::plain;
  else if (form == "shifted")
    cfg.form = CorrectorForm::shifted;
  else
    throw std::invalid_argument("config: form must be plain or shifted");

  take(j, "variants", cfg.variants);
  take(j, "reference_level", cfg.reference_level);
  take(j, "fine_level", cfg.fine_level);
  take(j, "boundary_refinements", cfg.boundary_refinements);
  take(j, "write_trajectories", cfg.write_trajectories);
  take(j, "dump_matrices", cfg.dump_matrices);
  take(j, "output_dir", cfg.output_dir);

  if (cfg.m_policy != "log" && cfg.m_policy != "fixed")
    throw std::invalid_argument("config: m_policy must be log or fixed");
  if (!j.empty())
    throw std::invalid_argument("config: unknown key '" + j.begin().key() + "'");
  return cfg;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, bool is_json) {
  if (is_json) return config_from_json(json::parse(text));
  return config_from_json(parse_toml(text));
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  bool is_json = path.size() > 5 && path.substr(path.size() - 5) == ".json";
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    is_json = is_json || ch == '{';
    break;
  }
  return parse_config_text(text, is_json);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "experiment = \"" << experiment_name(cfg.kind) << "\"\n";
  out << "paper_scale = " << (cfg.paper_scale ? "true" : "false") << "\n";
  out << "dynamic_boundary = \""
      << (cfg.dynamic == DynamicBoundary::full ? "full" : "bottom") << "\"\n";
  out << "coefficient = \""
      << (cfg.coefficient == Coefficient::Kind::constant ? "constant"
          : cfg.coefficient == Coefficient::Kind::smooth ? "smooth"
                                                         : "random")
      << "\"\n";
  out << "epsilon = " << cfg.epsilon << "\n";
  out << "coefficient_value = " << cfg.coefficient_value << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "kappa = " << cfg.kappa << "\n";
  out << "tau = " << cfg.tau << "\n";
  out << "t_end = " << cfg.t_end << "\n";
  out << "h_levels = [";
  for (std::size_t i = 0; i < cfg.h_levels.size(); ++i)
    out << (i ? ", " : "") << cfg.h_levels[i];
  out << "]\n";
  out << "m_policy = \"" << cfg.m_policy << "\"\n";
  out << "m_fixed = " << cfg.m_fixed << "\n";
  out << "interpolation = \""
      << (cfg.interpolation == InterpolationKind::nodal ? "nodal" : "clement")
      << "\"\n";
  out << "form = \"" << (cfg.form == CorrectorForm::plain ? "plain" : "shifted")
      << "\"\n";
  out << "variants = [";
  for (std::size_t i = 0; i < cfg.variants.size(); ++i)
    out << (i ? ", " : "") << '"' << cfg.variants[i] << '"';
  out << "]\n";
  out << "reference_level = " << cfg.reference_level << "\n";
  out << "fine_level = " << cfg.fine_level << "\n";
  out << "boundary_refinements = " << cfg.boundary_refinements << "\n";
  out << "write_trajectories = " << (cfg.write_trajectories ? "true" : "false")
      << "\n";
  out << "dump_matrices = " << (cfg.dump_matrices ? "true" : "false") << "\n";
  out << "output_dir = \"" << cfg.output_dir << "\"\n";
  return out.str();
}

}  // namespace lodbs
