#include "widthlab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace widthlab {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) items.push_back(trim(item));
  if (items.size() == 1 && items[0].empty()) items.clear();
  return items;
}

long long to_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError(key, fmt::format("{}: expected an integer, got '{}'", key, text));
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const long long v = to_integer(key, text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(key, fmt::format("{}: integer out of range", key));
  return static_cast<int>(v);
}

double to_real_plain(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError(key, fmt::format("{}: expected a real number, got '{}'", key, text));
  return v;
}

// Accepts plain decimals and fractions like 1/20.
double to_real(const std::string& key, const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return to_real_plain(key, text);
  const double num = to_real_plain(key, trim(text.substr(0, slash)));
  const double den = to_real_plain(key, trim(text.substr(slash + 1)));
  if (den == 0.0) throw ConfigError(key, fmt::format("{}: zero denominator", key));
  return num / den;
}

// shortest text that parses back to the same double
std::string real_text(double v) { return fmt::format("{}", v); }

template <typename T, typename Fmt>
std::string join(const std::vector<T>& values, Fmt&& format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format(values[i]);
  }
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::optional<ExperimentKind> only_for;  // kind-specific section
  std::function<std::optional<std::string>(const ExperimentConfig&)> write;
  std::function<void(ExperimentConfig&, const std::string& name, const std::string& text)> read;
};

template <typename Member>
Field int_field(std::string section, std::string key, Member member,
                std::optional<ExperimentKind> kind = std::nullopt) {
  return {section, key, kind,
          [member](const ExperimentConfig& c) -> std::optional<std::string> {
            return std::to_string(member(c));
          },
          [member](ExperimentConfig& c, const std::string& name, const std::string& text) {
            member(c) = to_int(name, text);
          }};
}

template <typename Member>
Field real_field(std::string section, std::string key, Member member,
                 std::optional<ExperimentKind> kind = std::nullopt) {
  return {section, key, kind,
          [member](const ExperimentConfig& c) -> std::optional<std::string> {
            return real_text(member(c));
          },
          [member](ExperimentConfig& c, const std::string& name, const std::string& text) {
            member(c) = to_real(name, text);
          }};
}

const std::vector<Field>& fields() {
  using K = ExperimentKind;
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"experiment", "kind", std::nullopt,
                 [](const ExperimentConfig& c) -> std::optional<std::string> { return to_string(c.kind); },
                 [](ExperimentConfig& c, const std::string&, const std::string& text) {
                   c.kind = parse_kind(text);
                 }});
    f.push_back({"experiment", "output", std::nullopt,
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   if (c.output.empty()) return std::nullopt;
                   return c.output;
                 },
                 [](ExperimentConfig& c, const std::string&, const std::string& text) { c.output = text; }});
    f.push_back({"experiment", "seed", std::nullopt,
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   if (!c.seed) return std::nullopt;
                   return std::to_string(*c.seed);
                 },
                 [](ExperimentConfig& c, const std::string& name, const std::string& text) {
                   const long long v = to_integer(name, text);
                   if (v < 0) throw ConfigError(name, name + ": seed must be non-negative");
                   c.seed = static_cast<std::uint64_t>(v);
                 }});

    f.push_back({"geometry", "d", std::nullopt,
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   if (!c.d) return std::nullopt;
                   return std::to_string(*c.d);
                 },
                 [](ExperimentConfig& c, const std::string& name, const std::string& text) {
                   c.d = to_int(name, text);
                 }});
    f.push_back({"geometry", "map", std::nullopt,
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   return c.map == MapKind::identity ? "identity" : "curved";
                 },
                 [](ExperimentConfig& c, const std::string& name, const std::string& text) {
                   if (text == "identity") c.map = MapKind::identity;
                   else if (text == "curved") c.map = MapKind::curved;
                   else throw ConfigError(name, name + ": expected 'identity' or 'curved', got '" + text + "'");
                 }});
    f.push_back(real_field("geometry", "curvature", [](auto& c) -> auto& { return c.curvature; }));
    f.push_back(int_field("geometry", "D", [](auto& c) -> auto& { return c.D; }));

    f.push_back(int_field("smoothness", "s_minus", [](auto& c) -> auto& { return c.s_minus; }));
    f.push_back(int_field("smoothness", "s_plus", [](auto& c) -> auto& { return c.s_plus; }));
    f.push_back(int_field("smoothness", "s_b", [](auto& c) -> auto& { return c.s_b; }));
    f.push_back({"smoothness", "p", std::nullopt,
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   return std::isinf(c.p) ? std::string("inf") : real_text(c.p);
                 },
                 [](ExperimentConfig& c, const std::string& name, const std::string& text) {
                   c.p = text == "inf" ? std::numeric_limits<double>::infinity() : to_real(name, text);
                 }});

    f.push_back({"scales", "h", std::nullopt,
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   if (c.h.empty()) return std::nullopt;
                   return join(c.h, real_text);
                 },
                 [](ExperimentConfig& c, const std::string& name, const std::string& text) {
                   c.h.clear();
                   for (const auto& item : split_list(text)) c.h.push_back(to_real(name, item));
                 }});
    f.push_back(int_field("grid", "points", [](auto& c) -> auto& { return c.grid_points; }));

    f.push_back(real_field("tolerances", "rtol", [](auto& c) -> auto& { return c.rtol; }));
    f.push_back(real_field("tolerances", "zero_rtol", [](auto& c) -> auto& { return c.zero_rtol; }));
    f.push_back(real_field("tolerances", "fit_tolerance", [](auto& c) -> auto& { return c.fit_tolerance; }));
    f.push_back(real_field("tolerances", "abs_tolerance", [](auto& c) -> auto& { return c.abs_tolerance; }));

    f.push_back(int_field("variable-b", "n", [](auto& c) -> auto& { return c.variable_b.n; }, K::variable_b));
    f.push_back(int_field("variable-b", "K", [](auto& c) -> auto& { return c.variable_b.K; }, K::variable_b));
    f.push_back(int_field("variable-b", "max_curves", [](auto& c) -> auto& { return c.variable_b.max_curves; }, K::variable_b));

    f.push_back(int_field("upper-bound", "samples", [](auto& c) -> auto& { return c.upper_bound.samples; }, K::upper_bound));
    f.push_back({"upper-bound", "pieces", K::upper_bound,
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   return join(c.upper_bound.pieces, [](int v) { return std::to_string(v); });
                 },
                 [](ExperimentConfig& c, const std::string& name, const std::string& text) {
                   c.upper_bound.pieces.clear();
                   for (const auto& item : split_list(text)) c.upper_bound.pieces.push_back(to_int(name, item));
                 }});
    f.push_back(real_field("upper-bound", "min_rate", [](auto& c) -> auto& { return c.upper_bound.min_rate; }, K::upper_bound));

    f.push_back(int_field("rhs-invariance", "inflows", [](auto& c) -> auto& { return c.rhs_invariance.inflows; }, K::rhs_invariance));
    f.push_back(real_field("rhs-invariance", "source", [](auto& c) -> auto& { return c.rhs_invariance.source; }, K::rhs_invariance));

    f.push_back(real_field("convolution", "trace_mu", [](auto& c) -> auto& { return c.convolution.trace_mu; }, K::convolution));
    f.push_back(real_field("convolution", "trace_x", [](auto& c) -> auto& { return c.convolution.trace_x; }, K::convolution));
    f.push_back(int_field("convolution", "trace_steps", [](auto& c) -> auto& { return c.convolution.trace_steps; }, K::convolution));

    f.push_back(int_field("rb-elliptic", "elements", [](auto& c) -> auto& { return c.rb_elliptic.elements; }, K::rb_elliptic));
    f.push_back(int_field("rb-elliptic", "m_max", [](auto& c) -> auto& { return c.rb_elliptic.m_max; }, K::rb_elliptic));
    f.push_back(int_field("rb-elliptic", "training", [](auto& c) -> auto& { return c.rb_elliptic.training; }, K::rb_elliptic));
    f.push_back(int_field("rb-elliptic", "test", [](auto& c) -> auto& { return c.rb_elliptic.test; }, K::rb_elliptic));
    f.push_back(int_field("rb-elliptic", "random_checks", [](auto& c) -> auto& { return c.rb_elliptic.random_checks; }, K::rb_elliptic));
    f.push_back(real_field("rb-elliptic", "min_ratio", [](auto& c) -> auto& { return c.rb_elliptic.min_ratio; }, K::rb_elliptic));

    f.push_back(int_field("svd-transport", "mu_points", [](auto& c) -> auto& { return c.svd_transport.mu_points; }, K::svd_transport));
    f.push_back(int_field("svd-transport", "x_points", [](auto& c) -> auto& { return c.svd_transport.x_points; }, K::svd_transport));
    f.push_back(int_field("svd-transport", "n_lo", [](auto& c) -> auto& { return c.svd_transport.n_lo; }, K::svd_transport));
    f.push_back(int_field("svd-transport", "n_hi", [](auto& c) -> auto& { return c.svd_transport.n_hi; }, K::svd_transport));
    f.push_back(real_field("svd-transport", "exponent_min", [](auto& c) -> auto& { return c.svd_transport.exponent_min; }, K::svd_transport));
    f.push_back(real_field("svd-transport", "exponent_max", [](auto& c) -> auto& { return c.svd_transport.exponent_max; }, K::svd_transport));

    f.push_back({"riemann", "mu", K::riemann,
                 [](const ExperimentConfig& c) -> std::optional<std::string> { return join(c.riemann.mu, real_text); },
                 [](ExperimentConfig& c, const std::string& name, const std::string& text) {
                   c.riemann.mu.clear();
                   for (const auto& item : split_list(text)) c.riemann.mu.push_back(to_real(name, item));
                 }});
    return f;
  }();
  return table;
}

bool needs_geometry(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::fixed_b:
    case ExperimentKind::variable_b:
    case ExperimentKind::upper_bound:
    case ExperimentKind::rhs_invariance:
    case ExperimentKind::convolution:
      return true;
    default:
      return false;
  }
}

}  // namespace

const std::vector<ExperimentKind>& all_kinds() {
  static const std::vector<ExperimentKind> kinds = {
      ExperimentKind::fixed_b,     ExperimentKind::variable_b,  ExperimentKind::upper_bound,
      ExperimentKind::rhs_invariance, ExperimentKind::convolution, ExperimentKind::rb_elliptic,
      ExperimentKind::svd_transport, ExperimentKind::riemann};
  return kinds;
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::fixed_b: return "fixed-b";
    case ExperimentKind::variable_b: return "variable-b";
    case ExperimentKind::upper_bound: return "upper-bound";
    case ExperimentKind::rhs_invariance: return "rhs-invariance";
    case ExperimentKind::convolution: return "convolution";
    case ExperimentKind::rb_elliptic: return "rb-elliptic";
    case ExperimentKind::svd_transport: return "svd-transport";
    case ExperimentKind::riemann: return "riemann";
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  for (ExperimentKind k : all_kinds())
    if (to_string(k) == name) return k;
  throw ConfigError("experiment.kind", "experiment.kind: unknown experiment '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", fmt::format("config syntax error at line {}: {}", e.line(), e.message()));
  }

  const auto kind_text = tree.get_optional<std::string>("experiment.kind");
  if (!kind_text) throw ConfigError("experiment.kind", "missing required key experiment.kind");

  ExperimentConfig config;
  config.kind = parse_kind(trim(*kind_text));
  const std::string kind_section = to_string(config.kind);

  for (const auto& [section, entries] : tree) {
    if (!entries.data().empty())
      throw ConfigError(section, "key '" + section + "' must live inside a section");
    for (const auto& [key, value] : entries) {
      const std::string name = section + "." + key;
      const auto it = std::find_if(fields().begin(), fields().end(),
                                   [&](const Field& f) { return f.section == section && f.key == key; });
      if (it == fields().end()) throw ConfigError(name, "unknown key " + name);
      if (it->only_for && *it->only_for != config.kind)
        throw ConfigError(name, name + " does not apply to experiment " + kind_section);
      it->read(config, name, trim(value.data()));
    }
  }

  if (needs_geometry(config.kind)) {
    if (!config.d) throw ConfigError("geometry.d", "missing required key geometry.d");
    if (config.h.empty()) throw ConfigError("scales.h", "missing required key scales.h");
  }
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  std::string current;
  for (const Field& f : fields()) {
    if (f.only_for && *f.only_for != config.kind) continue;
    const auto value = f.write(config);
    if (!value) continue;
    if (f.section != current) {
      if (!out.empty()) out += "\n";
      out += "[" + f.section + "]\n";
      current = f.section;
    }
    out += f.key + " = " + *value + "\n";
  }
  return out;
}

void validate(const ExperimentConfig& c) {
  for (double h : c.h)
    if (!(h > 0.0 && h <= 0.1 + 1e-15)) throw ConfigError("scales.h", fmt::format("scales.h: {} is not in (0, 1/10]", h));
  if (c.d) {
    if (*c.d < 2) throw ConfigError("geometry.d", "geometry.d must be at least 2");
    if (c.kind == ExperimentKind::variable_b && *c.d < 3)
      throw ConfigError("geometry.d", "geometry.d must be at least 3 for variable-b");
  }
  if (c.D < 1) throw ConfigError("geometry.D", "geometry.D must be at least 1");
  if (c.curvature < 0.0 || c.curvature > 0.2) throw ConfigError("geometry.curvature", "geometry.curvature must be in [0, 0.2]");
  if (c.s_minus < 0) throw ConfigError("smoothness.s_minus", "smoothness.s_minus must be non-negative");
  if (c.s_plus < 0) throw ConfigError("smoothness.s_plus", "smoothness.s_plus must be non-negative");
  if (c.s_b < 1) throw ConfigError("smoothness.s_b", "smoothness.s_b must be at least 1");
  if (!(c.p >= 1.0)) throw ConfigError("smoothness.p", "smoothness.p must be at least 1");
  if (c.grid_points < 2) throw ConfigError("grid.points", "grid.points must be at least 2");
  if (!(c.rtol > 0.0)) throw ConfigError("tolerances.rtol", "tolerances.rtol must be positive");
  if (c.variable_b.n < 1 || c.variable_b.K < 1)
    throw ConfigError("variable-b.n", "variable-b.n and variable-b.K must be positive");
  if (c.rb_elliptic.m_max < 1) throw ConfigError("rb-elliptic.m_max", "rb-elliptic.m_max must be positive");
  if (c.rb_elliptic.elements < 2) throw ConfigError("rb-elliptic.elements", "rb-elliptic.elements must be at least 2");
  for (double mu : c.riemann.mu)
    if (mu < -1.0 || mu > 1.0) throw ConfigError("riemann.mu", "riemann.mu values must lie in [-1, 1]");
}

}  // namespace widthlab
