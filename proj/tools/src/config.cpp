#include "fk_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "fk/error.hpp"

namespace fk::cli {

ConfigError::ConfigError(const std::string& message, std::string key, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      key_(std::move(key)),
      line_(line) {}

Periods RunConfig::periods() const {
  return p.empty() ? Periods::ones(model.dimension) : Periods(p);
}

TransversePeriods RunConfig::transverse() const {
  if (!q.empty()) return TransversePeriods(q);
  return TransversePeriods(std::vector<int>(model.dimension > 0 ? model.dimension - 1 : 0, 1));
}

bool needs_seed(const std::string& command) { return command == "gap" || command == "verify"; }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T parse_integer(const std::string& text, const std::string& key, int line) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("'" + key + "' expects an integer, got '" + text + "'", key, line);
  return v;
}

double parse_double(const std::string& text, const std::string& key, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size())
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'", key, line);
  return v;
}

std::vector<int> parse_list(const std::string& text, const std::string& key, int line) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_integer<int>(trim(item), key, line));
  if (out.empty()) throw ConfigError("'" + key + "' expects a comma-separated list", key, line);
  return out;
}

std::string format_list(const std::vector<int>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&, int)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field integer(T RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& v, const std::string& key, int line) {
            c.*member = parse_integer<T>(v, key, line);
          },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

template <class Sub, class T>
Field integer(Sub RunConfig::*sub, T Sub::*member) {
  return {[sub, member](RunConfig& c, const std::string& v, const std::string& key, int line) {
            c.*sub.*member = parse_integer<T>(v, key, line);
          },
          [sub, member](const RunConfig& c) { return std::to_string(c.*sub.*member); }};
}

template <class Sub>
Field real(Sub RunConfig::*sub, double Sub::*member) {
  return {[sub, member](RunConfig& c, const std::string& v, const std::string& key, int line) {
            c.*sub.*member = parse_double(v, key, line);
          },
          [sub, member](const RunConfig& c) { return format_double(c.*sub.*member); }};
}

Field text(std::string RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& v, const std::string&, int) { c.*member = v; },
          [member](const RunConfig& c) { return c.*member; }};
}

// Ordered so that print_config emits a stable layout.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    t.emplace_back("command", text(&RunConfig::command));
    t.emplace_back("model", Field{[](RunConfig& c, const std::string& v, const std::string&,
                                     int) { c.model.name = v; },
                                  [](const RunConfig& c) { return c.model.name; }});
    t.emplace_back("p", Field{[](RunConfig& c, const std::string& v, const std::string& key,
                                 int line) { c.p = parse_list(v, key, line); },
                              [](const RunConfig& c) { return format_list(c.p); }});
    t.emplace_back("q", Field{[](RunConfig& c, const std::string& v, const std::string& key,
                                 int line) { c.q = parse_list(v, key, line); },
                              [](const RunConfig& c) { return format_list(c.q); }});
    t.emplace_back("seed", Field{[](RunConfig& c, const std::string& v, const std::string& key,
                                    int line) { c.seed = parse_integer<std::uint64_t>(v, key, line); },
                                 [](const RunConfig& c) {
                                   return c.seed ? std::to_string(*c.seed) : std::string();
                                 }});
    t.emplace_back("probes", integer(&RunConfig::probes));
    t.emplace_back("seeds", integer(&RunConfig::seeds));
    t.emplace_back("trials", integer(&RunConfig::trials));
    t.emplace_back("k_max", integer(&RunConfig::k_max));
    t.emplace_back("grid", integer(&RunConfig::grid));
    t.emplace_back("max_cells", integer(&RunConfig::max_cells));
    t.emplace_back("out", text(&RunConfig::out));
    t.emplace_back("csv", text(&RunConfig::csv));

    t.emplace_back("model.dimension", integer(&RunConfig::model, &PotentialDescriptor::dimension));
    t.emplace_back("model.radius", integer(&RunConfig::model, &PotentialDescriptor::radius));

    t.emplace_back("flow.dt", real(&RunConfig::flow, &FlowParams::dt));
    t.emplace_back("flow.t_max", real(&RunConfig::flow, &FlowParams::t_max));
    t.emplace_back("flow.tol", real(&RunConfig::flow, &FlowParams::stationarity_tol));
    t.emplace_back("flow.max_steps", integer(&RunConfig::flow, &FlowParams::max_steps));
    t.emplace_back("flow.energy_slack", real(&RunConfig::flow, &FlowParams::energy_slack));
    t.emplace_back("flow.max_halvings", integer(&RunConfig::flow, &FlowParams::max_halvings));

    t.emplace_back("minimax.reparam_every", integer(&RunConfig::minimax, &MinimaxParams::reparam_every));
    t.emplace_back("minimax.stall_window", integer(&RunConfig::minimax, &MinimaxParams::stall_window));
    t.emplace_back("minimax.stall_tol", real(&RunConfig::minimax, &MinimaxParams::stall_tol));
    t.emplace_back("minimax.max_sweeps", integer(&RunConfig::minimax, &MinimaxParams::max_sweeps));
    t.emplace_back("minimax.saddle_tol", real(&RunConfig::minimax, &MinimaxParams::saddle_tol));
    t.emplace_back("minimax.newton_iterations",
                   integer(&RunConfig::minimax, &MinimaxParams::newton_iterations));
    t.emplace_back("minimax.heat_horizon", real(&RunConfig::minimax, &MinimaxParams::heat_horizon));
    t.emplace_back("minimax.separation", real(&RunConfig::minimax, &MinimaxParams::separation));
    t.emplace_back("minimax.edge_rounds", integer(&RunConfig::minimax, &MinimaxParams::edge_rounds));

    t.emplace_back("path.nodes", integer(&RunConfig::path, &PathConfig::nodes));
    t.emplace_back("path.kind", Field{[](RunConfig& c, const std::string& v, const std::string& key,
                                         int line) {
                                        try {
                                          c.path.kind = parse_path_kind(v);
                                        } catch (const Error& e) {
                                          throw ConfigError(e.what(), key, line);
                                        }
                                      },
                                      [](const RunConfig& c) { return to_string(c.path.kind); }});
    t.emplace_back("path.k", integer(&RunConfig::path, &PathConfig::k));
    t.emplace_back("path.mode", Field{[](RunConfig& c, const std::string& v, const std::string& key,
                                         int line) {
                                        try {
                                          c.path.mode = parse_minimax_mode(v);
                                        } catch (const Error& e) {
                                          throw ConfigError(e.what(), key, line);
                                        }
                                      },
                                      [](const RunConfig& c) { return to_string(c.path.mode); }});

    t.emplace_back("window.initial", integer(&RunConfig::window, &WindowPolicy::initial));
    t.emplace_back("window.cap", integer(&RunConfig::window, &WindowPolicy::cap));
    t.emplace_back("window.tail_tolerance", real(&RunConfig::window, &WindowPolicy::tail_tolerance));
    return t;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& [name, f] : fields())
    if (name == key) return &f;
  return nullptr;
}

void assign(RunConfig& c, const std::string& key, const std::string& value, int line) {
  if (const Field* f = find_field(key)) {
    f->set(c, value, key, line);
  } else if (key.rfind("model.", 0) == 0 && key.size() > 6) {
    c.model.params[key.substr(6)] = parse_double(value, key, line);
  } else {
    throw ConfigError("unknown key '" + key + "'", key, line);
  }
}

const char* kSections[] = {"model", "flow", "minimax", "path", "window"};

}  // namespace

RunConfig parse_config(const std::string& input) {
  RunConfig c;
  std::istringstream in(input);
  std::string raw, section;
  int line = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", s, line);
      section = trim(s.substr(1, s.size() - 2));
      if (std::none_of(std::begin(kSections), std::end(kSections),
                       [&](const char* k) { return section == k; }))
        throw ConfigError("unknown section '" + section + "'", section, line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", s, line);
    const std::string name = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (name.empty()) throw ConfigError("missing key before '='", "", line);
    const std::string key = section.empty() ? name : section + "." + name;
    if (!seen.emplace(key, line).second) throw ConfigError("duplicate key '" + key + "'", key, line);
    assign(c, key, value, line);
  }
  c.minimax.flow = c.flow;
  validate(c);
  return c;
}

void set_key(RunConfig& c, const std::string& key, const std::string& value) {
  assign(c, key, value, 0);
  c.minimax.flow = c.flow;
}

std::string print_config(const RunConfig& c) {
  std::string out, section;
  for (const auto& [key, f] : fields()) {
    const auto dot = key.find('.');
    const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string value = f.get(c);
    if ((key == "seed" || key == "p" || key == "q" || key == "out" || key == "csv") && value.empty())
      continue;
    if (sec != section) {
      out += "\n[" + sec + "]\n";
      section = sec;
      if (sec == "model")
        for (const auto& [name, v] : c.model.params) out += name + " = " + format_double(v) + "\n";
    }
    out += key.substr(dot == std::string::npos ? 0 : dot + 1) + " = " + value + "\n";
  }
  return out;
}

void validate(const RunConfig& c) {
  if (std::none_of(std::begin(kCommands), std::end(kCommands),
                   [&](const char* k) { return c.command == k; }))
    throw ConfigError("unknown command '" + c.command + "'", "command");
  if (c.model.dimension < 1) throw ConfigError("dimension must be >= 1", "model.dimension");
  try {
    (void)make_potential(c.model);
  } catch (const Error& e) {
    throw ConfigError(e.what(), "model");
  }
  for (int v : c.p)
    if (v < 1) throw ConfigError("periods must be ≥ 1", "p");
  for (int v : c.q)
    if (v < 1) throw ConfigError("periods must be ≥ 1", "q");
  if (!c.p.empty() && c.p.size() != c.model.dimension)
    throw ConfigError("p needs " + std::to_string(c.model.dimension) + " components", "p");
  if (!c.q.empty() && c.q.size() + 1 != c.model.dimension)
    throw ConfigError("q needs " + std::to_string(c.model.dimension - 1) + " components", "q");
  std::size_t cells = 1;
  for (int v : c.p) cells *= static_cast<std::size_t>(v);
  if (cells > c.max_cells)
    throw ConfigError("torus cell count " + std::to_string(cells) + " exceeds max_cells", "p");
  if (c.flow.dt < 0) throw ConfigError("dt must be >= 0", "flow.dt");
  if (!(c.flow.t_max > 0)) throw ConfigError("t_max must be > 0", "flow.t_max");
  if (!(c.flow.stationarity_tol > 0)) throw ConfigError("tol must be > 0", "flow.tol");
  if (c.flow.max_steps < 1) throw ConfigError("max_steps must be >= 1", "flow.max_steps");
  if (c.minimax.reparam_every < 1) throw ConfigError("must be >= 1", "minimax.reparam_every");
  if (c.minimax.stall_window < 1) throw ConfigError("must be >= 1", "minimax.stall_window");
  if (c.minimax.max_sweeps < 1) throw ConfigError("must be >= 1", "minimax.max_sweeps");
  if (!(c.minimax.saddle_tol > 0)) throw ConfigError("must be > 0", "minimax.saddle_tol");
  if (c.path.nodes != 0 && c.path.nodes < 3) throw ConfigError("nodes must be 0 or >= 3", "path.nodes");
  if (c.path.k < 1) throw ConfigError("k must be >= 1", "path.k");
  if (c.window.initial < 1 || c.window.cap < c.window.initial)
    throw ConfigError("need 1 <= initial <= cap", "window.initial");
  if (!(c.window.tail_tolerance > 0)) throw ConfigError("must be > 0", "window.tail_tolerance");
  if (c.probes < 1) throw ConfigError("probes must be >= 1", "probes");
  if (c.seeds < 1) throw ConfigError("seeds must be >= 1", "seeds");
  if (c.trials < 0) throw ConfigError("trials must be >= 0", "trials");
  if (c.k_max < 1) throw ConfigError("k_max must be >= 1", "k_max");
  if (c.grid < 2) throw ConfigError("grid must be >= 2", "grid");
}

}  // namespace fk::cli
