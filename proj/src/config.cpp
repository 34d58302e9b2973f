#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "holoq/cli.hpp"

namespace holoq {

using nlohmann::json;

ConfigError::ConfigError(const std::string& message, int line_)
    : std::runtime_error(line_ > 0 ? "line " + std::to_string(line_) + ": " + message : message),
      line(line_) {}

CircuitParams CircuitConfig::params() const {
  if (eta) return CircuitParams::from_eta(e_sigma(), e_c, *eta);
  if (delta) return CircuitParams::from_dimensionless(e_sigma(), e_c, *delta);
  throw ParameterError("circuit needs delta or eta");
}

int default_n_max(const std::string& command, const std::string& mode) {
  if (command == "dynamics") return 14;
  if (command == "noise" && mode == "monte_carlo") return 12;
  return 100;
}

namespace {

// Walks the config with a key path so errors can point at a line.
class Reader {
 public:
  Reader(const std::string& text, const json& node, std::vector<std::string> path)
      : text_(text), node_(node), path_(std::move(path)) {}

  Reader child(const std::string& key) const {
    auto p = path_;
    p.push_back(key);
    const json& n = node_.at(key);
    if (!n.is_object()) fail(key, "must be an object");
    return Reader(text_, n, p);
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& item : node_.items())
      if (!ok.count(item.key())) fail(item.key(), "unknown key");
  }

  double number(const std::string& key) const {
    const json& v = node_.at(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
    return x;
  }

  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::optional<double> optional_number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  double positive(const std::string& key, double fallback) const {
    const double x = number(key, fallback);
    if (!(x > 0.0)) fail(key, "must be positive");
    return x;
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_number_integer()) fail(key, "must be an integer");
    return v.get<long long>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_number_unsigned()) fail(key, "must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_boolean()) fail(key, "must be true or false");
    return v.get<bool>();
  }

  std::string choice(const std::string& key, std::initializer_list<const char*> options,
                     std::optional<std::string> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(key, "is required");
    }
    const json& v = node_.at(key);
    std::string joined;
    for (const char* o : options) joined += std::string(joined.empty() ? "" : ", ") + o;
    if (!v.is_string()) fail(key, "must be one of: " + joined);
    const auto s = v.get<std::string>();
    for (const char* o : options)
      if (s == o) return s;
    fail(key, "must be one of: " + joined);
  }

  std::vector<double> numbers(const std::string& key, bool required = true) const {
    if (!has(key)) {
      if (required) fail(key, "is required");
      return {};
    }
    const json& v = node_.at(key);
    if (!v.is_array() || v.empty()) fail(key, "must be a non-empty list of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(key, "must be a non-empty list of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    std::string where;
    for (const auto& p : path_) where += p + ".";
    throw ConfigError("'" + where + key + "' " + message, locate(key));
  }

 private:
  // Line of the first `"key":` after the enclosing keys, in order.
  int locate(const std::string& key) const {
    std::size_t pos = 0;
    auto keys = path_;
    keys.push_back(key);
    for (const auto& k : keys) {
      const std::regex pattern("\"" + std::regex_replace(k, std::regex(R"([.^$|()\[\]{}*+?\\])"), R"(\$&)") +
                               "\"\\s*:");
      std::smatch m;
      const std::string rest = text_.substr(pos);
      if (!std::regex_search(rest, m, pattern)) return 0;
      pos += static_cast<std::size_t>(m.position(0)) + 1;
    }
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
  }

  const std::string& text_;
  const json& node_;
  std::vector<std::string> path_;
};

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

std::vector<double> positive_list(const Reader& r, const std::string& key, bool required = true) {
  auto v = r.numbers(key, required);
  for (double x : v)
    if (!(x > 0.0)) r.fail(key, "entries must be positive");
  return v;
}

LoopConfig read_loop(const Reader& parent) {
  LoopConfig l;
  if (!parent.has("loop")) return l;
  const Reader r = parent.child("loop");
  r.allow({"margin_q", "d_phi_over_pi", "d_q"});
  l.margin_q = r.positive("margin_q", l.margin_q);
  if (l.margin_q > 0.5) r.fail("margin_q", "must not exceed 0.5");
  l.d_phi_over_pi = r.positive("d_phi_over_pi", l.d_phi_over_pi);
  l.d_q = r.positive("d_q", l.d_q);
  return l;
}

CircuitConfig read_circuit(const Reader& root, bool needs_asymmetry) {
  CircuitConfig c;
  if (!root.has("circuit")) root.fail("circuit", "is required");
  const Reader r = root.child("circuit");
  r.allow({"e_sigma_ghz", "e_c", "delta", "eta"});
  c.e_sigma_ghz = r.positive("e_sigma_ghz", c.e_sigma_ghz);
  c.e_c = r.positive("e_c", c.e_c);
  c.delta = r.optional_number("delta");
  c.eta = r.optional_number("eta");
  if (c.delta && c.eta) r.fail("eta", "conflicts with delta; give one of them");
  if (needs_asymmetry && !c.delta && !c.eta) r.fail("delta", "is required (or give eta)");
  if (c.delta && !(*c.delta >= 0.0 && *c.delta < 1.0)) r.fail("delta", "must lie in [0, 1)");
  if (c.eta && !(*c.eta >= 0.0 && *c.eta * c.e_c < 1.0)) r.fail("eta", "must satisfy 0 <= eta e_c < 1");
  return c;
}

GridSpec read_grid(const Reader& r) {
  r.allow({"phi_min", "phi_max", "q_min", "q_max", "phi_cells", "q_cells"});
  for (const char* k : {"phi_min", "phi_max", "q_min", "q_max", "phi_cells", "q_cells"})
    if (!r.has(k)) r.fail(k, "is required in an explicit grid");
  GridSpec g;
  g.phi_min = r.number("phi_min");
  g.phi_max = r.number("phi_max");
  g.q_min = r.number("q_min");
  g.q_max = r.number("q_max");
  const long long pc = r.integer("phi_cells", 0);
  const long long qc = r.integer("q_cells", 0);
  if (pc < 1 || pc > 100000) r.fail("phi_cells", "must lie in [1, 100000]");
  if (qc < 1 || qc > 100000) r.fail("q_cells", "must lie in [1, 100000]");
  g.phi_cells = static_cast<int>(pc);
  g.q_cells = static_cast<int>(qc);
  if (!(g.phi_max > g.phi_min)) r.fail("phi_max", "must exceed phi_min");
  if (!(g.q_max > g.q_min)) r.fail("q_max", "must exceed q_min");
  return g;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& command) {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw ConfigError("unknown command '" + command + "'", 0);
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("syntax error: ") + e.what(), line_of_offset(text, e.byte));
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object", 1);

  RunConfig cfg;
  cfg.command = command;
  cfg.echo = doc;
  const Reader root(text, doc, {});
  std::string block = command;
  std::replace(block.begin(), block.end(), '-', '_');
  root.allow({"circuit", "basis", "output", "seed", "curvature_map", "gate_angle", "dynamics",
              "noise"});
  for (const char* other : {"curvature_map", "gate_angle", "dynamics", "noise"})
    if (block != other && root.has(other)) root.fail(other, "does not belong to command " + command);

  std::string mode;
  if (command == "curvature-map") {
    cfg.circuit = read_circuit(root, true);
    CurvatureConfig c;
    if (root.has("curvature_map")) {
      const Reader r = root.child("curvature_map");
      r.allow({"preset", "grid"});
      if (r.has("preset") && r.has("grid")) r.fail("grid", "conflicts with preset");
      if (r.has("grid")) {
        c.grid = read_grid(r.child("grid"));
      } else {
        c.zoom = r.choice("preset", {"default", "zoom"}, "default") == "zoom";
      }
    }
    if (c.zoom) c.grid = zoom_curvature_grid(cfg.circuit.params());
    cfg.curvature_map = c;
  } else if (command == "gate-angle") {
    cfg.circuit = read_circuit(root, false);
    if (!root.has("gate_angle")) root.fail("gate_angle", "is required");
    const Reader r = root.child("gate_angle");
    r.allow({"etas", "fit", "loop"});
    GateAngleConfig g;
    g.etas = r.numbers("etas");
    for (double e : g.etas)
      if (!(e >= 0.0 && e * cfg.circuit.e_c < 1.0)) r.fail("etas", "entries must satisfy 0 <= eta e_c < 1");
    g.fit = r.boolean("fit", true);
    g.loop = read_loop(r);
    cfg.gate_angle = g;
  } else if (command == "dynamics") {
    cfg.circuit = read_circuit(root, true);
    if (!root.has("dynamics")) root.fail("dynamics", "is required");
    const Reader r = root.child("dynamics");
    DynamicsConfig d;
    d.mode = r.choice("mode", {"holonomic", "discrete_z", "lz_sweep"});
    mode = d.mode;
    if (d.mode == "discrete_z") {
      r.allow({"mode", "hold_factors", "ramp_time_ns", "dt_ns"});
      if (r.has("hold_factors")) d.hold_factors = positive_list(r, "hold_factors");
      d.ramp_time_ns = r.number("ramp_time_ns", 0.0);
      if (d.ramp_time_ns < 0.0) r.fail("ramp_time_ns", "must be non-negative");
    } else {
      r.allow({"mode", "taus_ns", "dt_ns", "loop"});
      d.taus_ns = positive_list(r, "taus_ns");
      if (d.mode == "holonomic") d.loop = read_loop(r);
      else if (r.has("loop")) r.fail("loop", "only applies to mode holonomic");
    }
    if (r.has("dt_ns")) d.dt_ns = r.positive("dt_ns", 0.0);
    cfg.dynamics = d;
  } else {
    cfg.circuit = read_circuit(root, true);
    if (!root.has("noise")) root.fail("noise", "is required");
    const Reader r = root.child("noise");
    NoiseConfig n;
    n.mode = r.choice("mode", {"static_offset", "analytic_dephasing", "monte_carlo"});
    mode = n.mode;
    if (n.mode == "static_offset") {
      r.allow({"mode", "eps_q", "shift", "loop"});
      n.eps_q = r.numbers("eps_q");
      for (double e : n.eps_q)
        if (!(std::abs(e) < 0.1)) r.fail("eps_q", "entries must satisfy |eps_q| < 0.1");
      n.shift = r.choice("shift", {"symmetric", "top_only"}, "symmetric") == "top_only"
                    ? OffsetShift::top_only
                    : OffsetShift::symmetric;
      n.loop = read_loop(r);
    } else {
      if (n.mode == "analytic_dephasing")
        r.allow({"mode", "tau_gate_ns", "sqrt_A", "f_min_ghz", "f_max_ghz", "dt_ns", "loop"});
      else
        r.allow({"mode", "tau_gate_ns", "sqrt_A", "f_min_ghz", "f_max_ghz", "dt_ns", "n_samples",
                 "loop"});
      n.tau_gate_ns = r.positive("tau_gate_ns", n.tau_gate_ns);
      n.sqrt_A = r.numbers("sqrt_A");
      for (double a : n.sqrt_A)
        if (!(a >= 0.0)) r.fail("sqrt_A", "entries must be non-negative");
      if (r.has("f_min_ghz")) n.f_min_ghz = r.positive("f_min_ghz", 0.0);
      if (r.has("f_max_ghz")) n.f_max_ghz = r.positive("f_max_ghz", 0.0);
      if (n.f_min_ghz && n.f_max_ghz && !(*n.f_max_ghz > *n.f_min_ghz))
        r.fail("f_max_ghz", "must exceed f_min_ghz");
      if (r.has("dt_ns")) n.dt_ns = r.positive("dt_ns", 0.0);
      const long long samples = r.integer("n_samples", 300);
      if (samples < 1) r.fail("n_samples", "must be at least 1");
      n.n_samples = static_cast<std::size_t>(samples);
      n.loop = read_loop(r);
    }
    cfg.noise = n;
  }

  cfg.n_max = default_n_max(command, mode);
  if (root.has("basis")) {
    const Reader r = root.child("basis");
    r.allow({"n_max"});
    const long long n = r.integer("n_max", cfg.n_max);
    if (n < 2 || n > 10000) r.fail("n_max", "must lie in [2, 10000]");
    cfg.n_max = static_cast<int>(n);
  }
  if (root.has("output")) {
    const Reader r = root.child("output");
    r.allow({"dir", "format"});
    if (r.has("dir")) {
      if (!doc["output"]["dir"].is_string() || doc["output"]["dir"].get<std::string>().empty())
        r.fail("dir", "must be a non-empty string");
      cfg.output_dir = doc["output"]["dir"].get<std::string>();
    }
    cfg.format = r.choice("format", {"csv", "json"}, "csv");
  }
  cfg.seed = root.unsigned_integer("seed", cfg.seed);
  return cfg;
}

RunConfig load_config(const std::string& path, const std::string& command) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", 0);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), command);
}

}  // namespace holoq
