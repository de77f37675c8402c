#include "fqst/config.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace fqst {

namespace {

void check_keys(const YAML::Node& n, const std::set<std::string>& allowed, const std::string& where) {
  if (!n) return;
  if (!n.IsMap()) throw ConfigError(where + ": expected a mapping");
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const YAML::Node& n, const char* key, T& out, const std::string& where) {
  if (!n || !n[key]) return;
  try {
    out = n[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + "." + key + ": malformed value");
  }
}

Complex read_complex(const YAML::Node& n, const std::string& where) {
  if (!n.IsSequence() || n.size() != 2) throw ConfigError(where + ": expected [re, im]");
  try {
    return {n[0].as<double>(), n[1].as<double>()};
  } catch (const YAML::Exception&) {
    throw ConfigError(where + ": expected [re, im]");
  }
}

void read_couplings(const YAML::Node& n, BranchCouplings& c, const std::string& where) {
  check_keys(n, {"J1", "J2", "j1", "j2"}, where);
  if (!n) return;
  if (n["J1"]) c.J1 = read_complex(n["J1"], where + ".J1");
  if (n["J2"]) c.J2 = read_complex(n["J2"], where + ".J2");
  if (n["j1"]) c.j1 = read_complex(n["j1"], where + ".j1");
  if (n["j2"]) c.j2 = read_complex(n["j2"], where + ".j2");
}

void read_protocol(const YAML::Node& n, const char* key, ProtocolKind& out, const std::string& where) {
  std::string s;
  read(n, key, s, where);
  if (!s.empty()) out = protocol_kind_from_string(s);
}

void read_families(const YAML::Node& n, std::vector<DisorderFamily>& out, const std::string& where) {
  if (!n || !n["families"]) return;
  std::vector<std::string> names;
  read(n, "families", names, where);
  out.clear();
  for (const auto& s : names) out.push_back(disorder_family_from_string(s));
}

void read_range(const YAML::Node& n, const char* key, double& lo, double& hi, const std::string& where) {
  std::vector<double> r;
  read(n, key, r, where);
  if (r.empty()) return;
  if (r.size() != 2 || r[0] > r[1]) throw ConfigError(where + "." + key + ": expected [min, max]");
  lo = r[0];
  hi = r[1];
}

}  // namespace

YJunctionSpec nonideal_spec(int n_left, int n_middle, int n_right) {
  YJunctionSpec s = YJunctionSpec::ideal(n_left, n_middle, n_right);
  s.left.J1 = s.middle.J1 = s.right.J1 = {0.0, 1.5};
  s.left.j2 = s.middle.j2 = {0.0, 3.0};
  s.right.j2 = {0.0, -0.1};
  return s;
}

RunConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig cfg;
  if (!root || root.IsNull()) return cfg;
  // a run manifest carries its resolved config under `config`
  if (root.IsMap() && root["manifest_version"]) {
    const YAML::Node inner = root["config"];
    root.reset(inner);
  }
  check_keys(root, {"model", "disorder", "seed", "threads", "phase_diagram", "spectrum", "entangle", "transfer",
                    "disorder_sweep", "compare", "static", "oracle_check"},
             "config");
  read(root, "seed", cfg.seed, "config");
  read(root, "threads", cfg.threads, "config");

  if (const auto m = root["model"]) {
    check_keys(m, {"preset", "cells", "couplings", "qubits"}, "model");
    int nl = cfg.model.n_left, nm = cfg.model.n_middle, nr = cfg.model.n_right;
    if (const auto c = m["cells"]) {
      check_keys(c, {"L", "M", "R"}, "model.cells");
      read(c, "L", nl, "model.cells");
      read(c, "M", nm, "model.cells");
      read(c, "R", nr, "model.cells");
    }
    read(m, "preset", cfg.preset, "model");
    if (cfg.preset == "ideal") {
      cfg.model = YJunctionSpec::ideal(nl, nm, nr);
    } else if (cfg.preset == "nonideal") {
      cfg.model = nonideal_spec(nl, nm, nr);
    } else if (cfg.preset == "custom") {
      cfg.model = YJunctionSpec{nl, nm, nr, {}, {}, {}};
    } else {
      throw ConfigError("model.preset: expected ideal, nonideal or custom");
    }
    if (const auto c = m["couplings"]) {
      check_keys(c, {"L", "M", "R"}, "model.couplings");
      read_couplings(c["L"], cfg.model.left, "model.couplings.L");
      read_couplings(c["M"], cfg.model.middle, "model.couplings.M");
      read_couplings(c["R"], cfg.model.right, "model.couplings.R");
    }
  }
  cfg.model.validate();
  if (root["model"] && root["model"]["qubits"]) {
    int n = 0;
    read(root["model"], "qubits", n, "model");
    if (n != cfg.model.qubits()) throw ConfigError("model.qubits disagrees with the cell counts");
  }

  cfg.disorder.seed = cfg.seed;
  if (const auto d = root["disorder"]) {
    check_keys(d, {"W", "families", "seed"}, "disorder");
    read(d, "W", cfg.disorder.strength, "disorder");
    read(d, "seed", cfg.disorder.seed, "disorder");
    read_families(d, cfg.disorder.families, "disorder");
    if (cfg.disorder.strength < 0.0) throw ConfigError("disorder.W must be nonnegative");
  }

  if (const auto p = root["phase_diagram"]) {
    check_keys(p, {"grid", "n_J1", "n_j2", "margin", "k_grid", "J1", "j2"}, "phase_diagram");
    int grid = 0;
    read(p, "grid", grid, "phase_diagram");
    if (grid > 0) cfg.phase_diagram.n_J1 = cfg.phase_diagram.n_j2 = grid;
    read(p, "n_J1", cfg.phase_diagram.n_J1, "phase_diagram");
    read(p, "n_j2", cfg.phase_diagram.n_j2, "phase_diagram");
    read(p, "margin", cfg.phase_diagram.margin, "phase_diagram");
    read(p, "k_grid", cfg.phase_diagram.k_grid, "phase_diagram");
    read_range(p, "J1", cfg.phase_diagram.J1_min, cfg.phase_diagram.J1_max, "phase_diagram");
    read_range(p, "j2", cfg.phase_diagram.j2_min, cfg.phase_diagram.j2_max, "phase_diagram");
  }

  if (const auto s = root["spectrum"]) {
    check_keys(s, {"protocol", "periods_per_step", "total_periods", "sample_every"}, "spectrum");
    read_protocol(s, "protocol", cfg.spectrum.protocol, "spectrum");
    read(s, "periods_per_step", cfg.spectrum.periods_per_step, "spectrum");
    read(s, "total_periods", cfg.spectrum.total_periods, "spectrum");
    read(s, "sample_every", cfg.spectrum.sample_every, "spectrum");
  }

  if (const auto e = root["entangle"]) {
    check_keys(e, {"periods_per_step", "restore_power", "record_every", "phase_periods"}, "entangle");
    read(e, "periods_per_step", cfg.entangle.periods_per_step, "entangle");
    read(e, "restore_power", cfg.entangle.power, "entangle");
    read(e, "record_every", cfg.entangle.record_every, "entangle");
    read(e, "phase_periods", cfg.entangle.phase_periods, "entangle");
  }

  if (const auto t = root["transfer"]) {
    check_keys(t, {"mode", "periods_per_step", "total_periods", "input", "record_every", "spectrum_every"}, "transfer");
    read_protocol(t, "mode", cfg.transfer.mode, "transfer");
    read(t, "periods_per_step", cfg.transfer.periods_per_step, "transfer");
    read(t, "total_periods", cfg.transfer.total_periods, "transfer");
    std::string input;
    read(t, "input", input, "transfer");
    if (!input.empty() && input != "zero" && input != "pi") throw ConfigError("transfer.input: expected zero or pi");
    if (input == "pi") cfg.transfer.input = Mode::pi;
    read(t, "record_every", cfg.transfer.record_every, "transfer");
    read(t, "spectrum_every", cfg.transfer.spectrum_every, "transfer");
  }

  if (const auto s = root["disorder_sweep"]) {
    check_keys(s, {"protocol", "W", "realizations", "periods_per_step", "total_periods", "families"}, "disorder_sweep");
    read_protocol(s, "protocol", cfg.disorder_sweep.protocol, "disorder_sweep");
    read(s, "W", cfg.disorder_sweep.W, "disorder_sweep");
    read(s, "realizations", cfg.disorder_sweep.realizations, "disorder_sweep");
    read(s, "periods_per_step", cfg.disorder_sweep.periods_per_step, "disorder_sweep");
    read(s, "total_periods", cfg.disorder_sweep.total_periods, "disorder_sweep");
    read_families(s, cfg.disorder_sweep.families, "disorder_sweep");
  }

  if (const auto c = root["compare"]) {
    check_keys(c, {"a", "b", "W", "realizations", "periods_per_step", "families"}, "compare");
    read_protocol(c, "a", cfg.compare.a, "compare");
    read_protocol(c, "b", cfg.compare.b, "compare");
    read(c, "W", cfg.compare.W, "compare");
    read(c, "realizations", cfg.compare.realizations, "compare");
    read(c, "periods_per_step", cfg.compare.periods_per_step, "compare");
    read_families(c, cfg.compare.families, "compare");
  }

  if (const auto s = root["static"]) {
    check_keys(s, {"mode", "qubits", "g", "t_total", "dt", "W", "realizations", "spectrum_every"}, "static");
    std::string mode;
    read(s, "mode", mode, "static");
    if (!mode.empty()) {
      if (mode == "original") cfg.static_chain.mode = ProtocolKind::static_original;
      else if (mode == "stepwise") cfg.static_chain.mode = ProtocolKind::static_stepwise;
      else throw ConfigError("static.mode: expected original or stepwise");
    }
    read(s, "qubits", cfg.static_chain.chain.qubits, "static");
    read(s, "g", cfg.static_chain.chain.g, "static");
    cfg.static_chain.chain.t_total = pi / (0.01 * cfg.static_chain.chain.g);
    cfg.static_chain.chain.dt = 0.01 / cfg.static_chain.chain.g;
    read(s, "t_total", cfg.static_chain.chain.t_total, "static");
    read(s, "dt", cfg.static_chain.chain.dt, "static");
    read(s, "W", cfg.static_chain.W, "static");
    read(s, "realizations", cfg.static_chain.realizations, "static");
    read(s, "spectrum_every", cfg.static_chain.spectrum_every, "static");
  }

  if (const auto o = root["oracle_check"]) {
    check_keys(o, {"samples_per_step"}, "oracle_check");
    read(o, "samples_per_step", cfg.oracle.samples_per_step, "oracle_check");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

SweepConfig sweep_config(const RunConfig& cfg, ProtocolKind kind, int periods_per_step, int total_periods,
                         const std::vector<double>& W, int realizations, const std::vector<DisorderFamily>& families) {
  SweepConfig s;
  s.model = cfg.model;
  s.chain = cfg.static_chain.chain;
  s.protocol = kind;
  s.W = W;
  s.realizations = realizations;
  s.periods_per_step = periods_per_step;
  s.total_periods = total_periods;
  s.families = families;
  s.seed = cfg.seed;
  s.threads = cfg.threads;
  return s;
}

std::string config_to_json(const RunConfig& cfg) {
  using nlohmann::json;
  auto z = [](Complex v) { return json::array({v.real(), v.imag()}); };
  auto couplings = [&](const BranchCouplings& c) {
    return json{{"J1", z(c.J1)}, {"J2", z(c.J2)}, {"j1", z(c.j1)}, {"j2", z(c.j2)}};
  };
  auto fams = [](const std::vector<DisorderFamily>& f) {
    json a = json::array();
    for (auto x : f) a.push_back(to_string(x));
    return a;
  };
  json j;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["model"] = {{"preset", cfg.preset},
                {"cells", {{"L", cfg.model.n_left}, {"M", cfg.model.n_middle}, {"R", cfg.model.n_right}}},
                {"qubits", cfg.model.qubits()},
                {"couplings",
                 {{"L", couplings(cfg.model.left)}, {"M", couplings(cfg.model.middle)}, {"R", couplings(cfg.model.right)}}}};
  j["disorder"] = {{"W", cfg.disorder.strength}, {"families", fams(cfg.disorder.families)}, {"seed", cfg.disorder.seed}};
  const auto& pd = cfg.phase_diagram;
  j["phase_diagram"] = {{"n_J1", pd.n_J1}, {"n_j2", pd.n_j2}, {"margin", pd.margin}, {"k_grid", pd.k_grid},
                        {"J1", {pd.J1_min, pd.J1_max}}, {"j2", {pd.j2_min, pd.j2_max}}};
  j["spectrum"] = {{"protocol", to_string(cfg.spectrum.protocol)},
                   {"periods_per_step", cfg.spectrum.periods_per_step},
                   {"total_periods", cfg.spectrum.total_periods},
                   {"sample_every", cfg.spectrum.sample_every}};
  j["entangle"] = {{"periods_per_step", cfg.entangle.periods_per_step},
                   {"restore_power", cfg.entangle.power},
                   {"record_every", cfg.entangle.record_every},
                   {"phase_periods", cfg.entangle.phase_periods}};
  j["transfer"] = {{"mode", to_string(cfg.transfer.mode)},
                   {"periods_per_step", cfg.transfer.periods_per_step},
                   {"total_periods", cfg.transfer.total_periods},
                   {"input", cfg.transfer.input == Mode::zero ? "zero" : "pi"},
                   {"record_every", cfg.transfer.record_every},
                   {"spectrum_every", cfg.transfer.spectrum_every}};
  const auto& ds = cfg.disorder_sweep;
  j["disorder_sweep"] = {{"protocol", to_string(ds.protocol)}, {"W", ds.W}, {"realizations", ds.realizations},
                         {"periods_per_step", ds.periods_per_step}, {"total_periods", ds.total_periods},
                         {"families", fams(ds.families)}};
  const auto& c = cfg.compare;
  j["compare"] = {{"a", to_string(c.a)}, {"b", to_string(c.b)}, {"W", c.W}, {"realizations", c.realizations},
                  {"periods_per_step", c.periods_per_step}, {"families", fams(c.families)}};
  const auto& s = cfg.static_chain;
  j["static"] = {{"mode", s.mode == ProtocolKind::static_original ? "original" : "stepwise"},
                 {"qubits", s.chain.qubits}, {"g", s.chain.g}, {"t_total", s.chain.t_total}, {"dt", s.chain.dt},
                 {"W", s.W}, {"realizations", s.realizations}, {"spectrum_every", s.spectrum_every}};
  j["oracle_check"] = {{"samples_per_step", cfg.oracle.samples_per_step}};
  return j.dump(2);
}

}  // namespace fqst
