#include "fqst/config.hpp"
#include "fqst/engine.hpp"
#include "fqst/experiments.hpp"
#include "fqst/protocols.hpp"
#include "fqst/topology.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef FQST_VERSION
#define FQST_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fqst;

namespace {

struct Run {
  std::string subcommand;
  RunConfig cfg;
  fs::path out;
  json outputs = json::array();
  json summary = json::object();

  std::string file(const std::string& name) {
    outputs.push_back(name);
    return (out / name).string();
  }
};

std::string stamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
}

// temp file + rename so a crashed run never leaves half a manifest behind
void write_manifest(const Run& r, double wall) {
  json m;
  m["manifest_version"] = 1;
  m["subcommand"] = r.subcommand;
  m["version"] = FQST_VERSION;
  m["created"] = stamp();
  m["seed"] = r.cfg.seed;
  m["disorder_seed"] = r.cfg.disorder.seed;
  m["config"] = json::parse(config_to_json(r.cfg));
  m["config_hash"] = config_hash(config_to_json(r.cfg));
  m["outputs"] = r.outputs;
  m["summary"] = r.summary;
  m["wall_clock_s"] = wall;
  const fs::path tmp = r.out / "manifest.json.tmp";
  write_text(tmp.string(), m.dump(2) + "\n");
  fs::rename(tmp, r.out / "manifest.json");
}

ModelContext disordered(const ModelContext& ctx, const RunConfig& cfg, ProtocolKind k) {
  if (cfg.disorder.strength == 0.0) return ctx;
  DisorderSpec d = cfg.disorder;
  if (d.families.empty()) d.families = default_families(k);
  if (d.seed == 0) d.seed = cfg.seed;
  return apply_disorder(ctx, d);
}

void write_phases_csv(const std::vector<SpectrumSample>& s, const std::string& path) {
  std::ofstream f(path);
  f.precision(12);
  f << "sample_period,index,phase\n";
  for (const auto& x : s)
    for (std::size_t i = 0; i < x.phases.size(); ++i) f << x.period << ',' << i << ',' << x.phases[i] << '\n';
}

void cmd_phase_diagram(Run& r) {
  const PhaseDiagram d = phase_diagram(r.cfg.phase_diagram);
  write_phase_diagram_csv(d, r.file("phase_diagram.csv"));
  r.summary = {{"compared", d.compared}, {"agreed", d.agreed}, {"flagged", d.flagged}, {"agreement", d.agreement()}};
  std::cout << "agreement " << d.agreed << "/" << d.compared << " (" << d.flagged << " flagged near boundaries)\n";
}

void cmd_spectrum(Run& r) {
  const auto& c = r.cfg.spectrum;
  SweepConfig sc = sweep_config(r.cfg, c.protocol, c.periods_per_step, c.total_periods, {0.0}, 1, {});
  Scenario s = make_scenario(sc);
  s.ctx = disordered(s.ctx, r.cfg, c.protocol);
  TraceOptions o;
  o.record_every = 0;
  o.spectrum_every = c.sample_every;
  o.keep_spectra = true;
  const EvolutionTrace t = run_scenario(s, s.ctx, o);
  write_gap_csv(t.spectra, r.file("gap.csv"));
  write_phases_csv(t.spectra, r.file("quasienergies.csv"));
  write_text(r.file("schedule.json"), schedule_to_json(s.protocol));
  r.summary = {{"samples", t.spectra.size()}, {"min_gap", t.min_gap()}};
  std::cout << "min gap " << t.min_gap() << " over " << t.spectra.size() << " samples\n";
}

void cmd_entangle(Run& r) {
  const auto& c = r.cfg.entangle;
  const ModelContext clean = build_context(r.cfg.model);
  const ModelContext ctx = disordered(clean, r.cfg, ProtocolKind::entangle);
  const Protocol p = build_entangle_protocol(ctx, c.periods_per_step, c.power);
  const EdgeModes m = ideal_edge_modes(clean, Branch::left, 1);
  TraceOptions o;
  o.references = {m.zero, m.pi};
  o.reference_names = {"zero", "pi"};
  o.record_every = c.record_every;
  const EvolutionTrace t =
      evolve_protocol(ctx, p, basis_state(ctx.dimension(), ctx.resolve({Branch::left, 1, Sublattice::a})), o);
  write_trace_csv(t, r.file("trace.csv"));
  write_text(r.file("schedule.json"), schedule_to_json(p));

  const auto phase = dynamical_phase_trace(ctx, t.final_state, c.phase_periods);
  {
    std::ofstream f(r.file("relative_phase.csv"));
    f.precision(12);
    f << "period,alpha_re,alpha_im,arg_alpha,defined\n";
    for (const auto& a : phase)
      f << a.period << ',' << a.alpha.real() << ',' << a.alpha.imag() << ',' << std::arg(a.alpha) << ','
        << (a.defined ? 1 : 0) << '\n';
  }
  const Complex z = overlap(m.zero, t.final_state), q = overlap(m.pi, t.final_state);
  r.summary = {{"overlap_zero", std::abs(z)}, {"overlap_pi", std::abs(q)}, {"periods", t.periods}};
  std::cout << "|<0|psi>| = " << std::abs(z) << "  |<pi|psi>| = " << std::abs(q) << "\n";
}

void cmd_transfer(Run& r) {
  const auto& c = r.cfg.transfer;
  SweepConfig sc = sweep_config(r.cfg, c.mode, c.periods_per_step, c.total_periods, {0.0}, 1, {});
  sc.mode = c.input;
  Scenario s = make_scenario(sc);
  const ModelContext ctx = disordered(s.ctx, r.cfg, c.mode);
  TraceOptions o;
  o.references = {s.initial, s.target};
  o.reference_names = {"input", "target"};
  o.record_every = c.record_every;
  o.spectrum_every = c.spectrum_every;
  o.target = s.target;
  const EvolutionTrace t = run_scenario(s, ctx, o);
  write_trace_csv(t, r.file("trace.csv"));
  if (c.spectrum_every > 0) write_gap_csv(t.spectra, r.file("gap.csv"));
  write_text(r.file("schedule.json"), schedule_to_json(s.protocol));
  const double F = t.final_fidelity.value_or(0.0);
  r.summary = {{"fidelity", F}, {"periods", t.periods}, {"analytic_target", s.analytic_target},
               {"max_norm_drift", t.max_norm_drift}};
  if (c.spectrum_every > 0) r.summary["min_gap"] = t.min_gap();
  std::cout << to_string(c.mode) << " transfer over " << t.periods << " periods: F = " << F << "\n";
}

void print_sweep(const SweepResult& s, const std::string& tag) {
  for (const auto& p : s.points)
    std::cout << tag << "W=" << p.W << "  mean F " << p.mean << "  std " << p.std << "  (" << p.n << " ok, "
              << p.failed << " failed)\n";
}

json sweep_json(const SweepResult& s) {
  json a = json::array();
  for (const auto& p : s.points)
    a.push_back({{"W", p.W}, {"mean", p.mean}, {"std", p.std}, {"n", p.n}, {"failed", p.failed}});
  return {{"points", a}, {"clean_fidelity", s.clean_fidelity}, {"total_periods", s.total_periods},
          {"config_hash", s.config_hash}};
}

void cmd_disorder_sweep(Run& r) {
  const auto& c = r.cfg.disorder_sweep;
  const SweepConfig sc = sweep_config(r.cfg, c.protocol, c.periods_per_step, c.total_periods, c.W, c.realizations,
                                      c.families);
  const SweepResult s = disorder_sweep(sc);
  write_sweep_csv(s, r.file("sweep.csv"));
  r.summary = sweep_json(s);
  print_sweep(s, "");
}

void cmd_compare(Run& r) {
  const auto& c = r.cfg.compare;
  const SweepConfig a = sweep_config(r.cfg, c.a, c.periods_per_step, 0, c.W, c.realizations, c.families);
  const SweepConfig b = sweep_config(r.cfg, c.b, c.periods_per_step, 0, c.W, c.realizations, c.families);
  const Comparison cmp = compare_protocols(a, b);
  write_sweep_csv(cmp.a, r.file("sweep_" + to_string(c.a) + ".csv"));
  write_sweep_csv(cmp.b, r.file("sweep_" + to_string(c.b) + ".csv"));
  std::ofstream f(r.file("compare.csv"));
  f.precision(12);
  f << "W,mean_a,mean_b,paired_difference,verdict\n";
  for (std::size_t i = 0; i < cmp.verdict.size(); ++i)
    f << cmp.a.points[i].W << ',' << cmp.a.points[i].mean << ',' << cmp.b.points[i].mean << ','
      << cmp.mean_difference[i] << ',' << cmp.verdict[i] << '\n';
  r.summary = {{"a", sweep_json(cmp.a)}, {"b", sweep_json(cmp.b)}, {"verdict", cmp.verdict},
               {"mean_difference", cmp.mean_difference}};
  print_sweep(cmp.a, to_string(c.a) + "  ");
  print_sweep(cmp.b, to_string(c.b) + "  ");
}

void cmd_static(Run& r) {
  const auto& c = r.cfg.static_chain;
  SweepConfig sc = sweep_config(r.cfg, c.mode, 1, 0, c.W, c.realizations, {});
  Scenario s = make_scenario(sc);
  TraceOptions o;
  o.references = {s.initial, s.target};
  o.reference_names = {"input", "target"};
  o.record_every = c.spectrum_every;
  o.spectrum_every = c.spectrum_every;
  o.target = s.target;
  const EvolutionTrace t = run_scenario(s, s.ctx, o);
  write_trace_csv(t, r.file("trace.csv"));
  if (c.spectrum_every > 0) write_gap_csv(t.spectra, r.file("gap.csv"));
  write_text(r.file("schedule.json"), schedule_to_json(s.protocol));
  r.summary = {{"fidelity", t.final_fidelity.value_or(0.0)}, {"min_gap", t.min_gap()}};
  std::cout << to_string(c.mode) << ": F = " << t.final_fidelity.value_or(0.0) << "  min gap " << t.min_gap()
            << "\n";
  if (c.realizations > 0 && !c.W.empty()) {
    const SweepResult sw = disorder_sweep(sc);
    write_sweep_csv(sw, r.file("sweep.csv"));
    r.summary["sweep"] = sweep_json(sw);
    print_sweep(sw, "");
  }
}

// Cross-checks the fast paths against dense references along a stepwise transfer:
// block propagator vs dense expm, and the closed-form instantaneous modes.
void cmd_oracle_check(Run& r) {
  if (!is_ideal(r.cfg.model)) throw ConfigError("oracle-check needs the ideal couplings");
  const ModelContext ctx = build_context(r.cfg.model);
  const auto [n1, n2] = qst_step_counts(ctx);
  const Protocol p = build_qst_stepwise(ctx, 1);
  ProtocolWalker w(ctx, p);
  BlockPropagator p1(ctx.dimension()), p2(ctx.dimension());
  const int n = std::max(1, r.cfg.oracle.samples_per_step);
  double worst_block = 0.0, worst_mode = 0.0;
  std::ofstream f(r.file("oracle.csv"));
  f.precision(6);
  f << "step,u,block_vs_dense,zero_residual,pi_residual\n";
  for (int step = 0; step < n1 + n2; ++step) {
    for (int k = 0; k <= n; ++k) {
      const double u = static_cast<double>(k) / n;
      w.seek(step, u);
      p1.update(w.bonds(Half::first));
      p2.update(w.bonds(Half::second));
      const PropagatorMatrix fast = p2.dense() * p1.dense();
      const PropagatorMatrix ref = frozen_floquet(w);
      const double db = (fast - ref).cwiseAbs().maxCoeff();
      const QstPhase ph = step < n1 ? QstPhase::one : QstPhase::two;
      const int x = step < n1 ? step + 1 : step - n1 + 1;
      const StateVector z = instantaneous_mode(ctx, ph, x, half_pi * u, Mode::zero);
      const StateVector q = instantaneous_mode(ctx, ph, x, half_pi * u, Mode::pi);
      const double rz = (ref * z - z).norm(), rq = (ref * q + q).norm();
      worst_block = std::max(worst_block, db);
      worst_mode = std::max({worst_mode, rz, rq});
      f << step << ',' << u << ',' << db << ',' << rz << ',' << rq << '\n';
    }
  }
  r.summary = {{"worst_block_vs_dense", worst_block}, {"worst_mode_residual", worst_mode}};
  std::cout << "block vs dense " << worst_block << "  mode residual " << worst_mode << "\n";
  if (worst_block > 1e-10 || worst_mode > 1e-10) throw ContractViolation("oracle check exceeded 1e-10");
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const IndexError*>(&e)) return 3;
  if (dynamic_cast<const ContractViolation*>(&e)) return 4;
  if (dynamic_cast<const BoundaryError*>(&e) || dynamic_cast<const GapClosingError*>(&e)) return 5;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet edge-mode transfer on a Y-junction"};
  app.set_version_flag("--version", FQST_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = -1, periods = 0, grid = 0;
  std::string mode;
  app.add_option("-c,--config", config_path, "YAML config (or a previous manifest.json)");
  app.add_option("-o,--out", out_dir, "output directory (default runs/<subcommand>-<time>)");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--threads", threads, "worker threads (also FQST_THREADS)");

  std::vector<std::pair<CLI::App*, void (*)(Run&)>> cmds;
  auto add = [&](const char* name, const char* help, void (*fn)(Run&)) {
    CLI::App* s = app.add_subcommand(name, help);
    cmds.emplace_back(s, fn);
    return s;
  };
  add("phase-diagram", "winding invariants vs the closed form", cmd_phase_diagram)
      ->add_option("--grid", grid, "cells per axis");
  add("spectrum", "quasienergy gap along a protocol", cmd_spectrum)
      ->add_option("--periods-per-step", periods);
  add("entangle", "edge-mode entangling protocol", cmd_entangle)->add_option("--periods-per-step", periods);
  auto* tr = add("transfer", "edge-mode transfer across the junction", cmd_transfer);
  tr->add_option("--mode", mode, "stepwise | direct")->check(CLI::IsMember({"stepwise", "direct"}));
  tr->add_option("--periods-per-step", periods);
  add("disorder-sweep", "disorder-averaged fidelity", cmd_disorder_sweep)->add_option("--periods-per-step", periods);
  add("compare", "paired sweep of two protocols", cmd_compare)->add_option("--periods-per-step", periods);
  add("static", "continuous-time chain transfer", cmd_static)
      ->add_option("--mode", mode, "original | stepwise")
      ->check(CLI::IsMember({"original", "stepwise"}));
  add("oracle-check", "fast paths vs dense references", cmd_oracle_check);

  CLI11_PARSE(app, argc, argv);

  const auto t0 = std::chrono::steady_clock::now();
  try {
    Run r;
    r.cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed != 0) r.cfg.seed = seed;
    if (const char* env = std::getenv("FQST_THREADS"); env && threads < 0) threads = std::atoi(env);
    if (threads >= 0) r.cfg.threads = threads;

    for (auto& [sub, fn] : cmds) {
      if (!sub->parsed()) continue;
      r.subcommand = sub->get_name();
      if (periods > 0) {
        r.cfg.spectrum.periods_per_step = r.cfg.entangle.periods_per_step = r.cfg.transfer.periods_per_step =
            r.cfg.disorder_sweep.periods_per_step = r.cfg.compare.periods_per_step = periods;
      }
      if (grid > 0) r.cfg.phase_diagram.n_J1 = r.cfg.phase_diagram.n_j2 = grid;
      if (r.subcommand == "transfer" && !mode.empty()) r.cfg.transfer.mode = protocol_kind_from_string(mode);
      if (r.subcommand == "static" && !mode.empty())
        r.cfg.static_chain.mode = mode == "original" ? ProtocolKind::static_original : ProtocolKind::static_stepwise;

      r.out = out_dir.empty() ? fs::path("runs") / (r.subcommand + "-" + stamp()) : fs::path(out_dir);
      fs::create_directories(r.out);
      fn(r);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_manifest(r, wall);
      std::cout << "wrote " << (r.out / "manifest.json").string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  }
  return 0;
}
