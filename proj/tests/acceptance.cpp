// Acceptance checks, one line per criterion.
//   acceptance          run all
//   acceptance 4 6      run a subset
// Exit status is the number of failed criteria.

#include "fqst/config.hpp"
#include "fqst/engine.hpp"
#include "fqst/experiments.hpp"
#include "fqst/protocols.hpp"
#include "fqst/topology.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace fqst;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double transfer_fidelity(const YJunctionSpec& spec, int n_per) {
  SweepConfig c;
  c.model = spec;
  c.periods_per_step = n_per;
  const Scenario s = make_scenario(c);
  TraceOptions o;
  o.record_every = 0;
  o.target = s.target;
  return run_scenario(s, s.ctx, o).final_fidelity.value();
}

double min_gap(const SweepConfig& c, int every) {
  const auto samples = spectrum_trace(make_scenario(c), every);
  double g = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) g = std::min(g, s.min_gap);
  return g;
}

void invariants(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  PhaseDiagramConfig cfg;
  cfg.n_J1 = cfg.n_j2 = 50;
  cfg.margin = 0.02;
  const PhaseDiagram d = phase_diagram(cfg);
  const double t = seconds_since(t0);
  int exact = 0;
  for (const auto& c : d.cells)
    if (c.status == "ok" && c.numeric->v0 == c.analytic->v0 && c.numeric->vpi == c.analytic->vpi) ++exact;
  o.detail << exact << "/" << d.compared << " cells agree, " << d.flagged << " within the margin, " << t << " s";
  o.require(d.compared > 0 && exact == d.compared && d.agreement() == 1.0, "agreement");
  o.require(d.compared + d.flagged == 2500, "grid size");
  o.require(t < 60.0, "runtime");
}

void eigenrelations(Outcome& o) {
  double worst_base = 0.0, worst_path = 0.0;
  int points = 0;
  for (const auto& spec : {YJunctionSpec::ideal(3, 2, 2), YJunctionSpec::ideal(11, 4, 9)}) {
    const ModelContext c = build_context(spec);
    const oracle::Mat u = oracle::floquet(c);
    const EdgeModes m = ideal_edge_modes(c, Branch::left, 1);
    worst_base = std::max({worst_base, (u * m.zero - m.zero).norm(), (u * m.pi + m.pi).norm()});

    const auto [n1, n2] = qst_step_counts(c);
    const Protocol p = build_qst_stepwise(c, 1);
    ProtocolWalker w(c, p);
    for (int s = 0; s < n1 + n2; ++s) {
      for (double uu : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        w.seek(s, uu);
        const oracle::Mat U = oracle::floquet(w);
        const QstPhase ph = s < n1 ? QstPhase::one : QstPhase::two;
        const int x = s < n1 ? s + 1 : s - n1 + 1;
        const StateVector z = instantaneous_mode(c, ph, x, half_pi * uu, Mode::zero);
        const StateVector q = instantaneous_mode(c, ph, x, half_pi * uu, Mode::pi);
        worst_path = std::max({worst_path, (U * z - z).norm(), (U * q + q).norm()});
        ++points;
      }
    }
  }
  o.detail << "base residual " << worst_base << ", " << points << " (step, phi) points, worst " << worst_path;
  o.require(worst_base < 1e-8, "base");
  o.require(points >= 20 && worst_path < 1e-8, "along the path");
}

void entangle(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelContext c = build_context(YJunctionSpec::ideal(3, 2, 2));
  const Protocol p = build_entangle_protocol(c, 200);
  const EvolutionTrace t =
      evolve_protocol(c, p, basis_state(c.dimension(), c.resolve({Branch::left, 1, Sublattice::a})), {});
  const EdgeModes m = ideal_edge_modes(c, Branch::left, 1);
  const double z = std::abs(overlap(m.zero, t.final_state)), q = std::abs(overlap(m.pi, t.final_state));
  const double dt = seconds_since(t0);
  o.detail << "|<0|psi>| = " << z << ", |<pi|psi>| = " << q << ", " << dt << " s";
  o.require(z >= 0.99, "zero overlap");
  o.require(q <= 0.1, "pi overlap");
  o.require(dt < 10.0, "runtime");
}

void stepwise_clean(Outcome& o) {
  struct Case {
    YJunctionSpec spec;
    int n_per;
    double threshold;
  };
  for (const Case& k : {Case{YJunctionSpec::ideal(3, 2, 2), 40, 0.999}, Case{YJunctionSpec::ideal(11, 4, 9), 70, 0.99}}) {
    std::vector<double> study;
    for (int n : {10, 20, 40, 80}) study.push_back(transfer_fidelity(k.spec, n));
    bool monotone = true;
    for (std::size_t i = 1; i < study.size(); ++i) monotone = monotone && study[i] > study[i - 1];
    const double f = transfer_fidelity(k.spec, k.n_per);
    o.detail << "path " << k.spec.path_cells() << " cells: F(" << k.n_per << ") = " << f << ", doubling";
    for (double x : study) o.detail << " " << x;
    o.detail << "; ";
    o.require(f >= k.threshold, "fidelity at path " + std::to_string(k.spec.path_cells()));
    o.require(monotone, "monotone doubling at path " + std::to_string(k.spec.path_cells()));
  }
}

void disorder_robustness(Outcome& o) {
  SweepConfig c;
  c.model = YJunctionSpec::ideal(11, 4, 9);
  c.W = {0.0, 0.05, 0.5};
  c.realizations = 100;
  c.periods_per_step = 70;
  const SweepResult r = disorder_sweep(c);
  const double fn = transfer_fidelity(nonideal_spec(11, 4, 9), 70);
  o.detail << "mean F " << r.points[0].mean << " / " << r.points[1].mean << " / " << r.points[2].mean
           << " at W = 0 / 0.05 / 0.5, std(W=0) = " << r.points[0].std << ", nonideal clean F = " << fn;
  o.require(r.points[1].mean > r.points[2].mean, "ordering");
  o.require(r.points[0].std == 0.0, "zero spread");
  o.require(r.points[0].n == 100 && r.points[1].n == 100 && r.points[2].n == 100, "all realizations ran");
  o.require(fn >= 0.99, "nonideal");
}

void stepwise_vs_direct(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepConfig a;
  a.model = YJunctionSpec::ideal(31, 4, 29);
  const auto [n1, n2] = qst_step_counts(build_context(a.model));
  a.periods_per_step = 6600 / (n1 + n2);
  a.W = {0.0, 0.05, 0.1, 0.2};
  a.realizations = 100;
  SweepConfig b = a;
  b.protocol = ProtocolKind::qst_direct;
  b.total_periods = a.periods_per_step * (n1 + n2);
  const Comparison cmp = compare_protocols(a, b);
  bool ordered = true;
  for (std::size_t i = 0; i < cmp.verdict.size(); ++i) ordered = ordered && cmp.a.points[i].mean >= cmp.b.points[i].mean;
  const double ga = min_gap(a, 10), gb = min_gap(b, 10);
  const double t = seconds_since(t0);
  o.detail << "path " << a.model.path_cells() << " cells, " << cmp.a.total_periods << " periods; mean F stepwise/direct";
  for (std::size_t i = 0; i < cmp.verdict.size(); ++i)
    o.detail << " W=" << cmp.a.points[i].W << ": " << cmp.a.points[i].mean << "/" << cmp.b.points[i].mean;
  o.detail << "; min gap stepwise " << ga << ", direct " << gb << "; " << t << " s";
  o.require(cmp.a.total_periods == 6600, "6600 periods");
  o.require(ordered, "stepwise >= direct");
  o.require(gb < 1e-2, "direct gap below 1e-2");
  o.require(ga > 0.1, "stepwise gap above 0.1");
  o.require(t < 1800.0, "runtime");
}

void gap_persistence(Outcome& o) {
  SweepConfig s10, s20;
  s10.model = YJunctionSpec::ideal(5, 4, 5);
  s20.model = YJunctionSpec::ideal(11, 4, 9);
  s10.periods_per_step = s20.periods_per_step = 40;
  const double g10 = min_gap(s10, 1), g20 = min_gap(s20, 1);
  const double rel = std::abs(g10 - g20) / std::max(g10, g20);
  o.detail << "min gap " << g10 << " (path " << s10.model.path_cells() << ") vs " << g20 << " (path "
           << s20.model.path_cells() << "), relative change " << rel;
  o.require(rel < 0.05, "gap change");
}

void static_chain(Outcome& o) {
  SweepConfig a;
  a.protocol = ProtocolKind::static_original;
  a.W = {0.0, 0.1, 0.2};
  a.realizations = 30;
  SweepConfig b = a;
  b.protocol = ProtocolKind::static_stepwise;
  const double ga = min_gap(a, 50), gb = min_gap(b, 50);
  const Comparison cmp = compare_protocols(b, a);
  bool ordered = true;
  o.detail << "N_q = " << a.chain.qubits << ", min gap original " << ga << ", improved " << gb << "; mean F improved/original";
  for (std::size_t i = 0; i < cmp.verdict.size(); ++i) {
    ordered = ordered && cmp.a.points[i].mean >= cmp.b.points[i].mean;
    o.detail << " W=" << cmp.a.points[i].W << ": " << cmp.a.points[i].mean << "/" << cmp.b.points[i].mean;
  }
  o.require(gb > ga, "gap");
  o.require(ordered, "paired fidelity");
}

void hygiene(Outcome& o) {
  // unitarity over 1e4 periods: norm of the evolved state and the accumulated operator
  const ModelContext c = build_context(YJunctionSpec::ideal(3, 2, 2));
  const Protocol p = build_qst_stepwise(c, 3334);
  const EvolutionTrace t = evolve_protocol(c, p, ideal_edge_modes(c, Branch::left, 1).zero, {});
  ProtocolWalker w(c, p);
  BlockPropagator p1(c.dimension()), p2(c.dimension());
  PropagatorMatrix acc = PropagatorMatrix::Identity(c.dimension(), c.dimension());
  for (std::size_t s = 0; s < p.steps.size(); ++s) {
    for (int m = 1; m <= p.steps[s].duration; ++m) {
      w.seek(s, p.steps[s].fraction(m));
      p1.update(w.bonds(Half::first));
      p2.update(w.bonds(Half::second));
      acc = p2.dense() * (p1.dense() * acc);
    }
  }
  const double drift = unitarity_error(acc);

  // continuous integrator: halve dt on the static chain
  double dt_change = 0.0;
  for (ProtocolKind k : {ProtocolKind::static_original, ProtocolKind::static_stepwise}) {
    SweepConfig sc;
    sc.protocol = k;
    const Scenario s = make_scenario(sc);
    Scenario half = s;
    half.dt = s.dt / 2;
    const StateVector x = run_scenario(s, s.ctx).final_state, y = run_scenario(half, half.ctx).final_state;
    dt_change = std::max(dt_change, (x - y).norm());
  }

  // frames: frozen operators along a disordered transfer
  const ModelContext d = apply_disorder(build_context(YJunctionSpec::ideal(11, 4, 9)), DisorderSpec::all_families(0.3, 4));
  const Protocol q = build_qst_stepwise(d, 1);
  ProtocolWalker wd(d, q);
  double frame = 0.0;
  int samples = 0;
  for (std::size_t s = 0; s < q.steps.size(); s += 3) {
    for (double u : {0.3, 1.0}) {
      wd.seek(s, u);
      const auto a = quasienergy_spectrum(frozen_floquet(wd, Frame::canonical)).phases;
      const auto b = quasienergy_spectrum(frozen_floquet(wd, Frame::symmetric)).phases;
      for (std::size_t i = 0; i < a.size(); ++i) frame = std::max(frame, modular_distance(a[i], b[i]));
      ++samples;
    }
  }
  o.detail << t.periods << " periods: norm drift " << t.max_norm_drift << ", operator unitarity " << drift
           << "; dt halving " << dt_change << "; frame spectra " << frame << " over " << samples << " points";
  o.require(t.periods >= 10000 && t.max_norm_drift < 1e-10 && drift < 1e-10, "unitarity");
  o.require(dt_change < 1e-6, "dt convergence");
  o.require(frame < 1e-10, "frame equivalence");
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{{1, "invariant oracle", invariants},
                                   {2, "edge-mode eigenrelations", eigenrelations},
                                   {3, "entangled-state generation", entangle},
                                   {4, "stepwise transfer, clean", stepwise_clean},
                                   {5, "disorder robustness", disorder_robustness},
                                   {6, "stepwise vs direct", stepwise_vs_direct},
                                   {7, "gap persistence", gap_persistence},
                                   {8, "static chain protocols", static_chain},
                                   {9, "numerical hygiene", hygiene}};
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && std::find(pick.begin(), pick.end(), c.id) == pick.end()) continue;
    Outcome o;
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [error: " << e.what() << "]";
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.id << " " << c.name << ": " << o.detail.str() << std::endl;
  }
  return failed;
}
