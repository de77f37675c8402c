#include "fqst/experiments.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <thread>

namespace fqst {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double total_time(const Scenario& s) {
  return s.protocol.clock == Protocol::Clock::continuous ? s.protocol.t_total : 2.0 * s.protocol.total_periods();
}

void validate(const SweepConfig& cfg) {
  if (cfg.realizations < 1) throw ConfigError("realizations must be at least 1");
  if (cfg.W.empty()) throw ConfigError("W grid is empty");
  for (std::size_t i = 0; i < cfg.W.size(); ++i) {
    if (cfg.W[i] < 0.0) throw ConfigError("W grid must be nonnegative");
    if (i > 0 && cfg.W[i] <= cfg.W[i - 1]) throw ConfigError("W grid must be strictly ascending");
  }
  if (cfg.threads < 0) throw ConfigError("thread count must be nonnegative");
}

}  // namespace

std::string to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::qst_stepwise: return "stepwise";
    case ProtocolKind::qst_direct: return "direct";
    case ProtocolKind::static_original: return "static-original";
    case ProtocolKind::static_stepwise: return "static-stepwise";
    case ProtocolKind::entangle: return "entangle";
  }
  return "?";
}

ProtocolKind protocol_kind_from_string(const std::string& s) {
  using K = ProtocolKind;
  for (K k : {K::qst_stepwise, K::qst_direct, K::static_original, K::static_stepwise, K::entangle}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown protocol '" + s + "'");
}

bool is_static(ProtocolKind k) { return k == ProtocolKind::static_original || k == ProtocolKind::static_stepwise; }

bool is_ideal(const YJunctionSpec& spec) {
  return spec.left == BranchCouplings::ideal_topological() && spec.middle == BranchCouplings::ideal_topological() &&
         spec.right == BranchCouplings::ideal_trivial();
}

std::vector<DisorderFamily> default_families(ProtocolKind k) {
  if (is_static(k)) return {DisorderFamily::chain};
  if (k == ProtocolKind::entangle) return {DisorderFamily::h1_intra, DisorderFamily::h2_inter, DisorderFamily::added_left};
  return {DisorderFamily::h1_intra, DisorderFamily::h2_inter, DisorderFamily::added_left, DisorderFamily::added_right};
}

Scenario make_scenario(const SweepConfig& cfg) {
  if (is_static(cfg.protocol)) {
    const auto& c = cfg.chain;
    if (!(c.dt > 0.0)) throw ConfigError("static dt must be positive");
    ModelContext chain = build_static_chain(c.qubits, c.g);
    Protocol p = cfg.protocol == ProtocolKind::static_original ? build_static_original(chain, c.t_total, c.g)
                                                                : build_static_stepwise(chain, c.t_total, c.g);
    // the unpaired end site is the zero mode at theta = 0 and ends up on site 0
    StateVector init = basis_state(c.qubits, c.qubits - 1);
    StateVector target = basis_state(c.qubits, 0);
    return {std::move(chain), std::move(p), std::move(init), std::move(target), true, c.dt};
  }

  ModelContext ctx = build_context(cfg.model);
  if (cfg.protocol == ProtocolKind::entangle) {
    Protocol p = build_entangle_protocol(ctx, cfg.periods_per_step);
    StateVector init = basis_state(ctx.dimension(), ctx.resolve({Branch::left, 1, Sublattice::a}));
    StateVector target = ideal_edge_modes(ctx, Branch::left, 1).zero;
    return {std::move(ctx), std::move(p), std::move(init), std::move(target), true, 0.0};
  }

  const auto [n1, n2] = qst_step_counts(ctx);
  if (cfg.periods_per_step < 1) throw ConfigError("periods per step must be positive");
  Protocol p = cfg.protocol == ProtocolKind::qst_stepwise
                   ? build_qst_stepwise(ctx, cfg.periods_per_step)
                   : build_qst_direct(ctx, cfg.total_periods > 0 ? cfg.total_periods : cfg.periods_per_step * (n1 + n2));
  StateVector init, target;
  const bool ideal = is_ideal(cfg.model);
  if (ideal) {
    const EdgeModes start = ideal_edge_modes(ctx, Branch::left, 1);
    const EdgeModes end = transferred_targets(ctx, p.total_periods());
    init = cfg.mode == Mode::zero ? start.zero : start.pi;
    target = cfg.mode == Mode::zero ? end.zero : end.pi;
  } else {
    ProtocolWalker w(ctx, p);
    init = numeric_edge_mode(frozen_floquet(w), branch_region(ctx, Branch::left, 1, (cfg.model.n_left + 1) / 2),
                             cfg.mode);
    w.seek_end();
    target = numeric_edge_mode(frozen_floquet(w), branch_region(ctx, Branch::right, 1, cfg.model.n_right), cfg.mode);
  }
  return {std::move(ctx), std::move(p), std::move(init), std::move(target), ideal, 0.0};
}

EvolutionTrace run_scenario(const Scenario& s, const ModelContext& ctx, const TraceOptions& options) {
  if (s.protocol.clock == Protocol::Clock::stroboscopic) return evolve_protocol(ctx, s.protocol, s.initial, options);
  ContinuousOptions c;
  c.record_every = options.record_every;
  c.spectrum_every = options.spectrum_every;
  c.references = options.references;
  c.reference_names = options.reference_names;
  c.target = options.target;
  return evolve_continuous(ctx, s.protocol, s.dt, s.initial, c);
}

std::uint64_t realization_seed(std::uint64_t master, std::size_t w_index, std::size_t realization) {
  std::uint64_t z = splitmix64(master);
  z = splitmix64(z ^ static_cast<std::uint64_t>(w_index));
  return splitmix64(z ^ (static_cast<std::uint64_t>(realization) * 0x9E3779B97F4A7C15ULL));
}

SweepResult disorder_sweep(const SweepConfig& cfg) {
  validate(cfg);
  const Scenario s = make_scenario(cfg);
  TraceOptions clean_opts;
  clean_opts.record_every = 0;
  clean_opts.target = s.target;
  const EvolutionTrace clean = run_scenario(s, s.ctx, clean_opts);
  const StateVector& reference = clean.final_state;

  SweepResult out;
  out.clean_fidelity = clean.final_fidelity.value_or(0.0);
  out.seed = cfg.seed;
  out.config_hash = config_hash(sweep_config_json(cfg));
  out.total_periods = s.protocol.total_periods();
  out.total_time = total_time(s);

  const auto families = cfg.families.empty() ? default_families(cfg.protocol) : cfg.families;
  const std::size_t nr = static_cast<std::size_t>(cfg.realizations);
  const std::size_t n_tasks = cfg.W.size() * nr;
  std::vector<double> fid(n_tasks, std::numeric_limits<double>::quiet_NaN());

  TraceOptions opts;
  opts.record_every = 0;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      const std::size_t wi = t / nr;
      const std::size_t r = t % nr;
      try {
        const DisorderSpec d{cfg.W[wi], families, realization_seed(cfg.seed, wi, r)};
        const ModelContext ctx = apply_disorder(s.ctx, d);
        fid[t] = fidelity(reference, run_scenario(s, ctx, opts).final_state);
      } catch (const std::exception&) {
        fid[t] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  };
  unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(n_tasks)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t wi = 0; wi < cfg.W.size(); ++wi) {
    SweepPoint pt;
    pt.W = cfg.W[wi];
    pt.fidelities.assign(fid.begin() + static_cast<long>(wi * nr), fid.begin() + static_cast<long>((wi + 1) * nr));
    // shifted sums: identical samples give exactly zero spread
    double shift = std::numeric_limits<double>::quiet_NaN();
    double s1 = 0.0, s2 = 0.0;
    pt.min = std::numeric_limits<double>::infinity();
    pt.max = -std::numeric_limits<double>::infinity();
    for (double f : pt.fidelities) {
      if (std::isnan(f)) {
        ++pt.failed;
        continue;
      }
      if (std::isnan(shift)) shift = f;
      const double d = f - shift;
      s1 += d;
      s2 += d * d;
      ++pt.n;
      pt.min = std::min(pt.min, f);
      pt.max = std::max(pt.max, f);
    }
    if (pt.n > 0) {
      const double m = s1 / pt.n;
      pt.mean = shift + m;
      pt.std = pt.n > 1 ? std::sqrt(std::max(0.0, (s2 - pt.n * m * m) / (pt.n - 1))) : 0.0;
    } else {
      pt.mean = pt.std = pt.min = pt.max = std::numeric_limits<double>::quiet_NaN();
    }
    out.points.push_back(std::move(pt));
  }
  return out;
}

Comparison compare_protocols(const SweepConfig& a, const SweepConfig& b) {
  validate(a);
  validate(b);
  if (a.W != b.W || a.realizations != b.realizations) {
    throw ConfigError("paired comparison needs identical W grids and realization counts");
  }
  const double ta = total_time(make_scenario(a));
  const double tb = total_time(make_scenario(b));
  if (std::abs(ta - tb) > 1e-9 * std::max(ta, tb)) {
    throw ConfigError("paired comparison needs equal total evolution time (" + std::to_string(ta) + " vs " +
                      std::to_string(tb) + ")");
  }
  SweepConfig bb = b;
  bb.seed = a.seed;
  Comparison c;
  c.a = disorder_sweep(a);
  c.b = disorder_sweep(bb);
  for (std::size_t i = 0; i < a.W.size(); ++i) {
    const auto& pa = c.a.points[i];
    const auto& pb = c.b.points[i];
    double sum = 0.0;
    int n = 0;
    for (std::size_t r = 0; r < pa.fidelities.size(); ++r) {
      if (std::isnan(pa.fidelities[r]) || std::isnan(pb.fidelities[r])) continue;
      sum += pa.fidelities[r] - pb.fidelities[r];
      ++n;
    }
    c.mean_difference.push_back(n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN());
    c.verdict.push_back(pa.mean > pb.mean ? 1 : (pa.mean < pb.mean ? -1 : 0));
  }
  return c;
}

std::vector<SpectrumSample> spectrum_trace(const Scenario& s, int sample_every, int expected_zero, int expected_pi) {
  if (sample_every < 1) throw ConfigError("spectrum sampling interval must be positive");
  TraceOptions o;
  o.record_every = 0;
  o.spectrum_every = sample_every;
  o.expected_zero = expected_zero;
  o.expected_pi = expected_pi;
  return run_scenario(s, s.ctx, o).spectra;
}

std::string sweep_config_json(const SweepConfig& cfg) {
  using nlohmann::json;
  auto couplings = [](const BranchCouplings& c) {
    auto z = [](Complex v) { return json::array({v.real(), v.imag()}); };
    return json{{"J1", z(c.J1)}, {"J2", z(c.J2)}, {"j1", z(c.j1)}, {"j2", z(c.j2)}};
  };
  json fam = json::array();
  for (auto f : cfg.families.empty() ? default_families(cfg.protocol) : cfg.families) fam.push_back(to_string(f));
  json j;
  j["protocol"] = to_string(cfg.protocol);
  if (is_static(cfg.protocol)) {
    j["chain"] = {{"qubits", cfg.chain.qubits}, {"g", cfg.chain.g}, {"t_total", cfg.chain.t_total}, {"dt", cfg.chain.dt}};
  } else {
    j["model"] = {{"cells", {{"L", cfg.model.n_left}, {"M", cfg.model.n_middle}, {"R", cfg.model.n_right}}},
                  {"qubits", cfg.model.qubits()},
                  {"couplings",
                   {{"L", couplings(cfg.model.left)}, {"M", couplings(cfg.model.middle)}, {"R", couplings(cfg.model.right)}}}};
    j["periods_per_step"] = cfg.periods_per_step;
    j["total_periods"] = cfg.total_periods;
    j["mode"] = cfg.mode == Mode::zero ? "zero" : "pi";
  }
  j["W"] = cfg.W;
  j["realizations"] = cfg.realizations;
  j["families"] = fam;
  j["seed"] = cfg.seed;
  return j.dump();
}

std::uint64_t config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_sweep_csv(const SweepResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "W,mean_F,std_F,min_F,max_F,n\n" << std::setprecision(12);
  for (const auto& p : r.points) {
    out << p.W << ',' << p.mean << ',' << p.std << ',' << p.min << ',' << p.max << ',' << p.n << '\n';
  }
}

void write_gap_csv(const std::vector<SpectrumSample>& samples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "sample_period,min_gap,n_zero_modes,n_pi_modes\n" << std::setprecision(12);
  for (const auto& s : samples) out << s.period << ',' << s.min_gap << ',' << s.n_zero << ',' << s.n_pi << '\n';
}

}  // namespace fqst
