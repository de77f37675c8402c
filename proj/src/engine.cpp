#include "fqst/engine.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

namespace fqst {

double wrap_phase(double x) {
  double y = std::remainder(x, 2.0 * pi);  // [-pi, pi]
  if (y <= -pi) y += 2.0 * pi;
  return y;
}

double modular_distance(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * pi)); }

SpectrumResult quasienergy_spectrum(const Eigen::Ref<const PropagatorMatrix>& u, bool with_vectors) {
  if (u.rows() != u.cols()) throw ContractViolation("quasienergy_spectrum needs a square matrix");
  if (u.size() == 0) return {};
  if (unitarity_error(u) > 1e-10) throw ContractViolation("quasienergy_spectrum input is not unitary");
  Eigen::ComplexEigenSolver<PropagatorMatrix> es(u, with_vectors);
  const auto& lambda = es.eigenvalues();
  std::vector<int> order(lambda.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> raw(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) raw[i] = wrap_phase(-std::arg(lambda[i]));
  std::sort(order.begin(), order.end(), [&](int a, int b) { return raw[a] < raw[b]; });
  SpectrumResult r;
  r.phases.reserve(raw.size());
  for (int i : order) r.phases.push_back(raw[i]);
  if (with_vectors) {
    Eigen::MatrixXcd v(u.rows(), u.cols());
    for (std::size_t k = 0; k < order.size(); ++k) v.col(k) = es.eigenvectors().col(order[k]).normalized();
    r.vectors = std::move(v);
  }
  return r;
}

int count_modes(const std::vector<double>& phases, double target, double tol) {
  return static_cast<int>(
      std::count_if(phases.begin(), phases.end(), [&](double p) { return modular_distance(p, target) < tol; }));
}

double gap_to_bulk(const std::vector<double>& phases, int n_zero, int n_pi) {
  const std::size_t n = phases.size();
  std::vector<std::size_t> by_zero(n), by_pi(n);
  std::iota(by_zero.begin(), by_zero.end(), 0);
  std::iota(by_pi.begin(), by_pi.end(), 0);
  std::sort(by_zero.begin(), by_zero.end(),
            [&](auto a, auto b) { return modular_distance(phases[a], 0.0) < modular_distance(phases[b], 0.0); });
  std::sort(by_pi.begin(), by_pi.end(),
            [&](auto a, auto b) { return modular_distance(phases[a], pi) < modular_distance(phases[b], pi); });
  std::vector<bool> edge(n, false);
  for (int i = 0; i < n_zero && i < static_cast<int>(n); ++i) edge[by_zero[i]] = true;
  int taken = 0;
  for (std::size_t i = 0; i < n && taken < n_pi; ++i) {
    if (!edge[by_pi[i]]) {
      edge[by_pi[i]] = true;
      ++taken;
    }
  }
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (edge[i]) continue;
    gap = std::min({gap, modular_distance(phases[i], 0.0), modular_distance(phases[i], pi)});
  }
  return gap;
}

// --- BlockPropagator -----------------------------------------------------------

namespace {

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

bool same_bonds(const std::vector<Bond>& a, const std::vector<Bond>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].p != b[i].p || a[i].q != b[i].q || a[i].amplitude != b[i].amplitude) return false;
  }
  return true;
}

}  // namespace

BlockPropagator::BlockPropagator(int dimension, double scale) : dimension_(dimension), scale_(scale) {}

void BlockPropagator::build(Block& b) const {
  const int n = static_cast<int>(b.sites.size());
  if (n == 2 && b.bonds.size() == 1) {
    const Bond& e = b.bonds.front();
    const Complex t = e.p == 0 ? e.amplitude : std::conj(e.amplitude);  // <0|H|1>
    const double a = std::abs(t);
    const double c = std::cos(scale_ * a);
    const double s = std::sin(scale_ * a);
    b.expm.resize(2, 2);
    b.expm(0, 0) = c;
    b.expm(1, 1) = c;
    b.expm(0, 1) = Complex{0.0, -s} * (t / a);
    b.expm(1, 0) = Complex{0.0, -s} * (std::conj(t) / a);
    return;
  }

  const bool real = std::all_of(b.bonds.begin(), b.bonds.end(), [](const Bond& e) { return e.amplitude.imag() == 0.0; });
  const bool tree = static_cast<int>(b.bonds.size()) == n - 1;
  if (real || tree) {
    // Gauge d with H = D R D^dagger, R real symmetric; identity gauge when already real.
    Eigen::VectorXcd d = Eigen::VectorXcd::Ones(n);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
    if (real) {
      for (const Bond& e : b.bonds) r(e.p, e.q) = r(e.q, e.p) = e.amplitude.real();
    } else {
      std::vector<std::vector<std::pair<int, Complex>>> adj(n);  // neighbor, <u|H|v>
      for (const Bond& e : b.bonds) {
        adj[e.p].push_back({e.q, e.amplitude});
        adj[e.q].push_back({e.p, std::conj(e.amplitude)});
      }
      std::vector<bool> seen(n, false);
      std::vector<int> queue{0};
      seen[0] = true;
      for (std::size_t k = 0; k < queue.size(); ++k) {
        const int u = queue[k];
        for (auto [v, tau] : adj[u]) {
          if (seen[v]) continue;
          seen[v] = true;
          const double mag = std::abs(tau);
          d[v] = d[u] * std::conj(tau) / mag;
          r(u, v) = r(v, u) = mag;
          queue.push_back(v);
        }
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
    const Eigen::VectorXcd ph = es.eigenvalues().unaryExpr([this](double w) { return std::polar(1.0, -scale_ * w); });
    const Eigen::MatrixXcd v = d.asDiagonal() * es.eigenvectors().cast<Complex>();
    b.expm = v * ph.asDiagonal() * v.adjoint();
    return;
  }

  b.expm = hermitian_expm(assemble(n, b.bonds), scale_);
}

void BlockPropagator::update(std::span<const Bond> bonds) {
  DisjointSet ds(dimension_);
  for (const Bond& e : bonds) {
    if (e.p < 0 || e.q < 0 || e.p >= dimension_ || e.q >= dimension_) {
      throw IndexError("bond outside propagator dimension");
    }
    if (e.amplitude != Complex{}) ds.unite(e.p, e.q);
  }
  std::vector<int> root_slot(dimension_, -1);
  std::vector<int> local(dimension_, -1);
  std::vector<Block> next;
  // Roots are the smallest site of each component, so blocks come out ordered.
  for (int i = 0; i < dimension_; ++i) {
    const int r = ds.find(i);
    if (root_slot[r] < 0) {
      root_slot[r] = static_cast<int>(next.size());
      next.emplace_back();
    }
    Block& b = next[root_slot[r]];
    local[i] = static_cast<int>(b.sites.size());
    b.sites.push_back(i);
  }
  for (const Bond& e : bonds) {
    if (e.amplitude == Complex{}) continue;
    next[root_slot[ds.find(e.p)]].bonds.push_back({local[e.p], local[e.q], e.amplitude});
  }
  std::erase_if(next, [](const Block& b) { return b.sites.size() < 2; });

  std::size_t old = 0;
  for (Block& b : next) {
    while (old < blocks_.size() && blocks_[old].sites.front() < b.sites.front()) ++old;
    if (old < blocks_.size() && blocks_[old].sites == b.sites && same_bonds(blocks_[old].bonds, b.bonds)) {
      b.expm = std::move(blocks_[old].expm);
      continue;
    }
    build(b);
    ++rebuilds_;
  }
  blocks_ = std::move(next);
}

void BlockPropagator::apply(StateVector& psi) const {
  if (psi.size() != dimension_) throw ContractViolation("propagator and state dimensions differ");
  for (const Block& b : blocks_) {
    const auto n = static_cast<Eigen::Index>(b.sites.size());
    if (n == 2) {
      const Complex x0 = psi[b.sites[0]];
      const Complex x1 = psi[b.sites[1]];
      psi[b.sites[0]] = b.expm(0, 0) * x0 + b.expm(0, 1) * x1;
      psi[b.sites[1]] = b.expm(1, 0) * x0 + b.expm(1, 1) * x1;
      continue;
    }
    scratch_.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) scratch_[k] = psi[b.sites[k]];
    const Eigen::VectorXcd y = b.expm * scratch_;
    for (Eigen::Index k = 0; k < n; ++k) psi[b.sites[k]] = y[k];
  }
}

PropagatorMatrix BlockPropagator::dense() const {
  PropagatorMatrix u = PropagatorMatrix::Identity(dimension_, dimension_);
  for (const Block& b : blocks_) {
    for (std::size_t i = 0; i < b.sites.size(); ++i) {
      for (std::size_t j = 0; j < b.sites.size(); ++j) u(b.sites[i], b.sites[j]) = b.expm(i, j);
    }
  }
  return u;
}

// --- evolution -----------------------------------------------------------------

double EvolutionTrace::min_gap() const {
  double g = std::numeric_limits<double>::infinity();
  for (const auto& s : spectra) g = std::min(g, s.min_gap);
  return g;
}

PropagatorMatrix frozen_floquet(const ProtocolWalker& walker, Frame frame) {
  const int n = walker.dimension();
  if (frame == Frame::canonical) {
    BlockPropagator p1(n), p2(n);
    p1.update(walker.bonds(Half::first));
    p2.update(walker.bonds(Half::second));
    return p2.dense() * p1.dense();
  }
  return floquet_operator(assemble(n, walker.bonds(Half::first)), assemble(n, walker.bonds(Half::second)), frame);
}

namespace {

TraceRecord make_record(int period, const StateVector& psi, const std::vector<StateVector>& refs) {
  TraceRecord r;
  r.period = period;
  r.norm = psi.norm();
  r.overlaps.reserve(refs.size());
  for (const auto& ref : refs) r.overlaps.push_back(ref.dot(psi));
  return r;
}

void check_state(const StateVector& psi, int dimension, const std::vector<StateVector>& refs) {
  if (psi.size() != dimension) throw ContractViolation("initial state dimension does not match the model");
  for (const auto& r : refs) {
    if (r.size() != dimension) throw ContractViolation("reference state dimension does not match the model");
  }
}

std::vector<std::string> names_for(const std::vector<StateVector>& refs, const std::vector<std::string>& names) {
  std::vector<std::string> out = names;
  for (std::size_t i = out.size(); i < refs.size(); ++i) out.push_back("ref" + std::to_string(i));
  out.resize(refs.size());
  return out;
}

}  // namespace

EvolutionTrace evolve_protocol(const ModelContext& ctx, const Protocol& protocol, const StateVector& psi0,
                               const TraceOptions& options) {
  if (protocol.clock != Protocol::Clock::stroboscopic) {
    throw ConfigError("protocol '" + protocol.name + "' is not stroboscopic");
  }
  const int dim = ctx.dimension();
  check_state(psi0, dim, options.references);
  if (options.target && options.target->size() != dim) throw ContractViolation("target dimension mismatch");

  EvolutionTrace tr;
  tr.reference_names = names_for(options.references, options.reference_names);
  ProtocolWalker walker(ctx, protocol);
  BlockPropagator p1(dim), p2(dim);
  StateVector psi = psi0;
  const double norm0 = psi0.norm();
  int n_zero = options.expected_zero;
  int n_pi = options.expected_pi;

  auto sample_spectrum = [&](int period) {
    p1.update(walker.bonds(Half::first));
    p2.update(walker.bonds(Half::second));
    const PropagatorMatrix u = p2.dense() * p1.dense();
    auto spec = quasienergy_spectrum(u);
    SpectrumSample s;
    s.period = period;
    s.n_zero = count_modes(spec.phases, 0.0);
    s.n_pi = count_modes(spec.phases, pi);
    if (n_zero < 0) n_zero = s.n_zero;
    if (n_pi < 0) n_pi = s.n_pi;
    s.min_gap = gap_to_bulk(spec.phases, n_zero, n_pi);
    if (options.keep_spectra) s.phases = std::move(spec.phases);
    tr.spectra.push_back(std::move(s));
  };

  if (options.record_every > 0) tr.records.push_back(make_record(0, psi, options.references));
  if (options.spectrum_every > 0) sample_spectrum(0);
  if (options.snapshot_every > 0) tr.snapshots.emplace_back(0, psi);

  int period = 0;
  for (std::size_t s = 0; s < protocol.steps.size(); ++s) {
    const ScheduleStep& step = protocol.steps[s];
    for (int m = 1; m <= step.duration; ++m) {
      walker.seek(s, step.fraction(m));
      p1.update(walker.bonds(Half::first));
      p2.update(walker.bonds(Half::second));
      p1.apply(psi);
      p2.apply(psi);
      ++period;
      tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(psi.norm() - norm0));
      if (options.record_every > 0 && period % options.record_every == 0) {
        tr.records.push_back(make_record(period, psi, options.references));
      }
      if (options.spectrum_every > 0 && period % options.spectrum_every == 0) sample_spectrum(period);
      if (options.snapshot_every > 0 && period % options.snapshot_every == 0) tr.snapshots.emplace_back(period, psi);
    }
  }
  if (options.record_every <= 0 || period % options.record_every != 0) {
    tr.records.push_back(make_record(period, psi, options.references));
  }
  tr.periods = period;
  tr.t_final = 2.0 * period;
  tr.final_state = std::move(psi);
  if (options.target) tr.final_fidelity = fidelity(*options.target, tr.final_state);
  return tr;
}

// --- continuous time -----------------------------------------------------------

std::vector<double> static_energies(int dimension, std::span<const Bond> bonds) {
  const HoppingMatrix h = assemble(dimension, bonds);
  Eigen::SelfAdjointEigenSolver<HoppingMatrix> es(h, Eigen::EigenvaluesOnly);
  const auto& w = es.eigenvalues();
  return {w.data(), w.data() + w.size()};
}

namespace {

double zero_gap(const std::vector<double>& energies, int n_zero) {
  std::vector<double> a(energies.size());
  std::transform(energies.begin(), energies.end(), a.begin(), [](double e) { return std::abs(e); });
  std::sort(a.begin(), a.end());
  return static_cast<std::size_t>(n_zero) < a.size() ? a[n_zero] : std::numeric_limits<double>::infinity();
}

template <typename Step, typename Sample>
EvolutionTrace run_slices(int dimension, double t_total, double dt, const StateVector& psi0,
                          const ContinuousOptions& options, Step&& step, Sample&& sample) {
  if (!(dt > 0.0)) throw ConfigError("time step dt must be positive");
  if (!(dt < t_total)) throw ConfigError("time step dt must be smaller than t_total");
  check_state(psi0, dimension, options.references);
  EvolutionTrace tr;
  tr.reference_names = names_for(options.references, options.reference_names);
  StateVector psi = psi0;
  const double norm0 = psi0.norm();
  const auto n_full = static_cast<long>(std::floor(t_total / dt * (1.0 + 1e-12)));
  const double rest = t_total - static_cast<double>(n_full) * dt;
  const long n_slices = n_full + (rest > 1e-12 * t_total ? 1 : 0);
  int n_zero = -1;

  auto do_sample = [&](long k, double t) {
    const auto e = sample(t);
    SpectrumSample s;
    s.period = static_cast<int>(k);
    s.n_zero = static_cast<int>(std::count_if(e.begin(), e.end(), [](double x) { return std::abs(x) < 1e-6; }));
    if (n_zero < 0) n_zero = s.n_zero;
    s.min_gap = zero_gap(e, n_zero);
    tr.spectra.push_back(std::move(s));
  };

  if (options.record_every > 0) tr.records.push_back(make_record(0, psi, options.references));
  if (options.spectrum_every > 0) do_sample(0, 0.0);
  for (long k = 0; k < n_slices; ++k) {
    const double t0 = static_cast<double>(k) * dt;
    const double h = k < n_full ? dt : rest;
    step(psi, t0 + 0.5 * h, h);
    tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(psi.norm() - norm0));
    const long done = k + 1;
    if (options.record_every > 0 && done % options.record_every == 0) {
      tr.records.push_back(make_record(static_cast<int>(done), psi, options.references));
    }
    if (options.spectrum_every > 0 && done % options.spectrum_every == 0) do_sample(done, std::min(t_total, t0 + h));
  }
  if (options.record_every <= 0 || n_slices % options.record_every != 0) {
    tr.records.push_back(make_record(static_cast<int>(n_slices), psi, options.references));
  }
  tr.periods = static_cast<int>(n_slices);
  tr.t_final = t_total;
  tr.final_state = std::move(psi);
  if (options.target) tr.final_fidelity = fidelity(*options.target, tr.final_state);
  return tr;
}

}  // namespace

EvolutionTrace evolve_continuous(int dimension, const BondProvider& provider, double t_total, double dt,
                                 const StateVector& psi0, const ContinuousOptions& options) {
  BlockPropagator full(dimension, dt);
  std::optional<BlockPropagator> tail;
  std::vector<Bond> bonds;
  auto step = [&](StateVector& psi, double t_mid, double h) {
    bonds.clear();
    provider(t_mid, bonds);
    BlockPropagator* p = &full;
    if (h != dt) {
      if (!tail) tail.emplace(dimension, h);
      p = &*tail;
    }
    p->update(bonds);
    p->apply(psi);
  };
  auto sample = [&](double t) {
    bonds.clear();
    provider(t, bonds);
    return static_energies(dimension, bonds);
  };
  return run_slices(dimension, t_total, dt, psi0, options, step, sample);
}

EvolutionTrace evolve_continuous(const MatrixProvider& provider, double t_total, double dt, const StateVector& psi0,
                                 const ContinuousOptions& options) {
  auto step = [&](StateVector& psi, double t_mid, double h) {
    const HoppingMatrix m = provider(t_mid);
    if (m.rows() != psi.size()) throw ContractViolation("provider matrix dimension does not match the state");
    psi = hermitian_expm(m, h) * psi;
  };
  auto sample = [&](double t) {
    Eigen::SelfAdjointEigenSolver<HoppingMatrix> es(provider(t), Eigen::EigenvaluesOnly);
    const auto& w = es.eigenvalues();
    return std::vector<double>(w.data(), w.data() + w.size());
  };
  return run_slices(static_cast<int>(psi0.size()), t_total, dt, psi0, options, step, sample);
}

EvolutionTrace evolve_continuous(const ModelContext& ctx, const Protocol& protocol, double dt,
                                 const StateVector& psi0, const ContinuousOptions& options) {
  if (protocol.clock != Protocol::Clock::continuous) {
    throw ConfigError("protocol '" + protocol.name + "' is not continuous");
  }
  if (protocol.steps.empty()) throw ConfigError("continuous protocol has no steps");
  const double weight = protocol.total_periods();
  if (!(weight > 0.0)) throw ConfigError("continuous protocol has zero total weight");
  std::vector<double> edges{0.0};
  for (const auto& s : protocol.steps) edges.push_back(edges.back() + protocol.t_total * s.duration / weight);
  edges.back() = protocol.t_total;

  ProtocolWalker walker(ctx, protocol);
  auto provider = [&](double t, std::vector<Bond>& bonds) {
    auto it = std::upper_bound(edges.begin(), edges.end(), t);
    std::size_t s = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
    s = std::min(s, protocol.steps.size() - 1);
    const double span = edges[s + 1] - edges[s];
    const double u = span > 0.0 ? std::clamp((t - edges[s]) / span, 0.0, 1.0) : 1.0;
    walker.seek(s, u);
    auto b = walker.bonds(Half::first);
    bonds.assign(b.begin(), b.end());
  };
  return evolve_continuous(ctx.dimension(), provider, protocol.t_total, dt, psi0, options);
}

void write_trace_csv(const EvolutionTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "period";
  for (const auto& n : trace.reference_names) out << ",overlap_re_" << n << ",overlap_im_" << n;
  out << ",min_gap_to_bulk,norm\n";
  out << std::setprecision(12);
  std::size_t si = 0;
  for (const auto& r : trace.records) {
    out << r.period;
    for (const auto& o : r.overlaps) out << ',' << o.real() << ',' << o.imag();
    while (si < trace.spectra.size() && trace.spectra[si].period < r.period) ++si;
    out << ',';
    if (si < trace.spectra.size() && trace.spectra[si].period == r.period) out << trace.spectra[si].min_gap;
    out << ',' << r.norm << '\n';
  }
}

}  // namespace fqst
