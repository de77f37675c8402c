#include "fqst/protocols.hpp"

#include <cmath>

namespace fqst {

namespace {

const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

SiteId site(Branch b, int cell, Sublattice s) { return {b, cell, s}; }

const YJunctionSpec& require_spec(const ModelContext& ctx, const char* what) {
  if (!ctx.spec()) throw ConfigError(std::string(what) + " needs a Y-junction context");
  return *ctx.spec();
}

// (a |eg> + b |ge>) on one cell, added into psi.
void add_cell(const ModelContext& ctx, StateVector& psi, Branch br, int cell, Complex a, Complex b) {
  psi[ctx.resolve(site(br, cell, Sublattice::a))] += a;
  psi[ctx.resolve(site(br, cell, Sublattice::b))] += b;
}

Ramp scale_ramp(SiteId from, SiteId to, Profile prof) {
  Ramp r;
  r.kind = Ramp::Kind::scale;
  r.from = from;
  r.to = to;
  r.half = Half::second;
  r.profile = prof;
  return r;
}

Ramp set_ramp(SiteId from, SiteId to, Complex value, Profile prof, DisorderFamily fam, int ordinal,
              Half half = Half::second) {
  Ramp r;
  r.kind = Ramp::Kind::set;
  r.from = from;
  r.to = to;
  r.half = half;
  r.value = value;
  r.profile = prof;
  r.family = fam;
  r.ordinal = ordinal;
  return r;
}

constexpr Profile sin_p{Profile::Tag::sin, 1.0};
constexpr Profile cos_p{Profile::Tag::cos, 1.0};

// Phase I step x: (L, 2x-1, A) -> (L, 2x, B) grows as +j2 sin, inter bond 2x decays.
std::vector<Ramp> phase_one_ramps(Complex j2, int x) {
  using enum Sublattice;
  return {scale_ramp(site(Branch::left, 2 * x, b), site(Branch::left, 2 * x + 1, a), cos_p),
          set_ramp(site(Branch::left, 2 * x - 1, a), site(Branch::left, 2 * x, b), j2, sin_p,
                   DisorderFamily::added_left, x)};
}

// Phase II step x: (R, x-1, A) -> (R, x, B) grows as -j2 sin; cell 0 is the junction.
std::vector<Ramp> phase_two_ramps(Complex j2, int x) {
  using enum Sublattice;
  return {set_ramp(site(Branch::right, x - 1, a), site(Branch::right, x, b), -j2, sin_p,
                   DisorderFamily::added_right, x)};
}

}  // namespace

StateVector basis_state(int dimension, int s) {
  if (s < 0 || s >= dimension) throw IndexError("basis state index out of range");
  StateVector v = StateVector::Zero(dimension);
  v[s] = 1.0;
  return v;
}

EdgeModes ideal_edge_modes(const ModelContext& ctx, Branch branch, int cell) {
  EdgeModes m{StateVector::Zero(ctx.dimension()), StateVector::Zero(ctx.dimension())};
  add_cell(ctx, m.zero, branch, cell, inv_sqrt2, -inv_sqrt2);
  add_cell(ctx, m.pi, branch, cell, inv_sqrt2, inv_sqrt2);
  return m;
}

std::pair<int, int> qst_step_counts(const ModelContext& ctx) {
  const auto& spec = require_spec(ctx, "state transfer");
  spec.validate();
  return {(spec.n_left - 1) / 2, spec.n_right};
}

Protocol build_entangle_protocol(const ModelContext& ctx, int n_per, double power) {
  const auto& spec = require_spec(ctx, "entangling protocol");
  if (spec.n_left < 3) throw ConfigError("entangling protocol needs at least 3 cells on L");
  if (n_per < 1) throw ConfigError("periods per step must be positive");
  if (!(power > 0.0)) throw ConfigError("restore exponent must be positive");
  using enum Sublattice;
  const Complex j2 = spec.left.j2;
  const SiteId a1 = site(Branch::left, 1, a), b1 = site(Branch::left, 1, b);
  const SiteId a2 = site(Branch::left, 2, a), b2 = site(Branch::left, 2, b);
  const SiteId a3 = site(Branch::left, 3, a);
  const Profile sin_n{Profile::Tag::sin_pow, power};
  const Profile cos_n{Profile::Tag::cos_pow, power};

  Protocol p;
  p.name = "entangle";
  p.steps.push_back({"move-out", n_per, Cadence::every_period,
                     {scale_ramp(b2, a3, cos_p), set_ramp(a1, b2, j2, sin_p, DisorderFamily::added_left, 1)}});
  p.steps.push_back({"move-back", n_per, Cadence::every_period,
                     {scale_ramp(b1, a2, cos_p), set_ramp(a2, a3, -j2, sin_p, DisorderFamily::added_left, 2)}});
  p.steps.push_back({"restore", n_per, Cadence::every_other_period,
                     {scale_ramp(b1, a2, sin_n), scale_ramp(b2, a3, sin_n),
                      set_ramp(a1, b2, j2, cos_n, DisorderFamily::added_left, 1),
                      set_ramp(a2, a3, -j2, cos_n, DisorderFamily::added_left, 2)}});
  return p;
}

Protocol build_qst_stepwise(const ModelContext& ctx, int n_per, Sweep sweep) {
  if (n_per < 1) throw ConfigError("periods per step must be positive");
  const auto [n1, n2] = qst_step_counts(ctx);
  const Complex j2 = ctx.spec()->left.j2;
  Protocol p;
  p.name = "qst-stepwise";
  for (int x = 1; x <= n1; ++x) {
    p.steps.push_back({"I." + std::to_string(x), n_per, Cadence::every_period, phase_one_ramps(j2, x), sweep});
  }
  for (int x = 1; x <= n2; ++x) {
    p.steps.push_back({"II." + std::to_string(x), n_per, Cadence::every_period, phase_two_ramps(j2, x), sweep});
  }
  return p;
}

Protocol build_qst_direct(const ModelContext& ctx, int n_total, Sweep sweep) {
  const auto [n1, n2] = qst_step_counts(ctx);
  if (n_total < (n1 > 0 ? 2 : 1)) throw ConfigError("direct transfer needs at least one period per phase");
  const Complex j2 = ctx.spec()->left.j2;
  const int periods_one = n1 == 0 ? 0 : std::max(1, static_cast<int>(std::lround(double(n_total) * n1 / (n1 + n2))));
  Protocol p;
  p.name = "qst-direct";
  if (n1 > 0) {
    ScheduleStep s{"I", periods_one, Cadence::every_period, {}, sweep};
    for (int x = 1; x <= n1; ++x) {
      auto r = phase_one_ramps(j2, x);
      s.ramps.insert(s.ramps.end(), r.begin(), r.end());
    }
    p.steps.push_back(std::move(s));
  }
  ScheduleStep s{"II", n_total - periods_one, Cadence::every_period, {}, sweep};
  for (int x = 1; x <= n2; ++x) {
    auto r = phase_two_ramps(j2, x);
    s.ramps.insert(s.ramps.end(), r.begin(), r.end());
  }
  p.steps.push_back(std::move(s));
  return p;
}

StateVector instantaneous_mode(const ModelContext& ctx, QstPhase phase, int x, double phi, Mode mode) {
  const auto [n1, n2] = qst_step_counts(ctx);
  const double sgn = mode == Mode::zero ? -1.0 : 1.0;  // |ge> coefficient relative to |eg>
  StateVector v = StateVector::Zero(ctx.dimension());
  if (phase == QstPhase::one) {
    if (x < 1 || x > n1) throw IndexError("Phase I step out of range");
    const double c = std::cos(phi) * inv_sqrt2, s = std::sin(phi) * inv_sqrt2;
    add_cell(ctx, v, Branch::left, 2 * x - 1, c, sgn * c);
    add_cell(ctx, v, Branch::left, 2 * x + 1, s, sgn * s);
    return v;
  }
  if (x < 1 || x > n2) throw IndexError("Phase II step out of range");
  const double w = half_pi * std::sin(phi);
  const double c = std::cos(w) * inv_sqrt2, s = std::sin(w) * inv_sqrt2;
  add_cell(ctx, v, Branch::right, x - 1, c, sgn * c);
  // the zero mode changes sign as it crosses a cell; the pi mode does not
  add_cell(ctx, v, Branch::right, x, sgn * s, s);
  return v;
}

EdgeModes transferred_targets(const ModelContext& ctx, int total_periods) {
  const auto [n1, n2] = qst_step_counts(ctx);
  (void)n1;
  EdgeModes m = ideal_edge_modes(ctx, Branch::right, n2);
  if (n2 % 2 == 1) m.zero = -m.zero;
  if (total_periods % 2 == 1) m.pi = -m.pi;
  return m;
}

std::vector<int> branch_region(const ModelContext& ctx, Branch branch, int first, int last) {
  std::vector<int> r;
  for (int c = first; c <= last; ++c) {
    r.push_back(ctx.resolve(site(branch, c, Sublattice::a)));
    r.push_back(ctx.resolve(site(branch, c, Sublattice::b)));
  }
  return r;
}

StateVector numeric_edge_mode(const PropagatorMatrix& u, const std::vector<int>& region, Mode mode, double tol) {
  const auto spec = quasienergy_spectrum(u, true);
  const double target = mode == Mode::zero ? 0.0 : pi;
  std::vector<int> pick;
  for (std::size_t i = 0; i < spec.phases.size(); ++i) {
    if (modular_distance(spec.phases[i], target) < tol) pick.push_back(static_cast<int>(i));
  }
  if (pick.empty()) throw ContractViolation("no Floquet eigenphase within tolerance of the requested edge mode");
  Eigen::MatrixXcd cols(u.rows(), static_cast<Eigen::Index>(pick.size()));
  for (std::size_t k = 0; k < pick.size(); ++k) cols.col(k) = spec.vectors->col(pick[k]);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(cols);
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(cols.rows(), cols.cols());
  Eigen::MatrixXcd qr_rows(static_cast<Eigen::Index>(region.size()), q.cols());
  for (std::size_t k = 0; k < region.size(); ++k) qr_rows.row(k) = q.row(region[k]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(qr_rows.adjoint() * qr_rows);
  StateVector v = q * es.eigenvectors().col(es.eigenvalues().size() - 1);
  v.normalize();
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  v *= std::conj(v[imax]) / std::abs(v[imax]);
  return v;
}

Protocol build_static_original(const ModelContext& chain, double t_total, double g) {
  if (!(t_total > 0.0)) throw ConfigError("t_total must be positive");
  const int n = chain.dimension();
  if (n % 2 == 0) throw ConfigError("static chain needs an odd qubit count");
  Protocol p;
  p.name = "static-original";
  p.clock = Protocol::Clock::continuous;
  p.t_total = t_total;
  ScheduleStep s{"sweep", 1, Cadence::every_period, {}};
  for (int i = 0; i + 1 < n; ++i) {
    const Profile prof{i % 2 == 0 ? Profile::Tag::one_plus_cos : Profile::Tag::one_minus_cos, 1.0};
    s.ramps.push_back(set_ramp(chain.sites().label(i), chain.sites().label(i + 1), g, prof, DisorderFamily::chain, i,
                               Half::first));
  }
  p.steps.push_back(std::move(s));
  return p;
}

Protocol build_static_stepwise(const ModelContext& chain, double t_total, double g) {
  if (!(t_total > 0.0)) throw ConfigError("t_total must be positive");
  const int n = chain.dimension();
  if (n % 2 == 0) throw ConfigError("static chain needs an odd qubit count");
  Protocol p;
  p.name = "static-stepwise";
  p.clock = Protocol::Clock::continuous;
  p.t_total = t_total;
  for (int x = 1; x <= n - 1; ++x) {
    const int i = n - 1 - x;
    const Profile prof{i % 2 == 0 ? Profile::Tag::one_plus_cos : Profile::Tag::one_minus_cos, 1.0};
    p.steps.push_back({"bond." + std::to_string(i), 1, Cadence::every_period,
                       {set_ramp(chain.sites().label(i), chain.sites().label(i + 1), g, prof, DisorderFamily::chain,
                                 i, Half::first)}});
  }
  return p;
}

std::vector<DynamicalPhase> dynamical_phase_trace(const ModelContext& ctx, const StateVector& psi0, int periods) {
  if (periods < 0) throw ConfigError("period count must be nonnegative");
  if (psi0.size() != ctx.dimension()) throw ContractViolation("state dimension does not match the model");
  const int a1 = ctx.resolve({Branch::left, 1, Sublattice::a});
  const int b1 = ctx.resolve({Branch::left, 1, Sublattice::b});
  BlockPropagator p1(ctx.dimension()), p2(ctx.dimension());
  p1.update(ctx.bonds(Half::first));
  p2.update(ctx.bonds(Half::second));
  StateVector psi = psi0;
  std::vector<DynamicalPhase> out;
  out.reserve(periods + 1);
  for (int m = 0; m <= periods; ++m) {
    if (m > 0) {
      p1.apply(psi);
      p2.apply(psi);
    }
    DynamicalPhase d;
    d.period = m;
    if (std::abs(psi[a1]) < 1e-12) d.defined = false;
    else d.alpha = psi[b1] / psi[a1];
    out.push_back(d);
  }
  return out;
}

}  // namespace fqst
