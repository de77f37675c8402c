#include "fqst/config.hpp"
#include "fqst/engine.hpp"
#include "fqst/protocols.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace fqst;

namespace {

std::vector<Bond> random_bonds(int dim, int count, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> site(0, dim - 1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Bond> out;
  while (static_cast<int>(out.size()) < count) {
    const int p = site(rng), q = site(rng);
    if (p == q) continue;
    bool dup = false;
    for (const auto& b : out) dup = dup || (b.p == p && b.q == q) || (b.p == q && b.q == p);
    if (dup) continue;
    out.push_back({p, q, {g(rng), g(rng)}});
  }
  return out;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("hermitian_expm matches a Taylor series") {
  std::mt19937_64 rng(1);
  for (int dim : {2, 5, 12}) {
    const auto bonds = random_bonds(dim, std::min(2 * dim, dim * (dim - 1) / 2), rng);
    const oracle::Mat h = oracle::hamiltonian(dim, bonds);
    CHECK((hermitian_expm(h, 0.7) - oracle::expm(h, 0.7)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("hermitian_expm works in single precision too") {
  Eigen::Matrix2f h;
  h << 0.0f, 1.0f, 1.0f, 0.0f;
  const auto u = hermitian_expm(h, static_cast<float>(half_pi));
  CHECK(std::abs(u(0, 1) - std::complex<float>(0.0f, -1.0f)) < 1e-5f);
}

TEST_CASE("hermitian_expm rejects non-Hermitian input") {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
  h(0, 1) = 1.0;
  CHECK_THROWS_AS(hermitian_expm(h), ContractViolation);
  CHECK_THROWS_AS(hermitian_expm(Eigen::MatrixXcd::Zero(2, 3)), ContractViolation);
}

TEST_CASE("block propagator equals the dense exponential, including reuse") {
  std::mt19937_64 rng(2);
  const int dim = 16;
  BlockPropagator prop(dim);
  for (int round = 0; round < 4; ++round) {
    // sparse bonds so several disconnected blocks appear
    auto bonds = random_bonds(dim, 6, rng);
    prop.update(bonds);
    const oracle::Mat ref = oracle::expm(oracle::hamiltonian(dim, bonds));
    CHECK((prop.dense() - ref).cwiseAbs().maxCoeff() < 1e-12);
    StateVector psi = StateVector::Random(dim).normalized();
    StateVector out = psi;
    prop.apply(out);
    CHECK((out - ref * psi).norm() < 1e-12);
  }
  // same bonds again: nothing is rebuilt
  auto bonds = random_bonds(dim, 6, rng);
  prop.update(bonds);
  const std::size_t before = prop.rebuilds();
  prop.update(bonds);
  CHECK(prop.rebuilds() == before);
}

TEST_CASE("block propagator handles 2x2 blocks, real trees and complex loops") {
  const int dim = 6;
  BlockPropagator prop(dim);
  std::vector<Bond> bonds{{0, 1, {0.0, 1.3}},   // 2x2
                          {2, 3, {0.4, 0.0}}, {3, 4, {0.0, -0.9}},  // tree with phases
                          {4, 5, {0.2, 0.1}}, {5, 2, {-0.3, 0.5}}}; // closes a loop
  prop.update(bonds);
  CHECK((prop.dense() - oracle::expm(oracle::hamiltonian(dim, bonds))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("wrap_phase and modular_distance") {
  CHECK(wrap_phase(pi) == doctest::Approx(pi));
  CHECK(wrap_phase(-pi) == doctest::Approx(pi));
  CHECK(wrap_phase(3 * pi / 2) == doctest::Approx(-pi / 2));
  CHECK(modular_distance(pi - 0.01, -pi + 0.01) == doctest::Approx(0.02));
}

TEST_CASE("quasienergies of a diagonal unitary") {
  Eigen::VectorXd e(4);
  e << 0.3, -1.2, pi, 0.0;
  PropagatorMatrix u = PropagatorMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) u(i, i) = std::exp(Complex(0.0, -e(i)));
  const auto s = quasienergy_spectrum(u);
  REQUIRE(s.phases.size() == 4);
  CHECK(s.phases[0] == doctest::Approx(-1.2));
  CHECK(s.phases[3] == doctest::Approx(pi));
  CHECK(count_modes(s.phases, 0.0) == 1);
  CHECK(count_modes(s.phases, pi) == 1);
  CHECK(gap_to_bulk(s.phases, 1, 1) == doctest::Approx(0.3));
  u(0, 1) = 0.5;
  CHECK_THROWS_AS(quasienergy_spectrum(u), ContractViolation);
}

TEST_CASE("canonical and symmetric frames share a spectrum") {
  const ModelContext c = apply_disorder(build_context(nonideal_spec(5, 3, 4)), DisorderSpec::all_families(0.3, 9));
  const HoppingMatrix h1 = c.hopping_matrix(Half::first), h2 = c.hopping_matrix(Half::second);
  const auto a = quasienergy_spectrum(floquet_operator(h1, h2, Frame::canonical)).phases;
  const auto b = quasienergy_spectrum(floquet_operator(h1, h2, Frame::symmetric)).phases;
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(modular_distance(a[i], b[i]) < 1e-10);
}

TEST_CASE("stroboscopic evolution matches dense products period by period") {
  const ModelContext c = build_context(YJunctionSpec::ideal(3, 2, 2));
  const Protocol p = build_qst_stepwise(c, 3);
  const StateVector psi0 = ideal_edge_modes(c, Branch::left, 1).zero;
  TraceOptions o;
  o.snapshot_every = 1;
  const EvolutionTrace t = evolve_protocol(c, p, psi0, o);
  ProtocolWalker w(c, p);
  oracle::Vec psi = psi0;
  int period = 0;
  for (std::size_t s = 0; s < p.steps.size(); ++s) {
    for (int m = 1; m <= p.steps[s].duration; ++m) {
      w.seek(s, p.steps[s].fraction(m));
      psi = oracle::floquet(w) * psi;
      ++period;
    }
  }
  CHECK(t.periods == period);
  CHECK((t.final_state - psi).norm() < 1e-12);
  CHECK(t.snapshots.size() == static_cast<std::size_t>(period) + 1);  // period 0 included
}

TEST_CASE("continuous evolution of a static Hamiltonian is exact") {
  std::mt19937_64 rng(3);
  const int dim = 7;
  const auto bonds = random_bonds(dim, 10, rng);
  StateVector psi0 = StateVector::Zero(dim);
  psi0(0) = 1.0;
  const EvolutionTrace t = evolve_continuous(dim, [&](double, std::vector<Bond>& b) { b = bonds; }, 2.35, 0.1, psi0);
  CHECK((t.final_state - oracle::expm(oracle::hamiltonian(dim, bonds), 2.35) * psi0).norm() < 1e-11);
  CHECK(t.t_final == doctest::Approx(2.35));
  CHECK_THROWS_AS(evolve_continuous(dim, [&](double, std::vector<Bond>& b) { b = bonds; }, 1.0, 0.0, psi0),
                  ConfigError);
}

TEST_CASE("trace records overlaps with references") {
  const ModelContext c = build_context(YJunctionSpec::ideal(3, 2, 2));
  const EdgeModes m = ideal_edge_modes(c, Branch::left, 1);
  TraceOptions o;
  o.references = {m.zero, m.pi};
  o.reference_names = {"zero", "pi"};
  o.record_every = 1;
  o.spectrum_every = 1;
  const EvolutionTrace t = evolve_protocol(c, build_qst_stepwise(c, 4), m.zero, o);
  REQUIRE(!t.records.empty());
  CHECK(std::abs(t.records.front().overlaps[0]) == doctest::Approx(1.0));
  CHECK(t.max_norm_drift < 1e-12);
  CHECK(t.min_gap() == doctest::Approx(half_pi).epsilon(1e-9));
}

}
