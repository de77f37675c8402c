#include "fqst/engine.hpp"
#include "fqst/protocols.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace fqst;

TEST_SUITE("protocols") {

TEST_CASE("ideal edge modes are the hand-written cell modes") {
  const ModelContext c = build_context(YJunctionSpec::ideal(5, 3, 4));
  const EdgeModes m = ideal_edge_modes(c, Branch::left, 1);
  CHECK((m.zero - oracle::cell_mode(c, Branch::left, 1, true)).norm() < 1e-15);
  CHECK((m.pi - oracle::cell_mode(c, Branch::left, 1, false)).norm() < 1e-15);
  const oracle::Mat u = oracle::floquet(c);
  CHECK((u * m.zero - m.zero).norm() < 1e-12);
  CHECK((u * m.pi + m.pi).norm() < 1e-12);
}

TEST_CASE("step counts") {
  CHECK(qst_step_counts(build_context(YJunctionSpec::ideal(3, 2, 2))) == std::pair{1, 2});
  CHECK(qst_step_counts(build_context(YJunctionSpec::ideal(11, 4, 9))) == std::pair{5, 9});
}

TEST_CASE("instantaneous modes follow the frozen Floquet operator") {
  const ModelContext c = build_context(YJunctionSpec::ideal(5, 2, 3));
  const auto [n1, n2] = qst_step_counts(c);
  const Protocol p = build_qst_stepwise(c, 1);
  ProtocolWalker w(c, p);
  double worst = 0.0;
  for (int s = 0; s < n1 + n2; ++s) {
    for (double u : {0.0, 0.2, 0.5, 0.77, 1.0}) {
      w.seek(s, u);
      const oracle::Mat U = oracle::floquet(w);
      const QstPhase ph = s < n1 ? QstPhase::one : QstPhase::two;
      const int x = s < n1 ? s + 1 : s - n1 + 1;
      const StateVector z = instantaneous_mode(c, ph, x, half_pi * u, Mode::zero);
      const StateVector q = instantaneous_mode(c, ph, x, half_pi * u, Mode::pi);
      CHECK(z.norm() == doctest::Approx(1.0));
      worst = std::max({worst, (U * z - z).norm(), (U * q + q).norm()});
    }
  }
  CHECK(worst < 1e-12);
  CHECK_THROWS_AS(instantaneous_mode(c, QstPhase::one, n1 + 1, 0.0, Mode::zero), IndexError);
}

TEST_CASE("a slow stepwise transfer lands on the predicted targets with positive overlap") {
  const ModelContext c = build_context(YJunctionSpec::ideal(3, 2, 2));
  for (int n : {40, 41}) {
    const Protocol p = build_qst_stepwise(c, n);
    const EdgeModes start = ideal_edge_modes(c, Branch::left, 1);
    const EdgeModes end = transferred_targets(c, p.total_periods());
    for (bool zero : {true, false}) {
      const StateVector& in = zero ? start.zero : start.pi;
      const StateVector& target = zero ? end.zero : end.pi;
      const EvolutionTrace t = evolve_protocol(c, p, in, {});
      const Complex ov = overlap(target, t.final_state);
      CHECK(ov.real() > 0.999);
      CHECK(std::abs(ov.imag()) < 1e-2);
    }
  }
}

TEST_CASE("direct protocol spends the requested periods") {
  const ModelContext c = build_context(YJunctionSpec::ideal(11, 4, 9));
  const Protocol p = build_qst_direct(c, 1000);
  CHECK(p.total_periods() == 1000);
  REQUIRE(p.steps.size() == 2);
  CHECK(p.steps[0].duration * 9 == doctest::Approx(p.steps[1].duration * 5).epsilon(0.02));
  CHECK(build_qst_stepwise(c, 70).total_periods() == 70 * 14);
}

TEST_CASE("entangling schedule has three steps, the last on every other period") {
  const ModelContext c = build_context(YJunctionSpec::ideal(3, 2, 2));
  const Protocol p = build_entangle_protocol(c, 200);
  REQUIRE(p.steps.size() == 3);
  CHECK(p.steps[2].cadence == Cadence::every_other_period);
  CHECK(p.total_periods() == 600);
  CHECK_THROWS_AS(build_entangle_protocol(build_context(YJunctionSpec::ideal(1, 2, 2)), 10), ConfigError);
}

TEST_CASE("numeric edge mode recovers the ideal mode") {
  const ModelContext c = build_context(YJunctionSpec::ideal(5, 3, 4));
  const PropagatorMatrix u = oracle::floquet(c);
  const auto region = branch_region(c, Branch::left, 1, 3);
  CHECK(fidelity(numeric_edge_mode(u, region, Mode::zero), ideal_edge_modes(c, Branch::left, 1).zero) > 1 - 1e-10);
  CHECK(fidelity(numeric_edge_mode(u, region, Mode::pi), ideal_edge_modes(c, Branch::left, 1).pi) > 1 - 1e-10);
}

TEST_CASE("static protocols") {
  const ModelContext chain = build_static_chain(9, 1.0);
  const Protocol a = build_static_original(chain, 10.0, 1.0);
  const Protocol b = build_static_stepwise(chain, 10.0, 1.0);
  CHECK(a.clock == Protocol::Clock::continuous);
  CHECK(a.steps.size() == 1);
  CHECK(b.steps.size() == 8);
  // at the start both reproduce the base chain, at the end the pairing has flipped
  for (const Protocol* p : {&a, &b}) {
    ProtocolWalker w(chain, *p);
    w.seek_start();
    CHECK((oracle::hamiltonian(9, w.bonds(Half::first)) - chain.hopping_matrix(Half::first)).cwiseAbs().maxCoeff() <
          1e-12);
    w.seek_end();
    const oracle::Mat h = oracle::hamiltonian(9, w.bonds(Half::first));
    CHECK(h.row(0).cwiseAbs().sum() == doctest::Approx(0.0));
    CHECK(std::abs(h(1, 2)) == doctest::Approx(2.0));
  }
}

TEST_CASE("free evolution of an ideal edge mode keeps alpha fixed") {
  const ModelContext c = build_context(YJunctionSpec::ideal(3, 2, 2));
  const auto tr = dynamical_phase_trace(c, ideal_edge_modes(c, Branch::left, 1).zero, 4);
  REQUIRE(tr.size() == 5);
  for (const auto& a : tr) {
    CHECK(a.defined);
    CHECK(std::abs(a.alpha - Complex(-1.0, 0.0)) < 1e-12);
  }
  const auto none = dynamical_phase_trace(c, basis_state(c.dimension(), c.resolve({Branch::right, 2, Sublattice::a})), 1);
  CHECK_FALSE(none.front().defined);
}

}
