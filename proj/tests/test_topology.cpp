#include "fqst/engine.hpp"
#include "fqst/lattice.hpp"
#include "fqst/topology.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace fqst;

namespace {

// Bulk-boundary oracle: count edge modes of a long open chain in real space.
// Each nonzero invariant puts one mode on each end.
std::pair<int, int> real_space_modes(double J1, double j2, int cells = 40) {
  BranchCouplings c;
  c.J1 = {0.0, J1};
  c.j2 = {0.0, j2};
  const ModelContext chain = build_open_chain(cells, c);
  const auto ph = oracle::phases(oracle::floquet(chain));
  return {oracle::count_near(ph, 0.0, 1e-6), oracle::count_near(ph, pi, 1e-6)};
}

}  // namespace

TEST_SUITE("topology") {

TEST_CASE("F(k) matches a dense two-band exponential") {
  const BlochParams p{1.1, 0.3, 0.2, 2.4};
  for (double k : {-3.0, -1.0, 0.0, 0.5, 2.9}) {
    const auto h1 = bloch_hamiltonian(p.ha1, p.hb1, k);
    const auto h2 = bloch_hamiltonian(p.ha2, p.hb2, k);
    const oracle::Mat ref = oracle::expm(h2, 0.5) * oracle::expm(h1, 0.5);
    CHECK((f_matrix(p, k).matrix() - ref).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((g_matrix(p, k) - oracle::expm(h1, 0.5) * oracle::expm(h2, 0.5)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("ideal points") {
  const auto top = winding_invariants(BlochParams::from(BranchCouplings::ideal_topological()));
  CHECK(top.v0 == 1);
  CHECK(top.vpi == 1);
  const auto triv = winding_invariants(BlochParams::from(BranchCouplings::ideal_trivial()));
  CHECK(triv.v0 == 0);
  CHECK(triv.vpi == 0);
}

TEST_CASE("winding agrees with real-space edge-mode counts") {
  const std::vector<std::pair<double, double>> points{{0.5, 1.2}, {1.2, 0.5}, {2.5, 1.8}, {1.8, 2.5},
                                                      {0.3, 2.0}, {2.2, 0.4}, {1.0, 2.9}};
  for (auto [J1, j2] : points) {
    CAPTURE(J1);
    CAPTURE(j2);
    const auto w = winding_invariants(BlochParams::plane(J1, j2));
    const auto [n0, npi] = real_space_modes(J1, j2);
    CHECK(2 * w.v0 == n0);
    CHECK(2 * w.vpi == npi);
    const auto a = analytic_invariants(J1, j2);
    CHECK(a.v0 == w.v0);
    CHECK(a.vpi == w.vpi);
  }
}

TEST_CASE("gap closing and boundaries are reported, not guessed") {
  CHECK_THROWS_AS(winding_invariants(BlochParams::plane(1.0, 1.0)), GapClosingError);
  CHECK_THROWS_AS(analytic_invariants(1.0, 1.0), BoundaryError);
  CHECK_THROWS_AS(analytic_invariants(1.0, pi - 1.0), BoundaryError);
  CHECK_THROWS_AS(analytic_invariants(-0.1, 1.0), ConfigError);
  CHECK_THROWS_AS(winding_invariants(BlochParams::plane(0.5, 1.2), 32), ConfigError);
}

TEST_CASE("winding is stable under grid refinement") {
  const BlochParams p{0.7, 0.2, 0.1, 2.1};
  const auto a = winding_invariants(p, 128);
  const auto b = winding_invariants(p, 4096);
  CHECK(a.v0 == b.v0);
  CHECK(a.vpi == b.vpi);
}

TEST_CASE("small phase diagram") {
  PhaseDiagramConfig cfg;
  cfg.n_J1 = cfg.n_j2 = 12;
  const PhaseDiagram d = phase_diagram(cfg);
  CHECK(d.cells.size() == 144);
  CHECK(d.compared + d.flagged == 144);
  CHECK(d.agreement() == 1.0);
  cfg.n_J1 = 0;
  CHECK_THROWS_AS(phase_diagram(cfg), ConfigError);
}

}
