#pragma once

#include "fqst/lattice.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fqst {

/// Real Bloch amplitudes: (ha1, hb1) for the first half-period, (ha2, hb2) for the second.
/// Lattice couplings map by modulus, h = |J|; on a chain the coupling phases are a
/// sublattice gauge and drop out.
struct BlochParams {
  double ha1 = 0.0;
  double hb1 = 0.0;
  double ha2 = 0.0;
  double hb2 = 0.0;

  static BlochParams from(const BranchCouplings& c);
  /// The J2 = j1 = 0 plane.
  static BlochParams plane(double J1, double j2) { return {J1, 0.0, 0.0, j2}; }
};

/// -(ha + hb cos k) tau_x + hb sin k tau_y.
Eigen::Matrix2cd bloch_hamiltonian(double ha, double hb, double k);

/// Entries of F(k) = exp(-i H2(k)/2) exp(-i H1(k)/2) in the tau_z basis.
struct FMatrix {
  Complex a, b, c, d;
  Eigen::Matrix2cd matrix() const;
};

FMatrix f_matrix(const BlochParams& p, double k);
/// G(k) = exp(-i H1(k)/2) exp(-i H2(k)/2).
Eigen::Matrix2cd g_matrix(const BlochParams& p, double k);

struct InvariantResult {
  int v0 = 0;
  int vpi = 0;
  int grid = 0;
  double winding_b = 0.0;  // accumulated phase / 2 pi, before rounding
  double winding_d = 0.0;
  double min_abs_b = 0.0;
  double min_abs_d = 0.0;
};

/// v0 = winding of b(k); vpi = -winding of d(k), so the ideal topological point
/// reads (1, 1). Grid k_j = -pi + 2 pi j / M. Throws GapClosingError if |b| or |d|
/// drops below 1e-8 on the grid, ConfigError if M < 64.
InvariantResult winding_invariants(const BlochParams& p, int grid = 1024);

struct AnalyticInvariants {
  int v0 = 0;
  int vpi = 0;
};

/// Closed form on the J2 = j1 = 0 plane: v0 = [j2 > J1], vpi = [j2 + J1 > pi].
/// Magnitudes must lie in [0, pi]; within 1e-6 of a boundary line -> BoundaryError.
AnalyticInvariants analytic_invariants(double J1, double j2);

struct PhaseDiagramConfig {
  double J1_min = 0.0, J1_max = pi;
  double j2_min = 0.0, j2_max = pi;
  int n_J1 = 50;
  int n_j2 = 50;
  double margin = 0.02;
  int k_grid = 1024;
};

struct PhaseCell {
  double J1 = 0.0;
  double j2 = 0.0;
  std::optional<InvariantResult> numeric;
  std::optional<AnalyticInvariants> analytic;
  std::string status;  // ok | mismatch | boundary | gap_closed
};

struct PhaseDiagram {
  std::vector<PhaseCell> cells;
  int compared = 0;
  int agreed = 0;
  int flagged = 0;

  double agreement() const { return compared == 0 ? 1.0 : static_cast<double>(agreed) / compared; }
};

/// Cell-centered raster over the two ranges; a range with min == max collapses to
/// that value. Points within `margin` of a boundary line are flagged and skipped.
PhaseDiagram phase_diagram(const PhaseDiagramConfig& cfg);

/// J1,j2,v0_numeric,vpi_numeric,v0_analytic,vpi_analytic,status
void write_phase_diagram_csv(const PhaseDiagram& d, const std::string& path);

}  // namespace fqst
