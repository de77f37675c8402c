#pragma once

#include "fqst/engine.hpp"
#include "fqst/schedule.hpp"

#include <vector>

namespace fqst {

struct EdgeModes {
  StateVector zero;  // (|eg> - |ge>) / sqrt 2
  StateVector pi;    // (|eg> + |ge>) / sqrt 2
};

enum class Mode : std::uint8_t { zero, pi };
enum class QstPhase : std::uint8_t { one, two };

/// Cell-localized zero and pi modes of an ideal branch; |eg> excites sublattice A.
EdgeModes ideal_edge_modes(const ModelContext& ctx, Branch branch, int cell);

/// Exponent of the restore ramps in the third entangling step. Inter-cell couplings
/// return as sin^n(phi) while the added couplings decay as cos^n(phi); at this n the
/// geometric rotation accumulated over the step is pi/4 in the (|0>, |pi>) plane.
inline constexpr double restore_power = 2.6336;

/// Three steps of n_per periods. Step 1 moves the cell-1 modes to cell 3, step 2
/// brings them back through an A2-A3 bond, step 3 restores the base couplings
/// updating every other period. Needs >= 3 cells on L.
Protocol build_entangle_protocol(const ModelContext& ctx, int n_per, double power = restore_power);

/// (n_L - 1)/2 Phase I steps along L then n_R Phase II steps along R, n_per each.
/// The default smooth sweep removes the kick a linear ramp gives at step edges.
Protocol build_qst_stepwise(const ModelContext& ctx, int n_per, Sweep sweep = Sweep::smooth);

/// Both phases in one step each with a shared phi. Periods are split between the
/// phases in proportion to their stepwise step counts.
Protocol build_qst_direct(const ModelContext& ctx, int n_total, Sweep sweep = Sweep::smooth);

/// Number of Phase I and Phase II steps for a context.
std::pair<int, int> qst_step_counts(const ModelContext& ctx);

/// Closed-form mode in the middle of QST step x (1-based) at angle phi.
StateVector instantaneous_mode(const ModelContext& ctx, QstPhase phase, int x, double phi, Mode mode);

/// Where an ideal run of `protocol` (stepwise or direct QST) sends the L-edge modes,
/// including the sign the pi mode picks up over `total_periods`.
EdgeModes transferred_targets(const ModelContext& ctx, int total_periods);

/// Frozen Floquet eigenvector nearest eps T = 0 (or pi) with the largest weight on
/// `region` (flat indices). Phase fixed so the largest-modulus entry is real positive.
StateVector numeric_edge_mode(const PropagatorMatrix& u, const std::vector<int>& region, Mode mode,
                              double tol = 0.1);

/// Flat indices of cells [first, last] of a branch.
std::vector<int> branch_region(const ModelContext& ctx, Branch branch, int first, int last);

/// Static chain transfer: every bond follows g (1 + (-1)^i cos theta), theta 0 -> pi
/// over t_total in a single sweep.
Protocol build_static_original(const ModelContext& chain, double t_total, double g);
/// One bond per step, starting next to the unpaired end: N_q - 1 equal steps.
Protocol build_static_stepwise(const ModelContext& chain, double t_total, double g);

struct DynamicalPhase {
  int period = 0;
  Complex alpha{0.0, 0.0};  // psi(B1) / psi(A1)
  bool defined = true;
};

/// Free evolution under the base couplings; alpha is the |ge>_1 to |eg>_1 amplitude ratio.
std::vector<DynamicalPhase> dynamical_phase_trace(const ModelContext& ctx, const StateVector& psi0, int periods);

/// Single-site excitation.
StateVector basis_state(int dimension, int site);

}  // namespace fqst
