#pragma once

#include "fqst/lattice.hpp"
#include "fqst/schedule.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fqst {

template <typename Derived>
typename Derived::RealScalar hermiticity_error(const Eigen::MatrixBase<Derived>& h) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Derived>
typename Derived::RealScalar unitarity_error(const Eigen::MatrixBase<Derived>& u) {
  using M = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  return (u.adjoint() * u - M::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

/// exp(-i s H) through the Hermitian eigendecomposition. Real symmetric input
/// takes the real solver. Throws ContractViolation for non-Hermitian input.
template <typename Derived>
Eigen::Matrix<std::complex<typename Derived::RealScalar>, Eigen::Dynamic, Eigen::Dynamic> hermitian_expm(
    const Eigen::MatrixBase<Derived>& h, typename Derived::RealScalar s = 1) {
  using Real = typename Derived::RealScalar;
  using C = std::complex<Real>;
  using Plain = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (h.rows() != h.cols()) throw ContractViolation("hermitian_expm needs a square matrix");
  if (h.size() == 0) return {};
  const Plain m = h;
  const Real scale = std::max(Real(1), m.cwiseAbs().maxCoeff());
  if (hermiticity_error(m) > Real(1e-12) * scale) throw ContractViolation("hermitian_expm input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Plain> es(m);
  const Eigen::Matrix<C, Eigen::Dynamic, 1> phases =
      es.eigenvalues().unaryExpr([s](Real w) { return std::polar(Real(1), -s * w); });
  const Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic> v = es.eigenvectors().template cast<C>();
  return v * phases.asDiagonal() * v.adjoint();
}

enum class Frame : std::uint8_t { canonical, symmetric };

/// canonical: exp(-iH2) exp(-iH1). symmetric: exp(-iH2/2) exp(-iH1) exp(-iH2/2),
/// i.e. F G with F = exp(-iH2/2) exp(-iH1/2) and G = exp(-iH1/2) exp(-iH2/2).
template <typename D1, typename D2>
PropagatorMatrix floquet_operator(const Eigen::MatrixBase<D1>& h1, const Eigen::MatrixBase<D2>& h2,
                                  Frame frame = Frame::canonical) {
  if (h1.rows() != h2.rows() || h1.cols() != h2.cols()) {
    throw ContractViolation("floquet_operator: H1 and H2 dimensions differ");
  }
  if (frame == Frame::canonical) return hermitian_expm(h2) * hermitian_expm(h1);
  const PropagatorMatrix half2 = hermitian_expm(h2, 0.5);
  return half2 * hermitian_expm(h1) * half2;
}

struct SpectrumResult {
  std::vector<double> phases;  // eps T in (-pi, pi], ascending
  std::optional<Eigen::MatrixXcd> vectors;  // columns paired with phases
};

/// Maps an angle onto (-pi, pi].
double wrap_phase(double x);
/// Distance between two phases on the circle.
double modular_distance(double a, double b);

/// Eigenphases eps T = -arg(lambda). Throws ContractViolation when U is not unitary
/// within 1e-10.
SpectrumResult quasienergy_spectrum(const Eigen::Ref<const PropagatorMatrix>& u, bool with_vectors = false);

/// Number of phases within `tol` of `target` (modular).
int count_modes(const std::vector<double>& phases, double target, double tol = 1e-6);
/// Smallest distance from the remaining phases to {0, pi} after discarding the
/// `n_zero` phases closest to 0 and the `n_pi` closest to pi.
double gap_to_bulk(const std::vector<double>& phases, int n_zero, int n_pi);

template <typename D1, typename D2>
Complex overlap(const Eigen::MatrixBase<D1>& psi, const Eigen::MatrixBase<D2>& phi) {
  if (psi.size() != phi.size()) throw ContractViolation("overlap: dimension mismatch");
  return psi.dot(phi);  // conjugates the first argument
}

template <typename D1, typename D2>
double fidelity(const Eigen::MatrixBase<D1>& psi, const Eigen::MatrixBase<D2>& phi) {
  return std::min(1.0, std::abs(overlap(psi, phi)));
}

/// exp(-i s H) for a bond list, kept block diagonal over the connected components
/// of the bond graph. Unchanged components are reused between updates, two-site
/// components use the closed form, and trees are gauged real before diagonalizing.
class BlockPropagator {
 public:
  explicit BlockPropagator(int dimension, double scale = 1.0);

  void update(std::span<const Bond> bonds);
  void apply(StateVector& psi) const;
  PropagatorMatrix dense() const;

  int dimension() const { return dimension_; }
  std::size_t block_count() const { return blocks_.size(); }
  /// Blocks diagonalized (not reused) over the lifetime of the object.
  std::size_t rebuilds() const { return rebuilds_; }

 private:
  struct Block {
    std::vector<int> sites;
    std::vector<Bond> bonds;  // local indices, in input order
    Eigen::MatrixXcd expm;
  };

  void build(Block& b) const;

  int dimension_;
  double scale_;
  std::vector<Block> blocks_;
  std::size_t rebuilds_ = 0;
  mutable Eigen::VectorXcd scratch_;
};

struct TraceOptions {
  std::vector<StateVector> references;
  std::vector<std::string> reference_names;
  int record_every = 1;  // 0: final period only
  int spectrum_every = 0;  // 0: no spectra
  bool keep_spectra = false;  // store full phase lists, not only the gap
  int snapshot_every = 0;
  int expected_zero = -1;  // -1: count at the first spectrum sample
  int expected_pi = -1;
  std::optional<StateVector> target;
};

struct TraceRecord {
  int period = 0;
  std::vector<Complex> overlaps;
  double norm = 1.0;
};

struct SpectrumSample {
  int period = 0;
  double min_gap = 0.0;
  int n_zero = 0;
  int n_pi = 0;
  std::vector<double> phases;
};

struct EvolutionTrace {
  std::vector<std::string> reference_names;
  std::vector<TraceRecord> records;
  std::vector<SpectrumSample> spectra;
  std::vector<std::pair<int, StateVector>> snapshots;
  StateVector final_state;
  std::optional<double> final_fidelity;
  double max_norm_drift = 0.0;
  int periods = 0;
  double t_final = 0.0;

  /// Smallest sampled gap, +inf without samples.
  double min_gap() const;
};

/// Stroboscopic evolution: each period applies exp(-iH2) exp(-iH1) at the couplings
/// the protocol assigns to it. Period m of a step uses the step fraction
/// ScheduleStep::fraction(m).
EvolutionTrace evolve_protocol(const ModelContext& ctx, const Protocol& protocol, const StateVector& psi0,
                               const TraceOptions& options = {});

/// Frozen Floquet operator of the couplings currently held by a walker.
PropagatorMatrix frozen_floquet(const ProtocolWalker& walker, Frame frame = Frame::canonical);

using BondProvider = std::function<void(double t, std::vector<Bond>& bonds)>;
using MatrixProvider = std::function<HoppingMatrix(double t)>;

struct ContinuousOptions {
  int record_every = 0;  // slices between records, 0: final only
  int spectrum_every = 0;  // slices between gap samples
  std::vector<StateVector> references;
  std::vector<std::string> reference_names;
  std::optional<StateVector> target;
};

/// Piecewise-frozen exact stepping psi <- exp(-i H(t_mid) dt) psi. The last slice is
/// shortened to land on t_total. Requires 0 < dt < t_total.
EvolutionTrace evolve_continuous(int dimension, const BondProvider& provider, double t_total, double dt,
                                 const StateVector& psi0, const ContinuousOptions& options = {});
EvolutionTrace evolve_continuous(const MatrixProvider& provider, double t_total, double dt, const StateVector& psi0,
                                 const ContinuousOptions& options = {});

/// Continuous protocol (Protocol::Clock::continuous) on a context: each step
/// occupies t_total * duration / sum(duration).
EvolutionTrace evolve_continuous(const ModelContext& ctx, const Protocol& protocol, double dt,
                                 const StateVector& psi0, const ContinuousOptions& options = {});

/// Instantaneous energies of a static Hamiltonian, ascending.
std::vector<double> static_energies(int dimension, std::span<const Bond> bonds);

/// period,overlap_re_<name>,overlap_im_<name>,...,min_gap_to_bulk,norm
void write_trace_csv(const EvolutionTrace& trace, const std::string& path);

}  // namespace fqst
