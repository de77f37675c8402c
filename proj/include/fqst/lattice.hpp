#pragma once

#include "fqst/core.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace fqst {

enum class Branch : std::uint8_t { left, middle, right };
enum class Sublattice : std::uint8_t { a, b };

/// Which half of the drive period a term belongs to. Static chains only use `first`.
enum class Half : std::uint8_t { first, second };

std::string to_string(Branch b);
std::string to_string(Half h);

/// Qubit address. Cell 0 of the M and R branches aliases the junction cell (L, n_L).
struct SiteId {
  Branch branch = Branch::left;
  int cell = 1;
  Sublattice sub = Sublattice::a;

  friend bool operator==(const SiteId&, const SiteId&) = default;
};

/// Complex couplings of one branch: J1/J2 act in the first half-period (intra/inter
/// cell), j1/j2 in the second. Units are hbar = T/2 = 1.
struct BranchCouplings {
  Complex J1{0.0, 0.0};
  Complex J2{0.0, 0.0};
  Complex j1{0.0, 0.0};
  Complex j2{0.0, 0.0};

  /// Topological ideal point: J1 = i pi/2, j2 = i pi, J2 = j1 = 0.
  static BranchCouplings ideal_topological();
  /// Trivial ideal point: J1 = i pi/2, everything else zero.
  static BranchCouplings ideal_trivial();

  friend bool operator==(const BranchCouplings&, const BranchCouplings&) = default;
};

struct YJunctionSpec {
  int n_left = 3;
  int n_middle = 2;
  int n_right = 2;
  BranchCouplings left;
  BranchCouplings middle;
  BranchCouplings right;

  /// L and M topological, R trivial, all at the ideal point.
  static YJunctionSpec ideal(int n_left, int n_middle, int n_right);

  const BranchCouplings& couplings(Branch b) const;
  int cells() const { return n_left + n_middle + n_right; }
  int qubits() const { return 2 * cells(); }
  /// Cells on the L+R transfer path.
  int path_cells() const { return n_left + n_right; }
  /// Throws ConfigError unless n_L is odd and positive and n_M, n_R >= 1.
  void validate() const;
};

/// Disorder families. `h1_intra`: intra-cell bonds of H1 on every branch; `h2_inter`:
/// inter-cell bonds of H2 on L and M; `added_left` / `added_right`: couplings
/// switched on by the transfer protocol on L / R; `chain`: every bond of a static chain.
enum class DisorderFamily : std::uint8_t { none, h1_intra, h2_inter, added_left, added_right, chain };

std::string to_string(DisorderFamily f);
DisorderFamily disorder_family_from_string(const std::string& s);

struct DisorderSpec {
  double strength = 0.0;
  std::vector<DisorderFamily> families;
  std::uint64_t seed = 0;

  static DisorderSpec all_families(double strength, std::uint64_t seed);

  bool targets(DisorderFamily f) const;
  /// Relative deviation drawn uniformly from [-W/2, W/2]. Counter based: a pure
  /// function of (seed, family, ordinal), so draw order never matters.
  double delta(DisorderFamily f, int ordinal) const;
  /// 1 + delta for targeted families, exactly 1 otherwise.
  double factor(DisorderFamily f, int ordinal) const;
};

/// One hopping term, stored once: <p|H|q> = amplitude, <q|H|p> = conj(amplitude).
struct Bond {
  int p = 0;
  int q = 0;
  Complex amplitude{0.0, 0.0};
};

struct BondInfo {
  Branch branch = Branch::left;
  DisorderFamily family = DisorderFamily::none;
  int ordinal = 0;
};

/// Canonical flat indexing. Y-junction order: L cells 1..n_L, then M cells 1..n_M,
/// then R cells 1..n_R, sublattice A before B inside a cell. Open chains use the
/// L branch only; a static chain of odd length ends on a lone A site.
class SiteIndex {
 public:
  enum class Geometry : std::uint8_t { y_junction, chain };

  static SiteIndex y_junction(int n_left, int n_middle, int n_right);
  static SiteIndex chain(int n_sites);

  Geometry geometry() const { return geometry_; }
  int dimension() const { return dimension_; }
  int cells(Branch b) const;

  int resolve(const SiteId& site) const;
  /// Canonical (non-aliased) label of a flat index.
  SiteId label(int index) const;

 private:
  Geometry geometry_ = Geometry::chain;
  int n_left_ = 0;
  int n_middle_ = 0;
  int n_right_ = 0;
  int dimension_ = 0;
};

/// Index map plus the base bonds of H1 and H2. Immutable; every transformation
/// (disorder, overrides) returns a new context.
class ModelContext {
 public:
  ModelContext(SiteIndex sites, std::optional<YJunctionSpec> spec);

  const SiteIndex& sites() const { return sites_; }
  int dimension() const { return sites_.dimension(); }
  int resolve(const SiteId& s) const { return sites_.resolve(s); }
  const std::optional<YJunctionSpec>& spec() const { return spec_; }

  std::span<const Bond> bonds(Half h) const { return bonds_[index(h)]; }
  std::span<const BondInfo> bond_info(Half h) const { return info_[index(h)]; }
  std::optional<std::size_t> find_bond(Half h, int p, int q) const;
  /// Amplitude <p|H_h|q> of the stored bond, or zero.
  Complex amplitude(Half h, int p, int q) const;

  HoppingMatrix hopping_matrix(Half h) const;

  const DisorderSpec& disorder() const { return disorder_; }
  double disorder_factor(DisorderFamily f, int ordinal) const { return disorder_.factor(f, ordinal); }

  /// Adds or replaces the term <p|H|q> = amplitude.
  void set_bond(Half h, int p, int q, Complex amplitude, BondInfo info = {});

 private:
  friend ModelContext apply_disorder(const ModelContext&, const DisorderSpec&);

  static std::size_t index(Half h) { return h == Half::first ? 0 : 1; }
  static std::uint64_t key(int p, int q);

  SiteIndex sites_;
  std::optional<YJunctionSpec> spec_;
  std::vector<Bond> bonds_[2];
  std::vector<BondInfo> info_[2];
  std::unordered_map<std::uint64_t, std::size_t> lookup_[2];
  DisorderSpec disorder_;
};

/// Base H1/H2 of a Y-junction. Every A-B bond enters as <A|H|B> = -J.
ModelContext build_context(const YJunctionSpec& spec);

/// Single open dimerized chain of `n_cells` cells (branch L only).
ModelContext build_open_chain(int n_cells, const BranchCouplings& couplings);

/// Static chain of `n_qubits` sites (odd) with bond i between sites i and i+1,
/// amplitude g (1 + (-1)^i cos theta) at theta = 0: bonds alternate 2g, 0, 2g, ...
/// so the last site is unpaired. Only Half::first is populated.
ModelContext build_static_chain(int n_qubits, double g);

/// New context whose targeted base bonds read J (1 + delta). W < 0 is a ConfigError.
ModelContext apply_disorder(const ModelContext& ctx, const DisorderSpec& disorder);

struct CouplingOverride {
  struct Entry {
    SiteId from;
    SiteId to;
    Half half = Half::second;
    Complex amplitude{0.0, 0.0};
  };
  std::vector<Entry> entries;
};

ModelContext apply_override(const ModelContext& ctx, const CouplingOverride& ov);
/// Override restoring the amplitudes `ctx` holds on the bonds `ov` touches.
CouplingOverride inverse_override(const ModelContext& ctx, const CouplingOverride& ov);

/// Dense Hermitian matrix assembled from a bond list.
HoppingMatrix assemble(int dimension, std::span<const Bond> bonds);

}  // namespace fqst
