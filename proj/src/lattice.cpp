#include "fqst/lattice.hpp"

#include <algorithm>

namespace fqst {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int sub_offset(Sublattice s) { return s == Sublattice::a ? 0 : 1; }

}  // namespace

std::string to_string(Branch b) {
  switch (b) {
    case Branch::left: return "L";
    case Branch::middle: return "M";
    case Branch::right: return "R";
  }
  return "?";
}

std::string to_string(Half h) { return h == Half::first ? "H1" : "H2"; }

std::string to_string(DisorderFamily f) {
  switch (f) {
    case DisorderFamily::none: return "none";
    case DisorderFamily::h1_intra: return "h1_intra";
    case DisorderFamily::h2_inter: return "h2_inter";
    case DisorderFamily::added_left: return "added_left";
    case DisorderFamily::added_right: return "added_right";
    case DisorderFamily::chain: return "chain";
  }
  return "?";
}

DisorderFamily disorder_family_from_string(const std::string& s) {
  for (auto f : {DisorderFamily::h1_intra, DisorderFamily::h2_inter, DisorderFamily::added_left,
                 DisorderFamily::added_right, DisorderFamily::chain}) {
    if (to_string(f) == s) return f;
  }
  throw ConfigError("unknown disorder family '" + s + "'");
}

BranchCouplings BranchCouplings::ideal_topological() {
  return {Complex{0.0, half_pi}, Complex{}, Complex{}, Complex{0.0, pi}};
}

BranchCouplings BranchCouplings::ideal_trivial() { return {Complex{0.0, half_pi}, Complex{}, Complex{}, Complex{}}; }

YJunctionSpec YJunctionSpec::ideal(int n_left, int n_middle, int n_right) {
  YJunctionSpec s;
  s.n_left = n_left;
  s.n_middle = n_middle;
  s.n_right = n_right;
  s.left = BranchCouplings::ideal_topological();
  s.middle = BranchCouplings::ideal_topological();
  s.right = BranchCouplings::ideal_trivial();
  return s;
}

const BranchCouplings& YJunctionSpec::couplings(Branch b) const {
  switch (b) {
    case Branch::left: return left;
    case Branch::middle: return middle;
    case Branch::right: return right;
  }
  return left;
}

void YJunctionSpec::validate() const {
  if (n_left < 1 || n_middle < 1 || n_right < 1) {
    throw ConfigError("branch cell counts must be positive (got L=" + std::to_string(n_left) +
                      ", M=" + std::to_string(n_middle) + ", R=" + std::to_string(n_right) + ")");
  }
  if (n_left % 2 == 0) {
    throw ConfigError("n_L must be odd, got " + std::to_string(n_left));
  }
}

DisorderSpec DisorderSpec::all_families(double strength, std::uint64_t seed) {
  return {strength,
          {DisorderFamily::h1_intra, DisorderFamily::h2_inter, DisorderFamily::added_left,
           DisorderFamily::added_right, DisorderFamily::chain},
          seed};
}

bool DisorderSpec::targets(DisorderFamily f) const {
  return f != DisorderFamily::none && std::find(families.begin(), families.end(), f) != families.end();
}

double DisorderSpec::delta(DisorderFamily f, int ordinal) const {
  std::uint64_t z = splitmix64(seed ^ (0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(f) + 1)));
  z = splitmix64(z ^ (0xABC98388FB8FAC03ULL * (static_cast<std::uint64_t>(ordinal) + 1)));
  const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
  return strength * (u - 0.5);
}

double DisorderSpec::factor(DisorderFamily f, int ordinal) const {
  if (strength == 0.0 || !targets(f)) return 1.0;
  return 1.0 + delta(f, ordinal);
}

// --- SiteIndex -------------------------------------------------------------

SiteIndex SiteIndex::y_junction(int n_left, int n_middle, int n_right) {
  SiteIndex s;
  s.geometry_ = Geometry::y_junction;
  s.n_left_ = n_left;
  s.n_middle_ = n_middle;
  s.n_right_ = n_right;
  s.dimension_ = 2 * (n_left + n_middle + n_right);
  return s;
}

SiteIndex SiteIndex::chain(int n_sites) {
  SiteIndex s;
  s.geometry_ = Geometry::chain;
  s.n_left_ = (n_sites + 1) / 2;
  s.dimension_ = n_sites;
  return s;
}

int SiteIndex::cells(Branch b) const {
  switch (b) {
    case Branch::left: return n_left_;
    case Branch::middle: return n_middle_;
    case Branch::right: return n_right_;
  }
  return 0;
}

int SiteIndex::resolve(const SiteId& site) const {
  auto fail = [&] {
    throw IndexError("site (" + to_string(site.branch) + ", " + std::to_string(site.cell) + ", " +
                     (site.sub == Sublattice::a ? "A" : "B") + ") outside the geometry");
  };
  if (geometry_ == Geometry::chain) {
    if (site.branch != Branch::left || site.cell < 1) fail();
    const int i = 2 * (site.cell - 1) + sub_offset(site.sub);
    if (i >= dimension_) fail();
    return i;
  }
  switch (site.branch) {
    case Branch::left:
      if (site.cell < 1 || site.cell > n_left_) fail();
      return 2 * (site.cell - 1) + sub_offset(site.sub);
    case Branch::middle:
      if (site.cell < 0 || site.cell > n_middle_) fail();
      if (site.cell == 0) return 2 * (n_left_ - 1) + sub_offset(site.sub);
      return 2 * n_left_ + 2 * (site.cell - 1) + sub_offset(site.sub);
    case Branch::right:
      if (site.cell < 0 || site.cell > n_right_) fail();
      if (site.cell == 0) return 2 * (n_left_ - 1) + sub_offset(site.sub);
      return 2 * (n_left_ + n_middle_) + 2 * (site.cell - 1) + sub_offset(site.sub);
  }
  fail();
  return -1;
}

SiteId SiteIndex::label(int index) const {
  if (index < 0 || index >= dimension_) throw IndexError("flat index " + std::to_string(index) + " out of range");
  const Sublattice sub = index % 2 == 0 ? Sublattice::a : Sublattice::b;
  if (geometry_ == Geometry::chain) return {Branch::left, index / 2 + 1, sub};
  if (index < 2 * n_left_) return {Branch::left, index / 2 + 1, sub};
  if (index < 2 * (n_left_ + n_middle_)) return {Branch::middle, (index - 2 * n_left_) / 2 + 1, sub};
  return {Branch::right, (index - 2 * (n_left_ + n_middle_)) / 2 + 1, sub};
}

// --- ModelContext ------------------------------------------------------------

ModelContext::ModelContext(SiteIndex sites, std::optional<YJunctionSpec> spec)
    : sites_(sites), spec_(std::move(spec)) {}

std::uint64_t ModelContext::key(int p, int q) {
  const auto lo = static_cast<std::uint64_t>(std::min(p, q));
  const auto hi = static_cast<std::uint64_t>(std::max(p, q));
  return (lo << 32) | hi;
}

std::optional<std::size_t> ModelContext::find_bond(Half h, int p, int q) const {
  const auto& map = lookup_[index(h)];
  if (auto it = map.find(key(p, q)); it != map.end()) return it->second;
  return std::nullopt;
}

Complex ModelContext::amplitude(Half h, int p, int q) const {
  const auto i = find_bond(h, p, q);
  if (!i) return {};
  const Bond& b = bonds_[index(h)][*i];
  return b.p == p ? b.amplitude : std::conj(b.amplitude);
}

void ModelContext::set_bond(Half h, int p, int q, Complex amplitude, BondInfo info) {
  if (p == q) throw ContractViolation("on-site terms are not hopping bonds");
  if (p < 0 || q < 0 || p >= dimension() || q >= dimension()) {
    throw IndexError("bond (" + std::to_string(p) + ", " + std::to_string(q) + ") outside the geometry");
  }
  const auto hi = index(h);
  if (auto i = find_bond(h, p, q)) {
    Bond& b = bonds_[hi][*i];
    b.amplitude = b.p == p ? amplitude : std::conj(amplitude);
    return;
  }
  lookup_[hi].emplace(key(p, q), bonds_[hi].size());
  bonds_[hi].push_back({p, q, amplitude});
  info_[hi].push_back(info);
}

HoppingMatrix ModelContext::hopping_matrix(Half h) const { return assemble(dimension(), bonds(h)); }

HoppingMatrix assemble(int dimension, std::span<const Bond> bonds) {
  HoppingMatrix m = HoppingMatrix::Zero(dimension, dimension);
  for (const Bond& b : bonds) {
    m(b.p, b.q) = b.amplitude;
    m(b.q, b.p) = std::conj(b.amplitude);
  }
  return m;
}

ModelContext build_context(const YJunctionSpec& spec) {
  spec.validate();
  ModelContext ctx(SiteIndex::y_junction(spec.n_left, spec.n_middle, spec.n_right), spec);
  int ordinal_h1_intra = 0;
  int ordinal_h2_inter = 0;

  for (Branch br : {Branch::left, Branch::middle, Branch::right}) {
    const BranchCouplings& c = spec.couplings(br);
    const int n = ctx.sites().cells(br);
    for (int cell = 1; cell <= n; ++cell) {
      const int a = ctx.resolve({br, cell, Sublattice::a});
      const int b = ctx.resolve({br, cell, Sublattice::b});
      ctx.set_bond(Half::first, a, b, -c.J1, {br, DisorderFamily::h1_intra, ordinal_h1_intra++});
      ctx.set_bond(Half::second, a, b, -c.j1, {br, DisorderFamily::none, 0});
    }
    // Inter-cell bonds B_c -- A_{c+1}; M and R start from the junction cell 0.
    const int first = br == Branch::left ? 1 : 0;
    for (int cell = first; cell < n; ++cell) {
      const int b = ctx.resolve({br, cell, Sublattice::b});
      const int a = ctx.resolve({br, cell + 1, Sublattice::a});
      ctx.set_bond(Half::first, a, b, -c.J2, {br, DisorderFamily::none, 0});
      const DisorderFamily fam = br == Branch::right ? DisorderFamily::none : DisorderFamily::h2_inter;
      ctx.set_bond(Half::second, a, b, -c.j2, {br, fam, fam == DisorderFamily::none ? 0 : ordinal_h2_inter++});
    }
  }
  return ctx;
}

ModelContext build_open_chain(int n_cells, const BranchCouplings& c) {
  if (n_cells < 1) throw ConfigError("open chain needs at least one cell");
  ModelContext ctx(SiteIndex::chain(2 * n_cells), std::nullopt);
  int ordinal_h1_intra = 0;
  int ordinal_h2_inter = 0;
  for (int cell = 1; cell <= n_cells; ++cell) {
    const int a = 2 * (cell - 1);
    ctx.set_bond(Half::first, a, a + 1, -c.J1, {Branch::left, DisorderFamily::h1_intra, ordinal_h1_intra++});
    ctx.set_bond(Half::second, a, a + 1, -c.j1, {Branch::left, DisorderFamily::none, 0});
  }
  for (int cell = 1; cell < n_cells; ++cell) {
    const int b = 2 * (cell - 1) + 1;
    ctx.set_bond(Half::first, b + 1, b, -c.J2, {Branch::left, DisorderFamily::none, 0});
    ctx.set_bond(Half::second, b + 1, b, -c.j2, {Branch::left, DisorderFamily::h2_inter, ordinal_h2_inter++});
  }
  return ctx;
}

ModelContext build_static_chain(int n_qubits, double g) {
  if (n_qubits < 3 || n_qubits % 2 == 0) {
    throw ConfigError("static chain needs an odd qubit count >= 3, got " + std::to_string(n_qubits));
  }
  if (!(g > 0.0)) throw ConfigError("static chain coupling unit g must be positive");
  ModelContext ctx(SiteIndex::chain(n_qubits), std::nullopt);
  for (int i = 0; i + 1 < n_qubits; ++i) {
    const double amp = i % 2 == 0 ? 2.0 * g : 0.0;
    ctx.set_bond(Half::first, i, i + 1, Complex{amp, 0.0}, {Branch::left, DisorderFamily::chain, i});
  }
  return ctx;
}

ModelContext apply_disorder(const ModelContext& ctx, const DisorderSpec& disorder) {
  if (disorder.strength < 0.0) throw ConfigError("disorder strength W must be nonnegative");
  if (ctx.disorder().strength != 0.0) throw ConfigError("context already carries a disorder realization");
  ModelContext out = ctx;
  out.disorder_ = disorder;
  for (std::size_t h = 0; h < 2; ++h) {
    for (std::size_t i = 0; i < out.bonds_[h].size(); ++i) {
      const BondInfo& info = out.info_[h][i];
      out.bonds_[h][i].amplitude *= disorder.factor(info.family, info.ordinal);
    }
  }
  return out;
}

ModelContext apply_override(const ModelContext& ctx, const CouplingOverride& ov) {
  ModelContext out = ctx;
  for (const auto& e : ov.entries) {
    const int p = ctx.resolve(e.from);
    const int q = ctx.resolve(e.to);
    BondInfo info{e.from.branch, DisorderFamily::none, 0};
    if (auto i = ctx.find_bond(e.half, p, q)) info = ctx.bond_info(e.half)[*i];
    out.set_bond(e.half, p, q, e.amplitude, info);
  }
  return out;
}

CouplingOverride inverse_override(const ModelContext& ctx, const CouplingOverride& ov) {
  CouplingOverride inv;
  // Reverse order so repeated targets unwind to the original value.
  for (auto it = ov.entries.rbegin(); it != ov.entries.rend(); ++it) {
    const int p = ctx.resolve(it->from);
    const int q = ctx.resolve(it->to);
    inv.entries.push_back({it->from, it->to, it->half, ctx.amplitude(it->half, p, q)});
  }
  return inv;
}

}  // namespace fqst
