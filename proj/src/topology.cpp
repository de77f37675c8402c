#include "fqst/topology.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace fqst {

namespace {

const Eigen::Matrix2cd tau_x = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
const Eigen::Matrix2cd tau_y = (Eigen::Matrix2cd() << 0, Complex{0, -1}, Complex{0, 1}, 0).finished();

// exp(-i H s) for traceless H = hx tau_x + hy tau_y.
Eigen::Matrix2cd su2_exp(double ha, double hb, double k, double s) {
  const Eigen::Matrix2cd h = bloch_hamiltonian(ha, hb, k);
  const double hx = -(ha + hb * std::cos(k));
  const double hy = hb * std::sin(k);
  const double r = std::hypot(hx, hy);
  if (r == 0.0) return Eigen::Matrix2cd::Identity();
  return std::cos(r * s) * Eigen::Matrix2cd::Identity() - Complex{0, std::sin(r * s) / r} * h;
}

}  // namespace

BlochParams BlochParams::from(const BranchCouplings& c) {
  return {std::abs(c.J1), std::abs(c.J2), std::abs(c.j1), std::abs(c.j2)};
}

Eigen::Matrix2cd bloch_hamiltonian(double ha, double hb, double k) {
  return -(ha + hb * std::cos(k)) * tau_x + hb * std::sin(k) * tau_y;
}

Eigen::Matrix2cd FMatrix::matrix() const { return (Eigen::Matrix2cd() << a, b, c, d).finished(); }

FMatrix f_matrix(const BlochParams& p, double k) {
  const Eigen::Matrix2cd f = su2_exp(p.ha2, p.hb2, k, 0.5) * su2_exp(p.ha1, p.hb1, k, 0.5);
  return {f(0, 0), f(0, 1), f(1, 0), f(1, 1)};
}

Eigen::Matrix2cd g_matrix(const BlochParams& p, double k) {
  return su2_exp(p.ha1, p.hb1, k, 0.5) * su2_exp(p.ha2, p.hb2, k, 0.5);
}

InvariantResult winding_invariants(const BlochParams& p, int grid) {
  if (grid < 64) throw ConfigError("winding grid must have at least 64 points, got " + std::to_string(grid));
  InvariantResult r;
  r.grid = grid;
  r.min_abs_b = r.min_abs_d = std::numeric_limits<double>::infinity();
  double acc_b = 0.0, acc_d = 0.0;
  Complex b_prev, d_prev, b_first, d_first;
  for (int j = 0; j <= grid; ++j) {
    Complex b, d;
    if (j < grid) {
      const double k = -pi + 2.0 * pi * j / grid;
      const FMatrix f = f_matrix(p, k);
      b = f.b;
      d = f.d;
      r.min_abs_b = std::min(r.min_abs_b, std::abs(b));
      r.min_abs_d = std::min(r.min_abs_d, std::abs(d));
      if (std::abs(b) < 1e-8 || std::abs(d) < 1e-8) {
        throw GapClosingError("quasienergy gap closes at k = " + std::to_string(k));
      }
    } else {
      b = b_first;
      d = d_first;
    }
    if (j == 0) {
      b_first = b;
      d_first = d;
    } else {
      acc_b += std::arg(b / b_prev);
      acc_d += std::arg(d / d_prev);
    }
    b_prev = b;
    d_prev = d;
  }
  r.winding_b = acc_b / (2.0 * pi);
  r.winding_d = acc_d / (2.0 * pi);
  const double v0 = std::round(r.winding_b);
  const double vd = std::round(r.winding_d);
  if (std::abs(v0 - r.winding_b) > 1e-3 || std::abs(vd - r.winding_d) > 1e-3) {
    throw GapClosingError("winding did not settle on an integer; refine the k grid");
  }
  r.v0 = static_cast<int>(v0);
  r.vpi = -static_cast<int>(vd);
  return r;
}

AnalyticInvariants analytic_invariants(double J1, double j2) {
  if (J1 < 0.0 || J1 > pi || j2 < 0.0 || j2 > pi) {
    throw ConfigError("analytic invariants need J1, j2 in [0, pi]");
  }
  if (std::abs(j2 - J1) < 1e-6 || std::abs(j2 + J1 - pi) < 1e-6) {
    throw BoundaryError("(J1, j2) lies on a phase boundary");
  }
  return {j2 > J1 ? 1 : 0, j2 + J1 > pi ? 1 : 0};
}

namespace {

double cell_center(double lo, double hi, int n, int i) { return lo + (i + 0.5) * (hi - lo) / n; }

}  // namespace

PhaseDiagram phase_diagram(const PhaseDiagramConfig& cfg) {
  if (cfg.n_J1 < 1 || cfg.n_j2 < 1) throw ConfigError("phase diagram grid must be at least 1x1");
  if (cfg.margin < 0.0) throw ConfigError("boundary margin must be nonnegative");
  PhaseDiagram d;
  d.cells.reserve(static_cast<std::size_t>(cfg.n_J1) * cfg.n_j2);
  for (int i = 0; i < cfg.n_J1; ++i) {
    for (int j = 0; j < cfg.n_j2; ++j) {
      PhaseCell c;
      c.J1 = cell_center(cfg.J1_min, cfg.J1_max, cfg.n_J1, i);
      c.j2 = cell_center(cfg.j2_min, cfg.j2_max, cfg.n_j2, j);
      const double dist = std::min(std::abs(c.j2 - c.J1), std::abs(c.j2 + c.J1 - pi));
      if (dist < std::max(cfg.margin, 1e-6)) {
        c.status = "boundary";
        ++d.flagged;
        try {
          c.numeric = winding_invariants(BlochParams::plane(c.J1, c.j2), cfg.k_grid);
        } catch (const GapClosingError&) {
        }
        d.cells.push_back(std::move(c));
        continue;
      }
      c.analytic = analytic_invariants(c.J1, c.j2);
      try {
        c.numeric = winding_invariants(BlochParams::plane(c.J1, c.j2), cfg.k_grid);
      } catch (const GapClosingError&) {
        c.status = "gap_closed";
        ++d.flagged;
        d.cells.push_back(std::move(c));
        continue;
      }
      ++d.compared;
      const bool same = c.numeric->v0 == c.analytic->v0 && c.numeric->vpi == c.analytic->vpi;
      if (same) ++d.agreed;
      c.status = same ? "ok" : "mismatch";
      d.cells.push_back(std::move(c));
    }
  }
  return d;
}

void write_phase_diagram_csv(const PhaseDiagram& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "J1,j2,v0_numeric,vpi_numeric,v0_analytic,vpi_analytic,status\n" << std::setprecision(10);
  for (const auto& c : d.cells) {
    out << c.J1 << ',' << c.j2 << ',';
    if (c.numeric) out << c.numeric->v0 << ',' << c.numeric->vpi;
    else out << ',';
    out << ',';
    if (c.analytic) out << c.analytic->v0 << ',' << c.analytic->vpi;
    else out << ',';
    out << ',' << c.status << '\n';
  }
}

}  // namespace fqst
