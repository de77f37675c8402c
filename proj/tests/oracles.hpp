#pragma once

// Reference implementations used only by tests. Nothing here calls the library's
// exponential or spectrum code, so agreement is a real cross-check.

#include "fqst/lattice.hpp"
#include "fqst/schedule.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// exp(-i s H) by scaling and squaring a truncated Taylor series
inline Mat expm(const Mat& h, double s = 1.0) {
  const Mat a = std::complex<double>(0.0, -s) * h;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  const Mat x = a / std::pow(2.0, squarings);
  Mat term = Mat::Identity(h.rows(), h.cols()), sum = term;
  for (int k = 1; k <= 24; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

inline Mat hamiltonian(int dim, std::span<const fqst::Bond> bonds) {
  Mat h = Mat::Zero(dim, dim);
  for (const auto& b : bonds) {
    h(b.p, b.q) += b.amplitude;
    h(b.q, b.p) += std::conj(b.amplitude);
  }
  return h;
}

inline Mat floquet(const fqst::ProtocolWalker& w) {
  return expm(hamiltonian(w.dimension(), w.bonds(fqst::Half::second))) *
         expm(hamiltonian(w.dimension(), w.bonds(fqst::Half::first)));
}

inline Mat floquet(const fqst::ModelContext& c) {
  return expm(hamiltonian(c.dimension(), c.bonds(fqst::Half::second))) *
         expm(hamiltonian(c.dimension(), c.bonds(fqst::Half::first)));
}

// eigenphases -arg(lambda) of a unitary
inline std::vector<double> phases(const Mat& u) {
  Eigen::ComplexEigenSolver<Mat> es(u);
  std::vector<double> out;
  for (int i = 0; i < es.eigenvalues().size(); ++i) out.push_back(-std::arg(es.eigenvalues()(i)));
  return out;
}

inline int count_near(const std::vector<double>& ph, double target, double tol) {
  int n = 0;
  for (double p : ph) {
    const double d = std::remainder(p - target, 2.0 * M_PI);
    if (std::abs(d) < tol) ++n;
  }
  return n;
}

// The hand-written ideal modes on cell c of the L branch: (|A> -+ |B>) / sqrt 2
// in the <A|H|B> = -J convention, zero mode with the minus sign.
inline Vec cell_mode(const fqst::ModelContext& ctx, fqst::Branch br, int cell, bool zero) {
  Vec v = Vec::Zero(ctx.dimension());
  const double r = 1.0 / std::sqrt(2.0);
  v(ctx.resolve({br, cell, fqst::Sublattice::a})) = r;
  v(ctx.resolve({br, cell, fqst::Sublattice::b})) = zero ? -r : r;
  return v;
}

}  // namespace oracle
