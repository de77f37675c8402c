#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fqst {

using Complex = std::complex<double>;

/// Amplitudes over flat site indices in the single-excitation sector.
using StateVector = Eigen::VectorXcd;
/// Dense one-period (or one-slice) unitary.
using PropagatorMatrix = Eigen::MatrixXcd;
/// Dense Hermitian single-excitation hopping matrix.
using HoppingMatrix = Eigen::MatrixXcd;

inline constexpr double pi = std::numbers::pi;
inline constexpr double half_pi = std::numbers::pi / 2.0;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model, protocol or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Site or bond reference outside the declared geometry.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// A numerical precondition (Hermiticity, unitarity, dimensions) does not hold.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Invariant undefined: the quasienergy gap closes on the sampled k-grid.
class GapClosingError : public Error {
 public:
  using Error::Error;
};

/// Parameter lies on (or too close to) a topological phase boundary.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

}  // namespace fqst
