#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mblast {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Real-valued symbol alphabet per user. BPSK occupies one real dimension per
// user, QPSK (the pi/4-rotated (+-1 +-j) alphabet) occupies two.
enum class Constellation { Bpsk, Qpsk };

inline int bits_per_symbol(Constellation c) { return c == Constellation::Bpsk ? 1 : 2; }

std::string to_string(Constellation c);
Constellation constellation_from_string(const std::string& s);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// K >= M: the iterative detectors have no convergence guarantee there.
class UnsupportedLoadError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace mblast
