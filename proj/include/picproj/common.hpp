#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace picproj {

using Index = std::int64_t;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;

/// Velocity a(x, t).
using VelocityField = std::function<Vec2(const Vec2&, double)>;

inline constexpr Index kNone = -1;
/// Receiving-cell value for particles that cannot be tracked on the mesh.
inline constexpr Index kLostCell = std::numeric_limits<Index>::max();

// Error idiom: exceptions. Usage problems derive from std::invalid_argument,
// everything raised by the numerics derives from NumericalError.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PairingFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConfigurationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class LostParticle : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RunawayParticle : public NumericalError {
 public:
  RunawayParticle(const std::string& what, std::vector<Vec2> trace)
      : NumericalError(what), trace_(std::move(trace)) {}
  const std::vector<Vec2>& trace() const { return trace_; }

 private:
  std::vector<Vec2> trace_;
};

class UnderdeterminedCell : public NumericalError {
 public:
  UnderdeterminedCell(Index cell, Index particles)
      : NumericalError("cell " + std::to_string(cell) + " is underdetermined (" +
                       std::to_string(particles) + " particles)"),
        cell_(cell),
        particles_(particles) {}
  Index cell() const { return cell_; }
  Index particles() const { return particles_; }

 private:
  Index cell_;
  Index particles_;
};

class SingularMatrix : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace picproj
