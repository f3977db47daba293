#pragma once

#include "picproj/common.hpp"
#include "picproj/mesh.hpp"
#include "picproj/particles.hpp"

#include <string>
#include <utility>
#include <vector>

namespace picproj {

enum class Scheme { kEuler, kRk2, kRk3 };

/// "euler", "rk2" or "rk3".
Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme scheme);

struct AdvectionConfig {
  Scheme scheme = Scheme::kEuler;
  double dt = 0.0;
  VelocityField velocity;
  /// Facet crossings allowed per tracked stage; <= 0 means 4 * cells.
  Index max_hops = 0;
  int threads = 1;
};

/// Straight-line facet walk of one particle with constant velocity.
struct TrackResult {
  Vec2 x;                     // final position (wrapped into the domain)
  Index cell = kNone;         // final host, kLostCell after an open exit
  Vec2 velocity;              // velocity after any reflections
  Vec2 shift = Vec2::Zero();  // sum of periodic translations applied
  double time = 0.0;          // time consumed
  int hops = 0;
  int reflections = 0;
  int wraps = 0;
};

/// Tracks x0 (inside `cell`) with velocity v for dt. The visited cells are
/// appended to `visited` when given (starting with `cell`). Throws
/// RunawayParticle beyond max_hops crossings (<= 0 means 4 * cells).
TrackResult track(const SimplicialMesh& mesh, Index cell, const Vec2& x0, const Vec2& v, double dt, Index max_hops = 0,
                  std::vector<Index>* visited = nullptr);

/// Mirror image of v in the wall with unit normal n.
inline Vec2 apply_closed(const Vec2& v, const Vec2& n) { return v - 2.0 * v.dot(n) * n; }

/// Position on the partner facet and the cell behind it. Throws
/// ConfigurationError for facets without a partner.
std::pair<Vec2, Index> apply_periodic(const SimplicialMesh& mesh, const Vec2& x, Index facet);

struct StepReport {
  Index moved = 0;  // host changes, summed over stages
  Index reflected = 0;
  Index wrapped = 0;
  Index deleted = 0;
};

/// Advances every particle from t to t + dt. Each Runge-Kutta stage moves
/// the particle along a straight segment towards its stage target and
/// relocates once. Property slots are untouched.
StepReport do_step(ParticleSet& set, const AdvectionConfig& config, double t);

}  // namespace picproj
