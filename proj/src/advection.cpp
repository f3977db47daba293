#include "picproj/advection.hpp"

#include "picproj/parallel.hpp"

#include <array>
#include <limits>

namespace picproj {

Scheme parse_scheme(const std::string& name) {
  if (name == "euler") return Scheme::kEuler;
  if (name == "rk2") return Scheme::kRk2;
  if (name == "rk3") return Scheme::kRk3;
  throw InvalidArgument("unknown advection scheme '" + name + "'");
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kEuler:
      return "euler";
    case Scheme::kRk2:
      return "rk2";
    case Scheme::kRk3:
      return "rk3";
  }
  return "unknown";
}

std::pair<Vec2, Index> apply_periodic(const SimplicialMesh& mesh, const Vec2& x, Index facet) {
  const Index partner = mesh.periodic_partner(facet);
  if (partner == kNone) {
    throw ConfigurationError("periodic facet " + std::to_string(facet) + " has no partner; call pair_periodic first");
  }
  return {x + mesh.periodic_translation(facet), mesh.facet_cells(partner)[0]};
}

TrackResult track(const SimplicialMesh& mesh, Index cell, const Vec2& x0, const Vec2& v, double dt, Index max_hops,
                  std::vector<Index>* visited) {
  if (max_hops <= 0) max_hops = 4 * mesh.num_cells();
  TrackResult r;
  r.x = x0;
  r.cell = cell;
  r.velocity = v;
  if (visited) visited->push_back(cell);

  constexpr int kTrace = 32;
  std::array<Vec2, kTrace> recent;
  double remaining = dt;
  while (true) {
    const auto& facets = mesh.cell_facets(r.cell);
    int exit = -1;
    double t_exit = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      const Vec2 n = mesh.outward_normal(r.cell, i);
      const double vn = r.velocity.dot(n);
      if (vn <= 0.0) continue;
      const double b = std::max(0.0, (mesh.facet_midpoint(facets[i]) - r.x).dot(n));
      const double ti = b / vn;
      if (ti < t_exit) {
        t_exit = ti;
        exit = i;
      }
    }
    if (exit < 0 || t_exit >= remaining) {
      r.x += remaining * r.velocity;
      r.time += remaining;
      return r;
    }
    r.x += t_exit * r.velocity;
    r.time += t_exit;
    remaining -= t_exit;
    recent[r.hops % kTrace] = r.x;
    if (++r.hops > max_hops) {
      std::vector<Vec2> trace{x0};
      for (int j = std::max(0, r.hops - kTrace); j < r.hops; ++j) trace.push_back(recent[j % kTrace]);
      throw RunawayParticle("particle exceeded " + std::to_string(max_hops) + " facet crossings", std::move(trace));
    }

    const Index f = facets[exit];
    if (!mesh.is_boundary(f)) {
      r.cell = mesh.neighbor(r.cell, exit);
    } else {
      switch (mesh.boundary_marker(f)) {
        case marker::kOpen:
          r.cell = kLostCell;
          r.time += remaining;
          if (visited) visited->push_back(kLostCell);
          return r;
        case marker::kPeriodic: {
          const auto [x, c] = apply_periodic(mesh, r.x, f);
          r.x = x;
          r.shift += mesh.periodic_translation(f);
          r.cell = c;
          ++r.wraps;
          break;
        }
        default:
          r.velocity = apply_closed(r.velocity, mesh.outward_normal(r.cell, exit));
          ++r.reflections;
          break;
      }
    }
    if (visited && visited->back() != r.cell) visited->push_back(r.cell);
  }
}

namespace {

// scratch layout: [0,1] step origin, [2,3] accumulated periodic shift,
// [4,5] first stage velocity, [6,7] second stage velocity
Vec2 scratch_vec(const Particle& p, int at) { return {p.scratch[at], p.scratch[at + 1]}; }
void set_scratch(Particle& p, int at, const Vec2& v) {
  p.scratch[at] = v.x();
  p.scratch[at + 1] = v.y();
}

int stage_count(Scheme s) { return s == Scheme::kEuler ? 1 : s == Scheme::kRk2 ? 2 : 3; }

// Target position (unwrapped, relative to the step origin) of one stage;
// records stage velocities in scratch.
Vec2 stage_target(Particle& p, Scheme scheme, int stage, const VelocityField& a, double t, double dt) {
  const Vec2 origin = scratch_vec(p, 0);
  switch (stage) {
    case 0: {
      const Vec2 k1 = a(p.x, t);
      set_scratch(p, 4, k1);
      return origin + (scheme == Scheme::kRk2 ? 0.5 * dt : dt) * k1;
    }
    case 1: {
      const Vec2 k1 = scratch_vec(p, 4);
      if (scheme == Scheme::kRk2) return origin + dt * a(p.x, t + 0.5 * dt);
      const Vec2 k2 = a(p.x, t + dt);
      set_scratch(p, 6, k2);
      return origin + 0.25 * dt * (k1 + k2);
    }
    default: {
      const Vec2 k1 = scratch_vec(p, 4);
      const Vec2 k2 = scratch_vec(p, 6);
      const Vec2 k3 = a(p.x, t + 0.5 * dt);
      return origin + (dt / 6.0) * (k1 + k2 + 4.0 * k3);
    }
  }
}

struct ChunkResult {
  std::vector<Relocation> moves;
  StepReport report;
};

}  // namespace

StepReport do_step(ParticleSet& set, const AdvectionConfig& config, double t) {
  if (!(config.dt > 0.0)) throw InvalidArgument("advection time step must be positive");
  if (!config.velocity) throw InvalidArgument("advection needs a velocity field");
  const auto& mesh = set.mesh();
  const Index cells = mesh.num_cells();
  const int threads = std::max(1, config.threads);
  StepReport total;

  for (Index c = 0; c < cells; ++c) {
    for (auto& p : set.bucket(c)) {
      set_scratch(p, 0, p.x);
      set_scratch(p, 2, Vec2::Zero());
    }
  }

  for (int stage = 0; stage < stage_count(config.scheme); ++stage) {
    std::vector<ChunkResult> chunks(static_cast<std::size_t>(threads));
    parallel_for(cells, threads, [&](Index begin, Index end, int chunk) {
      ChunkResult& out = chunks[static_cast<std::size_t>(chunk)];
      for (Index c = begin; c < end; ++c) {
        auto& bucket = set.bucket(c);
        for (Index i = 0; i < static_cast<Index>(bucket.size()); ++i) {
          Particle& p = bucket[i];
          const Vec2 target = stage_target(p, config.scheme, stage, config.velocity, t, config.dt);
          const Vec2 unwrapped = p.x - scratch_vec(p, 2);
          const Vec2 v = (target - unwrapped) / config.dt;
          const TrackResult r = track(mesh, c, p.x, v, config.dt, config.max_hops);
          p.x = r.x;
          set_scratch(p, 2, scratch_vec(p, 2) + r.shift);
          out.report.reflected += r.reflections;
          out.report.wrapped += r.wraps;
          if (r.cell != c) {
            out.moves.push_back({c, i, r.cell});
            if (r.cell != kLostCell) ++out.report.moved;
          }
        }
      }
    });
    std::vector<Relocation> moves;
    for (auto& ch : chunks) {
      moves.insert(moves.end(), ch.moves.begin(), ch.moves.end());
      total.moved += ch.report.moved;
      total.reflected += ch.report.reflected;
      total.wrapped += ch.report.wrapped;
    }
    total.deleted += set.relocate(moves, true);
  }
  return total;
}

}  // namespace picproj
