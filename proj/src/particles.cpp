#include "picproj/particles.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <ostream>

namespace picproj {

ParticleSet::ParticleSet(const SimplicialMesh& mesh, std::vector<SlotSpec> slots)
    : mesh_(&mesh), slots_(std::move(slots)), buckets_(static_cast<std::size_t>(mesh.num_cells())) {
  int offset = 0;
  for (const auto& s : slots_) {
    if (s.components < 1 || s.components > 3) throw InvalidArgument("slot '" + s.name + "' must have 1 to 3 components");
    if (s.name.empty()) throw InvalidArgument("slot names must be non-empty");
    offsets_.push_back(offset);
    offset += s.components;
  }
  if (offset > Particle::kMaxValues) throw InvalidArgument("slot schema exceeds particle capacity");
}

const SlotSpec& ParticleSet::slot_spec(int slot) const {
  if (slot < 1 || slot >= num_slots()) throw InvalidArgument("slot " + std::to_string(slot) + " does not exist");
  return slots_[slot - 1];
}

int ParticleSet::slot(const std::string& name) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].name == name) return static_cast<int>(i) + 1;
  }
  throw InvalidArgument("no slot named '" + name + "'");
}

Index ParticleSet::size() const {
  Index n = 0;
  for (const auto& b : buckets_) n += static_cast<Index>(b.size());
  return n;
}

Index ParticleSet::relocate(std::span<const Relocation> moves, bool allow_deletion) {
  for (const auto& m : moves) {
    if (m.cell < 0 || m.cell >= mesh_->num_cells() || m.index < 0 || m.index >= cell_count(m.cell)) {
      throw InvalidArgument("relocation refers to a missing particle");
    }
    if (m.receiver == kLostCell) {
      if (!allow_deletion) throw LostParticle("particle left the mesh through a facet without open-boundary handling");
    } else if (m.receiver < 0 || m.receiver >= mesh_->num_cells()) {
      throw InvalidArgument("relocation receiver out of range");
    }
  }
  std::vector<std::pair<Index, Index>> removals;
  removals.reserve(moves.size());
  for (const auto& m : moves) removals.emplace_back(m.cell, m.index);
  std::sort(removals.begin(), removals.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  });
  if (std::adjacent_find(removals.begin(), removals.end()) != removals.end()) {
    throw InvalidArgument("a particle appears twice in one relocation");
  }
  Index deleted = 0;
  for (const auto& m : moves) {
    if (m.receiver == kLostCell) {
      ++deleted;
    } else {
      buckets_[m.receiver].push_back(buckets_[m.cell][m.index]);
    }
  }
  for (const auto& [cell, index] : removals) {
    auto& b = buckets_[cell];
    b.erase(b.begin() + index);
  }
  return deleted;
}

std::optional<std::pair<Index, Index>> ParticleSet::find_misplaced(double tol) const {
  for (Index c = 0; c < mesh_->num_cells(); ++c) {
    for (Index i = 0; i < cell_count(c); ++i) {
      if (!mesh_->contains(c, buckets_[c][i].x, tol)) return std::make_pair(c, i);
    }
  }
  return std::nullopt;
}

void ParticleSet::write_csv(std::ostream& out) const {
  out.precision(17);
  out << "x,y";
  for (const auto& s : slots_) {
    if (s.components == 1) {
      out << ',' << s.name;
    } else {
      for (int j = 0; j < s.components; ++j) out << ',' << s.name << '_' << j;
    }
  }
  out << '\n';
  const int width = offsets_.empty() ? 0 : offsets_.back() + slots_.back().components;
  for (const auto& b : buckets_) {
    for (const auto& p : b) {
      out << p.x.x() << ',' << p.x.y();
      for (int j = 0; j < width; ++j) out << ',' << p.values[j];
      out << '\n';
    }
  }
}

void ParticleSet::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  write_csv(out);
}

CreateResult create_particles(const SimplicialMesh& mesh, std::span<const Vec2> positions,
                              std::vector<SlotSpec> slots, const std::vector<std::vector<double>>& properties) {
  CreateResult result{ParticleSet(mesh, std::move(slots)), {}};
  auto& set = result.set;
  if (static_cast<int>(properties.size()) != set.num_slots() - 1) {
    throw InvalidArgument("one property array is required per slot");
  }
  for (int s = 1; s < set.num_slots(); ++s) {
    if (properties[s - 1].size() != positions.size() * static_cast<std::size_t>(set.components(s))) {
      throw InvalidArgument("property array for slot '" + set.slot_spec(s).name + "' does not match the particle count");
    }
  }
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Index cell = mesh.locate_point(positions[i]);
    if (cell == kNone) {
      result.rejected.push_back(static_cast<Index>(i));
      continue;
    }
    Particle p;
    p.x = positions[i];
    for (int s = 1; s < set.num_slots(); ++s) {
      const int nc = set.components(s);
      for (int j = 0; j < nc; ++j) set.value(p, s, j) = properties[s - 1][i * nc + j];
    }
    set.add(cell, p);
  }
  return result;
}

std::vector<Vec2> generate_lattice(const Rectangle& bounds, Index nx, Index ny) {
  if (nx < 1 || ny < 1) throw InvalidArgument("lattice counts must be positive");
  const Vec2 extent = bounds.upper - bounds.lower;
  std::vector<Vec2> points;
  points.reserve(static_cast<std::size_t>(nx * ny));
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      points.emplace_back(bounds.lower.x() + extent.x() * (i + 0.5) / nx, bounds.lower.y() + extent.y() * (j + 0.5) / ny);
    }
  }
  return points;
}

Vec2 random_point_in_cell(const SimplicialMesh& mesh, Index cell, SplitMix64& rng) {
  double s = rng.uniform();
  double t = rng.uniform();
  if (s + t > 1.0) {
    s = 1.0 - s;
    t = 1.0 - t;
  }
  const auto& c = mesh.cell(cell);
  return s * mesh.vertex(c[0]) + t * mesh.vertex(c[1]) + (1.0 - s - t) * mesh.vertex(c[2]);
}

std::vector<Vec2> generate_random_cell(const SimplicialMesh& mesh, Index particles_per_cell, std::uint64_t seed) {
  if (particles_per_cell < 1) throw InvalidArgument("particles_per_cell must be positive");
  std::vector<Vec2> points;
  points.reserve(static_cast<std::size_t>(mesh.num_cells() * particles_per_cell));
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    SplitMix64 rng(seed, static_cast<std::uint64_t>(c));
    for (Index i = 0; i < particles_per_cell; ++i) points.push_back(random_point_in_cell(mesh, c, rng));
  }
  return points;
}

namespace {

void require_scalar_slot(const ParticleSet& set, int slot) {
  if (slot < 1 || slot >= set.num_slots() || set.components(slot) != 1) {
    throw InvalidArgument("slot " + std::to_string(slot) + " is not a scalar property slot");
  }
}

}  // namespace

void interpolate(ParticleSet& set, const DgField& field, int slot) {
  require_scalar_slot(set, slot);
  if (&field.space->mesh() != &set.mesh()) throw InvalidArgument("field and particles live on different meshes");
  for (Index c = 0; c < set.mesh().num_cells(); ++c) {
    const auto coeffs = field.cell_coefficients(c);
    for (auto& p : set.bucket(c)) set.value(p, slot) = coeffs.dot(field.space->values_at(c, p.x));
  }
}

void increment(ParticleSet& set, const DgField& field_new, const DgField& field_old, int value_slot, int stash_slot,
               double theta, int step) {
  require_scalar_slot(set, value_slot);
  if (stash_slot < 1 || stash_slot >= set.num_slots() || set.components(stash_slot) != 1 || stash_slot == value_slot) {
    throw InvalidArgument("increment needs a separate scalar stash slot");
  }
  if (step < 1) throw InvalidArgument("increment step counter starts at 1");
  if (field_new.space != field_old.space) throw InvalidArgument("increment fields must share a space");
  const double th = step == 1 ? 1.0 : theta;
  const auto& space = *field_new.space;
  for (Index c = 0; c < set.mesh().num_cells(); ++c) {
    const VectorX delta = field_new.cell_coefficients(c) - field_old.cell_coefficients(c);
    for (auto& p : set.bucket(c)) {
      const double d = delta.dot(space.values_at(c, p.x));
      set.value(p, value_slot) += (1.0 - th) * set.value(p, stash_slot) + th * d;
      set.value(p, stash_slot) = d;
    }
  }
}

AddDeleteReport add_delete_sweep(ParticleSet& set, std::span<const SlotInitializer> init, const AddDeleteOptions& options) {
  if (options.p_min < 1 || options.p_min > options.p_max) throw InvalidArgument("need 1 <= p_min <= p_max");
  for (const auto& s : init) require_scalar_slot(set, s.slot);
  AddDeleteReport report;
  const auto& mesh = set.mesh();
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    auto& bucket = set.bucket(c);
    const auto count = static_cast<Index>(bucket.size());
    if (count < options.p_min) {
      SplitMix64 rng(options.seed, static_cast<std::uint64_t>(c));
      for (Index i = count; i < options.p_min; ++i) {
        Particle p;
        p.x = random_point_in_cell(mesh, c, rng);
        for (const auto& s : init) {
          double v = s.field->cell_coefficients(c).dot(s.field->space->values_at(c, p.x));
          if (options.bounds) {
            const auto [lo, hi] = *options.bounds;
            v = v < 0.5 * (lo + hi) ? lo : hi;
          }
          set.value(p, s.slot) = v;
        }
        bucket.push_back(p);
        ++report.added;
      }
    }
    while (static_cast<Index>(bucket.size()) > options.p_max) {
      std::size_t victim = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < bucket.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < bucket.size(); ++j) {
          if (j != i) nearest = std::min(nearest, (bucket[i].x - bucket[j].x).squaredNorm());
        }
        if (nearest < best) {
          best = nearest;
          victim = i;
        }
      }
      bucket.erase(bucket.begin() + static_cast<std::ptrdiff_t>(victim));
      ++report.removed;
    }
  }
  return report;
}

}  // namespace picproj
