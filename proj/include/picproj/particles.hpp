#pragma once

#include "picproj/common.hpp"
#include "picproj/fespace.hpp"
#include "picproj/mesh.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace picproj {

/// splitmix64 stream. Streams keyed by (seed, key) are independent of the
/// order in which they are consumed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed, std::uint64_t key = 0) : state_(seed ^ mix(key + 0x632be59bd9b4e019ULL)) {}

  std::uint64_t next() { return mix(state_ += 0x9e3779b97f4a7c15ULL); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

struct SlotSpec {
  std::string name;
  int components = 1;
};

/// Position (slot 0) plus packed property values. `scratch` is workspace for
/// multi-stage advection and carries no meaning between steps.
struct Particle {
  static constexpr int kMaxValues = 12;
  Vec2 x = Vec2::Zero();
  std::array<double, kMaxValues> values{};
  std::array<double, 8> scratch{};
};

struct Relocation {
  Index cell;      // source bucket
  Index index;     // position in the source bucket
  Index receiver;  // destination bucket or kLostCell
};

/// Particles bucketed by hosting cell. Slot 0 is the position; user slots
/// are numbered from 1 in schema order, each with 1 to 3 components.
class ParticleSet {
 public:
  ParticleSet(const SimplicialMesh& mesh, std::vector<SlotSpec> slots);

  const SimplicialMesh& mesh() const { return *mesh_; }
  /// Number of slots including the position slot.
  int num_slots() const { return static_cast<int>(slots_.size()) + 1; }
  const SlotSpec& slot_spec(int slot) const;
  int components(int slot) const { return slot == 0 ? 2 : slot_spec(slot).components; }
  /// Slot number for a name; throws InvalidArgument when absent.
  int slot(const std::string& name) const;

  Index size() const;
  Index cell_count(Index cell) const { return static_cast<Index>(buckets_[cell].size()); }
  std::span<const Particle> particles(Index cell) const { return buckets_[cell]; }
  std::vector<Particle>& bucket(Index cell) { return buckets_[cell]; }

  double value(const Particle& p, int slot, int component = 0) const { return p.values[offset(slot) + component]; }
  double& value(Particle& p, int slot, int component = 0) const { return p.values[offset(slot) + component]; }

  /// Adds a particle to `cell` without a containment check.
  void add(Index cell, const Particle& p) { buckets_[cell].push_back(p); }

  /// Appends each moved particle to its receiver, then erases it from its
  /// source (descending index order per bucket). Receivers equal to
  /// kLostCell delete the particle when `allow_deletion`, otherwise throw
  /// LostParticle. Returns the number of deleted particles.
  Index relocate(std::span<const Relocation> moves, bool allow_deletion);

  /// First failing (cell, index) of the bucket containment invariant, if any.
  std::optional<std::pair<Index, Index>> find_misplaced(double tol = 1e-10) const;

  /// CSV `x,y,<slot names by component>`, rows ordered by cell then bucket.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;

 private:
  int offset(int slot) const { return offsets_[slot - 1]; }

  const SimplicialMesh* mesh_;
  std::vector<SlotSpec> slots_;
  std::vector<int> offsets_;
  std::vector<std::vector<Particle>> buckets_;
};

struct CreateResult {
  ParticleSet set;
  std::vector<Index> rejected;  // input indices lying outside the mesh
};

/// Builds a set from positions and per-slot property arrays. Array s holds
/// components(s + 1) values per particle, particle-major.
CreateResult create_particles(const SimplicialMesh& mesh, std::span<const Vec2> positions,
                              std::vector<SlotSpec> slots, const std::vector<std::vector<double>>& properties);

/// Cell-centred lattice of nx * ny points over the rectangle.
std::vector<Vec2> generate_lattice(const Rectangle& bounds, Index nx, Index ny);

/// particles_per_cell uniform samples in every cell, cell by cell.
std::vector<Vec2> generate_random_cell(const SimplicialMesh& mesh, Index particles_per_cell, std::uint64_t seed);
/// Uniform sample in one cell from the given stream.
Vec2 random_point_in_cell(const SimplicialMesh& mesh, Index cell, SplitMix64& rng);

/// psi_p <- psi_h(x_p) for a scalar slot.
void interpolate(ParticleSet& set, const DgField& field, int slot);

/// psi_p += (1 - theta) * stash_p + theta * (new - old)(x_p); stash_p is then
/// set to (new - old)(x_p). The stored increment already includes the time
/// step. Step 1 uses theta = 1.
void increment(ParticleSet& set, const DgField& field_new, const DgField& field_old, int value_slot, int stash_slot,
               double theta, int step);

struct SlotInitializer {
  int slot;
  const DgField* field;
};

struct AddDeleteOptions {
  Index p_min = 1;
  Index p_max = 1000;
  /// When set, new values are rounded to the nearer bound.
  std::optional<std::pair<double, double>> bounds;
  std::uint64_t seed = 0;
};

struct AddDeleteReport {
  Index added = 0;
  Index removed = 0;
};

/// Tops up cells below p_min with random particles initialised from the
/// given fields and removes, from cells above p_max, the particles closest
/// to another particle of the same cell.
AddDeleteReport add_delete_sweep(ParticleSet& set, std::span<const SlotInitializer> init, const AddDeleteOptions& options);

}  // namespace picproj
