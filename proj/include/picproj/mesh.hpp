#pragma once

#include "picproj/common.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace picproj {

/// Facet markers used for particle boundary behaviour.
namespace marker {
inline constexpr int kInterior = 0;
inline constexpr int kClosed = 1;
inline constexpr int kOpen = 2;
inline constexpr int kPeriodic = 3;
}  // namespace marker

struct Rectangle {
  Vec2 lower{0.0, 0.0};
  Vec2 upper{1.0, 1.0};
};

/// Opposing boundaries `coordinate[axis] == lower` and `coordinate[axis] == upper`.
struct PeriodicLimits {
  int axis = 0;
  double lower = 0.0;
  double upper = 1.0;
};

/// Triangulation of a 2D domain with the facet data needed by facet-walk
/// tracking and facet-based assembly.
///
/// Cells are stored counter-clockwise. Local facet `i` of a cell is the edge
/// opposite local vertex `i`. Facet vertices are stored with the lower vertex
/// id first. Facet normals carry one global orientation: from the lower to
/// the higher adjacent cell id, outward for boundary facets.
///
/// Geometry and connectivity are immutable after construction; boundary
/// markers and periodic pairing are configured afterwards and must be final
/// before function spaces are built on the mesh.
class SimplicialMesh {
 public:
  SimplicialMesh() = default;
  SimplicialMesh(std::vector<Vec2> vertices, std::vector<std::array<Index, 3>> cells);

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_cells() const { return static_cast<Index>(cells_.size()); }
  Index num_facets() const { return static_cast<Index>(facets_.size()); }

  const Vec2& vertex(Index v) const { return vertices_[v]; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::array<Index, 3>& cell(Index c) const { return cells_[c]; }
  const std::vector<std::array<Index, 3>>& cells() const { return cells_; }
  const std::array<Index, 2>& facet(Index f) const { return facets_[f]; }

  /// Adjacent cells in ascending order; the second entry is kNone on the boundary.
  const std::array<Index, 2>& facet_cells(Index f) const { return facet_cells_[f]; }
  Index num_facet_cells(Index f) const { return facet_cells_[f][1] == kNone ? 1 : 2; }
  bool is_boundary(Index f) const { return facet_cells_[f][1] == kNone; }
  const Vec2& facet_midpoint(Index f) const { return facet_midpoint_[f]; }
  const Vec2& facet_normal(Index f) const { return facet_normal_[f]; }
  double facet_length(Index f) const { return facet_length_[f]; }
  const std::array<Index, 3>& cell_facets(Index c) const { return cell_facets_[c]; }

  /// +1 if the stored normal of `f` points out of cell `c`, -1 otherwise.
  double outward_sign(Index c, Index f) const { return facet_cells_[f][0] == c ? 1.0 : -1.0; }
  Vec2 outward_normal(Index c, int local_facet) const {
    const Index f = cell_facets_[c][local_facet];
    return outward_sign(c, f) * facet_normal_[f];
  }
  /// Cell across local facet, or kNone on the boundary.
  Index neighbor(Index c, int local_facet) const;

  double cell_area(Index c) const { return cell_area_[c]; }
  Vec2 centroid(Index c) const;
  /// Affine map from the reference triangle: x = v0 + J * xi.
  Mat2 jacobian(Index c) const;
  /// Reference coordinates of a physical point with respect to cell `c`.
  Vec2 to_reference(Index c, const Vec2& x) const;
  Eigen::Vector3d barycentric(Index c, const Vec2& x) const;
  bool contains(Index c, const Vec2& x, double tol = 1e-12) const;

  int boundary_marker(Index f) const { return boundary_marker_[f]; }
  const std::vector<int>& boundary_markers() const { return boundary_marker_; }
  Index periodic_partner(Index f) const { return periodic_partner_[f]; }
  const Vec2& periodic_translation(Index f) const { return periodic_translation_[f]; }
  bool has_periodic_pairing() const;

  /// Marks one boundary facet. Throws InvalidArgument for interior facets.
  void set_boundary_marker(Index f, int value);
  /// Applies `assign(midpoint)` to every boundary facet; nullopt keeps the
  /// current marker.
  void set_boundary_markers(const std::function<std::optional<int>(const Vec2&)>& assign);
  /// Matches every marker-3 facet with its translate on the opposing boundary.
  void pair_periodic(std::span<const PeriodicLimits> limits, double tol = 1e-10);
  /// Sets a pairing explicitly (used by the file reader).
  void set_periodic_pair(Index f, Index g);

  /// Cell whose closed triangle contains x, lowest id on ties; kNone outside.
  Index locate_point(const Vec2& x) const;
  Index locate_point_brute_force(const Vec2& x) const;

  Vec2 bbox_lower() const { return bbox_lower_; }
  Vec2 bbox_upper() const { return bbox_upper_; }

 private:
  void build_topology();
  void build_locator();

  std::vector<Vec2> vertices_;
  std::vector<std::array<Index, 3>> cells_;
  std::vector<std::array<Index, 2>> facets_;
  std::vector<std::array<Index, 2>> facet_cells_;
  std::vector<Vec2> facet_midpoint_;
  std::vector<Vec2> facet_normal_;
  std::vector<double> facet_length_;
  std::vector<std::array<Index, 3>> cell_facets_;
  std::vector<double> cell_area_;
  std::vector<int> boundary_marker_;
  std::vector<Index> periodic_partner_;
  std::vector<Vec2> periodic_translation_;

  // uniform bucket grid over the bounding box
  Vec2 bbox_lower_{0, 0};
  Vec2 bbox_upper_{0, 0};
  int grid_nx_ = 0;
  int grid_ny_ = 0;
  std::vector<Index> grid_start_;
  std::vector<Index> grid_cells_;
};

/// nx-by-ny quads, each split along its lower-left to upper-right diagonal.
/// Boundary facets are marked closed.
SimplicialMesh build_rectangle_mesh(Index nx, Index ny, const Rectangle& bounds = {});

/// Disk centred at the origin built from concentric rings of spacing about
/// target_h (ring i carries 6i vertices). Boundary facets are marked closed.
SimplicialMesh build_disk_mesh(double radius, double target_h);

/// Text format:
///   tri2d 1
///   V C
///   V lines `x y`, C lines `v0 v1 v2`
///   optional `markers F` followed by F lines `va vb marker`
///   optional `periodic P` followed by P lines `a0 a1 b0 b1` (two facets by vertices)
/// `#` starts a comment.
SimplicialMesh read_mesh(std::istream& in);
SimplicialMesh read_mesh(const std::string& path);
void write_mesh(const SimplicialMesh& mesh, std::ostream& out);
void write_mesh(const SimplicialMesh& mesh, const std::string& path);

}  // namespace picproj
