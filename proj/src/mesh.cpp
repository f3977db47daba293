#include "picproj/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace picproj {

SimplicialMesh::SimplicialMesh(std::vector<Vec2> vertices, std::vector<std::array<Index, 3>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
  build_topology();
  build_locator();
}

void SimplicialMesh::build_topology() {
  const Index nv = num_vertices();
  cell_area_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    auto& cell = cells_[c];
    for (Index v : cell) {
      if (v < 0 || v >= nv) {
        throw InvalidArgument("cell " + std::to_string(c) + " references vertex " + std::to_string(v));
      }
    }
    double twice_area = cross2(vertices_[cell[1]] - vertices_[cell[0]], vertices_[cell[2]] - vertices_[cell[0]]);
    if (twice_area < 0.0) {
      std::swap(cell[1], cell[2]);
      twice_area = -twice_area;
    }
    if (!(twice_area > 0.0)) {
      throw InvalidArgument("cell " + std::to_string(c) + " is degenerate");
    }
    cell_area_[c] = 0.5 * twice_area;
  }

  std::map<std::pair<Index, Index>, Index> edge_ids;
  cell_facets_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int i = 0; i < 3; ++i) {
      Index a = cells_[c][(i + 1) % 3];
      Index b = cells_[c][(i + 2) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = edge_ids.try_emplace({a, b}, static_cast<Index>(facets_.size()));
      const Index f = it->second;
      if (inserted) {
        facets_.push_back({a, b});
        facet_cells_.push_back({static_cast<Index>(c), kNone});
      } else if (facet_cells_[f][1] == kNone) {
        facet_cells_[f][1] = static_cast<Index>(c);
      } else {
        throw InvalidArgument("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                              ") is shared by more than two cells");
      }
      cell_facets_[c][i] = f;
    }
  }

  const auto nf = facets_.size();
  facet_midpoint_.resize(nf);
  facet_normal_.resize(nf);
  facet_length_.resize(nf);
  boundary_marker_.assign(nf, marker::kInterior);
  periodic_partner_.assign(nf, kNone);
  periodic_translation_.assign(nf, Vec2::Zero());
  for (std::size_t f = 0; f < nf; ++f) {
    const Vec2& a = vertices_[facets_[f][0]];
    const Vec2& b = vertices_[facets_[f][1]];
    const Vec2 t = b - a;
    facet_length_[f] = t.norm();
    facet_midpoint_[f] = 0.5 * (a + b);
    Vec2 n(t.y(), -t.x());
    n /= n.norm();
    if (n.dot(facet_midpoint_[f] - centroid(facet_cells_[f][0])) < 0.0) n = -n;
    facet_normal_[f] = n;
    if (facet_cells_[f][1] == kNone) boundary_marker_[f] = marker::kClosed;
  }
}

void SimplicialMesh::build_locator() {
  if (vertices_.empty()) return;
  bbox_lower_ = vertices_.front();
  bbox_upper_ = vertices_.front();
  for (const auto& v : vertices_) {
    bbox_lower_ = bbox_lower_.cwiseMin(v);
    bbox_upper_ = bbox_upper_.cwiseMax(v);
  }
  const Vec2 extent = (bbox_upper_ - bbox_lower_).cwiseMax(1e-300);
  const double target = std::sqrt(static_cast<double>(std::max<Index>(num_cells(), 1)));
  const double aspect = extent.x() / extent.y();
  grid_nx_ = std::clamp(static_cast<int>(std::ceil(target * std::sqrt(aspect))), 1, 4096);
  grid_ny_ = std::clamp(static_cast<int>(std::ceil(target / std::sqrt(aspect))), 1, 4096);

  auto bucket_range = [&](double lo, double hi, double origin, double width, int n) {
    const double slack = 1e-9 * width * n;
    int a = static_cast<int>(std::floor((lo - slack - origin) / width));
    int b = static_cast<int>(std::floor((hi + slack - origin) / width));
    return std::pair{std::clamp(a, 0, n - 1), std::clamp(b, 0, n - 1)};
  };
  const double wx = extent.x() / grid_nx_;
  const double wy = extent.y() / grid_ny_;

  std::vector<std::vector<Index>> buckets(static_cast<std::size_t>(grid_nx_) * grid_ny_);
  for (Index c = 0; c < num_cells(); ++c) {
    Vec2 lo = vertices_[cells_[c][0]];
    Vec2 hi = lo;
    for (int i = 1; i < 3; ++i) {
      lo = lo.cwiseMin(vertices_[cells_[c][i]]);
      hi = hi.cwiseMax(vertices_[cells_[c][i]]);
    }
    const auto [ix0, ix1] = bucket_range(lo.x(), hi.x(), bbox_lower_.x(), wx, grid_nx_);
    const auto [iy0, iy1] = bucket_range(lo.y(), hi.y(), bbox_lower_.y(), wy, grid_ny_);
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix) buckets[static_cast<std::size_t>(iy) * grid_nx_ + ix].push_back(c);
  }
  grid_start_.assign(buckets.size() + 1, 0);
  for (std::size_t b = 0; b < buckets.size(); ++b) grid_start_[b + 1] = grid_start_[b] + static_cast<Index>(buckets[b].size());
  grid_cells_.clear();
  grid_cells_.reserve(grid_start_.back());
  for (const auto& bucket : buckets) grid_cells_.insert(grid_cells_.end(), bucket.begin(), bucket.end());
}

Index SimplicialMesh::neighbor(Index c, int local_facet) const {
  const auto& fc = facet_cells_[cell_facets_[c][local_facet]];
  if (fc[1] == kNone) return kNone;
  return fc[0] == c ? fc[1] : fc[0];
}

Vec2 SimplicialMesh::centroid(Index c) const {
  const auto& v = cells_[c];
  return (vertices_[v[0]] + vertices_[v[1]] + vertices_[v[2]]) / 3.0;
}

Mat2 SimplicialMesh::jacobian(Index c) const {
  const auto& v = cells_[c];
  Mat2 jac;
  jac.col(0) = vertices_[v[1]] - vertices_[v[0]];
  jac.col(1) = vertices_[v[2]] - vertices_[v[0]];
  return jac;
}

Vec2 SimplicialMesh::to_reference(Index c, const Vec2& x) const {
  const Mat2 jac = jacobian(c);
  const Vec2 d = x - vertices_[cells_[c][0]];
  // explicit 2x2 inverse keeps the barycentric test symmetric in rounding
  const double det = 2.0 * cell_area_[c];
  return Vec2((jac(1, 1) * d.x() - jac(0, 1) * d.y()) / det, (-jac(1, 0) * d.x() + jac(0, 0) * d.y()) / det);
}

Eigen::Vector3d SimplicialMesh::barycentric(Index c, const Vec2& x) const {
  const Vec2 xi = to_reference(c, x);
  return {1.0 - xi.x() - xi.y(), xi.x(), xi.y()};
}

bool SimplicialMesh::contains(Index c, const Vec2& x, double tol) const {
  return barycentric(c, x).minCoeff() >= -tol;
}

bool SimplicialMesh::has_periodic_pairing() const {
  for (std::size_t f = 0; f < facets_.size(); ++f) {
    if (boundary_marker_[f] == marker::kPeriodic && periodic_partner_[f] == kNone) return false;
  }
  return true;
}

void SimplicialMesh::set_boundary_marker(Index f, int value) {
  if (f < 0 || f >= num_facets()) throw InvalidArgument("facet index out of range");
  if (!is_boundary(f)) throw InvalidArgument("facet " + std::to_string(f) + " is interior and cannot be marked");
  if (value < marker::kClosed || value > marker::kPeriodic) throw InvalidArgument("boundary marker must be 1, 2 or 3");
  if (value != marker::kPeriodic && periodic_partner_[f] != kNone) {
    const Index g = periodic_partner_[f];
    periodic_partner_[g] = kNone;
    periodic_translation_[g] = Vec2::Zero();
    periodic_partner_[f] = kNone;
    periodic_translation_[f] = Vec2::Zero();
  }
  boundary_marker_[f] = value;
}

void SimplicialMesh::set_boundary_markers(const std::function<std::optional<int>(const Vec2&)>& assign) {
  for (Index f = 0; f < num_facets(); ++f) {
    if (!is_boundary(f)) continue;
    if (auto value = assign(facet_midpoint_[f])) set_boundary_marker(f, *value);
  }
}

void SimplicialMesh::set_periodic_pair(Index f, Index g) {
  if (f < 0 || g < 0 || f >= num_facets() || g >= num_facets() || f == g) {
    throw PairingFailure("invalid periodic facet pair");
  }
  if (!is_boundary(f) || !is_boundary(g)) throw PairingFailure("periodic facets must lie on the boundary");
  if (std::abs(facet_length_[f] - facet_length_[g]) > 1e-12) {
    std::ostringstream msg;
    msg << "periodic facets " << f << " and " << g << " differ in length";
    throw PairingFailure(msg.str());
  }
  boundary_marker_[f] = boundary_marker_[g] = marker::kPeriodic;
  periodic_partner_[f] = g;
  periodic_partner_[g] = f;
  periodic_translation_[f] = facet_midpoint_[g] - facet_midpoint_[f];
  periodic_translation_[g] = facet_midpoint_[f] - facet_midpoint_[g];
}

void SimplicialMesh::pair_periodic(std::span<const PeriodicLimits> limits, double tol) {
  for (const auto& lim : limits) {
    if (lim.axis < 0 || lim.axis > 1) throw InvalidArgument("periodic axis must be 0 or 1");
    const int other = 1 - lim.axis;
    std::vector<Index> low, high;
    for (Index f = 0; f < num_facets(); ++f) {
      if (boundary_marker_[f] != marker::kPeriodic) continue;
      // facets lying along the limit line have both endpoints on it
      const Vec2& a = vertices_[facets_[f][0]];
      const Vec2& b = vertices_[facets_[f][1]];
      const bool on_low = std::abs(a[lim.axis] - lim.lower) <= tol && std::abs(b[lim.axis] - lim.lower) <= tol;
      const bool on_high = std::abs(a[lim.axis] - lim.upper) <= tol && std::abs(b[lim.axis] - lim.upper) <= tol;
      if (on_low) low.push_back(f);
      if (on_high) high.push_back(f);
    }
    auto by_other = [&](Index a, Index b) { return facet_midpoint_[a][other] < facet_midpoint_[b][other]; };
    std::sort(low.begin(), low.end(), by_other);
    std::sort(high.begin(), high.end(), by_other);
    std::vector<bool> used(high.size(), false);
    for (Index f : low) {
      const Vec2 target = facet_midpoint_[f] + Vec2::Unit(lim.axis) * (lim.upper - lim.lower);
      auto it = std::lower_bound(high.begin(), high.end(), target[other] - tol,
                                 [&](Index g, double v) { return facet_midpoint_[g][other] < v; });
      bool matched = false;
      for (; it != high.end() && facet_midpoint_[*it][other] <= target[other] + tol; ++it) {
        const auto pos = static_cast<std::size_t>(it - high.begin());
        if (used[pos] || (facet_midpoint_[*it] - target).norm() > tol) continue;
        set_periodic_pair(f, *it);
        periodic_translation_[f] = Vec2::Unit(lim.axis) * (lim.upper - lim.lower);
        periodic_translation_[*it] = -periodic_translation_[f];
        used[pos] = true;
        matched = true;
        break;
      }
      if (!matched) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "no periodic partner for facet " << f << " with midpoint (" << facet_midpoint_[f].x() << ", "
            << facet_midpoint_[f].y() << ")";
        throw PairingFailure(msg.str());
      }
    }
  }
  for (Index f = 0; f < num_facets(); ++f) {
    if (boundary_marker_[f] == marker::kPeriodic && periodic_partner_[f] == kNone) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "no periodic partner for facet " << f << " with midpoint (" << facet_midpoint_[f].x() << ", "
          << facet_midpoint_[f].y() << ")";
      throw PairingFailure(msg.str());
    }
  }
}

Index SimplicialMesh::locate_point(const Vec2& x) const {
  if (grid_nx_ == 0) return kNone;
  const Vec2 extent = (bbox_upper_ - bbox_lower_).cwiseMax(1e-300);
  const double fx = (x.x() - bbox_lower_.x()) / extent.x() * grid_nx_;
  const double fy = (x.y() - bbox_lower_.y()) / extent.y() * grid_ny_;
  const double slack = 1e-9;
  if (!(fx >= -slack && fx <= grid_nx_ + slack && fy >= -slack && fy <= grid_ny_ + slack)) return kNone;
  const int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, grid_nx_ - 1);
  const int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, grid_ny_ - 1);
  const std::size_t b = static_cast<std::size_t>(iy) * grid_nx_ + ix;
  for (Index k = grid_start_[b]; k < grid_start_[b + 1]; ++k) {
    if (contains(grid_cells_[k], x)) return grid_cells_[k];
  }
  return kNone;
}

Index SimplicialMesh::locate_point_brute_force(const Vec2& x) const {
  for (Index c = 0; c < num_cells(); ++c) {
    if (contains(c, x)) return c;
  }
  return kNone;
}

SimplicialMesh build_rectangle_mesh(Index nx, Index ny, const Rectangle& bounds) {
  if (nx < 1 || ny < 1) throw InvalidArgument("rectangle mesh needs at least one cell per axis");
  const Vec2 extent = bounds.upper - bounds.lower;
  if (!(extent.x() > 0.0 && extent.y() > 0.0) || !extent.allFinite()) {
    throw InvalidArgument("degenerate rectangle bounds");
  }
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (Index j = 0; j <= ny; ++j) {
    for (Index i = 0; i <= nx; ++i) {
      // endpoints are set exactly so that periodic translates match bitwise
      const double x = i == nx ? bounds.upper.x() : bounds.lower.x() + extent.x() * static_cast<double>(i) / nx;
      const double y = j == ny ? bounds.upper.y() : bounds.lower.y() + extent.y() * static_cast<double>(j) / ny;
      vertices.emplace_back(x, y);
    }
  }
  std::vector<std::array<Index, 3>> cells;
  cells.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      const Index v0 = j * (nx + 1) + i;
      const Index v1 = v0 + 1;
      const Index v2 = v0 + nx + 1;
      const Index v3 = v2 + 1;
      cells.push_back({v0, v1, v3});
      cells.push_back({v0, v3, v2});
    }
  }
  return {std::move(vertices), std::move(cells)};
}

SimplicialMesh build_disk_mesh(double radius, double target_h) {
  if (!(radius > 0.0) || !(target_h > 0.0)) throw InvalidArgument("disk radius and target_h must be positive");
  if (target_h > radius) throw InvalidArgument("target_h must not exceed the radius");
  const int rings = std::max(1, static_cast<int>(std::ceil(radius / target_h - 1e-12)));
  constexpr double two_pi = 2.0 * std::numbers::pi;

  std::vector<Vec2> vertices{Vec2::Zero()};
  std::vector<Index> ring_start{0};
  for (int i = 1; i <= rings; ++i) {
    ring_start.push_back(static_cast<Index>(vertices.size()));
    const double r = i == rings ? radius : radius * i / rings;
    const int count = 6 * i;
    for (int j = 0; j < count; ++j) {
      const double angle = two_pi * j / count;
      vertices.emplace_back(r * std::cos(angle), r * std::sin(angle));
    }
  }

  std::vector<std::array<Index, 3>> cells;
  cells.reserve(static_cast<std::size_t>(6) * rings * rings);
  for (int j = 0; j < 6; ++j) cells.push_back({0, ring_start[1] + j, ring_start[1] + (j + 1) % 6});
  for (int i = 2; i <= rings; ++i) {
    const int n_in = 6 * (i - 1);
    const int n_out = 6 * i;
    const Index in0 = ring_start[i - 1];
    const Index out0 = ring_start[i];
    int a = 0;
    int b = 0;
    while (a < n_in || b < n_out) {
      const double next_in = two_pi * (a + 1) / n_in;
      const double next_out = two_pi * (b + 1) / n_out;
      const bool advance_out = a == n_in || (b < n_out && next_out <= next_in);
      if (advance_out) {
        cells.push_back({in0 + a % n_in, out0 + b % n_out, out0 + (b + 1) % n_out});
        ++b;
      } else {
        cells.push_back({in0 + a % n_in, out0 + b % n_out, in0 + (a + 1) % n_in});
        ++a;
      }
    }
  }
  return {std::move(vertices), std::move(cells)};
}

}  // namespace picproj
