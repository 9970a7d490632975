#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <compare>
#include <cstdint>
#include <vector>

namespace cmtlb {

using Vec3 = Eigen::Vector3d;
using Cell3 = Eigen::Array3i;

// Position of an element in the locality-preserving 1-D ordering, 1-based.
struct GlobalElementIndex {
  std::int64_t value = 0;

  friend constexpr auto operator<=>(GlobalElementIndex, GlobalElementIndex) = default;
};

// Structured box of hexahedral spectral elements.
//
// Cells are addressed three ways: by (i,j,k), by raster id i + nx*(j + ny*k),
// and by GlobalElementIndex, which is the 1-based position in the element
// ordering. A freshly built mesh uses raster order; order_elements() replaces
// it with a recursive coordinate bisection order.
class Mesh {
 public:
  Mesh(const Vec3& lo, const Vec3& hi, const Cell3& elems_per_axis, int n_per_axis);

  const Vec3& lower() const { return lo_; }
  const Vec3& upper() const { return hi_; }
  const Cell3& elements_per_axis() const { return counts_; }
  int points_per_axis() const { return n_per_axis_; }
  std::int64_t num_elements() const { return static_cast<std::int64_t>(order_.size()); }
  bool bisection_ordered() const { return bisected_; }

  Vec3 cell_size() const { return (hi_ - lo_).cwiseQuotient(counts_.cast<double>().matrix()); }

  // Coordinate of the k-th face plane along `axis`, k in [0, count].
  double face(int axis, int k) const;

  Cell3 cell_of(GlobalElementIndex g) const;
  GlobalElementIndex index_of(const Cell3& cell) const;
  Eigen::AlignedBox3d bounds(GlobalElementIndex g) const;
  Vec3 center(GlobalElementIndex g) const;

  std::int64_t raster_id(const Cell3& cell) const {
    return cell.x() + static_cast<std::int64_t>(counts_.x()) * (cell.y() + static_cast<std::int64_t>(counts_.y()) * cell.z());
  }
  Cell3 raster_cell(std::int64_t id) const;

  // position (0-based) -> raster id
  const std::vector<std::int64_t>& ordering() const { return order_; }

  bool contains(const Vec3& p) const;

 private:
  friend Mesh order_elements(Mesh mesh);
  void set_ordering(std::vector<std::int64_t> order);

  Vec3 lo_;
  Vec3 hi_;
  Cell3 counts_;
  int n_per_axis_;
  bool bisected_ = false;
  std::vector<std::int64_t> order_;     // position -> raster id
  std::vector<std::int64_t> position_;  // raster id -> position
};

Mesh build_mesh(const Vec3& extent_lo, const Vec3& extent_hi, const Cell3& elems_per_axis, int n_per_axis);

// Recursive coordinate bisection: split the longest axis (x before y before z
// on ties), left half gets ceil(count/2), recurse, concatenate left then right.
Mesh order_elements(Mesh mesh);

// Points on an internal face belong to the higher-coordinate cell.
// Throws std::out_of_range for points outside the closed domain box.
GlobalElementIndex locate_element(const Mesh& mesh, const Vec3& point);

}  // namespace cmtlb
