#include "cmtlb/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cmtlb {

namespace {

struct CellBox {
  Cell3 origin;
  Cell3 extent;
};

void bisect(const Mesh& mesh, const CellBox& box, std::vector<std::int64_t>& out) {
  if ((box.extent == 1).all()) {
    out.push_back(mesh.raster_id(box.origin));
    return;
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (box.extent[a] > box.extent[axis]) axis = a;
  }
  const int left = (box.extent[axis] + 1) / 2;
  CellBox lower = box;
  CellBox upper = box;
  lower.extent[axis] = left;
  upper.origin[axis] += left;
  upper.extent[axis] -= left;
  bisect(mesh, lower, out);
  bisect(mesh, upper, out);
}

}  // namespace

Mesh::Mesh(const Vec3& lo, const Vec3& hi, const Cell3& elems_per_axis, int n_per_axis)
    : lo_(lo), hi_(hi), counts_(elems_per_axis), n_per_axis_(n_per_axis) {
  if ((counts_ < 1).any()) throw std::invalid_argument("mesh: element counts must be >= 1 on every axis");
  if (!(hi_.array() > lo_.array()).all()) throw std::invalid_argument("mesh: extent_hi must exceed extent_lo componentwise");
  if (n_per_axis_ < 2) throw std::invalid_argument("mesh: n_per_axis must be >= 2");
  const std::int64_t n = static_cast<std::int64_t>(counts_.x()) * counts_.y() * counts_.z();
  std::vector<std::int64_t> raster(static_cast<std::size_t>(n));
  std::iota(raster.begin(), raster.end(), std::int64_t{0});
  set_ordering(std::move(raster));
}

void Mesh::set_ordering(std::vector<std::int64_t> order) {
  order_ = std::move(order);
  position_.assign(order_.size(), -1);
  for (std::size_t pos = 0; pos < order_.size(); ++pos) {
    position_[static_cast<std::size_t>(order_[pos])] = static_cast<std::int64_t>(pos);
  }
}

double Mesh::face(int axis, int k) const {
  if (k >= counts_[axis]) return hi_[axis];
  return lo_[axis] + k * ((hi_[axis] - lo_[axis]) / counts_[axis]);
}

Cell3 Mesh::raster_cell(std::int64_t id) const {
  const std::int64_t nx = counts_.x();
  const std::int64_t ny = counts_.y();
  return Cell3(static_cast<int>(id % nx), static_cast<int>((id / nx) % ny), static_cast<int>(id / (nx * ny)));
}

Cell3 Mesh::cell_of(GlobalElementIndex g) const {
  if (g.value < 1 || g.value > num_elements()) {
    throw std::out_of_range("mesh: global element index " + std::to_string(g.value) + " out of range");
  }
  return raster_cell(order_[static_cast<std::size_t>(g.value - 1)]);
}

GlobalElementIndex Mesh::index_of(const Cell3& cell) const {
  return GlobalElementIndex{position_[static_cast<std::size_t>(raster_id(cell))] + 1};
}

Eigen::AlignedBox3d Mesh::bounds(GlobalElementIndex g) const {
  const Cell3 c = cell_of(g);
  Vec3 lo;
  Vec3 hi;
  for (int a = 0; a < 3; ++a) {
    lo[a] = face(a, c[a]);
    hi[a] = face(a, c[a] + 1);
  }
  return Eigen::AlignedBox3d(lo, hi);
}

Vec3 Mesh::center(GlobalElementIndex g) const { return bounds(g).center(); }

bool Mesh::contains(const Vec3& p) const {
  return (p.array() >= lo_.array()).all() && (p.array() <= hi_.array()).all();
}

Mesh build_mesh(const Vec3& extent_lo, const Vec3& extent_hi, const Cell3& elems_per_axis, int n_per_axis) {
  return Mesh(extent_lo, extent_hi, elems_per_axis, n_per_axis);
}

Mesh order_elements(Mesh mesh) {
  std::vector<std::int64_t> order;
  order.reserve(static_cast<std::size_t>(mesh.num_elements()));
  bisect(mesh, CellBox{Cell3::Zero(), mesh.elements_per_axis()}, order);
  mesh.set_ordering(std::move(order));
  mesh.bisected_ = true;
  return mesh;
}

GlobalElementIndex locate_element(const Mesh& mesh, const Vec3& point) {
  if (!mesh.contains(point)) throw std::out_of_range("locate_element: point outside the domain");
  Cell3 cell;
  for (int a = 0; a < 3; ++a) {
    const int n = mesh.elements_per_axis()[a];
    const double h = (mesh.upper()[a] - mesh.lower()[a]) / n;
    int c = static_cast<int>(std::floor((point[a] - mesh.lower()[a]) / h));
    c = std::clamp(c, 0, n - 1);
    // reconcile with the face planes so face points resolve upward
    while (c + 1 < n && point[a] >= mesh.face(a, c + 1)) ++c;
    while (c > 0 && point[a] < mesh.face(a, c)) --c;
    cell[a] = c;
  }
  return mesh.index_of(cell);
}

}  // namespace cmtlb
