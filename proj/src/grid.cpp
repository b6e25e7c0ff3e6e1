#include "anisoflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "anisoflow/errors.hpp"

namespace anisoflow {

Grid::Grid(Eigen::VectorXd half_width, Eigen::VectorXi nodes)
    : half_width_(std::move(half_width)), nodes_(std::move(nodes)) {
  if (half_width_.size() == 0) throw ValidationError("grid needs at least one axis");
  if (half_width_.size() != nodes_.size()) {
    throw ValidationError("grid half-widths and node counts differ in length");
  }
  const int n_axes = dim();
  spacing_.resize(n_axes);
  stride_.resize(n_axes);
  for (int i = 0; i < n_axes; ++i) {
    if (!(half_width_[i] > 0.0) || !std::isfinite(half_width_[i])) {
      throw ValidationError("grid half-widths must be positive");
    }
    if (nodes_[i] < min_nodes) {
      throw ValidationError("grid needs at least 16 nodes per axis");
    }
    spacing_[i] = 2.0 * half_width_[i] / (nodes_[i] - 1);
  }
  size_ = 1;
  for (int i = n_axes - 1; i >= 0; --i) {
    stride_[i] = size_;
    size_ *= nodes_[i];
  }
}

Grid Grid::uniform(int dim, double half_width, int nodes) {
  return Grid(Eigen::VectorXd::Constant(dim, half_width), Eigen::VectorXi::Constant(dim, nodes));
}

double Grid::cell_volume() const { return spacing_.prod(); }

double Grid::coordinate(int axis, int index) const {
  const int last = nodes_[axis] - 1;
  // (2 index - last)/last keeps the node set exactly symmetric.
  return half_width_[axis] * static_cast<double>(2 * index - last) / static_cast<double>(last);
}

Eigen::VectorXi Grid::multi_index(Eigen::Index flat) const {
  Eigen::VectorXi idx(dim());
  for (int i = 0; i < dim(); ++i) {
    idx[i] = static_cast<int>(flat / stride_[i]);
    flat %= stride_[i];
  }
  return idx;
}

Eigen::Index Grid::flat_index(const Eigen::VectorXi& index) const {
  Eigen::Index flat = 0;
  for (int i = 0; i < dim(); ++i) flat += index[i] * stride_[i];
  return flat;
}

Eigen::VectorXd Grid::point(Eigen::Index flat) const {
  Eigen::VectorXd x(dim());
  for (int i = 0; i < dim(); ++i) {
    const auto idx = static_cast<int>(flat / stride_[i]);
    flat %= stride_[i];
    x[i] = coordinate(i, idx);
  }
  return x;
}

Grid Grid::scaled(const Eigen::VectorXd& factors) const {
  return Grid(half_width_.cwiseProduct(factors), nodes_);
}

bool Grid::operator==(const Grid& other) const {
  return dim() == other.dim() && half_width_ == other.half_width_ && nodes_ == other.nodes_;
}

GridField::GridField(Grid g, Eigen::ArrayXd v, double t) : grid(std::move(g)), values(std::move(v)), time(t) {
  if (values.size() != grid.size()) throw ValidationError("field size does not match its grid");
}

GridField sample(const Grid& grid, const Evaluator& u, double t) {
  GridField f(grid, t);
  for (Eigen::Index k = 0; k < grid.size(); ++k) f.values[k] = u(grid.point(k), t);
  return f;
}

double mass(const GridField& field) { return field.values.sum() * field.grid.cell_volume(); }

double l1_norm(const GridField& field) { return field.values.abs().sum() * field.grid.cell_volume(); }

int SupportBox::cells_to_boundary(const Grid& grid) const {
  if (empty) return std::numeric_limits<int>::max();
  int d = std::numeric_limits<int>::max();
  for (int i = 0; i < grid.dim(); ++i) {
    d = std::min({d, lo[i], grid.nodes()[i] - 1 - hi[i]});
  }
  return d;
}

SupportBox support_box(const GridField& field, double threshold) {
  const Grid& grid = field.grid;
  SupportBox box;
  box.lo = Eigen::VectorXi::Constant(grid.dim(), std::numeric_limits<int>::max());
  box.hi = Eigen::VectorXi::Constant(grid.dim(), -1);
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    if (!(field.values[k] > threshold)) continue;
    const Eigen::VectorXi idx = grid.multi_index(k);
    box.lo = box.lo.cwiseMin(idx);
    box.hi = box.hi.cwiseMax(idx);
    box.empty = false;
  }
  box.half_width = Eigen::VectorXd::Zero(grid.dim());
  if (box.empty) {
    box.lo.setZero();
    box.hi.setZero();
    return box;
  }
  for (int i = 0; i < grid.dim(); ++i) {
    box.half_width[i] = std::max(std::abs(grid.coordinate(i, box.lo[i])),
                                 std::abs(grid.coordinate(i, box.hi[i])));
  }
  return box;
}

SupportBox support_box_relative(const GridField& field, double rel) {
  const double peak = field.values.size() > 0 ? field.values.maxCoeff() : 0.0;
  if (!(peak > 0.0)) return support_box(field, std::numeric_limits<double>::infinity());
  return support_box(field, rel * peak);
}

double interpolate(const GridField& field, const Eigen::VectorXd& x) {
  const Grid& grid = field.grid;
  const int n_axes = grid.dim();
  Eigen::VectorXi base(n_axes);
  Eigen::VectorXd frac(n_axes);
  for (int i = 0; i < n_axes; ++i) {
    const double L = grid.half_width()[i];
    const double slack = 1e-12 * L;
    if (x[i] < -L - slack || x[i] > L + slack) return 0.0;
    const double s = (std::clamp(x[i], -L, L) + L) / grid.spacing(i);
    int b = static_cast<int>(std::floor(s));
    b = std::clamp(b, 0, grid.nodes()[i] - 2);
    base[i] = b;
    frac[i] = std::clamp(s - b, 0.0, 1.0);
  }
  double result = 0.0;
  const int corners = 1 << n_axes;
  for (int c = 0; c < corners; ++c) {
    double weight = 1.0;
    Eigen::Index flat = 0;
    for (int i = 0; i < n_axes; ++i) {
      const int bit = (c >> i) & 1;
      weight *= bit ? frac[i] : 1.0 - frac[i];
      flat += (base[i] + bit) * grid.stride(i);
    }
    if (weight != 0.0) result += weight * field.values[flat];
  }
  return result;
}

} // namespace anisoflow
