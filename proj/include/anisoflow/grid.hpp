#pragma once

#include <functional>

#include <Eigen/Core>

namespace anisoflow {

/// Space-time evaluator (x, t) -> u(x, t).
using Evaluator = std::function<double(const Eigen::VectorXd&, double)>;

/// Tensor-product grid on the box prod_i [-L_i, L_i] with n_i nodes per axis.
/// Nodes are symmetric about the origin; flat indices are lexicographic in the
/// multi-index with the last axis running fastest.
class Grid {
public:
  static constexpr int min_nodes = 16;

  Grid() = default;
  Grid(Eigen::VectorXd half_width, Eigen::VectorXi nodes);

  static Grid uniform(int dim, double half_width, int nodes);

  int dim() const { return static_cast<int>(half_width_.size()); }
  const Eigen::VectorXd& half_width() const { return half_width_; }
  const Eigen::VectorXi& nodes() const { return nodes_; }
  double spacing(int axis) const { return spacing_[axis]; }
  const Eigen::VectorXd& spacings() const { return spacing_; }
  Eigen::Index size() const { return size_; }
  Eigen::Index stride(int axis) const { return stride_[axis]; }
  double cell_volume() const;

  double coordinate(int axis, int index) const;
  Eigen::VectorXi multi_index(Eigen::Index flat) const;
  Eigen::Index flat_index(const Eigen::VectorXi& index) const;
  Eigen::VectorXd point(Eigen::Index flat) const;

  // Same node counts, half-widths multiplied axis by axis.
  Grid scaled(const Eigen::VectorXd& factors) const;

  bool operator==(const Grid& other) const;

private:
  Eigen::VectorXd half_width_;
  Eigen::VectorXi nodes_;
  Eigen::VectorXd spacing_;
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 1> stride_;
  Eigen::Index size_ = 0;
};

/// Nodal values of a scalar field on a Grid at a given time.
struct GridField {
  Grid grid;
  Eigen::ArrayXd values;
  double time = 0.0;

  GridField() = default;
  GridField(Grid g, double t) : grid(std::move(g)), values(Eigen::ArrayXd::Zero(grid.size())), time(t) {}
  GridField(Grid g, Eigen::ArrayXd v, double t);
};

GridField sample(const Grid& grid, const Evaluator& u, double t);

// Discrete mass: sum of nodal values times the cell volume.
double mass(const GridField& field);
double l1_norm(const GridField& field);

/// Smallest index box holding every node whose value exceeds `threshold`.
struct SupportBox {
  bool empty = true;
  Eigen::VectorXi lo;
  Eigen::VectorXi hi;
  Eigen::VectorXd half_width;  // max |x_i| over nodes in the box

  // Distance in cells from the box to the nearest grid edge, minimum over axes.
  int cells_to_boundary(const Grid& grid) const;
};

SupportBox support_box(const GridField& field, double threshold);

// Relative-threshold variant: threshold = rel * max(field).
SupportBox support_box_relative(const GridField& field, double rel = 1e-10);

/// Multilinear interpolation; zero outside the grid box.
double interpolate(const GridField& field, const Eigen::VectorXd& x);

} // namespace anisoflow
