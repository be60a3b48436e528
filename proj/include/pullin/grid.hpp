#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pullin {

enum class GridKind { Interval, RadialBall, TensorRectangle };

std::string to_string(GridKind kind);

struct AxisBounds {
    double lo = 0.0;
    double hi = 1.0;
};

/// Codim-1 face between two adjacent nodes. `area` is the face measure:
/// 1 on intervals, the transverse trapezoid weight on rectangles, and
/// omega * r^{N-1} at the midpoint radius on radial grids.
struct GridFace {
    int node_a = 0;
    int node_b = 0;
    int axis = 0;
    double area = 0.0;
};

/// Uniform tensor/radial grid with quadrature weights that sum exactly to
/// the domain measure. Immutable after construction; nodes carry a unique
/// interior/boundary classification. Radial grids put a symmetry node at
/// r = 0 (not a boundary node) and fold the surface measure of S^{N-1}
/// into the quadrature weights.
class Grid {
public:
    GridKind kind() const { return kind_; }
    int dimension() const { return dimension_; }
    int axis_count() const { return axis_count_; }
    int nodes_per_axis(int axis) const;
    int node_count() const { return static_cast<int>(weights_.size()); }
    double spacing(int axis) const;

    double coord(int node, int axis) const;
    int axis_index(int node, int axis) const;
    int node_at(int i, int j = 0) const;

    bool is_boundary(int node) const { return boundary_flag_[static_cast<size_t>(node)] != 0; }
    bool is_symmetry_node(int node) const { return kind_ == GridKind::RadialBall && node == 0; }
    std::span<const int> boundary_nodes() const { return boundary_nodes_; }
    int interior_count() const { return node_count() - static_cast<int>(boundary_nodes_.size()); }
    std::array<double, 2> outward_normal(int node) const;

    double quad_weight(int node) const { return weights_[static_cast<size_t>(node)]; }
    std::span<const double> quad_weights() const { return weights_; }
    double domain_measure() const { return measure_; }

    std::span<const GridFace> faces() const { return faces_; }

    friend Grid build_grid(GridKind kind, int dimension, int nodes_per_axis,
                           std::span<const AxisBounds> bounds);

private:
    Grid() = default;

    GridKind kind_ = GridKind::Interval;
    int dimension_ = 1;
    int axis_count_ = 1;
    std::array<int, 2> nodes_{0, 0};
    std::array<double, 2> spacing_{0.0, 0.0};
    std::array<AxisBounds, 2> bounds_{};
    double measure_ = 0.0;
    std::vector<double> weights_;
    std::vector<unsigned char> boundary_flag_;
    std::vector<int> boundary_nodes_;
    std::vector<std::array<double, 2>> normals_;
    std::vector<GridFace> faces_;
};

Grid build_grid(GridKind kind, int dimension, int nodes_per_axis,
                std::span<const AxisBounds> bounds = {});

/// Surface measure of the unit sphere S^{N-1} in R^N.
double sphere_surface_measure(int dimension);

/// Scalar grid function; one finite value per node. Immutable.
class Field {
public:
    Field(const Grid& grid, std::vector<double> values);
    Field(const Grid& grid, double constant);

    static Field from_function(const Grid& grid,
                               const std::function<double(double, double)>& fn);

    const Grid& grid() const { return *grid_; }
    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int node) const { return values_[static_cast<size_t>(node)]; }
    std::span<const double> values() const { return values_; }

    Field map(const std::function<double(double)>& fn) const;
    double max_value() const;
    double min_value() const;
    double max_abs() const;

private:
    const Grid* grid_;
    std::vector<double> values_;
};

/// Vector grid function; one component per coordinate axis (the radial
/// component on interval/radial grids, two components on rectangles).
class VectorField {
public:
    VectorField(const Grid& grid, std::vector<std::vector<double>> components);
    VectorField(const Grid& grid, double constant);

    static VectorField from_function(
        const Grid& grid,
        const std::function<std::array<double, 2>(double, double)>& fn);

    const Grid& grid() const { return *grid_; }
    int component_count() const { return static_cast<int>(components_.size()); }
    double component(int axis, int node) const {
        return components_[static_cast<size_t>(axis)][static_cast<size_t>(node)];
    }
    std::span<const double> component_values(int axis) const {
        return components_[static_cast<size_t>(axis)];
    }
    double max_abs() const;
    /// Max over nodes of the Euclidean norm of the vector value.
    double max_norm() const;

private:
    const Grid* grid_;
    std::vector<std::vector<double>> components_;
};

/// Quadrature sum of f (optionally against a weight field on the same grid).
double integrate(const Field& f);
double integrate(const Field& f, const Field& weight);

/// Second-order differences: centered at interior nodes, one-sided at
/// boundary nodes, zero at the radial symmetry node.
VectorField discrete_gradient(const Field& f);

}  // namespace pullin
