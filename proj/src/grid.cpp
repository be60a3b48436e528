#include "pullin/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pullin {

namespace {

void check_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(what) + " contains a non-finite value");
        }
    }
}

}  // namespace

std::string to_string(GridKind kind) {
    switch (kind) {
        case GridKind::Interval: return "interval";
        case GridKind::RadialBall: return "radial-ball";
        case GridKind::TensorRectangle: return "tensor-rectangle";
    }
    return "unknown";
}

double sphere_surface_measure(int dimension) {
    if (dimension < 1) throw std::invalid_argument("dimension must be positive");
    const double n = static_cast<double>(dimension);
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

int Grid::nodes_per_axis(int axis) const {
    if (axis < 0 || axis >= axis_count_) throw std::invalid_argument("axis out of range");
    return nodes_[static_cast<size_t>(axis)];
}

double Grid::spacing(int axis) const {
    if (axis < 0 || axis >= axis_count_) throw std::invalid_argument("axis out of range");
    return spacing_[static_cast<size_t>(axis)];
}

int Grid::node_at(int i, int j) const {
    return axis_count_ == 1 ? i : j * nodes_[0] + i;
}

int Grid::axis_index(int node, int axis) const {
    if (axis_count_ == 1) return node;
    return axis == 0 ? node % nodes_[0] : node / nodes_[0];
}

double Grid::coord(int node, int axis) const {
    const int idx = axis_index(node, axis);
    const size_t a = static_cast<size_t>(axis);
    return bounds_[a].lo + spacing_[a] * static_cast<double>(idx);
}

std::array<double, 2> Grid::outward_normal(int node) const {
    if (!is_boundary(node)) throw std::invalid_argument("outward_normal: not a boundary node");
    return normals_[static_cast<size_t>(node)];
}

Grid build_grid(GridKind kind, int dimension, int nodes_per_axis,
                std::span<const AxisBounds> bounds) {
    if (dimension < 1 || dimension > 10) {
        throw std::invalid_argument("ambient dimension must be in [1, 10]");
    }
    const int m = nodes_per_axis;

    Grid g;
    g.kind_ = kind;
    g.dimension_ = dimension;

    switch (kind) {
        case GridKind::Interval: {
            if (dimension != 1) throw std::invalid_argument("interval grids require N = 1");
            if (m < 3) throw std::invalid_argument("interval grids need at least 3 nodes");
            g.axis_count_ = 1;
            break;
        }
        case GridKind::RadialBall: {
            if (m < 3) throw std::invalid_argument("radial grids need at least 3 nodes");
            if (!bounds.empty() && (bounds[0].lo != 0.0 || bounds[0].hi != 1.0)) {
                throw std::invalid_argument("radial grids use the fixed radius 1");
            }
            g.axis_count_ = 1;
            break;
        }
        case GridKind::TensorRectangle: {
            if (dimension > 2) throw std::invalid_argument("tensor-rectangle grids require N <= 2");
            if (m < 9 || m % 2 == 0) {
                throw std::invalid_argument("tensor-rectangle axes need m >= 9 and odd");
            }
            g.axis_count_ = dimension;
            break;
        }
    }

    for (int a = 0; a < g.axis_count_; ++a) {
        AxisBounds b;
        if (kind == GridKind::RadialBall) {
            b = AxisBounds{0.0, 1.0};
        } else if (static_cast<size_t>(a) < bounds.size()) {
            b = bounds[static_cast<size_t>(a)];
        }
        if (!(b.lo < b.hi)) throw std::invalid_argument("bounds must be strictly increasing");
        g.bounds_[static_cast<size_t>(a)] = b;
        g.nodes_[static_cast<size_t>(a)] = m;
        g.spacing_[static_cast<size_t>(a)] = (b.hi - b.lo) / static_cast<double>(m - 1);
    }

    const int n = g.axis_count_ == 1 ? m : m * m;
    g.weights_.assign(static_cast<size_t>(n), 0.0);
    g.boundary_flag_.assign(static_cast<size_t>(n), 0);
    g.normals_.assign(static_cast<size_t>(n), {0.0, 0.0});

    if (kind == GridKind::RadialBall) {
        const double omega = sphere_surface_measure(dimension);
        const double h = g.spacing_[0];
        const double nd = static_cast<double>(dimension);
        for (int i = 0; i < m; ++i) {
            const double r = h * static_cast<double>(i);
            const double r_lo = std::max(0.0, r - 0.5 * h);
            const double r_hi = std::min(1.0, r + 0.5 * h);
            // Exact shell volume: integrates r^{N-1} over the dual cell, so the
            // weights telescope to omega/N.
            g.weights_[static_cast<size_t>(i)] =
                omega / nd * (std::pow(r_hi, nd) - std::pow(r_lo, nd));
        }
        g.measure_ = omega / nd;
        g.boundary_flag_[static_cast<size_t>(m - 1)] = 1;
        g.boundary_nodes_.push_back(m - 1);
        g.normals_[static_cast<size_t>(m - 1)] = {1.0, 0.0};
        for (int i = 0; i + 1 < m; ++i) {
            const double r_face = h * (static_cast<double>(i) + 0.5);
            g.faces_.push_back({i, i + 1, 0, omega * std::pow(r_face, nd - 1.0)});
        }
        return g;
    }

    // Interval / tensor-rectangle: trapezoid weights per axis.
    std::array<std::vector<double>, 2> axis_w;
    for (int a = 0; a < g.axis_count_; ++a) {
        const double h = g.spacing_[static_cast<size_t>(a)];
        auto& w = axis_w[static_cast<size_t>(a)];
        w.assign(static_cast<size_t>(m), h);
        w.front() = 0.5 * h;
        w.back() = 0.5 * h;
    }

    if (g.axis_count_ == 1) {
        g.weights_.assign(axis_w[0].begin(), axis_w[0].end());
        g.measure_ = g.bounds_[0].hi - g.bounds_[0].lo;
        for (int i : {0, m - 1}) {
            g.boundary_flag_[static_cast<size_t>(i)] = 1;
            g.boundary_nodes_.push_back(i);
            g.normals_[static_cast<size_t>(i)] = {i == 0 ? -1.0 : 1.0, 0.0};
        }
        for (int i = 0; i + 1 < m; ++i) g.faces_.push_back({i, i + 1, 0, 1.0});
        return g;
    }

    g.measure_ = (g.bounds_[0].hi - g.bounds_[0].lo) * (g.bounds_[1].hi - g.bounds_[1].lo);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            const int node = g.node_at(i, j);
            g.weights_[static_cast<size_t>(node)] =
                axis_w[0][static_cast<size_t>(i)] * axis_w[1][static_cast<size_t>(j)];
            const bool bx = (i == 0 || i == m - 1);
            const bool by = (j == 0 || j == m - 1);
            if (bx || by) {
                g.boundary_flag_[static_cast<size_t>(node)] = 1;
                g.boundary_nodes_.push_back(node);
                double nx = bx ? (i == 0 ? -1.0 : 1.0) : 0.0;
                double ny = by ? (j == 0 ? -1.0 : 1.0) : 0.0;
                const double len = std::sqrt(nx * nx + ny * ny);
                g.normals_[static_cast<size_t>(node)] = {nx / len, ny / len};
            }
        }
    }
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i + 1 < m; ++i) {
            g.faces_.push_back({g.node_at(i, j), g.node_at(i + 1, j), 0,
                                axis_w[1][static_cast<size_t>(j)]});
        }
    }
    for (int j = 0; j + 1 < m; ++j) {
        for (int i = 0; i < m; ++i) {
            g.faces_.push_back({g.node_at(i, j), g.node_at(i, j + 1), 1,
                                axis_w[0][static_cast<size_t>(i)]});
        }
    }
    return g;
}

Field::Field(const Grid& grid, std::vector<double> values)
    : grid_(&grid), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid.node_count()) {
        throw std::invalid_argument("field value count does not match grid");
    }
    check_finite(values_, "field");
}

Field::Field(const Grid& grid, double constant)
    : grid_(&grid), values_(static_cast<size_t>(grid.node_count()), constant) {
    check_finite(values_, "field");
}

Field Field::from_function(const Grid& grid,
                           const std::function<double(double, double)>& fn) {
    std::vector<double> vals(static_cast<size_t>(grid.node_count()));
    for (int i = 0; i < grid.node_count(); ++i) {
        const double x = grid.coord(i, 0);
        const double y = grid.axis_count() > 1 ? grid.coord(i, 1) : 0.0;
        vals[static_cast<size_t>(i)] = fn(x, y);
    }
    return Field(grid, std::move(vals));
}

Field Field::map(const std::function<double(double)>& fn) const {
    std::vector<double> vals(values_.size());
    for (size_t i = 0; i < values_.size(); ++i) vals[i] = fn(values_[i]);
    return Field(*grid_, std::move(vals));
}

double Field::max_value() const {
    double m = values_.front();
    for (double v : values_) m = std::max(m, v);
    return m;
}

double Field::min_value() const {
    double m = values_.front();
    for (double v : values_) m = std::min(m, v);
    return m;
}

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

VectorField::VectorField(const Grid& grid, std::vector<std::vector<double>> components)
    : grid_(&grid), components_(std::move(components)) {
    if (static_cast<int>(components_.size()) != grid.axis_count()) {
        throw std::invalid_argument("vector field component count does not match grid kind");
    }
    for (const auto& comp : components_) {
        if (static_cast<int>(comp.size()) != grid.node_count()) {
            throw std::invalid_argument("vector field component size does not match grid");
        }
        check_finite(comp, "vector field");
    }
}

VectorField::VectorField(const Grid& grid, double constant) : grid_(&grid) {
    components_.assign(static_cast<size_t>(grid.axis_count()),
                       std::vector<double>(static_cast<size_t>(grid.node_count()), constant));
}

VectorField VectorField::from_function(
    const Grid& grid, const std::function<std::array<double, 2>(double, double)>& fn) {
    std::vector<std::vector<double>> comps(
        static_cast<size_t>(grid.axis_count()),
        std::vector<double>(static_cast<size_t>(grid.node_count())));
    for (int i = 0; i < grid.node_count(); ++i) {
        const double x = grid.coord(i, 0);
        const double y = grid.axis_count() > 1 ? grid.coord(i, 1) : 0.0;
        const auto v = fn(x, y);
        for (int a = 0; a < grid.axis_count(); ++a) {
            comps[static_cast<size_t>(a)][static_cast<size_t>(i)] = v[static_cast<size_t>(a)];
        }
    }
    return VectorField(grid, std::move(comps));
}

double VectorField::max_abs() const {
    double m = 0.0;
    for (const auto& comp : components_) {
        for (double v : comp) m = std::max(m, std::abs(v));
    }
    return m;
}

double VectorField::max_norm() const {
    double m = 0.0;
    const int n = grid_->node_count();
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (const auto& comp : components_) {
            s += comp[static_cast<size_t>(i)] * comp[static_cast<size_t>(i)];
        }
        m = std::max(m, std::sqrt(s));
    }
    return m;
}

double integrate(const Field& f) {
    const auto w = f.grid().quad_weights();
    double sum = 0.0, comp = 0.0;
    for (int i = 0; i < f.size(); ++i) {
        const double v = w[static_cast<size_t>(i)] * f[i] - comp;
        const double t = sum + v;
        comp = (t - sum) - v;
        sum = t;
    }
    return sum;
}

double integrate(const Field& f, const Field& weight) {
    if (&f.grid() != &weight.grid()) {
        throw std::invalid_argument("integrate: fields live on different grids");
    }
    const auto w = f.grid().quad_weights();
    double sum = 0.0, comp = 0.0;
    for (int i = 0; i < f.size(); ++i) {
        const double v = w[static_cast<size_t>(i)] * f[i] * weight[i] - comp;
        const double t = sum + v;
        comp = (t - sum) - v;
        sum = t;
    }
    return sum;
}

namespace {

// d/dx along one tensor axis: centered inside, one-sided second order at the
// axis ends.
double axis_derivative(const Field& f, const Grid& g, int node, int axis) {
    const int m = g.nodes_per_axis(axis);
    const double h = g.spacing(axis);
    const int idx = g.axis_index(node, axis);
    const int i = g.axis_index(node, 0);
    const int j = g.axis_count() > 1 ? g.axis_index(node, 1) : 0;

    auto at = [&](int k) {
        return axis == 0 ? f[g.node_at(k, j)] : f[g.node_at(i, k)];
    };

    if (idx == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    if (idx == m - 1) return (3.0 * at(m - 1) - 4.0 * at(m - 2) + at(m - 3)) / (2.0 * h);
    return (at(idx + 1) - at(idx - 1)) / (2.0 * h);
}

}  // namespace

VectorField discrete_gradient(const Field& f) {
    const Grid& g = f.grid();
    std::vector<std::vector<double>> comps(
        static_cast<size_t>(g.axis_count()),
        std::vector<double>(static_cast<size_t>(g.node_count())));
    for (int node = 0; node < g.node_count(); ++node) {
        for (int a = 0; a < g.axis_count(); ++a) {
            double d;
            if (g.is_symmetry_node(node) && a == 0) {
                d = 0.0;  // radial derivative vanishes at r = 0
            } else {
                d = axis_derivative(f, g, node, a);
            }
            comps[static_cast<size_t>(a)][static_cast<size_t>(node)] = d;
        }
    }
    return VectorField(g, std::move(comps));
}

}  // namespace pullin
