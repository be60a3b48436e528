#include "pullin/operators.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pullin {

namespace {

using Triplet = Eigen::Triplet<double>;

void check_peclet(const Grid& grid, const VectorField& c, const char* what) {
    for (int a = 0; a < grid.axis_count(); ++a) {
        double cmax = 0.0;
        for (double v : c.component_values(a)) cmax = std::max(cmax, std::abs(v));
        const double peclet = 0.5 * grid.spacing(a) * cmax;
        if (peclet > 1.0 + 1e-12) {
            throw std::invalid_argument(
                std::string(what) + ": mesh-Peclet number " + std::to_string(peclet) +
                " exceeds 1 on axis " + std::to_string(a) +
                "; refine m or reduce the advection magnitude");
        }
    }
}

void check_same_grid(const Grid& grid, const Grid& other, const char* what) {
    if (&grid != &other) {
        throw std::invalid_argument(std::string(what) + ": argument lives on a different grid");
    }
}

}  // namespace

OperatorMatrix::OperatorMatrix(const Grid& grid, BoundaryTag tag,
                               Eigen::SparseMatrix<double, Eigen::RowMajor> matrix)
    : grid_(&grid), tag_(tag), matrix_(std::move(matrix)),
      lu_state_(std::make_shared<LazyLU>()) {
    matrix_.makeCompressed();
}

Field OperatorMatrix::apply(const Field& f) const {
    check_same_grid(*grid_, f.grid(), "apply");
    Eigen::Map<const Eigen::VectorXd> v(f.values().data(), f.size());
    Eigen::VectorXd out = matrix_ * v;
    return Field(*grid_, std::vector<double>(out.data(), out.data() + out.size()));
}

Eigen::VectorXd OperatorMatrix::apply(const Eigen::VectorXd& v) const { return matrix_ * v; }

Eigen::VectorXd OperatorMatrix::solve(const Eigen::VectorXd& rhs) const {
    std::call_once(lu_state_->once, [this] {
        Eigen::SparseMatrix<double> col_major = matrix_;
        lu_state_->lu.compute(col_major);
        lu_state_->ok = lu_state_->lu.info() == Eigen::Success;
    });
    if (!lu_state_->ok) {
        throw std::runtime_error("operator factorization failed (singular matrix?)");
    }
    return lu_state_->lu.solve(rhs);
}

OperatorMatrix OperatorMatrix::plus_diagonal(const Field& d) const {
    check_same_grid(*grid_, d.grid(), "plus_diagonal");
    Eigen::SparseMatrix<double, Eigen::RowMajor> out = matrix_;
    for (int row = 0; row < out.rows(); ++row) {
        if (tag_ == BoundaryTag::Dirichlet && grid_->is_boundary(row)) continue;
        out.coeffRef(row, row) += d[row];
    }
    return OperatorMatrix(*grid_, tag_, std::move(out));
}

OperatorMatrix OperatorMatrix::row_scaled(const Field& s) const {
    check_same_grid(*grid_, s.grid(), "row_scaled");
    Eigen::SparseMatrix<double, Eigen::RowMajor> out = matrix_;
    for (int row = 0; row < out.rows(); ++row) {
        if (tag_ == BoundaryTag::Dirichlet && grid_->is_boundary(row)) continue;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(out, row); it; ++it) {
            it.valueRef() *= s[row];
        }
    }
    return OperatorMatrix(*grid_, tag_, std::move(out));
}

double OperatorMatrix::max_row_sum_abs() const {
    double m = 0.0;
    for (int row = 0; row < matrix_.rows(); ++row) {
        double s = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(matrix_, row); it;
             ++it) {
            s += std::abs(it.value());
        }
        m = std::max(m, s);
    }
    return m;
}

void OperatorMatrix::for_each_entry(
    const std::function<void(int, int, double)>& fn) const {
    for (int row = 0; row < matrix_.rows(); ++row) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(matrix_, row); it;
             ++it) {
            fn(row, static_cast<int>(it.col()), it.value());
        }
    }
}

int OperatorMatrix::nonzeros_in_row(int row) const {
    int n = 0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(matrix_, row); it; ++it) {
        ++n;
    }
    return n;
}

OperatorMatrix assemble_advection_diffusion(const Grid& grid, const VectorField& c,
                                            const std::optional<Field>& rho) {
    check_same_grid(grid, c.grid(), "assemble_advection_diffusion");
    if (rho) check_same_grid(grid, rho->grid(), "assemble_advection_diffusion");
    check_peclet(grid, c, "assemble_advection_diffusion");

    const int n = grid.node_count();
    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(n) * 5);

    auto rho_at = [&](int node) { return rho ? (*rho)[node] : 0.0; };

    if (grid.kind() == GridKind::RadialBall) {
        const double h = grid.spacing(0);
        const double nd = static_cast<double>(grid.dimension());
        for (int i = 0; i < n; ++i) {
            if (grid.is_boundary(i)) {
                trip.emplace_back(i, i, 1.0);
                continue;
            }
            if (i == 0) {
                // Lap u(0) = N u''(0); u'(0) = 0 kills the advection term.
                trip.emplace_back(0, 0, 2.0 * nd / (h * h) - rho_at(0));
                trip.emplace_back(0, 1, -2.0 * nd / (h * h));
                continue;
            }
            const double r = grid.coord(i, 0);
            const double curv = (nd - 1.0) / r;
            const double adv = c.component(0, i);
            trip.emplace_back(i, i - 1, -1.0 / (h * h) + (curv - adv) / (2.0 * h));
            trip.emplace_back(i, i, 2.0 / (h * h) - rho_at(i));
            trip.emplace_back(i, i + 1, -1.0 / (h * h) - (curv - adv) / (2.0 * h));
        }
    } else {
        for (int node = 0; node < n; ++node) {
            if (grid.is_boundary(node)) {
                trip.emplace_back(node, node, 1.0);
                continue;
            }
            double diag = -rho_at(node);
            for (int a = 0; a < grid.axis_count(); ++a) {
                const double h = grid.spacing(a);
                const double adv = c.component(a, node);
                const int i = grid.axis_index(node, 0);
                const int j = grid.axis_count() > 1 ? grid.axis_index(node, 1) : 0;
                const int lo = a == 0 ? grid.node_at(i - 1, j) : grid.node_at(i, j - 1);
                const int hi = a == 0 ? grid.node_at(i + 1, j) : grid.node_at(i, j + 1);
                diag += 2.0 / (h * h);
                trip.emplace_back(node, lo, -1.0 / (h * h) - adv / (2.0 * h));
                trip.emplace_back(node, hi, -1.0 / (h * h) + adv / (2.0 * h));
            }
            trip.emplace_back(node, node, diag);
        }
    }

    Eigen::SparseMatrix<double, Eigen::RowMajor> mat(n, n);
    mat.setFromTriplets(trip.begin(), trip.end());
    return OperatorMatrix(grid, BoundaryTag::Dirichlet, std::move(mat));
}

OperatorMatrix assemble_weighted_form(const Grid& grid, const Field& gamma,
                                      const VectorField& a, const std::optional<Field>& rho) {
    check_same_grid(grid, gamma.grid(), "assemble_weighted_form");
    check_same_grid(grid, a.grid(), "assemble_weighted_form");
    if (rho) check_same_grid(grid, rho->grid(), "assemble_weighted_form");
    check_peclet(grid, a, "assemble_weighted_form");

    const int n = grid.node_count();
    std::vector<double> w(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) w[static_cast<size_t>(i)] = std::exp(gamma[i]);

    auto face_w = [&](int p, int q) {
        return 0.5 * (w[static_cast<size_t>(p)] + w[static_cast<size_t>(q)]);
    };
    auto rho_at = [&](int node) { return rho ? (*rho)[node] : 0.0; };

    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(n) * 5);

    if (grid.kind() == GridKind::RadialBall) {
        const double h = grid.spacing(0);
        const double nd = static_cast<double>(grid.dimension());
        for (int i = 0; i < n; ++i) {
            if (grid.is_boundary(i)) {
                trip.emplace_back(i, i, 1.0);
                continue;
            }
            if (i == 0) {
                const double wf = face_w(0, 1);
                trip.emplace_back(0, 0, 2.0 * nd * wf / (h * h) - w[0] * rho_at(0));
                trip.emplace_back(0, 1, -2.0 * nd * wf / (h * h));
                continue;
            }
            const double r = grid.coord(i, 0);
            const double wi = w[static_cast<size_t>(i)];
            const double w_lo = face_w(i - 1, i);
            const double w_hi = face_w(i, i + 1);
            const double curv = wi * (nd - 1.0) / r;
            const double adv = wi * a.component(0, i);
            trip.emplace_back(i, i - 1, -w_lo / (h * h) + (curv - adv) / (2.0 * h));
            trip.emplace_back(i, i, (w_lo + w_hi) / (h * h) - wi * rho_at(i));
            trip.emplace_back(i, i + 1, -w_hi / (h * h) - (curv - adv) / (2.0 * h));
        }
    } else {
        for (int node = 0; node < n; ++node) {
            if (grid.is_boundary(node)) {
                trip.emplace_back(node, node, 1.0);
                continue;
            }
            const double wi = w[static_cast<size_t>(node)];
            double diag = -wi * rho_at(node);
            for (int ax = 0; ax < grid.axis_count(); ++ax) {
                const double h = grid.spacing(ax);
                const double adv = wi * a.component(ax, node);
                const int i = grid.axis_index(node, 0);
                const int j = grid.axis_count() > 1 ? grid.axis_index(node, 1) : 0;
                const int lo = ax == 0 ? grid.node_at(i - 1, j) : grid.node_at(i, j - 1);
                const int hi = ax == 0 ? grid.node_at(i + 1, j) : grid.node_at(i, j + 1);
                const double w_lo = face_w(lo, node);
                const double w_hi = face_w(node, hi);
                diag += (w_lo + w_hi) / (h * h);
                trip.emplace_back(node, lo, -w_lo / (h * h) - adv / (2.0 * h));
                trip.emplace_back(node, hi, -w_hi / (h * h) + adv / (2.0 * h));
            }
            trip.emplace_back(node, node, diag);
        }
    }

    Eigen::SparseMatrix<double, Eigen::RowMajor> mat(n, n);
    mat.setFromTriplets(trip.begin(), trip.end());
    return OperatorMatrix(grid, BoundaryTag::Dirichlet, std::move(mat));
}

OperatorMatrix assemble_kr_generator(const Grid& grid, const VectorField& c) {
    check_same_grid(grid, c.grid(), "assemble_kr_generator");
    check_peclet(grid, c, "assemble_kr_generator");

    const int n = grid.node_count();
    std::vector<Triplet> trip;
    trip.reserve(grid.faces().size() * 4);

    // Face flux F = (alpha_b - alpha_a)/h + c_face * (alpha_a + alpha_b)/2.
    // Each face feeds the divergence of its two cells with opposite signs, so
    // quadrature-weighted column sums telescope to zero; boundary faces carry
    // no flux, which is the built-in zero-flux condition.
    for (const GridFace& f : grid.faces()) {
        const double h = grid.spacing(f.axis);
        const double c_face = 0.5 * (c.component(f.axis, f.node_a) + c.component(f.axis, f.node_b));
        const double coef_a = -1.0 / h + 0.5 * c_face;
        const double coef_b = 1.0 / h + 0.5 * c_face;
        const double wa = grid.quad_weight(f.node_a);
        const double wb = grid.quad_weight(f.node_b);
        trip.emplace_back(f.node_a, f.node_a, f.area * coef_a / wa);
        trip.emplace_back(f.node_a, f.node_b, f.area * coef_b / wa);
        trip.emplace_back(f.node_b, f.node_a, -f.area * coef_a / wb);
        trip.emplace_back(f.node_b, f.node_b, -f.area * coef_b / wb);
    }

    Eigen::SparseMatrix<double, Eigen::RowMajor> mat(n, n);
    mat.setFromTriplets(trip.begin(), trip.end());
    return OperatorMatrix(grid, BoundaryTag::Flux, std::move(mat));
}

std::vector<double> generator_face_fluxes(const Grid& grid, const Field& alpha,
                                          const VectorField& c) {
    check_same_grid(grid, alpha.grid(), "generator_face_fluxes");
    check_same_grid(grid, c.grid(), "generator_face_fluxes");
    std::vector<double> flux;
    flux.reserve(grid.faces().size());
    for (const GridFace& f : grid.faces()) {
        const double h = grid.spacing(f.axis);
        const double c_face = 0.5 * (c.component(f.axis, f.node_a) + c.component(f.axis, f.node_b));
        flux.push_back((alpha[f.node_b] - alpha[f.node_a]) / h +
                       c_face * 0.5 * (alpha[f.node_a] + alpha[f.node_b]));
    }
    return flux;
}

}  // namespace pullin
