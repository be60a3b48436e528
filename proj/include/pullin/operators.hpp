#pragma once

#include <memory>
#include <mutex>
#include <optional>

#include <Eigen/Sparse>

#include "pullin/grid.hpp"

namespace pullin {

enum class BoundaryTag { Dirichlet, Flux };

/// Sparse discrete elliptic operator over grid nodes. Dirichlet-tagged
/// matrices carry identity rows at boundary nodes; flux-tagged matrices are
/// conservative (quadrature-weighted column sums vanish). Immutable after
/// assembly; the factorization is built lazily behind a once-flag.
class OperatorMatrix {
public:
    OperatorMatrix(const Grid& grid, BoundaryTag tag,
                   Eigen::SparseMatrix<double, Eigen::RowMajor> matrix);

    const Grid& grid() const { return *grid_; }
    BoundaryTag boundary_tag() const { return tag_; }
    int rows() const { return static_cast<int>(matrix_.rows()); }

    Field apply(const Field& f) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

    /// Direct sparse-LU solve of M x = rhs.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

    /// New operator with d added to the diagonal (boundary rows untouched on
    /// Dirichlet matrices).
    OperatorMatrix plus_diagonal(const Field& d) const;

    /// New operator with interior rows scaled nodewise by s (turns the
    /// generalized problem M phi = K W phi into a plain one via W^{-1} M).
    OperatorMatrix row_scaled(const Field& s) const;

    double max_row_sum_abs() const;
    void for_each_entry(const std::function<void(int row, int col, double value)>& fn) const;
    int nonzeros_in_row(int row) const;

    const Eigen::SparseMatrix<double, Eigen::RowMajor>& raw() const { return matrix_; }

private:
    struct LazyLU {
        std::once_flag once;
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        bool ok = false;
    };

    const Grid* grid_;
    BoundaryTag tag_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix_;
    std::shared_ptr<LazyLU> lu_state_;
};

/// -Lap u + c.grad u - rho u with homogeneous Dirichlet rows. Radial grids
/// use -u'' - ((N-1)/r) u' + c_r u' with the r = 0 limit N u''(0). Centered
/// differences guarded by the mesh-Peclet condition h max|c| / 2 <= 1.
OperatorMatrix assemble_advection_diffusion(const Grid& grid, const VectorField& c,
                                            const std::optional<Field>& rho = std::nullopt);

/// -div(e^gamma grad u) + e^gamma a.grad u - e^gamma rho u in flux form with
/// face weights taken as arithmetic means of nodal e^gamma; Dirichlet rows.
OperatorMatrix assemble_weighted_form(const Grid& grid, const Field& gamma,
                                      const VectorField& a,
                                      const std::optional<Field>& rho = std::nullopt);

/// Conservative finite-volume discretization of div(grad alpha + alpha c)
/// with zero flux through boundary faces built into the stencil; every node
/// (including boundary nodes) carries a divergence row. Flux-tagged.
OperatorMatrix assemble_kr_generator(const Grid& grid, const VectorField& c);

/// Face fluxes of grad(alpha) + alpha c as used by the generator stencil:
/// entry k corresponds to grid.faces()[k].
std::vector<double> generator_face_fluxes(const Grid& grid, const Field& alpha,
                                          const VectorField& c);

}  // namespace pullin
