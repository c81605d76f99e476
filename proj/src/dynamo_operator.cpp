#include "ricci_dynamo/dynamo_operator.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace ricci_dynamo::operators {

using grid::apply_stencil;
using grid::PeriodicGrid;
using grid::Stencil;

QuadraticCoefficients characteristic_coefficients(double R, double theta, double eta) {
    return {2.0 * (R + 0.5 * theta - eta), R * R + theta * theta + 2.0 * (eta - theta) * R};
}

ReducedOperator assemble_reduced(double R, double theta, double eta) {
    const auto [b, c] = characteristic_coefficients(R, theta, eta);
    ReducedOperator op;
    op.matrix << 0.0, -c, 1.0, -b;
    op.parameters = ReducedParameters{R, theta, eta};
    return op;
}

OperatorKind kind(const DynamoOperator& op) {
    return std::holds_alternative<ReducedOperator>(op) ? OperatorKind::Reduced : OperatorKind::Grid;
}

namespace {

double sign_factor(CompressionSign s) { return s == CompressionSign::Plus ? 1.0 : -1.0; }

// Constant coefficients of the lower-order terms of the frame Laplacian.
struct LaplacianCoefficients {
    Mat2 inverse_metric;
    Mat2 zeroth;                                 // zeroth(p, k)
    std::array<std::array<Eigen::Vector2d, 2>, 2> first;  // first[p][k](i)
};

LaplacianCoefficients laplacian_coefficients(const Metric2& g, const Connection& conn) {
    const auto& gamma = conn.ricci_rotation;
    LaplacianCoefficients lc;
    lc.inverse_metric = g.inverse();
    const Mat2& ginv = lc.inverse_metric;
    for (int p = 0; p < 2; ++p) {
        for (int k = 0; k < 2; ++k) {
            double z = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int l = 0; l < 2; ++l) z += ginv(i, j) * gamma(l, j, k) * gamma(p, i, l);
            lc.zeroth(p, k) = z;
            for (int i = 0; i < 2; ++i) {
                double f = 0.0;
                for (int j = 0; j < 2; ++j) f += gamma(p, j, k) * ginv(i, j);
                lc.first[p][k](i) = f;
            }
        }
    }
    return lc;
}

} // namespace

GridField poisson_bracket(const GridField& v, const GridField& b) {
    grid::require_same_grid(v, b, "poisson_bracket");
    const PeriodicGrid& g = b.grid();
    const double h = g.spacing();
    const Eigen::VectorXd psi =
        v.component(0).cwiseProduct(b.component(1)) - v.component(1).cwiseProduct(b.component(0));
    GridField out(b.n());
    out.set_component(0, -apply_stencil(g, psi, grid::first_y(h)));
    out.set_component(1, apply_stencil(g, psi, grid::first_x(h)));
    return out;
}

GridField curved_laplacian(const GridField& b, const Metric2& g, const Connection& conn) {
    const PeriodicGrid& pg = b.grid();
    const double h = pg.spacing();
    const LaplacianCoefficients lc = laplacian_coefficients(g, conn);
    const Mat2& ginv = lc.inverse_metric;

    const std::array<Eigen::VectorXd, 2> comp{b.component(0), b.component(1)};
    std::array<std::array<Eigen::VectorXd, 2>, 2> grad;  // grad[k][i] = d_i B^k
    for (int k = 0; k < 2; ++k) {
        grad[k][0] = apply_stencil(pg, comp[k], grid::first_x(h));
        grad[k][1] = apply_stencil(pg, comp[k], grid::first_y(h));
    }

    GridField out(b.n());
    for (int p = 0; p < 2; ++p) {
        Eigen::VectorXd acc = ginv(0, 0) * apply_stencil(pg, comp[p], grid::second_xx(h)) +
                              ginv(1, 1) * apply_stencil(pg, comp[p], grid::second_yy(h));
        const double cross = ginv(0, 1) + ginv(1, 0);
        if (cross != 0.0) acc += cross * apply_stencil(pg, comp[p], grid::mixed_xy(h));
        for (int k = 0; k < 2; ++k) {
            if (lc.zeroth(p, k) != 0.0) acc += lc.zeroth(p, k) * comp[k];
            for (int i = 0; i < 2; ++i) {
                if (lc.first[p][k](i) != 0.0) acc += lc.first[p][k](i) * grad[k][i];
            }
        }
        out.set_component(p, acc);
    }
    return out;
}

GridField induction_rhs(const GridField& v, const GridField& b, double eta, const Metric2& g,
                        const Connection& conn, CompressionSign sign) {
    if (eta < 0.0) {
        throw InvalidArgument("induction_rhs: eta must be non-negative");
    }
    grid::require_same_grid(v, b, "induction_rhs");
    const Eigen::VectorXd div_v = grid::divergence(v);
    const double s = sign_factor(sign);

    GridField out(b.n());
    Eigen::VectorXd& d = out.data();
    d = -poisson_bracket(v, b).data();
    for (int c = 0; c < 2; ++c) {
        d.segment(c * b.grid().points(), b.grid().points()) += s * div_v.cwiseProduct(b.component(c));
    }
    if (eta != 0.0) d += eta * curved_laplacian(b, g, conn).data();
    return out;
}

GridOperator assemble_grid(const GridField& v, const Metric2& g, const Connection& conn, double eta, int n,
                           CompressionSign sign) {
    if (n < 8) {
        throw InvalidArgument("assemble_grid: N must be at least 8, got " + std::to_string(n));
    }
    if (eta < 0.0) {
        throw InvalidArgument("assemble_grid: eta must be non-negative");
    }
    if (v.n() != n) {
        throw GridMismatch("assemble_grid: velocity field has N = " + std::to_string(v.n()) + ", operator N = " +
                           std::to_string(n));
    }
    const PeriodicGrid& pg = v.grid();
    const int np = pg.points();
    const double h = pg.spacing();
    const Stencil dx = grid::first_x(h);
    const Stencil dy = grid::first_y(h);
    const Stencil dxx = grid::second_xx(h);
    const Stencil dyy = grid::second_yy(h);
    const Stencil dxy = grid::mixed_xy(h);
    const Eigen::VectorXd v1 = v.component(0);
    const Eigen::VectorXd v2 = v.component(1);
    const Eigen::VectorXd div_v = grid::divergence(v);
    const double s = sign_factor(sign);
    const LaplacianCoefficients lc = laplacian_coefficients(g, conn);
    const Mat2& ginv = lc.inverse_metric;
    const double cross = ginv(0, 1) + ginv(1, 0);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(np) * 2 * 40);
    auto col = [np](int comp, int node) { return comp * np + node; };

    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int node = pg.index(i, j);
            const int row0 = col(0, node);
            const int row1 = col(1, node);

            // -{v,B} = (d_y psi, -d_x psi) with psi = v1 B2 - v2 B1.
            for (const auto& t : dy) {
                const int sn = pg.index(i + t.dx, j + t.dy);
                triplets.emplace_back(row0, col(1, sn), t.weight * v1(sn));
                triplets.emplace_back(row0, col(0, sn), -t.weight * v2(sn));
            }
            for (const auto& t : dx) {
                const int sn = pg.index(i + t.dx, j + t.dy);
                triplets.emplace_back(row1, col(1, sn), -t.weight * v1(sn));
                triplets.emplace_back(row1, col(0, sn), t.weight * v2(sn));
            }

            for (int p = 0; p < 2; ++p) {
                const int row = col(p, node);
                triplets.emplace_back(row, row, s * div_v(node));
                if (eta == 0.0) continue;

                auto add_stencil = [&](const Stencil& st, int comp, double coef) {
                    if (coef == 0.0) return;
                    for (const auto& t : st) {
                        triplets.emplace_back(row, col(comp, pg.index(i + t.dx, j + t.dy)), eta * coef * t.weight);
                    }
                };
                add_stencil(dxx, p, ginv(0, 0));
                add_stencil(dyy, p, ginv(1, 1));
                add_stencil(dxy, p, cross);
                for (int k = 0; k < 2; ++k) {
                    if (lc.zeroth(p, k) != 0.0) triplets.emplace_back(row, col(k, node), eta * lc.zeroth(p, k));
                    add_stencil(dx, k, lc.first[p][k](0));
                    add_stencil(dy, k, lc.first[p][k](1));
                }
            }
        }
    }

    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix(2 * np, 2 * np);
    matrix.setFromTriplets(triplets.begin(), triplets.end());
    matrix.prune(0.0);
    return GridOperator{std::move(matrix), v, g, conn, eta, sign};
}

GridField GridOperator::apply(const GridField& b) const {
    grid::require_same_grid(velocity, b, "GridOperator::apply");
    return GridField(b.n(), matrix * b.data());
}

double GridOperator::row_norm() const {
    double best = 0.0;
    for (int r = 0; r < matrix.outerSize(); ++r) {
        double sum = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(matrix, r); it; ++it) {
            sum += std::abs(it.value());
        }
        best = std::max(best, sum);
    }
    return best;
}

void rk4_propagate(const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix, Eigen::MatrixXd& block, double dt,
                   int steps) {
    Eigen::MatrixXd k1, k2, k3, k4;
    for (int s = 0; s < steps; ++s) {
        k1 = matrix * block;
        k2 = matrix * (block + 0.5 * dt * k1);
        k3 = matrix * (block + 0.5 * dt * k2);
        k4 = matrix * (block + dt * k3);
        block += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

} // namespace ricci_dynamo::operators
