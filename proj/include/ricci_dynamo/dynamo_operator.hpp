#pragma once

#include <optional>
#include <variant>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ricci_dynamo/geometry.hpp"
#include "ricci_dynamo/grid.hpp"

namespace ricci_dynamo::operators {

using geometry::Connection;
using geometry::Mat2;
using geometry::Metric2;
using grid::GridField;

/// Sign in front of the compressive (div v) B term of the induction equation.
enum class CompressionSign {
    Plus,   // dB/dt = -{v,B} + (div v) B + eta Laplacian B
    Minus,  // dB/dt = -{v,B} - (div v) B + eta Laplacian B
};

/// Parameters of the reduced Einstein-manifold problem.
struct ReducedParameters {
    double R = 0.0;
    double theta = 0.0;
    double eta = 0.0;
};

/// The dynamo operator restricted to a constant-coefficient 2x2 system.
struct ReducedOperator {
    Mat2 matrix = Mat2::Zero();
    std::optional<ReducedParameters> parameters;

    static ReducedOperator from_matrix(const Mat2& m) { return {m, std::nullopt}; }
};

/// Companion matrix [[0, -c], [1, -b]] with b = 2(R + theta/2 - eta) and
/// c = R^2 + theta^2 + 2(eta - theta) R. Its characteristic polynomial is
/// lambda^2 + b lambda + c.
ReducedOperator assemble_reduced(double R, double theta, double eta);

/// Coefficients of lambda^2 + b lambda + c for the reduced problem.
struct QuadraticCoefficients {
    double b;
    double c;
};
QuadraticCoefficients characteristic_coefficients(double R, double theta, double eta);

/// Induction operator discretised on a periodic grid. `matrix` acts on
/// GridField::data().
struct GridOperator {
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
    GridField velocity;
    Metric2 metric;
    Connection connection;
    double eta;
    CompressionSign sign;

    int n() const { return velocity.n(); }
    GridField apply(const GridField& b) const;
    /// Largest absolute row sum; bounds the spectral radius.
    double row_norm() const;
};

using DynamoOperator = std::variant<ReducedOperator, GridOperator>;

enum class OperatorKind { Reduced, Grid };
OperatorKind kind(const DynamoOperator& op);

/// {v, B} = -curl(v x B) with the planar embedding: psi = v^1 B^2 - v^2 B^1 is the
/// out-of-plane component of v x B and curl(psi z) = (d_y psi, -d_x psi).
GridField poisson_bracket(const GridField& v, const GridField& b);

/// Frame-expanded Laplacian of a vector field for a constant metric and constant
/// frame coefficients:
///   g^ij d_i d_j B^p + B^k gamma^l_jk gamma^p_il g^ij + gamma^p_jk g^ij d_i B^k.
GridField curved_laplacian(const GridField& b, const Metric2& g, const Connection& conn);

/// -{v, B} +/- (div v) B + eta Laplacian B.
GridField induction_rhs(const GridField& v, const GridField& b, double eta, const Metric2& g,
                        const Connection& conn, CompressionSign sign = CompressionSign::Plus);

/// Sparse matrix L with L * B.data() == induction_rhs(v, B, ...).data().
GridOperator assemble_grid(const GridField& v, const Metric2& g, const Connection& conn, double eta, int n,
                           CompressionSign sign = CompressionSign::Plus);

/// Advances every column of `block` by `steps` classical RK4 steps of size dt
/// under dX/dt = L X.
void rk4_propagate(const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix, Eigen::MatrixXd& block, double dt,
                   int steps);

} // namespace ricci_dynamo::operators
