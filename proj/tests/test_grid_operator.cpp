#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "ricci_dynamo/dynamo_operator.hpp"
#include "ricci_dynamo/spectrum.hpp"

using namespace ricci_dynamo;
using namespace ricci_dynamo::grid;
using namespace ricci_dynamo::operators;
using geometry::Connection;
using geometry::Mat2;
using geometry::Metric2;

namespace {

// Fourier symbols of the fourth-order stencils for a mode exp(i k x) on spacing h.
double first_symbol(int k, double h) { return (8.0 * std::sin(k * h) - std::sin(2.0 * k * h)) / (6.0 * h); }
double second_symbol(int k, double h) {
    return (-2.0 * std::cos(2.0 * k * h) + 32.0 * std::cos(k * h) - 30.0) / (12.0 * h * h);
}

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

Eigen::VectorXd sample(const PeriodicGrid& g, double (*f)(double, double)) {
    Eigen::VectorXd out(g.points());
    for (int j = 0; j < g.n(); ++j)
        for (int i = 0; i < g.n(); ++i) out(g.index(i, j)) = f(g.x(i), g.y(j));
    return out;
}

GridField random_field(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd d(2 * n * n);
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = normal(rng);
    return GridField(n, d);
}

} // namespace

TEST_CASE("periodic indexing wraps in both directions") {
    const PeriodicGrid g(8);
    CHECK(g.index(0, 0) == 0);
    CHECK(g.index(1, 0) == 1);
    CHECK(g.index(0, 1) == 8);
    CHECK(g.index(-1, 0) == 7);
    CHECK(g.index(8, 9) == 8);
    CHECK(g.spacing() == doctest::Approx(2.0 * std::numbers::pi / 8));
    CHECK_THROWS_AS(PeriodicGrid(0), InvalidArgument);
}

TEST_CASE("stencils act on Fourier modes by their discrete symbols") {
    const int n = 24;
    const PeriodicGrid g(n);
    const double h = g.spacing();
    for (int k : {1, 3, 5}) {
        Eigen::VectorXd s(g.points()), c(g.points()), sy(g.points());
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                s(g.index(i, j)) = std::sin(k * g.x(i));
                c(g.index(i, j)) = std::cos(k * g.x(i));
                sy(g.index(i, j)) = std::sin(k * g.y(j));
            }
        }
        CHECK(max_abs_diff(apply_stencil(g, s, first_x(h)), first_symbol(k, h) * c) < 1e-12);
        CHECK(max_abs_diff(apply_stencil(g, c, second_xx(h)), second_symbol(k, h) * c) < 1e-11);
        CHECK(apply_stencil(g, s, first_y(h)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(max_abs_diff(apply_stencil(g, sy, second_yy(h)), second_symbol(k, h) * sy) < 1e-11);
    }
}

TEST_CASE("first derivative converges at fourth order") {
    auto error = [](int n) {
        const PeriodicGrid g(n);
        const auto f = sample(g, [](double x, double y) { return std::sin(x) * std::cos(2 * y); });
        const auto exact = sample(g, [](double x, double y) { return std::cos(x) * std::cos(2 * y); });
        return max_abs_diff(apply_stencil(g, f, first_x(g.spacing())), exact);
    };
    const double order = std::log2(error(16) / error(32));
    CHECK(order == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("mixed stencil differentiates sin x sin y") {
    const PeriodicGrid g(32);
    const auto f = sample(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
    const auto c = sample(g, [](double x, double y) { return std::cos(x) * std::cos(y); });
    const double sym = first_symbol(1, g.spacing());
    CHECK(max_abs_diff(apply_stencil(g, f, mixed_xy(g.spacing())), sym * sym * c) < 1e-12);
}

TEST_CASE("grid field construction and validation") {
    CHECK_THROWS_AS(GridField(8, Eigen::VectorXd::Zero(10)), GridMismatch);
    auto sinx = [](double x, double) { return std::sin(x); };
    auto zero = [](double, double) { return 0.0; };
    CHECK_NOTHROW(GridField::from_functions(16, sinx, zero));
    CHECK_THROWS_AS(GridField::from_functions(16, sinx, zero, true), InvalidArgument);
    const auto siny = GridField::from_functions(16, [](double, double y) { return std::sin(y); }, zero, true);
    CHECK(siny.solenoidal());
    CHECK(max_divergence(siny) < 1e-14);

    // div (sin x, 0) = cos x up to the stencil symbol.
    const auto f = GridField::from_functions(16, sinx, zero);
    const auto div = divergence(f);
    const double sym = first_symbol(1, f.grid().spacing());
    for (int i = 0; i < 16; ++i) CHECK(div(f.grid().index(i, 3)) == doctest::Approx(sym * std::cos(f.grid().x(i))));

    const auto c = GridField::constant(8, 1.0, -2.0);
    CHECK(c.at(0, 3, 4) == 1.0);
    CHECK(c.at(1, 7, 7) == -2.0);
    CHECK_THROWS_AS(require_same_grid(GridField(8), GridField(16), "test"), GridMismatch);
}

TEST_CASE("Poisson bracket of a shear flow with a transverse field") {
    // v = (sin y, 0), B = (0, sin x): psi = sin x sin y, {v, B} = (-sin x cos y, cos x sin y).
    const int n = 64;
    const auto v = GridField::from_functions(n, [](double, double y) { return std::sin(y); },
                                             [](double, double) { return 0.0; });
    const auto b = GridField::from_functions(n, [](double, double) { return 0.0; },
                                             [](double x, double) { return std::sin(x); });
    const auto pb = poisson_bracket(v, b);
    const auto expected = GridField::from_functions(n, [](double x, double y) { return -std::sin(x) * std::cos(y); },
                                                    [](double x, double y) { return std::cos(x) * std::sin(y); });
    CHECK(max_abs_diff(pb.data(), expected.data()) < 1e-5);
    CHECK_THROWS_AS(poisson_bracket(GridField(8), GridField(16)), GridMismatch);
}

TEST_CASE("curved Laplacian with a constant anisotropic metric") {
    const int n = 32;
    Mat2 m;
    m << 2.0, 0.0, 0.0, 0.5;
    const Metric2 g(m);
    // g^ij d_i d_j of (cos x, cos 2y) = (-cos x / 2, -4 cos 2y * 2)
    const auto b = GridField::from_functions(n, [](double x, double) { return std::cos(x); },
                                             [](double, double y) { return std::cos(2 * y); });
    const auto lap = curved_laplacian(b, g, Connection::flat());
    const double h = b.grid().spacing();
    const auto expected = GridField::from_functions(
        n, [&](double x, double) { return 0.5 * second_symbol(1, h) * std::cos(x); },
        [&](double, double y) { return 2.0 * second_symbol(2, h) * std::cos(2 * y); });
    CHECK(max_abs_diff(lap.data(), expected.data()) < 1e-11);
}

TEST_CASE("frame coefficients add the zeroth and first order terms") {
    const int n = 16;
    const Metric2 g = Metric2::identity();
    Connection conn;
    conn.ricci_rotation = geometry::conformal_frame_rotation(0.0, geometry::Vec2(0.3, 0.0));
    // Constant field: only sum_ij g^ij gamma^l_jk gamma^p_il B^k survives.
    const auto b = GridField::constant(n, 1.0, 2.0);
    const auto lap = curved_laplacian(b, g, conn);
    const auto& gm = conn.ricci_rotation;
    for (int p = 0; p < 2; ++p) {
        double expected = 0.0;
        const double bk[2] = {1.0, 2.0};
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int l = 0; l < 2; ++l) expected += gm(l, i, k) * gm(p, i, l) * bk[k];
        CHECK(lap.at(p, 5, 9) == doctest::Approx(expected));
    }
}

TEST_CASE("assembled matrix reproduces the matrix-free right-hand side") {
    const int n = 16;
    const auto v = GridField::from_functions(n, [](double x, double y) { return std::sin(y) + 0.3 * std::cos(x); },
                                             [](double x, double y) { return 0.5 * std::sin(x + y); });
    Mat2 m;
    m << 1.3, 0.2, 0.2, 0.9;
    const Metric2 g(m);
    Connection conn;
    conn.ricci_rotation = geometry::conformal_frame_rotation(0.1, geometry::Vec2(0.2, -0.4));
    for (auto sign : {CompressionSign::Plus, CompressionSign::Minus}) {
        const auto op = assemble_grid(v, g, conn, 0.7, n, sign);
        for (unsigned seed : {1u, 2u}) {
            const auto b = random_field(n, seed);
            const Eigen::VectorXd lhs = op.matrix * b.data();
            const auto rhs = induction_rhs(v, b, 0.7, g, conn, sign);
            CHECK(max_abs_diff(lhs, rhs.data()) < 1e-10);
            CHECK(max_abs_diff(op.apply(b).data(), rhs.data()) < 1e-10);
        }
    }
}

TEST_CASE("compression sign flips the (div v) B term") {
    const int n = 16;
    const auto v = GridField::from_functions(n, [](double x, double) { return std::sin(x); },
                                             [](double, double) { return 0.0; });
    const auto b = GridField::constant(n, 1.0, 0.0);
    const Metric2 g = Metric2::identity();
    const auto plus = induction_rhs(v, b, 0.0, g, Connection::flat(), CompressionSign::Plus);
    const auto minus = induction_rhs(v, b, 0.0, g, Connection::flat(), CompressionSign::Minus);
    const auto div = divergence(v);
    // Difference is 2 (div v) B.
    CHECK(max_abs_diff(plus.component(0) - minus.component(0), 2.0 * div) < 1e-12);
}

TEST_CASE("assembly argument checks") {
    const Metric2 g = Metric2::identity();
    CHECK_THROWS_AS(assemble_grid(GridField(4), g, Connection::flat(), 1.0, 4), InvalidArgument);
    CHECK_THROWS_AS(assemble_grid(GridField(8), g, Connection::flat(), 1.0, 16), GridMismatch);
    CHECK_THROWS_AS(assemble_grid(GridField(8), g, Connection::flat(), -1.0, 8), InvalidArgument);
}

TEST_CASE("pure diffusion operator has the discrete Laplacian spectrum") {
    const int n = 16;
    const auto op = assemble_grid(GridField(n), Metric2::identity(), Connection::flat(), 1.0, n);
    const double h = PeriodicGrid(n).spacing();
    // Leading eigenvalues: 0 (constant fields, x2) then the |k| = 1 cluster (x8).
    const auto spec = spectrum::numerical_spectrum(op, 4);
    const auto vals = spec.values();
    REQUIRE(vals.size() == 4);
    CHECK(std::abs(vals[0]) < 1e-7);
    CHECK(std::abs(vals[1]) < 1e-7);
    CHECK(std::abs(vals[2] - second_symbol(1, h)) < 1e-7);
    CHECK(std::abs(vals[3] - second_symbol(1, h)) < 1e-7);
    CHECK(op.row_norm() > 0.0);
}

TEST_CASE("RK4 propagation of the diffusion operator") {
    const int n = 16;
    const auto op = assemble_grid(GridField(n), Metric2::identity(), Connection::flat(), 1.0, n);
    const auto b = GridField::from_functions(n, [](double x, double) { return std::sin(x); },
                                             [](double, double) { return 0.0; });
    Eigen::MatrixXd block = b.data();
    rk4_propagate(op.matrix, block, 0.01, 100);
    const double rate = second_symbol(1, PeriodicGrid(n).spacing());
    CHECK(max_abs_diff(block.col(0), std::exp(rate) * b.data()) < 1e-8);
}
