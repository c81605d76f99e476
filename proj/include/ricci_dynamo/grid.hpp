#pragma once

#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ricci_dynamo/errors.hpp"

namespace ricci_dynamo::grid {

/// One weighted neighbour in a periodic finite-difference stencil.
struct StencilTap {
    int dx;
    int dy;
    double weight;
};

using Stencil = std::vector<StencilTap>;

// Fourth-order central differences on spacing h.
Stencil first_x(double h);
Stencil first_y(double h);
Stencil second_xx(double h);
Stencil second_yy(double h);
Stencil mixed_xy(double h);

/// Periodic N x N grid covering [0, 2pi)^2. Scalar fields are stored row-major
/// with x fastest: index = j * N + i for node (x_i, y_j).
class PeriodicGrid {
public:
    explicit PeriodicGrid(int n);

    int n() const { return n_; }
    int points() const { return n_ * n_; }
    double spacing() const { return 2.0 * std::numbers::pi / n_; }
    double x(int i) const { return i * spacing(); }
    double y(int j) const { return j * spacing(); }

    int index(int i, int j) const { return wrap(j) * n_ + wrap(i); }
    int wrap(int i) const { return ((i % n_) + n_) % n_; }

private:
    int n_;
};

/// Applies `stencil` to a periodic scalar field.
Eigen::VectorXd apply_stencil(const PeriodicGrid& grid, const Eigen::VectorXd& f, const Stencil& stencil);

/// Two-component vector field on a periodic grid. Components are stored back to
/// back in one vector: [B^1 (N^2 values), B^2 (N^2 values)].
class GridField {
public:
    explicit GridField(int n);
    GridField(int n, Eigen::VectorXd data, bool solenoidal = false);

    using Function = std::function<double(double, double)>;
    /// Samples (f1(x, y), f2(x, y)) at the nodes. With `solenoidal` set, throws
    /// InvalidArgument if the discrete divergence exceeds kSolenoidalTolerance.
    static GridField from_functions(int n, const Function& f1, const Function& f2, bool solenoidal = false);
    static GridField constant(int n, double b1, double b2);

    static constexpr double kSolenoidalTolerance = 1e-10;

    int n() const { return grid_.n(); }
    const PeriodicGrid& grid() const { return grid_; }
    bool solenoidal() const { return solenoidal_; }

    const Eigen::VectorXd& data() const { return data_; }
    Eigen::VectorXd& data() { return data_; }

    Eigen::VectorXd component(int c) const;
    void set_component(int c, const Eigen::VectorXd& values);
    double& at(int c, int i, int j) { return data_(c * grid_.points() + grid_.index(i, j)); }
    double at(int c, int i, int j) const { return data_(c * grid_.points() + grid_.index(i, j)); }

private:
    PeriodicGrid grid_;
    Eigen::VectorXd data_;
    bool solenoidal_ = false;
};

/// Central-difference divergence d_x F^1 + d_y F^2.
Eigen::VectorXd divergence(const GridField& f);
double max_divergence(const GridField& f);

/// Throws GridMismatch when the two fields live on different grids.
void require_same_grid(const GridField& a, const GridField& b, const char* where);

} // namespace ricci_dynamo::grid
