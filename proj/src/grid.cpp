#include "ricci_dynamo/grid.hpp"

#include <string>

namespace ricci_dynamo::grid {

namespace {

// (-f_{+2} + 8 f_{+1} - 8 f_{-1} + f_{-2}) / 12h
Stencil first_along(double h, int ax, int ay) {
    const double s = 1.0 / (12.0 * h);
    return {{-2 * ax, -2 * ay, s}, {-ax, -ay, -8.0 * s}, {ax, ay, 8.0 * s}, {2 * ax, 2 * ay, -s}};
}

// (-f_{+2} + 16 f_{+1} - 30 f_0 + 16 f_{-1} - f_{-2}) / 12h^2
Stencil second_along(double h, int ax, int ay) {
    const double s = 1.0 / (12.0 * h * h);
    return {{-2 * ax, -2 * ay, -s}, {-ax, -ay, 16.0 * s}, {0, 0, -30.0 * s}, {ax, ay, 16.0 * s}, {2 * ax, 2 * ay, -s}};
}

} // namespace

Stencil first_x(double h) { return first_along(h, 1, 0); }
Stencil first_y(double h) { return first_along(h, 0, 1); }
Stencil second_xx(double h) { return second_along(h, 1, 0); }
Stencil second_yy(double h) { return second_along(h, 0, 1); }

Stencil mixed_xy(double h) {
    Stencil out;
    for (const auto& a : first_x(h)) {
        for (const auto& b : first_y(h)) {
            out.push_back({a.dx, b.dy, a.weight * b.weight});
        }
    }
    return out;
}

PeriodicGrid::PeriodicGrid(int n) : n_(n) {
    if (n < 1) {
        throw InvalidArgument("grid size must be positive, got " + std::to_string(n));
    }
}

Eigen::VectorXd apply_stencil(const PeriodicGrid& grid, const Eigen::VectorXd& f, const Stencil& stencil) {
    const int n = grid.n();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.points());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (const auto& tap : stencil) {
                acc += tap.weight * f(grid.index(i + tap.dx, j + tap.dy));
            }
            out(j * n + i) = acc;
        }
    }
    return out;
}

GridField::GridField(int n) : grid_(n), data_(Eigen::VectorXd::Zero(2 * grid_.points())) {}

GridField::GridField(int n, Eigen::VectorXd data, bool solenoidal)
    : grid_(n), data_(std::move(data)), solenoidal_(solenoidal) {
    if (data_.size() != 2 * grid_.points()) {
        throw GridMismatch("grid field data has " + std::to_string(data_.size()) + " values, expected " +
                           std::to_string(2 * grid_.points()));
    }
    if (solenoidal_ && max_divergence(*this) > kSolenoidalTolerance) {
        throw InvalidArgument("field flagged solenoidal has discrete divergence " +
                              std::to_string(max_divergence(*this)));
    }
}

GridField GridField::from_functions(int n, const Function& f1, const Function& f2, bool solenoidal) {
    GridField out(n);
    const auto& g = out.grid();
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            out.at(0, i, j) = f1(g.x(i), g.y(j));
            out.at(1, i, j) = f2(g.x(i), g.y(j));
        }
    }
    return GridField(n, std::move(out.data_), solenoidal);
}

GridField GridField::constant(int n, double b1, double b2) {
    return from_functions(n, [b1](double, double) { return b1; }, [b2](double, double) { return b2; });
}

Eigen::VectorXd GridField::component(int c) const { return data_.segment(c * grid_.points(), grid_.points()); }

void GridField::set_component(int c, const Eigen::VectorXd& values) {
    data_.segment(c * grid_.points(), grid_.points()) = values;
}

Eigen::VectorXd divergence(const GridField& f) {
    const double h = f.grid().spacing();
    return apply_stencil(f.grid(), f.component(0), first_x(h)) + apply_stencil(f.grid(), f.component(1), first_y(h));
}

double max_divergence(const GridField& f) { return divergence(f).cwiseAbs().maxCoeff(); }

void require_same_grid(const GridField& a, const GridField& b, const char* where) {
    if (a.n() != b.n()) {
        throw GridMismatch(std::string(where) + ": grid sizes differ (" + std::to_string(a.n()) + " vs " +
                           std::to_string(b.n()) + ")");
    }
}

} // namespace ricci_dynamo::grid
