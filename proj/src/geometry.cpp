#include "ricci_dynamo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ricci_dynamo::geometry {

Metric2::Metric2(const Mat2& components, double t) : g_(components), t_(t) {
    if (!g_.allFinite()) {
        throw DegenerateMetric("metric has non-finite components");
    }
    if (g_(0, 1) != g_(1, 0)) {
        throw InvalidArgument("metric is not symmetric: g_12 = " + std::to_string(g_(0, 1)) +
                              ", g_21 = " + std::to_string(g_(1, 0)));
    }
    if (!(g_(0, 0) > 0.0) || !(g_.determinant() > 0.0)) {
        throw DegenerateMetric("metric is not positive-definite (g_11 = " + std::to_string(g_(0, 0)) +
                               ", det = " + std::to_string(g_.determinant()) + ")");
    }
}

Metric2 Metric2::identity(double t) { return Metric2(Mat2::Identity(), t); }

Metric2 Metric2::conformal(double scale, double t) { return Metric2(scale * Mat2::Identity(), t); }

double Metric2::volume_element() const { return std::sqrt(determinant()); }

RicciData RicciData::einstein(double lambda, const Metric2& g) { return {lambda * g.components()}; }

RicciData RicciData::diagonal(double r11, double r22) {
    RicciData r;
    r.components << r11, 0.0, 0.0, r22;
    return r;
}

bool RicciData::is_einstein(double tol) const {
    return std::abs(components(0, 0) - components(1, 1)) <= tol && std::abs(components(0, 1)) <= tol &&
           std::abs(components(1, 0)) <= tol;
}

bool Tensor3::is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return x == 0.0; });
}

double Tensor3::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
}

Mat2 EhlersSachs::reconstruct(const Metric2& g) const {
    return vorticity + shear - (expansion / 3.0) * g.components() - acceleration * velocity.transpose();
}

Metric2 ricci_flow_step(const Metric2& g, const RicciData& ric, double dt) {
    if (!(dt > 0.0)) {
        throw InvalidArgument("ricci_flow_step: dt must be positive");
    }
    const Mat2 next = g.components() - 2.0 * dt * ric.components;
    return Metric2(next, g.time() + dt);
}

namespace {

Metric2 einstein_substep(const Metric2& g, double lambda, double dt, int halvings_left) {
    try {
        return ricci_flow_step(g, RicciData::einstein(lambda, g), dt);
    } catch (const DegenerateMetric&) {
        if (halvings_left == 0) throw;
        const Metric2 mid = einstein_substep(g, lambda, 0.5 * dt, halvings_left - 1);
        return einstein_substep(mid, lambda, 0.5 * dt, halvings_left - 1);
    }
}

} // namespace

std::vector<Metric2> evolve_einstein_flow(const Metric2& g0, double lambda, double t_end, int steps,
                                          int max_halvings) {
    if (steps < 1 || !(t_end > 0.0)) {
        throw InvalidArgument("evolve_einstein_flow: need steps >= 1 and t_end > 0");
    }
    const double dt = t_end / steps;
    std::vector<Metric2> history;
    history.reserve(static_cast<std::size_t>(steps) + 1);
    history.push_back(g0);
    for (int n = 0; n < steps; ++n) {
        const Metric2 next = einstein_substep(history.back(), lambda, dt, max_halvings);
        // Re-anchor the time tag to avoid drift from repeated addition.
        history.emplace_back(next.components(), g0.time() + (n + 1) * dt);
    }
    return history;
}

Metric2 exact_flow_metric(double lambda, double t) {
    return Metric2(std::exp(-2.0 * lambda * t) * Mat2::Identity(), t);
}

std::vector<RicciEigenpair> ricci_eigen(const RicciData& ric, const Metric2& g) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat2> solver(ric.components, g.components());
    std::vector<RicciEigenpair> out;
    for (int i = 0; i < 2; ++i) {
        Vec2 chi = solver.eigenvectors().col(i);
        chi /= std::sqrt(chi.dot(g.components() * chi));
        out.push_back({solver.eigenvalues()(i), chi});
    }
    return out;
}

FiniteTimeLyapunov lyapunov_from_metric(std::span<const Metric2> history) {
    if (history.size() < 2) {
        throw InsufficientSamples("lyapunov_from_metric: need at least two metric samples, got " +
                                  std::to_string(history.size()));
    }
    const Metric2& first = history.front();
    const Metric2& last = history.back();
    const double window = last.time() - first.time();
    if (!(window > 0.0)) {
        throw InvalidArgument("lyapunov_from_metric: sample times must increase");
    }
    const Vec2 start = Eigen::SelfAdjointEigenSolver<Mat2>(first.components(), Eigen::EigenvaluesOnly).eigenvalues();
    const Vec2 end = Eigen::SelfAdjointEigenSolver<Mat2>(last.components(), Eigen::EigenvaluesOnly).eigenvalues();

    FiniteTimeLyapunov out;
    out.window = window;
    for (int i = 0; i < 2; ++i) {
        const double rate = -std::log(end(i) / start(i)) / (2.0 * window);
        out.ricci_rates.push_back(rate);
        out.exponents.push_back(-rate);
    }
    return out;
}

Connection christoffel(const Metric2& g, const MetricDerivative& dg) {
    const Mat2 ginv = g.inverse();
    Connection conn;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                double sum = 0.0;
                for (int l = 0; l < 2; ++l) {
                    sum += ginv(i, l) * (dg(j, k, l) + dg(k, j, l) - dg(l, j, k));
                }
                conn.christoffel(i, j, k) = sum;
            }
        }
    }
    return conn;
}

Connection christoffel_standard(const Metric2& g, const MetricDerivative& dg) {
    Connection conn = christoffel(g, dg);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) conn.christoffel(i, j, k) *= 0.5;
    return conn;
}

Tensor3 conformal_frame_rotation(double phi, const Vec2& grad_phi) {
    const double scale = std::exp(-phi);
    Tensor3 gamma;
    for (int l = 0; l < 2; ++l) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                const double term = (l == j ? grad_phi(k) : 0.0) - (j == k ? grad_phi(l) : 0.0);
                gamma(l, j, k) = scale * term;
            }
        }
    }
    return gamma;
}

EhlersSachs decompose_gradient(const Mat2& grad_v, const Metric2& g, const Vec2& v, const Vec2& acceleration) {
    // grad_v + A v^T = Omega + sigma - (theta/3) g
    const Mat2 m = grad_v + acceleration * v.transpose();
    const Mat2 sym = 0.5 * (m + m.transpose());
    const Mat2 ginv = g.inverse();

    EhlersSachs es;
    es.vorticity = 0.5 * (m - m.transpose());
    const double mean = 0.5 * (ginv.cwiseProduct(sym)).sum();
    es.expansion = -3.0 * mean;
    es.shear = sym - mean * g.components();
    es.shear_trace = (ginv.cwiseProduct(es.shear)).sum();
    es.acceleration = acceleration;
    es.velocity = v;
    return es;
}

double flow_divergence(const EhlersSachs& es) { return es.shear_trace - es.expansion; }

} // namespace ricci_dynamo::geometry
