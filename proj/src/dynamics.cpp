#include "ricci_dynamo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace ricci_dynamo::dynamics {

namespace {

constexpr double kMaxGrowthPerStep = 1e6;

void check_window(double t_end, double dt) {
    if (!(t_end > 0.0) || !(dt > 0.0) || dt > t_end) {
        throw InvalidArgument("integrate: need t_end > 0 and 0 < dt <= t_end");
    }
}

// Sample times 0, dt, 2dt, ... with t_end appended when it is not a multiple of dt.
std::vector<double> sample_times(double t_end, double dt) {
    std::vector<double> times;
    const auto whole = static_cast<long>(std::floor(t_end / dt + 1e-9));
    for (long n = 0; n <= whole; ++n) times.push_back(static_cast<double>(n) * dt);
    if (t_end - times.back() > 1e-9 * t_end) times.push_back(t_end);
    return times;
}

void check_growth(double before, double after, double t) {
    if (!std::isfinite(after) || (before > 0.0 && after > kMaxGrowthPerStep * before)) {
        throw StepUnstable("norm grew by more than 1e6 in one step at t = " + std::to_string(t));
    }
}

Vec2 rk4_step(const geometry::Mat2& a, const Vec2& b, double h) {
    const Vec2 k1 = a * b;
    const Vec2 k2 = a * (b + 0.5 * h * k1);
    const Vec2 k3 = a * (b + 0.5 * h * k2);
    const Vec2 k4 = a * (b + h * k3);
    return b + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double norm_of(const Vec2& b, const Metric2& g) { return std::sqrt(magnetic_energy(b, g)); }

double grid_norm(const Eigen::VectorXd& data, const grid::PeriodicGrid& pg, const Metric2& g) {
    return std::sqrt(magnetic_energy(GridField(pg.n(), data), g));
}

double grid_time_step(const operators::GridOperator& op, double requested) {
    double dt = requested;
    if (op.eta > 0.0) {
        const double h = op.velocity.grid().spacing();
        dt = std::min(dt, 0.25 * h * h / op.eta);
    }
    return dt;
}

template <typename State>
EnergyHistory energy_history(const Trajectory<State>& traj, const MetricSchedule& g_of_t) {
    if (traj.times.size() < 3) {
        throw InsufficientSamples("energy_rate: need at least three samples, got " +
                                  std::to_string(traj.times.size()));
    }
    EnergyHistory h;
    h.times = traj.times;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        h.energy.push_back(magnetic_energy(traj.states[i], g_of_t(traj.times[i])));
    }
    h.fitted_rate = fitted_log_slope(h.times, h.energy);
    if (std::abs(h.fitted_rate) <= kMarginalRateTolerance) {
        h.trend = EnergyTrend::Marginal;
    } else {
        h.trend = h.fitted_rate > 0.0 ? EnergyTrend::Growing : EnergyTrend::Decaying;
    }
    h.dynamo_action = h.trend != EnergyTrend::Decaying;
    return h;
}

// Combines (t_k, f_k) pairs into estimates with the c/t transient removed.
void finish_estimate(LyapunovEstimate& est) {
    std::vector<double> extrapolated;
    for (std::size_t k = 1; k < est.times.size(); ++k) {
        const double t0 = est.times[k - 1];
        const double t1 = est.times[k];
        extrapolated.push_back((t1 * est.raw[k] - t0 * est.raw[k - 1]) / (t1 - t0));
    }
    est.value = extrapolated.back();
    const double prev = extrapolated[extrapolated.size() - 2];
    est.converged = std::abs(est.value - prev) <= 0.01 * std::abs(est.value) + 1e-9;
    est.t_start = est.times.front();
    est.t_end = est.times.back();
}

std::vector<double> geometric_times(double t_max, int samples) {
    if (!(t_max > 0.0) || samples < 4) {
        throw InvalidArgument("lyapunov_exponent: need t_max > 0 and samples >= 4");
    }
    std::vector<double> times;
    for (int k = 0; k < samples; ++k) times.push_back(std::ldexp(t_max, k - (samples - 1)));
    return times;
}

} // namespace

Vec2 propagate(const operators::ReducedOperator& op, const Vec2& b, double t) {
    const geometry::Mat2 m = (op.matrix * t).exp();
    return m * b;
}

ReducedTrajectory integrate(const operators::ReducedOperator& op, const Vec2& b0, double t_end, double dt,
                            ReducedMethod method, const Metric2& g) {
    check_window(t_end, dt);
    if (b0.isZero(0.0)) throw InvalidArgument("integrate: initial field must be non-zero");

    ReducedTrajectory traj;
    traj.times = sample_times(t_end, dt);
    traj.states.push_back(b0);
    traj.norms.push_back(norm_of(b0, g));
    for (std::size_t n = 1; n < traj.times.size(); ++n) {
        const double t = traj.times[n];
        Vec2 next = (method == ReducedMethod::Exponential) ? propagate(op, b0, t)
                                                           : rk4_step(op.matrix, traj.states.back(), t - traj.times[n - 1]);
        const double norm = norm_of(next, g);
        check_growth(traj.norms.back(), norm, t);
        traj.states.push_back(next);
        traj.norms.push_back(norm);
    }
    return traj;
}

GridTrajectory integrate(const operators::GridOperator& op, const GridField& b0, double t_end, double dt) {
    check_window(t_end, dt);
    grid::require_same_grid(op.velocity, b0, "integrate");
    if (b0.data().isZero(0.0)) throw InvalidArgument("integrate: initial field must be non-zero");

    const double step = grid_time_step(op, dt);
    const auto& pg = b0.grid();

    GridTrajectory traj;
    traj.times = sample_times(t_end, dt);
    traj.states.push_back(b0);
    traj.norms.push_back(grid_norm(b0.data(), pg, op.metric));

    Eigen::MatrixXd state = b0.data();
    for (std::size_t n = 1; n < traj.times.size(); ++n) {
        const double interval = traj.times[n] - traj.times[n - 1];
        const int substeps = std::max(1, static_cast<int>(std::ceil(interval / step - 1e-9)));
        const double h = interval / substeps;
        double before = grid_norm(state.col(0), pg, op.metric);
        for (int s = 0; s < substeps; ++s) {
            operators::rk4_propagate(op.matrix, state, h, 1);
            const double after = grid_norm(state.col(0), pg, op.metric);
            check_growth(before, after, traj.times[n - 1] + (s + 1) * h);
            before = after;
        }
        traj.states.emplace_back(pg.n(), state.col(0));
        traj.norms.push_back(before);
    }
    return traj;
}

double magnetic_energy(const Vec2& b, const Metric2& g) { return b.dot(g.components() * b); }

double magnetic_energy(const GridField& b, const Metric2& g) {
    const Eigen::VectorXd b1 = b.component(0);
    const Eigen::VectorXd b2 = b.component(1);
    const double sum = g(0, 0) * b1.squaredNorm() + 2.0 * g(0, 1) * b1.dot(b2) + g(1, 1) * b2.squaredNorm();
    const double h = b.grid().spacing();
    return sum * g.volume_element() * h * h;
}

EnergyHistory energy_rate(const ReducedTrajectory& traj, const MetricSchedule& g_of_t) {
    return energy_history(traj, g_of_t);
}

EnergyHistory energy_rate(const GridTrajectory& traj, const MetricSchedule& g_of_t) {
    return energy_history(traj, g_of_t);
}

double fitted_log_slope(const std::vector<double>& times, const std::vector<double>& values) {
    if (times.size() < 3 || times.size() != values.size()) {
        throw InsufficientSamples("fitted_log_slope: need at least three matching samples");
    }
    const std::size_t first = times.size() / 2;
    const auto count = static_cast<double>(times.size() - first);
    double mean_t = 0.0;
    double mean_y = 0.0;
    std::vector<double> logs;
    for (std::size_t i = first; i < times.size(); ++i) {
        if (!(values[i] > 0.0)) {
            throw InvalidArgument("fitted_log_slope: values must be positive to take logarithms");
        }
        logs.push_back(std::log(values[i]));
        mean_t += times[i];
        mean_y += logs.back();
    }
    mean_t /= count;
    mean_y /= count;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = first; i < times.size(); ++i) {
        const double dt = times[i] - mean_t;
        sxy += dt * (logs[i - first] - mean_y);
        sxx += dt * dt;
    }
    return sxy / sxx;
}

double growth_law(double Lambda, double theta, double t) { return std::exp((2.0 * Lambda - theta) * t); }

double growth_law_from_trace(double tr_ric, double div_v, double t) {
    return std::exp((2.0 * tr_ric - div_v) * t);
}

operators::ReducedOperator desitter_reduced_operator(double Lambda, double theta) {
    return operators::ReducedOperator::from_matrix((2.0 * Lambda - theta) * geometry::Mat2::Identity());
}

LyapunovEstimate lyapunov_exponent(const operators::ReducedOperator& op, double t_max, int samples) {
    LyapunovEstimate est;
    est.times = geometric_times(t_max, samples);

    // exp(t_k A) = c_k U_k with ||U_k|| = 1; doubling t squares the propagator.
    geometry::Mat2 unit = (op.matrix * est.times.front()).exp();
    double log_scale = 0.0;
    for (std::size_t k = 0; k < est.times.size(); ++k) {
        if (k > 0) {
            unit = (unit * unit).eval();
            log_scale *= 2.0;
        }
        const double norm = Eigen::JacobiSVD<geometry::Mat2>(unit).singularValues()(0);
        if (norm == 0.0) {
            est.raw.push_back(-std::numeric_limits<double>::infinity());
            break;
        }
        log_scale += std::log(norm);
        unit /= norm;
        est.raw.push_back(log_scale / est.times[k]);
    }
    if (est.raw.size() != est.times.size() || !std::isfinite(est.raw.back())) {
        throw NoConvergence("lyapunov_exponent: propagator became singular");
    }
    finish_estimate(est);
    return est;
}

LyapunovEstimate lyapunov_exponent(const operators::GridOperator& op, double t_max, int samples,
                                   const LyapunovOptions& options) {
    LyapunovEstimate est;
    est.times = geometric_times(t_max, samples);
    est.raw.assign(est.times.size(), -std::numeric_limits<double>::infinity());

    const auto& pg = op.velocity.grid();
    const double row_norm = op.row_norm();
    const double step = row_norm > 0.0 ? 2.0 / row_norm : t_max;

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal;
    for (int r = 0; r < std::max(1, options.restarts); ++r) {
        Eigen::MatrixXd state(op.matrix.rows(), 1);
        for (Eigen::Index i = 0; i < state.rows(); ++i) state(i, 0) = normal(rng);
        state /= grid_norm(state.col(0), pg, op.metric);

        double log_growth = 0.0;
        double t = 0.0;
        for (std::size_t k = 0; k < est.times.size(); ++k) {
            const double interval = est.times[k] - t;
            const int substeps = std::max(1, static_cast<int>(std::ceil(interval / step)));
            operators::rk4_propagate(op.matrix, state, interval / substeps, substeps);
            const double norm = grid_norm(state.col(0), pg, op.metric);
            if (!std::isfinite(norm) || norm == 0.0) {
                throw NoConvergence("lyapunov_exponent: propagated state lost finiteness");
            }
            log_growth += std::log(norm);
            state /= norm;
            t = est.times[k];
            est.raw[k] = std::max(est.raw[k], log_growth / t);
        }
    }
    finish_estimate(est);
    return est;
}

AntiDynamoVerdict anti_dynamo_check(double R, double theta, const LyapunovEstimate& lyapunov) {
    AntiDynamoVerdict v;
    v.constraint_value = R + 0.5 * theta;
    v.constraint_holds = v.constraint_value >= 0.0;
    v.marginal = std::abs(v.constraint_value) <= 1e-12;
    v.lyapunov_nonpositive = lyapunov.value <= 1e-9;
    v.consistent = !v.constraint_holds || v.lyapunov_nonpositive;
    return v;
}

} // namespace ricci_dynamo::dynamics
