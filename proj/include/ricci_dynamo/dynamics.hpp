#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ricci_dynamo/dynamo_operator.hpp"

namespace ricci_dynamo::dynamics {

using geometry::Metric2;
using geometry::Vec2;
using grid::GridField;

/// Sampled solution of dB/dt = Gamma B. `norms` are g-weighted L2 norms.
template <typename State>
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<double> norms;
};

using ReducedTrajectory = Trajectory<Vec2>;
using GridTrajectory = Trajectory<GridField>;

enum class ReducedMethod {
    Exponential,  // exact propagator exp(A t) at every sample
    Stepped,      // classical RK4 with step dt
};

/// Reduced path. Norms use metric g (identity by default).
ReducedTrajectory integrate(const operators::ReducedOperator& op, const Vec2& b0, double t_end, double dt,
                            ReducedMethod method = ReducedMethod::Exponential,
                            const Metric2& g = Metric2::identity());

/// exp(A t) b for the reduced operator (any sign of t).
Vec2 propagate(const operators::ReducedOperator& op, const Vec2& b, double t);

/// Grid path: RK4 on L B sampled every dt. The internal step is
/// min(dt, 0.25 h^2 / eta) (no cap for eta == 0). Throws StepUnstable when the
/// norm grows by more than 1e6 in one internal step.
GridTrajectory integrate(const operators::GridOperator& op, const GridField& b0, double t_end, double dt);

/// B^i g_ij B^j over a unit volume.
double magnetic_energy(const Vec2& b, const Metric2& g);
/// Riemann sum of B^i g_ij B^j sqrt(det g) h^2 over the periodic cell.
double magnetic_energy(const GridField& b, const Metric2& g);

enum class EnergyTrend { Growing, Marginal, Decaying };

inline constexpr double kMarginalRateTolerance = 1e-6;

struct EnergyHistory {
    std::vector<double> times;
    std::vector<double> energy;
    /// Least-squares slope of log(energy) over the second half of the window.
    double fitted_rate = 0.0;
    EnergyTrend trend = EnergyTrend::Marginal;
    /// fitted_rate >= 0 within the marginal band.
    bool dynamo_action = false;
};

using MetricSchedule = std::function<Metric2(double)>;

EnergyHistory energy_rate(const ReducedTrajectory& traj, const MetricSchedule& g_of_t);
EnergyHistory energy_rate(const GridTrajectory& traj, const MetricSchedule& g_of_t);

/// Least-squares slope of log(values) against times over the second half of the
/// samples. Throws InsufficientSamples for fewer than three samples.
double fitted_log_slope(const std::vector<double>& times, const std::vector<double>& values);

/// exp((2 Lambda - theta) t).
double growth_law(double Lambda, double theta, double t);
/// exp((2 tr_ric - div_v) t).
double growth_law_from_trace(double tr_ric, double div_v, double t);

/// Reduced model of an exponentially stretched field in de Sitter space:
/// every component grows at 2 Lambda - theta.
operators::ReducedOperator desitter_reduced_operator(double Lambda, double theta);

struct LyapunovEstimate {
    double value = 0.0;
    double t_start = 0.0;
    double t_end = 0.0;
    bool converged = false;
    /// (1/t) log ||exp(t Gamma)|| at each sample time.
    std::vector<double> times;
    std::vector<double> raw;
};

struct LyapunovOptions {
    std::uint64_t seed = 1;
    int restarts = 5;
};

/// Estimates lim (1/t) log ||exp(t Gamma)|| from geometrically spaced times up to
/// t_max. Successive samples are combined as (t_k f_k - t_{k-1} f_{k-1}) / (t_k - t_{k-1})
/// to cancel the O(1/t) transient; converged when the last two such estimates
/// differ by less than 1%.
LyapunovEstimate lyapunov_exponent(const operators::ReducedOperator& op, double t_max, int samples);
/// Grid version: forward propagation of seeded random states, maximised over restarts.
LyapunovEstimate lyapunov_exponent(const operators::GridOperator& op, double t_max, int samples,
                                   const LyapunovOptions& options = {});

struct AntiDynamoVerdict {
    /// R + theta/2 >= 0.
    bool constraint_holds = false;
    bool marginal = false;
    /// Lyapunov estimate <= 1e-9.
    bool lyapunov_nonpositive = false;
    /// The constraint implies a non-positive exponent.
    bool consistent = false;
    double constraint_value = 0.0;
};

AntiDynamoVerdict anti_dynamo_check(double R, double theta, const LyapunovEstimate& lyapunov);

} // namespace ricci_dynamo::dynamics
