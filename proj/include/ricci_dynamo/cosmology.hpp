#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ricci_dynamo/geometry.hpp"

namespace ricci_dynamo::cosmology {

/// Pressure-free 2D spatial section: matter density, cosmological constant,
/// expansion and Ricci scalar (common diagonal Ricci component).
struct CosmologicalState {
    double rho = 0.0;
    std::optional<double> Lambda;
    double theta = 0.0;
    double R = 0.0;

    /// Sets R := Lambda (Einstein condition Ric = Lambda g with R read as the
    /// diagonal component). Throws InvalidArgument if Lambda is unset.
    CosmologicalState with_einstein_condition() const;
};

/// R = rho + theta. Throws NegativeDensity for rho < 0.
CosmologicalState curvature_from_matter(double rho, double theta);

enum class RegimeLabel { FastDynamo, Decay, MarginalEinsteinStatic, DegenerateEigenvalues };

std::string_view to_string(RegimeLabel label);
/// Stable integer code for plot data: 0 Decay, 1 FastDynamo, 2 Marginal, 3 Degenerate.
int regime_code(RegimeLabel label);

struct Regime {
    RegimeLabel label = RegimeLabel::Decay;
    /// Diffusion-free growth rate 1/2 (-3R + rho).
    double real_part = 0.0;
    /// 11 rho - 8 R.
    double discriminant = 0.0;
    double theta = 0.0;
    /// rho <= 3R.
    bool expansion_bound_holds = false;
    /// lambda = 0 characterisation of marginality, reported next to the label.
    bool zero_growth = false;
};

/// Precedence: DegenerateEigenvalues, MarginalEinsteinStatic (theta ~ 0 and R ~ rho),
/// FastDynamo (real part > 1e-9), Decay.
Regime classify(const CosmologicalState& state);

/// Spacetime metric diag(-1, e^{Lambda t}, e^{Lambda t}).
Eigen::Matrix3d desitter_metric(double Lambda, double t);
/// Spatial block of desitter_metric.
geometry::Metric2 desitter_spatial_metric(double Lambda, double t);

struct DynamoBound {
    /// 2 Lambda - theta.
    double growth = 0.0;
    bool supports_fast_dynamo = false;
    bool marginal = false;
};

DynamoBound dynamo_bound(double Lambda, double theta);

/// True iff classify() yields FastDynamo for a state built by curvature_from_matter.
bool corollary_check(const CosmologicalState& state);

/// -3 theta > 2 rho: with R = rho + theta this is 1/2 (-2 rho - 3 theta) > 0, so a
/// matter-filled section needs contraction to grow a field.
bool contraction_supports_dynamo(double rho, double theta);

/// Ricci scalar along the Einstein flow g(t) = g0 scaled by the Euler-stepped
/// conformal factor, sampled at every step (R scales inversely with the metric).
std::vector<double> curvature_along_flow(double R0, double t_end, int steps);

} // namespace ricci_dynamo::cosmology
