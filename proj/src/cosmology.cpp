#include "ricci_dynamo/cosmology.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ricci_dynamo/spectrum.hpp"

namespace ricci_dynamo::cosmology {

namespace {

constexpr double kStructuralTolerance = 1e-12;

bool near(double a, double b) {
    return std::abs(a - b) <= kStructuralTolerance * std::max({std::abs(a), std::abs(b), 1.0});
}

} // namespace

CosmologicalState CosmologicalState::with_einstein_condition() const {
    if (!Lambda) {
        throw InvalidArgument("Einstein condition requires Lambda to be set");
    }
    CosmologicalState out = *this;
    out.R = *Lambda;
    return out;
}

CosmologicalState curvature_from_matter(double rho, double theta) {
    if (rho < 0.0) {
        throw NegativeDensity("matter density must be non-negative, got " + std::to_string(rho));
    }
    CosmologicalState s;
    s.rho = rho;
    s.theta = theta;
    s.R = rho + theta;
    return s;
}

std::string_view to_string(RegimeLabel label) {
    switch (label) {
        case RegimeLabel::FastDynamo: return "FastDynamo";
        case RegimeLabel::Decay: return "Decay";
        case RegimeLabel::MarginalEinsteinStatic: return "MarginalEinsteinStatic";
        case RegimeLabel::DegenerateEigenvalues: return "DegenerateEigenvalues";
    }
    return "Unknown";
}

int regime_code(RegimeLabel label) {
    switch (label) {
        case RegimeLabel::Decay: return 0;
        case RegimeLabel::FastDynamo: return 1;
        case RegimeLabel::MarginalEinsteinStatic: return 2;
        case RegimeLabel::DegenerateEigenvalues: return 3;
    }
    return -1;
}

Regime classify(const CosmologicalState& state) {
    Regime r;
    r.real_part = spectrum::cosmological_real_part(state.R, state.rho);
    const auto disc = spectrum::discriminant_eq39(state.rho, state.R);
    r.discriminant = disc.value;
    r.theta = state.theta;
    r.expansion_bound_holds = state.rho <= 3.0 * state.R;
    r.zero_growth = std::abs(r.real_part) <= spectrum::kFastDynamoTolerance;

    if (disc.degenerate) {
        r.label = RegimeLabel::DegenerateEigenvalues;
    } else if (std::abs(state.theta) <= kStructuralTolerance && near(state.R, state.rho)) {
        r.label = RegimeLabel::MarginalEinsteinStatic;
    } else if (r.real_part > spectrum::kFastDynamoTolerance) {
        r.label = RegimeLabel::FastDynamo;
    } else {
        r.label = RegimeLabel::Decay;
    }
    return r;
}

Eigen::Matrix3d desitter_metric(double Lambda, double t) {
    const double a = std::exp(Lambda * t);
    return Eigen::Vector3d(-1.0, a, a).asDiagonal();
}

geometry::Metric2 desitter_spatial_metric(double Lambda, double t) {
    return geometry::Metric2::conformal(std::exp(Lambda * t), t);
}

DynamoBound dynamo_bound(double Lambda, double theta) {
    DynamoBound b;
    b.growth = 2.0 * Lambda - theta;
    b.marginal = std::abs(b.growth) <= 1e-12;
    b.supports_fast_dynamo = b.growth > 0.0 && !b.marginal;
    return b;
}

bool corollary_check(const CosmologicalState& state) {
    return classify(state).label == RegimeLabel::FastDynamo;
}

bool contraction_supports_dynamo(double rho, double theta) { return -3.0 * theta > 2.0 * rho; }

std::vector<double> curvature_along_flow(double R0, double t_end, int steps) {
    const auto history = geometry::evolve_einstein_flow(geometry::Metric2::identity(), R0, t_end, steps);
    std::vector<double> out;
    out.reserve(history.size());
    for (const auto& g : history) out.push_back(R0 / g(0, 0));
    return out;
}

} // namespace ricci_dynamo::cosmology
