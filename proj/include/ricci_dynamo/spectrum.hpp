#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ricci_dynamo/dynamo_operator.hpp"

namespace ricci_dynamo::spectrum {

using Complex = std::complex<double>;

/// Which route produced a set of eigenvalues.
enum class Source {
    Quadratic36,       // roots of the characteristic quadratic
    PaperEq3,          // printed closed form with diffusion
    PaperEq4,          // printed diffusion-free closed form
    PaperEq6,          // printed cosmological form (R = rho + theta substituted)
    ChiconeLatushkin,  // comparison formula for geodesic flows on constant curvature surfaces
    NumericalGrid,
    NumericalReduced,
};

std::string_view to_string(Source s);

struct EigenPair {
    Complex value;
    int multiplicity = 1;
};

struct SpectrumResult {
    std::vector<EigenPair> roots;
    Source source = Source::Quadratic36;
    /// |lambda^2 + b lambda + c| for each root, when (R, theta, eta) are known.
    std::vector<double> residuals;
    double max_real_part = 0.0;

    /// Roots expanded by multiplicity.
    std::vector<Complex> values() const;
};

/// Roots of lambda^2 + 2(R + theta/2 - eta) lambda + R^2 + theta^2 + 2(eta - theta) R,
/// using the cancellation-free branch of the quadratic formula.
SpectrumResult quadratic_roots(double R, double theta, double eta);

/// Residual |lambda^2 + b lambda + c| of the characteristic quadratic.
double quadratic_residual(Complex lambda, double R, double theta, double eta);

/// Literal closed form
///   -(R + theta/2 - eta) +/- sqrt(-3/4 theta^2 + eta theta (1 - R/theta)
///                                 - 3/4 theta^2 (1 + R/theta) - eta^2).
/// Throws DivisionByZero for theta == 0.
SpectrumResult paper_eigenvalue_eq3(double R, double theta, double eta);

/// Literal diffusion-free form -(R + theta/2) +/- sqrt(-3/4 theta^2 - 3/4 theta^2 (1 + R/theta)).
SpectrumResult diffusion_free_eq4(double R, double theta);

/// Literal 1/2 [(-3R + rho + 2 eta) +/- i sqrt(7 rho^2 + 4 rho^2 (1 - 2R/rho) + 4 eta^2)].
/// Throws DivisionByZero for rho == 0.
SpectrumResult cosmological_eq6(double R, double rho, double eta);

/// Diffusion-free real part 1/2 (-3R + rho) of the cosmological eigenvalue.
double cosmological_real_part(double R, double rho);

/// 1/2 [-eta (1 + kappa^2) + sqrt(-4 kappa + eta (1 - kappa^2))], single root.
SpectrumResult chicone_latushkin(double kappa, double eta);

struct FastDynamoVerdict {
    bool fast = false;
    /// Extrapolated lim_{eta -> 0} max Re lambda.
    double limit = 0.0;
    /// Competing extrapolant used by the consistency gate.
    double check = 0.0;
    std::vector<double> max_real_parts;
};

/// Extrapolates max Re lambda along a strictly decreasing positive eta sequence
/// (at least three values) to eta = 0 by polynomial extrapolation through the
/// last three samples. Throws NonConvergent when the competing extrapolant
/// differs by more than 10% of the magnitude.
FastDynamoVerdict fast_dynamo_test(const std::function<SpectrumResult(double)>& spectrum_fn,
                                   std::span<const double> eta_sequence);

inline constexpr double kFastDynamoTolerance = 1e-9;

struct Discriminant {
    double value;
    bool degenerate;
};

/// 11 rho - 8 R, degenerate when |value| <= 1e-12 max(|11 rho|, |8 R|, 1).
Discriminant discriminant_eq39(double rho, double R);

/// Options for the grid eigensolver.
struct GridEigenOptions {
    int max_iterations = 10'000;
    double tolerance = 1e-8;
    std::uint64_t seed = 1;
    /// Subspace dimension; 0 selects max(2k, k + 8).
    int block_size = 0;
    /// RK4 steps of the propagator per subspace iteration.
    int steps_per_iteration = 50;
};

/// Exact 2x2 eigensolution of the assembled matrix (QR-based, independent of
/// the quadratic formula). Returns min(k, 2) roots sorted by descending real part.
SpectrumResult numerical_spectrum(const operators::ReducedOperator& op, int k = 2);

/// Leading k eigenvalues (k <= 10) by subspace iteration on the RK4 propagator
/// exp(tau L) with Rayleigh-Ritz extraction. Throws NoConvergence.
SpectrumResult numerical_spectrum(const operators::GridOperator& op, int k, const GridEigenOptions& options = {});

SpectrumResult numerical_spectrum(const operators::DynamoOperator& op, int k, const GridEigenOptions& options = {});

struct PairComparison {
    Source a;
    Source b;
    /// Root differences a_i - b_{pi(i)} under the minimal-distance pairing pi.
    std::vector<Complex> differences;
    bool agrees = false;
};

/// Compares two root sets of equal size, choosing the root permutation with
/// minimal total distance. Agreement means every |difference| <= tol max(1, |a_i|).
PairComparison compare_spectra(const SpectrumResult& a, const SpectrumResult& b, double tol);

struct DiscrepancyReport {
    double R;
    double theta;
    double eta;
    std::vector<SpectrumResult> spectra;
    std::vector<PairComparison> pairs;

    /// Comparison of two sources in either order.
    const PairComparison& pair(Source a, Source b) const;
};

inline constexpr double kDiscrepancyTolerance = 1e-10;

/// Evaluates Quadratic36, PaperEq3 and NumericalReduced at one parameter point and
/// compares all pairs. Propagates DivisionByZero from PaperEq3.
DiscrepancyReport discrepancy_report(double R, double theta, double eta, double tol = kDiscrepancyTolerance);

} // namespace ricci_dynamo::spectrum
