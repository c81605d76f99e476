#include "ricci_dynamo/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

namespace ricci_dynamo::spectrum {

std::string_view to_string(Source s) {
    switch (s) {
        case Source::Quadratic36: return "Quadratic36";
        case Source::PaperEq3: return "PaperEq3";
        case Source::PaperEq4: return "PaperEq4";
        case Source::PaperEq6: return "PaperEq6";
        case Source::ChiconeLatushkin: return "ChiconeLatushkin";
        case Source::NumericalGrid: return "NumericalGrid";
        case Source::NumericalReduced: return "NumericalReduced";
    }
    return "Unknown";
}

std::vector<Complex> SpectrumResult::values() const {
    std::vector<Complex> out;
    for (const auto& r : roots) {
        for (int m = 0; m < r.multiplicity; ++m) out.push_back(r.value);
    }
    return out;
}

namespace {

void finalize(SpectrumResult& s) {
    s.max_real_part = -std::numeric_limits<double>::infinity();
    for (const auto& r : s.roots) s.max_real_part = std::max(s.max_real_part, r.value.real());
}

void attach_residuals(SpectrumResult& s, double R, double theta, double eta) {
    s.residuals.clear();
    for (const auto& r : s.roots) s.residuals.push_back(quadratic_residual(r.value, R, theta, eta));
}

SpectrumResult plus_minus(Complex centre, Complex offset, Source source) {
    SpectrumResult s;
    s.source = source;
    s.roots = {{centre + offset, 1}, {centre - offset, 1}};
    finalize(s);
    return s;
}

bool by_descending_real(const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

double lagrange_at_zero(std::span<const double> x, std::span<const double> y) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double w = 1.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (j != i) w *= (0.0 - x[j]) / (x[i] - x[j]);
        }
        sum += w * y[i];
    }
    return sum;
}

} // namespace

double quadratic_residual(Complex lambda, double R, double theta, double eta) {
    const auto [b, c] = operators::characteristic_coefficients(R, theta, eta);
    return std::abs(lambda * lambda + b * lambda + c);
}

SpectrumResult quadratic_roots(double R, double theta, double eta) {
    const auto [b, c] = operators::characteristic_coefficients(R, theta, eta);
    const double disc = std::fma(b, b, -4.0 * c);

    SpectrumResult s;
    s.source = Source::Quadratic36;
    if (disc > 0.0) {
        // q = -(b + sign(b) sqrt(disc)) / 2 avoids subtracting nearly equal numbers.
        const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
        const double r1 = q;
        const double r2 = (q != 0.0) ? c / q : 0.0;
        s.roots = {{Complex(std::max(r1, r2), 0.0), 1}, {Complex(std::min(r1, r2), 0.0), 1}};
    } else if (disc == 0.0) {
        s.roots = {{Complex(-0.5 * b, 0.0), 2}};
    } else {
        const double im = 0.5 * std::sqrt(-disc);
        s.roots = {{Complex(-0.5 * b, im), 1}, {Complex(-0.5 * b, -im), 1}};
    }
    finalize(s);
    attach_residuals(s, R, theta, eta);
    return s;
}

SpectrumResult paper_eigenvalue_eq3(double R, double theta, double eta) {
    if (theta == 0.0) {
        throw DivisionByZero("closed-form eigenvalue contains R/theta; theta must be non-zero");
    }
    const double radicand = -0.75 * theta * theta + eta * theta * (1.0 - R / theta) -
                            0.75 * theta * theta * (1.0 + R / theta) - eta * eta;
    SpectrumResult s = plus_minus(Complex(-(R + 0.5 * theta - eta), 0.0), std::sqrt(Complex(radicand, 0.0)),
                                  Source::PaperEq3);
    attach_residuals(s, R, theta, eta);
    return s;
}

SpectrumResult diffusion_free_eq4(double R, double theta) {
    if (theta == 0.0) {
        throw DivisionByZero("diffusion-free eigenvalue contains R/theta; theta must be non-zero");
    }
    const double radicand = -0.75 * theta * theta - 0.75 * theta * theta * (1.0 + R / theta);
    SpectrumResult s =
        plus_minus(Complex(-(R + 0.5 * theta), 0.0), std::sqrt(Complex(radicand, 0.0)), Source::PaperEq4);
    attach_residuals(s, R, theta, 0.0);
    return s;
}

SpectrumResult cosmological_eq6(double R, double rho, double eta) {
    if (rho == 0.0) {
        throw DivisionByZero("cosmological eigenvalue contains R/rho; rho must be non-zero");
    }
    const double radicand = 7.0 * rho * rho + 4.0 * rho * rho * (1.0 - 2.0 * R / rho) + 4.0 * eta * eta;
    const Complex i(0.0, 1.0);
    return plus_minus(Complex(0.5 * (-3.0 * R + rho + 2.0 * eta), 0.0), 0.5 * i * std::sqrt(Complex(radicand, 0.0)),
                      Source::PaperEq6);
}

double cosmological_real_part(double R, double rho) { return 0.5 * (-3.0 * R + rho); }

SpectrumResult chicone_latushkin(double kappa, double eta) {
    const Complex root = std::sqrt(Complex(-4.0 * kappa + eta * (1.0 - kappa * kappa), 0.0));
    SpectrumResult s;
    s.source = Source::ChiconeLatushkin;
    s.roots = {{0.5 * (Complex(-eta * (1.0 + kappa * kappa), 0.0) + root), 1}};
    finalize(s);
    return s;
}

FastDynamoVerdict fast_dynamo_test(const std::function<SpectrumResult(double)>& spectrum_fn,
                                   std::span<const double> eta_sequence) {
    const std::size_t n = eta_sequence.size();
    if (n < 3) {
        throw InvalidArgument("fast_dynamo_test: need at least three eta values, got " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(eta_sequence[i] > 0.0) || (i > 0 && !(eta_sequence[i] < eta_sequence[i - 1]))) {
            throw InvalidArgument("fast_dynamo_test: eta sequence must be positive and strictly decreasing");
        }
    }

    FastDynamoVerdict v;
    for (double eta : eta_sequence) v.max_real_parts.push_back(spectrum_fn(eta).max_real_part);

    const std::span<const double> x(eta_sequence);
    const std::span<const double> y(v.max_real_parts);
    v.limit = lagrange_at_zero(x.last(3), y.last(3));
    v.check = (n >= 4) ? lagrange_at_zero(x.subspan(n - 4, 3), y.subspan(n - 4, 3))
                       : lagrange_at_zero(x.last(2), y.last(2));

    // A limit near zero has no usable relative scale; fall back on the size of the samples.
    double scale = std::max(std::abs(v.limit), std::abs(v.check));
    for (double r : v.max_real_parts) scale = std::max(scale, std::abs(r));
    const double gap = std::abs(v.limit - v.check);
    if (gap > kFastDynamoTolerance && gap > 0.1 * scale) {
        throw NonConvergent("eta -> 0 extrapolants disagree: " + std::to_string(v.limit) + " vs " +
                            std::to_string(v.check));
    }
    v.fast = v.limit > kFastDynamoTolerance;
    return v;
}

Discriminant discriminant_eq39(double rho, double R) {
    const double value = 11.0 * rho - 8.0 * R;
    const double scale = std::max({std::abs(11.0 * rho), std::abs(8.0 * R), 1.0});
    return {value, std::abs(value) <= 1e-12 * scale};
}

SpectrumResult numerical_spectrum(const operators::ReducedOperator& op, int k) {
    if (k < 1) throw InvalidArgument("numerical_spectrum: k must be at least 1");
    Eigen::EigenSolver<geometry::Mat2> solver;
    solver.compute(op.matrix, false);
    std::vector<Complex> values{solver.eigenvalues()(0), solver.eigenvalues()(1)};
    std::sort(values.begin(), values.end(), by_descending_real);
    values.resize(static_cast<std::size_t>(std::min(k, 2)));

    SpectrumResult s;
    s.source = Source::NumericalReduced;
    for (const auto& v : values) s.roots.push_back({v, 1});
    finalize(s);
    if (op.parameters) attach_residuals(s, op.parameters->R, op.parameters->theta, op.parameters->eta);
    return s;
}

SpectrumResult numerical_spectrum(const operators::GridOperator& op, int k, const GridEigenOptions& options) {
    if (k < 1 || k > 10) {
        throw InvalidArgument("numerical_spectrum: grid operators support 1 <= k <= 10, got " + std::to_string(k));
    }
    const Eigen::Index dim = op.matrix.rows();
    const int block = static_cast<int>(
        std::min<Eigen::Index>(dim, options.block_size > 0 ? options.block_size : std::max(2 * k, k + 8)));

    SpectrumResult s;
    s.source = Source::NumericalGrid;
    const double norm = op.row_norm();
    if (norm == 0.0) {
        s.roots.assign(static_cast<std::size_t>(k), EigenPair{Complex(0.0, 0.0), 1});
        finalize(s);
        return s;
    }
    // Inside the RK4 stability region for every eigenvalue in the Gershgorin disc.
    const double dt = 2.0 / norm;

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd q(dim, block);
    for (Eigen::Index c = 0; c < q.cols(); ++c)
        for (Eigen::Index r = 0; r < q.rows(); ++r) q(r, c) = normal(rng);

    auto orthonormalize = [&](Eigen::MatrixXd& m) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
        m = qr.householderQ() * Eigen::MatrixXd::Identity(dim, block);
    };
    orthonormalize(q);

    std::vector<Complex> previous;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        operators::rk4_propagate(op.matrix, q, dt, options.steps_per_iteration);
        orthonormalize(q);

        const Eigen::MatrixXd h = q.transpose() * (op.matrix * q);
        Eigen::EigenSolver<Eigen::MatrixXd> ritz(h, false);
        std::vector<Complex> current(ritz.eigenvalues().data(), ritz.eigenvalues().data() + block);
        std::sort(current.begin(), current.end(), by_descending_real);
        current.resize(static_cast<std::size_t>(k));

        if (!previous.empty()) {
            bool done = true;
            for (std::size_t i = 0; i < current.size(); ++i) {
                if (std::abs(current[i] - previous[i]) > options.tolerance * std::max(1.0, std::abs(current[i]))) {
                    done = false;
                    break;
                }
            }
            if (done) {
                for (const auto& v : current) s.roots.push_back({v, 1});
                finalize(s);
                return s;
            }
        }
        previous = std::move(current);
    }
    throw NoConvergence("grid eigensolver did not converge in " + std::to_string(options.max_iterations) +
                        " iterations");
}

SpectrumResult numerical_spectrum(const operators::DynamoOperator& op, int k, const GridEigenOptions& options) {
    if (const auto* reduced = std::get_if<operators::ReducedOperator>(&op)) return numerical_spectrum(*reduced, k);
    return numerical_spectrum(std::get<operators::GridOperator>(op), k, options);
}

PairComparison compare_spectra(const SpectrumResult& a, const SpectrumResult& b, double tol) {
    const std::vector<Complex> va = a.values();
    const std::vector<Complex> vb = b.values();
    if (va.size() != vb.size()) {
        throw InvalidArgument("compare_spectra: root counts differ (" + std::to_string(va.size()) + " vs " +
                              std::to_string(vb.size()) + ")");
    }
    std::vector<std::size_t> perm(vb.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < va.size(); ++i) cost += std::abs(va[i] - vb[perm[i]]);
        // Strict improvement keeps the identity pairing on ties, so the
        // comparison is antisymmetric under swapping a and b.
        if (cost < best_cost) {
            best_cost = cost;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    PairComparison out{a.source, b.source, {}, true};
    for (std::size_t i = 0; i < va.size(); ++i) {
        const Complex d = va[i] - vb[best[i]];
        out.differences.push_back(d);
        if (!(std::abs(d) <= tol * std::max(1.0, std::abs(va[i])))) out.agrees = false;
    }
    return out;
}

const PairComparison& DiscrepancyReport::pair(Source a, Source b) const {
    for (const auto& p : pairs) {
        if ((p.a == a && p.b == b) || (p.a == b && p.b == a)) return p;
    }
    throw InvalidArgument("discrepancy report has no pair " + std::string(to_string(a)) + "/" +
                          std::string(to_string(b)));
}

DiscrepancyReport discrepancy_report(double R, double theta, double eta, double tol) {
    DiscrepancyReport report{R, theta, eta, {}, {}};
    report.spectra.push_back(quadratic_roots(R, theta, eta));
    report.spectra.push_back(paper_eigenvalue_eq3(R, theta, eta));
    report.spectra.push_back(numerical_spectrum(operators::assemble_reduced(R, theta, eta), 2));
    for (std::size_t i = 0; i < report.spectra.size(); ++i) {
        for (std::size_t j = i + 1; j < report.spectra.size(); ++j) {
            report.pairs.push_back(compare_spectra(report.spectra[i], report.spectra[j], tol));
        }
    }
    return report;
}

} // namespace ricci_dynamo::spectrum
