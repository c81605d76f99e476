#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ricci_dynamo/errors.hpp"

namespace ricci_dynamo::geometry {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

/// Symmetric positive-definite 2x2 metric g_ij on a chart, tagged with the
/// flow parameter t at which it was sampled.
class Metric2 {
public:
    /// Throws InvalidArgument if `components` is not exactly symmetric and
    /// DegenerateMetric if it is not positive-definite.
    explicit Metric2(const Mat2& components, double t = 0.0);

    static Metric2 identity(double t = 0.0);
    static Metric2 conformal(double scale, double t = 0.0);

    const Mat2& components() const { return g_; }
    double operator()(int i, int j) const { return g_(i, j); }
    double time() const { return t_; }

    double determinant() const { return g_.determinant(); }
    Mat2 inverse() const { return g_.inverse(); }
    /// sqrt(det g), the density of the Riemannian volume form.
    double volume_element() const;

private:
    Mat2 g_;
    double t_;
};

/// Ricci tensor components R_ij on a 2-manifold.
struct RicciData {
    Mat2 components = Mat2::Zero();

    static RicciData zero() { return {}; }
    /// Ric = lambda * g.
    static RicciData einstein(double lambda, const Metric2& g);
    static RicciData diagonal(double r11, double r22);

    /// R_11 = R_22 and R_12 = 0 within `tol` (absolute).
    bool is_einstein(double tol = 0.0) const;
    /// Common diagonal component R. Only meaningful under the Einstein condition.
    double scalar() const { return components(0, 0); }
};

/// Dense 2x2x2 array indexed as (upper, lower, lower).
class Tensor3 {
public:
    double& operator()(int a, int b, int c) { return data_[static_cast<std::size_t>(4 * a + 2 * b + c)]; }
    double operator()(int a, int b, int c) const { return data_[static_cast<std::size_t>(4 * a + 2 * b + c)]; }

    bool is_zero() const;
    double max_abs() const;

private:
    std::array<double, 8> data_{};
};

/// Spatial derivatives of a metric: dg(l, i, j) = d_l g_ij.
using MetricDerivative = Tensor3;

/// Connection coefficients in coordinates and in an orthonormal frame.
///
/// christoffel(i, j, k) holds Gamma^i_jk. ricci_rotation(l, j, k) holds the
/// frame coefficient defined by d_j e_k = gamma^l_jk e_l.
struct Connection {
    Tensor3 christoffel;
    Tensor3 ricci_rotation;

    static Connection flat() { return {}; }
};

/// Ehlers-Sachs split of a flow gradient:
/// grad_v(p, l) = vorticity(p, l) + shear(p, l) - (1/3) expansion g_lp - A_p v_l.
struct EhlersSachs {
    Mat2 vorticity = Mat2::Zero();
    /// Full symmetric shear tensor. Its g-trace is stored in `shear_trace`.
    Mat2 shear = Mat2::Zero();
    double shear_trace = 0.0;
    double expansion = 0.0;
    Vec2 acceleration = Vec2::Zero();
    Vec2 velocity = Vec2::Zero();

    /// Rebuilds grad_v from the parts using metric g.
    Mat2 reconstruct(const Metric2& g) const;
};

/// One explicit Euler step of dg/dt = -2 Ric. Throws DegenerateMetric if the
/// result is not positive-definite.
Metric2 ricci_flow_step(const Metric2& g, const RicciData& ric, double dt);

/// Evolves an Einstein metric (Ric = lambda g at every step) with `steps` Euler
/// steps up to `t_end`. Steps that lose positive-definiteness are retried with
/// halved sub-steps, at most `max_halvings` times.
std::vector<Metric2> evolve_einstein_flow(const Metric2& g0, double lambda, double t_end, int steps,
                                          int max_halvings = 20);

/// exp(-2 lambda t) delta_ij.
Metric2 exact_flow_metric(double lambda, double t);

struct RicciEigenpair {
    double value;
    Vec2 direction;  // unit length in the g-norm
};

/// Generalized eigenpairs of R_ij chi^j = lambda g_ij chi^j, ascending.
std::vector<RicciEigenpair> ricci_eigen(const RicciData& ric, const Metric2& g);

struct FiniteTimeLyapunov {
    /// Metric-decay rates -(1/2T) log(Lambda_i(t_end) / Lambda_i(t_start)), ascending by
    /// metric eigenvalue. For an exact Einstein flow these equal the Ricci eigenvalues.
    std::vector<double> ricci_rates;
    /// gamma_i = -ricci_rates_i.
    std::vector<double> exponents;
    double window = 0.0;
};

/// Finite-time exponents from the eigenvalues of the first and last metric in a
/// time-ordered history. Throws InsufficientSamples for fewer than two samples.
FiniteTimeLyapunov lyapunov_from_metric(std::span<const Metric2> history);

/// Literal Gamma^i_jk = g^il (d_j g_kl + d_k g_jl - d_l g_jk), no 1/2 prefactor.
Connection christoffel(const Metric2& g, const MetricDerivative& dg);
/// Textbook Levi-Civita symbols, i.e. half of `christoffel`.
Connection christoffel_standard(const Metric2& g, const MetricDerivative& dg);

/// Frame coefficients gamma^l_jk of the orthonormal frame e_k = e^{-phi} d_k of the
/// conformal metric e^{2 phi} delta, given phi and its gradient at a point.
Tensor3 conformal_frame_rotation(double phi, const Vec2& grad_phi);

/// Splits grad_v(p, l) = nabla_p v_l. The acceleration A is an input; the
/// g-proportional part of the symmetric remainder is assigned to the expansion.
EhlersSachs decompose_gradient(const Mat2& grad_v, const Metric2& g, const Vec2& v,
                               const Vec2& acceleration = Vec2::Zero());

/// sigma - theta.
double flow_divergence(const EhlersSachs& es);

} // namespace ricci_dynamo::geometry
