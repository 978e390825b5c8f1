#pragma once

#include <array>
#include <optional>
#include <utility>
#include <string>

#include "cqw/core.hpp"
#include "cqw/momentum.hpp"
#include "cqw/walk.hpp"

namespace cqw {

enum class Method { empirical, quadrature, closed_form };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::empirical: return "empirical";
        case Method::quadrature: return "quadrature";
        case Method::closed_form: return "closed-form";
    }
    return "?";
}

/// Moments of a walk at time t, per axis. For analytic reports the fields hold
/// leading coefficients (<x>/t, <x^2>/t^2, ...) and t is zero.
template <int Dim>
struct MomentReport {
    int t = 0;
    std::array<double, Dim> mean{};
    std::array<double, Dim> mean_sq{};
    Method method = Method::empirical;

    double variance(int axis) const { return mean_sq[axis] - mean[axis] * mean[axis]; }
    double sigma2_total() const {
        double s = 0.0;
        for (int a = 0; a < Dim; ++a) s += variance(a);
        return s;
    }
};

/// sum_sites prob(site) * x_axis(site)^n.
template <std::size_t N>
double empirical_moment(const std::map<std::array<int, N>, double>& dist, int axis, int order) {
    constexpr int Dim = static_cast<int>(N);
    if (dist.empty()) throw NormError("empty distribution");
    if (axis < 0 || axis >= Dim) throw ConfigError("axis out of range");
    double total = 0.0, m = 0.0;
    for (const auto& [x, p] : dist) {
        total += p;
        m += p * std::pow(static_cast<double>(x[axis]), order);
    }
    if (std::abs(total - 1.0) > 1e-10) throw NormError("distribution sums to " + std::to_string(total));
    return m;
}

template <std::size_t N>
MomentReport<static_cast<int>(N)> empirical_report(const std::map<std::array<int, N>, double>& dist, int t) {
    constexpr int Dim = static_cast<int>(N);
    MomentReport<Dim> r;
    r.t = t;
    for (int a = 0; a < Dim; ++a) {
        r.mean[a] = empirical_moment(dist, a, 1);
        r.mean_sq[a] = empirical_moment(dist, a, 2);
    }
    return r;
}

template <int Dim>
MomentReport<Dim> empirical_report(const LatticeState<Dim>& state, int t) {
    return empirical_report(probability_distribution(state), t);
}

// ---------------------------------------------------------------------------
// One dimension, localized start |0>

struct QuadratureSettings {
    int nodes = 256;              // initial node count, >= 64
    int max_nodes = 1 << 18;
    double rel_tol = 1e-8;        // relative change between node doublings
    double abs_tol = 1e-14;

    void validate() const {
        if (nodes < 64) throw ConfigError("quadrature needs at least 64 nodes");
        if (max_nodes < nodes) throw ConfigError("max_nodes below the initial node count");
    }
};

struct QuadratureResult {
    double value = 0.0;
    int nodes = 0;
};

/// Squared group velocity (d theta / dk)^2 of the line walk as a function of
/// psi = 2k + phi1 + phi2. With cos(theta) = a + b cos(psi), a = -cos(alpha)
/// cos(beta), b = sin(alpha) sin(beta):
///   (d theta / dk)^2 = 4 b^2 sin^2(psi) / (1 - (a + b cos psi)^2),
/// evaluated in factored half-angle form so that band touchings (alpha = beta
/// or alpha + beta = pi) cancel analytically instead of producing 0/0.
inline double group_velocity_squared_1d(double alpha, double beta, double psi) {
    const double b = std::sin(alpha) * std::sin(beta);
    if (b == 0.0) return 0.0;
    const double sh = std::sin(psi / 2), ch = std::cos(psi / 2);
    const double cs = std::cos((alpha + beta) / 2), sd = std::sin((alpha - beta) / 2);
    // 1 - a - b cos(psi) = 2 (cs^2 + b sh^2), 1 + a + b cos(psi) = 2 (sd^2 + b ch^2)
    const double lower = cs * cs + b * sh * sh, upper = sd * sd + b * ch * ch;
    // At a touching point the vanishing factor cancels against sh or ch.
    if (lower == 0.0) return 4 * b * ch * ch / upper;
    if (upper == 0.0) return 4 * b * sh * sh / lower;
    return 4 * b * b * sh * sh * ch * ch / (lower * upper);
}

namespace detail {

/// Midpoint rule on [lo, hi] with m nodes; the endpoints are never nodes.
template <class F>
double midpoint(F&& f, double lo, double hi, int m) {
    const double h = (hi - lo) / m;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += f(lo + (j + 0.5) * h);
    return acc * h;
}

/// w(u) = u - sin(2 pi u) / (2 pi) applied twice, with its derivative. Maps
/// [0, 1] onto itself with w' vanishing to high order at both ends, which
/// concentrates nodes in the narrow layers that appear near band touchings.
inline std::pair<double, double> endpoint_map(double u) {
    double x = u, d = 1.0;
    for (int i = 0; i < 2; ++i) {
        d *= 1 - std::cos(2 * pi * x);
        x -= std::sin(2 * pi * x) / (2 * pi);
    }
    return {x, d};
}

}  // namespace detail

/// Integral of f over [lo, hi] by the midpoint rule with node doubling. Exact
/// to spectral order for smooth periodic integrands taken over a period, or
/// over a half period of an even one.
template <class F>
QuadratureResult integrate_midpoint(F&& f, double lo, double hi, const QuadratureSettings& q) {
    q.validate();
    int m = q.nodes;
    double prev = detail::midpoint(f, lo, hi, m);
    while (2 * m <= q.max_nodes) {
        m *= 2;
        const double cur = detail::midpoint(f, lo, hi, m);
        if (std::abs(cur - prev) <= std::max(q.abs_tol, q.rel_tol * std::abs(cur))) return {cur, m};
        prev = cur;
    }
    throw ConvergenceError("midpoint quadrature did not converge with " + std::to_string(m) + " nodes");
}

/// Coefficient of t^{2n-1} in <x^{2n-1}>_t: (1/4 pi) int_{-pi}^{pi} (d theta/dk)^{2n} dk.
/// The integrand depends on k only through psi = 2k + phi1 + phi2 and is even
/// and 2 pi periodic in psi, so the integral equals 2 int_0^pi dpsi and the
/// phases drop out. Near a band touching the integrand has a layer of width
/// ~|alpha - beta| (or ~|alpha + beta - pi|) at psi = pi (or 0); the
/// substitution psi = pi w(u) resolves it with a few hundred nodes.
inline double odd_moment_coefficient_1d(const TessellationSpec1D& s, int n, const QuadratureSettings& q = {}) {
    if (n < 1) throw ConfigError("moment index n must be at least 1");
    if (std::sin(s.alpha) * std::sin(s.beta) == 0.0) {
        q.validate();
        return 0.0;
    }
    auto integrand = [&](double u) {
        const auto [w, dw] = detail::endpoint_map(u);
        return std::pow(group_velocity_squared_1d(s.alpha, s.beta, pi * w), n) * pi * dw;
    };
    return integrate_midpoint(integrand, 0.0, 1.0, q).value / (2 * pi);
}

/// Coefficient of t^{2n} in <x^{2n}>_t, twice the odd coefficient.
inline double even_moment_coefficient_1d(const TessellationSpec1D& s, int n, const QuadratureSettings& q = {}) {
    return 2 * odd_moment_coefficient_1d(s, n, q);
}

/// Asymptotic sigma^2 / t^2 = (2 - c) c with c = <x>/t. Independent of the phases.
inline double variance_coefficient_1d(double alpha, double beta, const QuadratureSettings& q = {}) {
    const double c = odd_moment_coefficient_1d({alpha, 0.0, beta, 0.0}, 1, q);
    return (2 - c) * c;
}

/// The four closed-form expressions of the piecewise variance surface, in
/// region order I, II, III, IV.
inline std::array<double, 4> variance_branches_1d(double alpha, double beta) {
    const double ca = std::cos(alpha), cb = std::cos(beta);
    return {4 * cb * (1 - cb), -4 * cb * (1 + cb), 4 * ca * (1 - ca), -4 * ca * (1 + ca)};
}

struct BranchMatch {
    int region = 0;  // 0..3 for I..IV
    double value = 0.0;
    double mismatch = 0.0;
};

/// Picks the closed-form branch that agrees best with a reference value.
inline BranchMatch match_variance_branch(double alpha, double beta, double reference) {
    const auto br = variance_branches_1d(alpha, beta);
    BranchMatch m{0, br[0], std::abs(br[0] - reference)};
    for (int i = 1; i < 4; ++i) {
        const double d = std::abs(br[i] - reference);
        if (d < m.mismatch) m = {i, br[i], d};
    }
    return m;
}

inline const char* region_name(int region) {
    static const char* names[] = {"I", "II", "III", "IV"};
    return names[region];
}

inline MomentReport<1> analytic_report_1d(const TessellationSpec1D& s, const QuadratureSettings& q = {}) {
    MomentReport<1> r;
    r.method = Method::quadrature;
    r.mean[0] = odd_moment_coefficient_1d(s, 1, q);
    r.mean_sq[0] = 2 * r.mean[0];
    return r;
}

// ---------------------------------------------------------------------------
// Two dimensions, cell initial condition a|00> + b|01> + c|10> + d|11>

struct CellState {
    Complex a, b, c, d;

    double norm_squared() const { return std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d); }

    void require_unit(double tol = 1e-12) const {
        if (std::abs(norm_squared() - 1.0) > tol)
            throw NormError("coefficients have squared norm " + std::to_string(norm_squared()) + ", expected 1");
    }
};

namespace detail {
/// 2 Re(p conj(q)) = p q* + q p*.
inline double herm(Complex p, Complex q) { return 2 * (p * std::conj(q)).real(); }
}  // namespace detail

/// Leading coefficients of <x>_t and <y>_t.
inline std::array<double, 2> first_moment_coefficients_2d(const CellState& s) {
    s.require_unit();
    using detail::herm;
    const double na = std::norm(s.a), nb = std::norm(s.b), nc = std::norm(s.c), nd = std::norm(s.d);
    return {D2 * (na + nb - nc - nd + herm(s.a, s.b) - herm(s.d, s.c)),
            D2 * (na - nb + nc - nd - herm(s.b, s.d) + herm(s.c, s.a))};
}

/// Leading coefficients of <x^2>_t and <y^2>_t.
inline std::array<double, 2> second_moment_coefficients_2d(const CellState& s) {
    s.require_unit();
    using detail::herm;
    const double g_ac = herm(s.a, s.c) + herm(s.d, s.b);
    const double g_ab = herm(s.a, s.b) + herm(s.d, s.c);
    const double g_bc = herm(s.b, s.c) + herm(s.a, s.d);
    const double k3 = 1 - 3 / pi, k7 = 1 - 7 / (3 * pi), k10 = 10 / (3 * pi) - 1;
    return {2 * (D2 + k3 * g_ac + k7 * g_ab + k10 * g_bc), 2 * (D2 + k7 * g_ac + k3 * g_ab + k10 * g_bc)};
}

/// Leading coefficient of sigma_x^2 + sigma_y^2.
inline double msd_coefficient_2d(const CellState& s) {
    const auto m1 = first_moment_coefficients_2d(s);
    const auto m2 = second_moment_coefficients_2d(s);
    return m2[0] + m2[1] - m1[0] * m1[0] - m1[1] * m1[1];
}

inline MomentReport<2> analytic_report_2d(const CellState& s) {
    MomentReport<2> r;
    r.method = Method::closed_form;
    const auto m1 = first_moment_coefficients_2d(s);
    const auto m2 = second_moment_coefficients_2d(s);
    r.mean = {m1[0], m1[1]};
    r.mean_sq = {m2[0], m2[1]};
    return r;
}

inline InitialCondition<2> to_initial_condition(const CellState& s) {
    return InitialCondition<2>::cell(s.a, s.b, s.c, s.d);
}

}  // namespace cqw
