#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cqw/coined.hpp"
#include "cqw/core.hpp"
#include "cqw/moments.hpp"

namespace cqw {

/// Box-shaped parameter chart. Half-open axes are sampled on [lower, upper)
/// with step (upper - lower) / resolution; closed axes include both ends.
struct Chart {
    std::string name;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<bool> half_open;

    std::size_t dimension() const { return lower.size(); }

    bool contains(std::span<const double> p) const {
        if (p.size() != dimension()) return false;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] < lower[i] || p[i] > upper[i]) return false;
        return true;
    }

    void clamp(std::span<double> p) const {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::clamp(p[i], lower[i], upper[i]);
    }

    double grid_coordinate(std::size_t axis, int i, int resolution) const {
        const double span = upper[axis] - lower[axis];
        const double step = half_open[axis] ? span / resolution : span / (resolution - 1);
        return lower[axis] + i * step;
    }
};

/// (alpha, beta) in [0, pi)^2 with step pi / resolution, so that a resolution
/// divisible by 3 samples pi/3 and 2pi/3 exactly.
inline Chart angle_box_chart() { return {"alpha-beta", {0.0, 0.0}, {pi, pi}, {true, true}}; }

/// alpha in [0, pi], phi in [0, 2 pi).
inline Chart hadamard_chart() { return {"alpha-phi", {0.0, 0.0}, {pi, 2 * pi}, {false, true}}; }

/// Real unit 4-vectors: (cos t1 cos t2, cos t1 sin t2, sin t1 cos t3, sin t1 sin t3).
inline Chart real_sphere_chart() { return {"real-sphere", {0.0, 0.0, 0.0}, {pi / 2, 2 * pi, 2 * pi}, {false, false, false}}; }

/// Complex unit 4-vectors modulo the global phase: moduli as in the real chart
/// (t2, t3 restricted to [0, pi/2]) and phases on b, c, d; a is real and
/// non-negative.
inline Chart complex_sphere_chart() {
    return {"complex-sphere",
            {0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
            {pi / 2, pi / 2, pi / 2, 2 * pi, 2 * pi, 2 * pi},
            {false, false, false, false, false, false}};
}

inline CellState real_sphere_point(std::span<const double> p) {
    return {std::cos(p[0]) * std::cos(p[1]), std::cos(p[0]) * std::sin(p[1]), std::sin(p[0]) * std::cos(p[2]),
            std::sin(p[0]) * std::sin(p[2])};
}

inline CellState complex_sphere_point(std::span<const double> p) {
    return {Complex{std::cos(p[0]) * std::cos(p[1]), 0.0}, std::polar(std::cos(p[0]) * std::sin(p[1]), p[3]),
            std::polar(std::sin(p[0]) * std::cos(p[2]), p[4]), std::polar(std::sin(p[0]) * std::sin(p[2]), p[5])};
}

using Objective = std::function<double(std::span<const double>)>;

/// Error raised while evaluating an objective inside a sweep; carries the grid
/// coordinates and the category of the underlying failure.
struct ObjectiveError : Error {
    ObjectiveError(const std::string& what, std::string inner_kind) : Error(what), inner(std::move(inner_kind)) {}
    const char* kind() const noexcept override { return inner.c_str(); }
    std::string inner;
};

struct SweepResult {
    int resolution = 0;
    std::size_t dimension = 0;
    std::vector<std::vector<double>> points;
    std::vector<double> values;
    double max_value = 0.0;
    std::vector<std::size_t> argmax;  // indices into points/values
};

inline std::string format_point(std::span<const double> p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ", " : "") + std::to_string(p[i]);
    return s + ")";
}

/// Dense evaluation on resolution^d grid points; argmax collects every point
/// within `plateau_tol` of the maximum.
inline SweepResult sweep_objective(const Objective& f, const Chart& chart, int resolution, double plateau_tol = 1e-9,
                                   int min_resolution = 16) {
    if (resolution < min_resolution) throw ConfigError("sweep resolution must be at least " + std::to_string(min_resolution));
    if (resolution < 2) throw ConfigError("sweep resolution must be at least 2");
    SweepResult r;
    r.resolution = resolution;
    r.dimension = chart.dimension();
    std::vector<int> idx(r.dimension, 0);
    std::vector<double> p(r.dimension);
    while (true) {
        for (std::size_t a = 0; a < r.dimension; ++a) p[a] = chart.grid_coordinate(a, idx[a], resolution);
        double v;
        try {
            v = f(p);
        } catch (const Error& e) {
            throw ObjectiveError(std::string(e.what()) + " at " + format_point(p), e.kind());
        }
        r.points.push_back(p);
        r.values.push_back(v);
        int a = static_cast<int>(r.dimension) - 1;
        while (a >= 0 && ++idx[a] == resolution) idx[a--] = 0;
        if (a < 0) break;
    }
    r.max_value = *std::max_element(r.values.begin(), r.values.end());
    for (std::size_t i = 0; i < r.values.size(); ++i)
        if (r.values[i] >= r.max_value - plateau_tol) r.argmax.push_back(i);
    return r;
}

struct RefineOptions {
    double tolerance = 1e-8;  // simplex diameter
    int max_evaluations = 10000;
    int restarts = 8;
    double initial_step = 0.05;  // fraction of each chart range
    std::uint64_t seed = 12345;
};

struct SpreadOptimum {
    std::vector<double> point;
    double value = 0.0;
    double start_value = 0.0;
    double simplex_diameter = 0.0;
    int evaluations = 0;
    bool converged = false;
    std::optional<bool> on_locus;
};

namespace detail {

struct SimplexRun {
    std::vector<double> best;
    double value;
    double diameter;
    int evaluations;
    bool converged;
};

/// Nelder-Mead maximization inside the chart box.
inline SimplexRun nelder_mead(const Objective& f, const Chart& chart, std::vector<double> x0,
                              const std::vector<double>& step, const RefineOptions& opt) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> x(n + 1, x0);
    std::vector<double> fx(n + 1);
    int evals = 0;
    auto eval = [&](std::vector<double>& p) {
        chart.clamp(p);
        ++evals;
        return f(p);
    };
    for (std::size_t i = 0; i < n; ++i) {
        x[i + 1][i] += step[i];
        if (x[i + 1][i] > chart.upper[i]) x[i + 1][i] -= 2 * step[i];
    }
    for (std::size_t i = 0; i <= n; ++i) fx[i] = eval(x[i]);

    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += (x[i][j] - x[0][j]) * (x[i][j] - x[0][j]);
            d = std::max(d, std::sqrt(s));
        }
        return d;
    };

    std::vector<std::size_t> order(n + 1);
    bool converged = false;
    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fx[a] > fx[b]; });
        {
            std::vector<std::vector<double>> xs(n + 1);
            std::vector<double> fs(n + 1);
            for (std::size_t i = 0; i <= n; ++i) xs[i] = x[order[i]], fs[i] = fx[order[i]];
            x.swap(xs);
            fx.swap(fs);
        }
        if (diameter() < opt.tolerance) {
            converged = true;
            break;
        }
        if (evals >= opt.max_evaluations) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += x[i][j] / n;
        auto along = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (x[n][j] - centroid[j]);
            return p;
        };
        auto xr = along(-1.0);
        const double fr = eval(xr);
        if (fr > fx[0]) {
            auto xe = along(-2.0);
            const double fe = eval(xe);
            if (fe > fr) x[n] = xe, fx[n] = fe;
            else x[n] = xr, fx[n] = fr;
        } else if (fr > fx[n - 1]) {
            x[n] = xr, fx[n] = fr;
        } else {
            const bool outside = fr > fx[n];
            auto xc = along(outside ? -0.5 : 0.5);
            const double fc = eval(xc);
            if (fc > std::max(fr, fx[n])) {
                x[n] = xc, fx[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) x[i][j] = x[0][j] + 0.5 * (x[i][j] - x[0][j]);
                    fx[i] = eval(x[i]);
                }
            }
        }
    }
    return {x[0], fx[0], diameter(), evals, converged};
}

}  // namespace detail

/// Derivative-free local maximization from `start`, followed by randomized
/// restarts around the incumbent. The result is never worse than the start.
inline SpreadOptimum refine_local(const Objective& f, std::span<const double> start, const Chart& chart,
                                  const RefineOptions& opt = {}) {
    if (!chart.contains(start)) throw ConfigError("refinement start " + format_point(start) + " is outside the chart");
    const std::size_t n = chart.dimension();
    SpreadOptimum best;
    best.point.assign(start.begin(), start.end());
    best.value = best.start_value = f(best.point);
    best.evaluations = 1;

    std::vector<double> step(n);
    for (std::size_t i = 0; i < n; ++i) step[i] = opt.initial_step * (chart.upper[i] - chart.lower[i]);

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unit(0.25, 1.0);
    std::bernoulli_distribution flip(0.5);
    for (int run = 0; run <= opt.restarts; ++run) {
        std::vector<double> s = step;
        if (run > 0)
            for (auto& v : s) v *= unit(rng) * (flip(rng) ? -1.0 : 1.0);
        auto res = detail::nelder_mead(f, chart, best.point, s, opt);
        best.evaluations += res.evaluations;
        if (res.value >= best.value) {
            best.point = res.best;
            best.value = res.value;
            best.simplex_diameter = res.diameter;
            best.converged = res.converged;
        } else if (run == 0) {
            best.simplex_diameter = res.diameter;
            best.converged = res.converged;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Analytic loci of the known maximizers

struct LocusReport {
    bool on_locus = false;
    double distance = 0.0;
    std::vector<double> component_distance;
};

inline constexpr double locus_tolerance = 1e-4;

/// Maximizers of the 1D variance: beta in {pi/3, 2pi/3} with alpha in
/// [pi/3, 2pi/3], or the same with alpha and beta exchanged. Distances are
/// reported per segment.
inline LocusReport verify_variance_locus_1d(double alpha, double beta, double tol = locus_tolerance) {
    auto seg = [](double fixed_coord, double free_coord, double level) {
        const double lo = pi / 3, hi = 2 * pi / 3;
        const double df = std::max({0.0, lo - free_coord, free_coord - hi});
        return std::hypot(fixed_coord - level, df);
    };
    LocusReport r;
    r.component_distance = {seg(beta, alpha, pi / 3), seg(beta, alpha, 2 * pi / 3), seg(alpha, beta, pi / 3),
                            seg(alpha, beta, 2 * pi / 3)};
    r.distance = *std::min_element(r.component_distance.begin(), r.component_distance.end());
    r.on_locus = r.distance < tol;
    return r;
}

/// Distance to a finite set of points up to a global sign; component
/// distances refer to the closest candidate.
inline LocusReport verify_point_locus(const CellState& s, const std::vector<CellState>& candidates,
                                      double tol = locus_tolerance) {
    LocusReport r;
    r.distance = 1e300;
    const std::array<Complex, 4> v{s.a, s.b, s.c, s.d};
    for (const auto& c : candidates) {
        const std::array<Complex, 4> w{c.a, c.b, c.c, c.d};
        for (double sign : {1.0, -1.0}) {
            std::vector<double> comp(4);
            double d2 = 0.0;
            for (int i = 0; i < 4; ++i) {
                comp[i] = std::abs(v[i] - sign * w[i]);
                d2 += comp[i] * comp[i];
            }
            if (std::sqrt(d2) < r.distance) {
                r.distance = std::sqrt(d2);
                r.component_distance = comp;
            }
        }
    }
    r.on_locus = r.distance < tol;
    return r;
}

inline const CellState uniform_cell{0.5, 0.5, 0.5, 0.5};
inline const CellState grover_max_cell{0.5, -0.5, -0.5, 0.5};

// ---------------------------------------------------------------------------
// Named objectives

struct NamedObjective {
    std::string name;
    Chart chart;
    Objective f;
    double bound;  // claimed global maximum
};

/// Quadrature settings used inside objectives; tighter than the default so
/// that optimizer noise stays far below the locus tolerance.
inline QuadratureSettings objective_quadrature() {
    QuadratureSettings q;
    q.rel_tol = 1e-12;
    q.abs_tol = 1e-13;
    return q;
}

inline NamedObjective coinless1d_variance_objective() {
    const auto q = objective_quadrature();
    return {"coinless1d-variance", angle_box_chart(),
            [q](std::span<const double> p) { return variance_coefficient_1d(p[0], p[1], q); }, 1.0};
}

inline NamedObjective coinless2d_msd_objective(bool complex_chart) {
    if (complex_chart)
        return {"coinless2d-msd-complex", complex_sphere_chart(),
                [](std::span<const double> p) { return msd_coefficient_2d(complex_sphere_point(p)); }, 8 * D2};
    return {"coinless2d-msd-real", real_sphere_chart(),
            [](std::span<const double> p) { return msd_coefficient_2d(real_sphere_point(p)); }, 8 * D2};
}

inline NamedObjective grover_sigma_objective(bool complex_chart) {
    if (complex_chart)
        return {"grover-sigma-complex", complex_sphere_chart(),
                [](std::span<const double> p) { return grover_moment_coefficients(complex_sphere_point(p)).sigma(); },
                std::sqrt(D2)};
    return {"grover-sigma-real", real_sphere_chart(),
            [](std::span<const double> p) { return grover_moment_coefficients(real_sphere_point(p)).sigma(); },
            std::sqrt(D2)};
}

inline NamedObjective hadamard_sigma_objective() {
    return {"hadamard-sigma", hadamard_chart(),
            [](std::span<const double> p) { return hadamard_moment_coefficients(p[0], p[1]).sigma(); }, std::sqrt(D1)};
}

// Finite-t counterparts evaluated by simulation at step t; for validation of
// the analytic objectives, not for production optimization.

namespace detail {

inline double simulated_sigma2_2d(const MomentReport<2>& r, int t) { return r.sigma2_total() / (static_cast<double>(t) * t); }

}  // namespace detail

inline NamedObjective coinless1d_variance_objective_empirical(int t) {
    return {"coinless1d-variance-empirical", angle_box_chart(),
            [t](std::span<const double> p) {
                const auto r = empirical_report(evolve(InitialCondition<1>::localized(), TessellationSpec1D{p[0], 0.0, p[1], 0.0}, t), t);
                return (r.mean_sq[0] - r.mean[0] * r.mean[0]) / (static_cast<double>(t) * t);
            },
            1.0};
}

inline NamedObjective coinless2d_msd_objective_empirical(bool complex_chart, int t) {
    auto base = coinless2d_msd_objective(complex_chart);
    auto point = complex_chart ? complex_sphere_point : real_sphere_point;
    base.name += "-empirical";
    base.f = [t, point](std::span<const double> p) {
        const auto c = point(p);
        return detail::simulated_sigma2_2d(
            empirical_report(evolve(InitialCondition<2>::cell(c.a, c.b, c.c, c.d), TessellationSpec2D{}, t), t), t);
    };
    return base;
}

inline NamedObjective grover_sigma_objective_empirical(bool complex_chart, int t) {
    auto base = grover_sigma_objective(complex_chart);
    auto point = complex_chart ? complex_sphere_point : real_sphere_point;
    base.name += "-empirical";
    base.f = [t, point](std::span<const double> p) {
        return std::sqrt(detail::simulated_sigma2_2d(empirical_report(probability_distribution(grover_evolve(point(p), t)), t), t));
    };
    return base;
}

inline NamedObjective hadamard_sigma_objective_empirical(int t) {
    auto base = hadamard_sigma_objective();
    base.name += "-empirical";
    base.f = [t](std::span<const double> p) {
        const auto r = empirical_report(probability_distribution(hadamard_evolve(p[0], p[1], t)), t);
        return std::sqrt(std::max(0.0, r.mean_sq[0] - r.mean[0] * r.mean[0])) / t;
    };
    return base;
}

/// Objective by model name (coinless1d, coinless2d, hadamard, grover2d);
/// `empirical_t` selects the simulated variant.
inline NamedObjective objective_for(const std::string& model, bool complex_chart, std::optional<int> empirical_t = {}) {
    if (empirical_t && *empirical_t < 1) throw ConfigError("empirical objective needs t >= 1");
    if (complex_chart && (model == "coinless1d" || model == "hadamard"))
        throw ConfigError("model " + model + " has no complex chart");
    if (model == "coinless1d")
        return empirical_t ? coinless1d_variance_objective_empirical(*empirical_t) : coinless1d_variance_objective();
    if (model == "coinless2d")
        return empirical_t ? coinless2d_msd_objective_empirical(complex_chart, *empirical_t) : coinless2d_msd_objective(complex_chart);
    if (model == "grover2d")
        return empirical_t ? grover_sigma_objective_empirical(complex_chart, *empirical_t) : grover_sigma_objective(complex_chart);
    if (model == "hadamard") return empirical_t ? hadamard_sigma_objective_empirical(*empirical_t) : hadamard_sigma_objective();
    throw ConfigError("unknown model '" + model + "'");
}

/// Sweep at `resolution` followed by refinement from the best grid point.
inline SpreadOptimum sweep_and_refine(const NamedObjective& obj, int resolution, const RefineOptions& opt = {}) {
    const auto sweep = sweep_objective(obj.f, obj.chart, resolution);
    const auto best = std::max_element(sweep.values.begin(), sweep.values.end()) - sweep.values.begin();
    return refine_local(obj.f, sweep.points[static_cast<std::size_t>(best)], obj.chart, opt);
}

}  // namespace cqw
