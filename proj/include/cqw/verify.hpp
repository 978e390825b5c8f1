#pragma once

// End-to-end consistency suite: each check runs library code at a fixed scale
// and compares measured quantities against pinned reference values.

#include <chrono>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cqw/coined.hpp"
#include "cqw/moments.hpp"
#include "cqw/momentum.hpp"
#include "cqw/optimize.hpp"
#include "cqw/walk.hpp"

namespace cqw {

struct Measurement {
    std::string name;
    std::string method;  // empirical, quadrature, closed-form, cross-path, optimizer, property
    double value = 0.0;
    double target = 0.0;
    double error = 0.0;
    double tolerance = 0.0;
    bool relative = false;
    bool passed = false;
};

struct CheckResult {
    std::string id;
    std::string description;
    int t = 0;
    std::vector<Measurement> measurements;
    double seconds = 0.0;
    double time_limit = 0.0;
    bool enforce_time = true;

    bool within_time() const { return !enforce_time || seconds < time_limit; }

    bool passed() const {
        if (!within_time()) return false;
        for (const auto& m : measurements)
            if (!m.passed) return false;
        return !measurements.empty();
    }
};

struct VerifyOptions {
    std::optional<int> t;  // overrides every check's step count
    std::uint64_t seed = 20240611;
    bool enforce_time = true;
};

namespace verify_detail {

inline Measurement relative(std::string name, std::string method, double value, double target, double tol) {
    Measurement m{std::move(name), std::move(method), value, target, 0.0, tol, true, false};
    m.error = std::abs(value - target) / std::abs(target);
    m.passed = m.error <= tol;
    return m;
}

inline Measurement absolute(std::string name, std::string method, double value, double target, double tol) {
    Measurement m{std::move(name), std::move(method), value, target, 0.0, tol, false, false};
    m.error = std::abs(value - target);
    m.passed = m.error <= tol;
    return m;
}

/// Upper-bound check: passes when value <= target + tol.
inline Measurement at_most(std::string name, std::string method, double value, double target, double tol) {
    Measurement m{std::move(name), std::move(method), value, target, std::max(0.0, value - target), tol, false, false};
    m.passed = value <= target + tol;
    return m;
}

inline Measurement at_least(std::string name, std::string method, double value, double target) {
    Measurement m{std::move(name), std::move(method), value, target, std::max(0.0, target - value), 0.0, false, false};
    m.passed = value >= target;
    return m;
}

struct Scale {
    int t;
    bool reduced;

    /// Convergence budgets: the stated tolerance at full scale, 5% when the
    /// step count is below the default.
    double loosen(double tol) const { return reduced ? std::max(tol, 0.05) : tol; }
};

inline Scale scale(const VerifyOptions& o, int default_t) {
    const int t = o.t.value_or(default_t);
    if (t < 1) throw ConfigError("verification needs t >= 1");
    return {t, t < default_t};
}

inline double variance_over_t2(const MomentReport<1>& r, int t) {
    return (r.mean_sq[0] - r.mean[0] * r.mean[0]) / (static_cast<double>(t) * t);
}

inline MomentReport<1> coinless1d_empirical(const TessellationSpec1D& s, int t) {
    return empirical_report(evolve(InitialCondition<1>::localized(), s, t), t);
}

inline MomentReport<2> coinless2d_empirical(const CellState& c, int t) {
    return empirical_report(evolve(InitialCondition<2>::cell(c.a, c.b, c.c, c.d), TessellationSpec2D{}, t), t);
}

inline CellState random_cell(std::mt19937_64& rng, bool complex_valued) {
    std::normal_distribution<double> g;
    std::array<Complex, 4> v;
    double n = 0.0;
    for (auto& x : v) {
        x = Complex(g(rng), complex_valued ? g(rng) : 0.0);
        n += std::norm(x);
    }
    n = std::sqrt(n);
    return {v[0] / n, v[1] / n, v[2] / n, v[3] / n};
}

inline std::vector<Complex> random_amplitudes(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g;
    std::vector<Complex> v(n);
    double s = 0.0;
    for (auto& x : v) {
        x = Complex(g(rng), g(rng));
        s += std::norm(x);
    }
    for (auto& x : v) x /= std::sqrt(s);
    return v;
}

inline TessellationSpec1D random_spec(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ang(0.0, pi), ph(0.0, 2 * pi);
    return {ang(rng), ph(rng), ang(rng), ph(rng)};
}

template <int Dim>
double max_difference(const LatticeState<Dim>& a, const LatticeState<Dim>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.amplitudes().size(); ++i)
        d = std::max(d, std::abs(a.amplitudes()[i] - b.amplitudes()[i]));
    return d;
}

}  // namespace verify_detail

inline CheckResult check_ballistic(const VerifyOptions& o) {
    using namespace verify_detail;
    const auto sc = scale(o, 100);
    const int t = sc.t;
    CheckResult r{"ballistic", "alpha = beta = pi/2 moves the walker 2 sites per step", t, {}, 0.0, 1.0, o.enforce_time};
    const auto d = probability_distribution(evolve(InitialCondition<1>::localized(), TessellationSpec1D{pi / 2, 0, pi / 2, 0}, t));
    const auto it = d.find({2 * t});
    const auto rep = empirical_report(d, t);
    r.measurements.push_back(absolute("probability_at_2t", "empirical", it == d.end() ? 0.0 : it->second, 1.0, 1e-10));
    r.measurements.push_back(absolute("mean_over_t", "empirical", rep.mean[0] / t, 2.0, 1e-10));
    r.measurements.push_back(at_most("variance", "empirical", rep.mean_sq[0] - rep.mean[0] * rep.mean[0], 0.0, 1e-10));
    return r;
}

inline CheckResult check_max_variance_1d(const VerifyOptions& o) {
    using namespace verify_detail;
    const auto sc = scale(o, 400);
    CheckResult r{"max-variance-1d", "alpha = beta = pi/3 attains sigma^2 / t^2 = 1", sc.t, {}, 0.0, 5.0, o.enforce_time};
    const TessellationSpec1D s{pi / 3, 0, pi / 3, 0};
    r.measurements.push_back(relative("sigma2_over_t2", "empirical", variance_over_t2(coinless1d_empirical(s, sc.t), sc.t), 1.0,
                                      sc.loosen(0.02)));
    r.measurements.push_back(absolute("variance_coefficient", "quadrature", variance_coefficient_1d(pi / 3, pi / 3), 1.0, 1e-8));
    return r;
}

/// 11 x 11 grid alpha, beta in {0, pi/10, ..., pi}. Points where sin(alpha)
/// sin(beta) vanishes have a zero coefficient and are compared absolutely
/// against 1/t^2.
inline CheckResult check_variance_surface(const VerifyOptions& o) {
    using namespace verify_detail;
    const auto sc = scale(o, 200);
    const int t = sc.t;
    CheckResult r{"variance-surface", "quadrature, simulation and branch formulas agree on an 11 x 11 grid", t, {}, 0.0, 120.0,
                  o.enforce_time};
    const double tol = sc.loosen(0.02), floor = 1.0 / (static_cast<double>(t) * t);
    double worst_rel = 0.0, worst_zero = 0.0, worst_branch = 0.0;
    int failures = 0;
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j <= 10; ++j) {
            const double a = i * pi / 10, b = j * pi / 10;
            const double q = variance_coefficient_1d(a, b);
            const double e = variance_over_t2(coinless1d_empirical({a, 0, b, 0}, t), t);
            const bool degenerate = i == 0 || i == 10 || j == 0 || j == 10;
            if (degenerate) {
                worst_zero = std::max(worst_zero, std::abs(e - q));
                failures += std::abs(e - q) > floor;
            } else {
                const double rel = std::abs(e - q) / q;
                worst_rel = std::max(worst_rel, rel);
                failures += rel > tol;
            }
            worst_branch = std::max(worst_branch, match_variance_branch(a, b, q).mismatch);
        }
    }
    r.measurements.push_back(at_most("max_relative_error_empirical_vs_quadrature", "empirical", worst_rel, 0.0, tol));
    r.measurements.push_back(at_most("max_abs_error_degenerate_points", "empirical", worst_zero, 0.0, floor));
    r.measurements.push_back(at_most("max_branch_mismatch", "closed-form", worst_branch, 0.0, 1e-6));
    r.measurements.push_back(absolute("failing_grid_points", "empirical", failures, 0.0, 0.0));
    return r;
}

inline CheckResult check_phase_independence(const VerifyOptions& o) {
    using namespace verify_detail;
    const auto sc = scale(o, 200);
    const int t = sc.t;
    CheckResult r{"phase-independence", "sigma^2 does not depend on phi1, phi2", t, {}, 0.0, 60.0, o.enforce_time};
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> ph(0.0, 2 * pi);
    const double a = pi / 3, b = 2 * pi / 5;
    double qlo = 1e300, qhi = -1e300, elo = 1e300, ehi = -1e300;
    for (int i = 0; i < 10; ++i) {
        const TessellationSpec1D s{a, ph(rng), b, ph(rng)};
        const double q = even_moment_coefficient_1d(s, 2) - std::pow(odd_moment_coefficient_1d(s, 1), 2);
        const double e = variance_over_t2(coinless1d_empirical(s, t), t);
        qlo = std::min(qlo, q), qhi = std::max(qhi, q);
        elo = std::min(elo, e), ehi = std::max(ehi, e);
    }
    r.measurements.push_back(at_most("quadrature_spread", "quadrature", qhi - qlo, 0.0, 1e-9));
    r.measurements.push_back(at_most("empirical_spread", "empirical", ehi - elo, 0.0, sc.reduced ? 5e-3 : 1e-3));
    return r;
}

inline CheckResult check_msd_2d(const VerifyOptions& o) {
    using namespace verify_detail;
    const auto sc = scale(o, 150);
    CheckResult r{"msd-2d", "uniform cell state attains the 2D maximum 8 D2", sc.t, {}, 0.0, 60.0, o.enforce_time};
    const auto rep = coinless2d_empirical(uniform_cell, sc.t);
    r.measurements.push_back(relative("sigma2_total_over_t2", "empirical", rep.sigma2_total() / (static_cast<double>(sc.t) * sc.t),
                                      8 * D2, sc.loosen(0.03)));
    r.measurements.push_back(absolute("msd_coefficient", "closed-form", msd_coefficient_2d(uniform_cell), 8 * D2, 1e-12));
    return r;
}

/// First moments are compared with an absolute floor of 2/t, the size of
/// the leading finite-t correction, since they may vanish.
inline CheckResult check_moments_2d(const VerifyOptions& o) {
    using namespace verify_detail;
    const auto sc = scale(o, 150);
    const int t = sc.t;
    CheckResult r{"moments-2d", "closed-form 2D moments match simulation for random complex cells", t, {}, 0.0, 300.0,
                  o.enforce_time};
    std::mt19937_64 rng(o.seed + 1);
    const double tol = sc.loosen(0.03);
    double worst_first = 0.0, worst_second = 0.0;
    int failures = 0;
    for (int i = 0; i < 10; ++i) {
        const auto c = random_cell(rng, true);
        const auto e = coinless2d_empirical(c, t);
        const auto m1 = first_moment_coefficients_2d(c);
        const auto m2 = second_moment_coefficients_2d(c);
        for (int ax = 0; ax < 2; ++ax) {
            const double d1 = std::abs(e.mean[ax] / t - m1[ax]);
            const double allow1 = std::max(tol * std::abs(m1[ax]), 2.0 / t);
            worst_first = std::max(worst_first, d1 / allow1);
            const double d2 = std::abs(e.mean_sq[ax] / (static_cast<double>(t) * t) - m2[ax]) / m2[ax];
            worst_second = std::max(worst_second, d2);
            failures += (d1 > allow1) + (d2 > tol);
        }
    }
    r.measurements.push_back(at_most("max_first_moment_error_over_allowance", "empirical", worst_first, 1.0, 0.0));
    r.measurements.push_back(at_most("max_relative_error_second_moment", "empirical", worst_second, 0.0, tol));
    r.measurements.push_back(absolute("failing_comparisons", "empirical", failures, 0.0, 0.0));
    return r;
}

inline CheckResult check_momentum_crosspath(const VerifyOptions& o) {
    using namespace verify_detail;
    const auto sc = scale(o, 50);
    const int t = sc.t;
    CheckResult r{"momentum-crosspath", "direct and momentum-space evolution agree per amplitude", t, {}, 0.0, 30.0,
                  o.enforce_time};
    std::mt19937_64 rng(o.seed + 2);
    double worst1 = 0.0, worst2 = 0.0;
    for (int i = 0; i < 5; ++i) {
        const auto g = Geometry<1>::periodic(64);
        const auto spec = random_spec(rng);
        const LatticeState<1> s(g, random_amplitudes(rng, g.size()));
        worst1 = std::max(worst1, max_difference(CoinlessWalk<1>(spec, g).evolve(s, t), evolve_momentum(s, spec, t)));
    }
    for (int i = 0; i < 2; ++i) {
        const auto g = Geometry<2>::periodic(32);
        const LatticeState<2> s(g, random_amplitudes(rng, g.size()));
        worst2 = std::max(worst2, max_difference(CoinlessWalk<2>(TessellationSpec2D{}, g).evolve(s, t),
                                                 evolve_momentum(s, TessellationSpec2D{}, t)));
    }
    r.measurements.push_back(at_most("max_amplitude_difference_1d_L64", "cross-path", worst1, 0.0, 1e-10));
    r.measurements.push_back(at_most("max_amplitude_difference_2d_L32", "cross-path", worst2, 0.0, 1e-10));
    return r;
}

/// Reference values for the two mirror starts are the literal
/// sqrt(D1 - 2 D1^2) and sqrt(D1). The simulated walk gives sqrt(D1 - D1^2)
/// for both, so the first two measurements are expected to fail.
inline CheckResult check_hadamard(const VerifyOptions& o) {
    using namespace verify_detail;
    const auto sc = scale(o, 400);
    const int t = sc.t;
    CheckResult r{"hadamard", "Hadamard walk spread coefficients", t, {}, 0.0, 60.0, o.enforce_time};
    const double tol = sc.loosen(0.02);
    auto sigma = [t](double alpha, double phi) {
        const auto rep = empirical_report(probability_distribution(hadamard_evolve(alpha, phi, t)), t);
        return std::sqrt(std::max(0.0, rep.mean_sq[0] - rep.mean[0] * rep.mean[0])) / t;
    };
    r.measurements.push_back(relative("sigma_over_t_phi0", "empirical", sigma(pi / 2, 0.0), std::sqrt(D1 - 2 * D1 * D1), tol));
    r.measurements.push_back(relative("sigma_over_t_phipi", "empirical", sigma(pi / 2, pi), std::sqrt(D1), tol));
    std::mt19937_64 rng(o.seed + 3);
    std::uniform_real_distribution<double> ang(0.0, pi), ph(0.0, 2 * pi);
    for (int i = 0; i < 3; ++i) {
        const double alpha = ang(rng), phi = ph(rng);
        const auto rep = empirical_report(probability_distribution(hadamard_evolve(alpha, phi, t)), t);
        r.measurements.push_back(relative("x2_over_t2_random_" + std::to_string(i), "empirical",
                                          rep.mean_sq[0] / (static_cast<double>(t) * t), D1, tol));
    }
    return r;
}

inline CheckResult check_grover(const VerifyOptions& o) {
    using namespace verify_detail;
    const auto sc = scale(o, 300);
    const int t = sc.t;
    CheckResult r{"grover", "Grover walk extreme spreads", t, {}, 0.0, 60.0, o.enforce_time};
    const double tol = sc.loosen(0.03);
    auto sigma = [t](const CellState& c) {
        return std::sqrt(empirical_report(probability_distribution(grover_evolve(c, t)), t).sigma2_total()) / t;
    };
    r.measurements.push_back(relative("sigma_over_t_max", "empirical", sigma(grover_max_cell), std::sqrt(D2), tol));
    r.measurements.push_back(relative("sigma_over_t_uniform", "empirical", sigma(uniform_cell), std::sqrt(10 / (3 * pi) - 1), tol));
    return r;
}

inline CheckResult check_optimizer(const VerifyOptions& o) {
    using namespace verify_detail;
    CheckResult r{"optimizer", "sweep and refine recover the known maxima", 0, {}, 0.0, 300.0, o.enforce_time};
    RefineOptions opt;
    opt.seed = o.seed;
    const auto v = sweep_and_refine(coinless1d_variance_objective(), 33, opt);
    r.measurements.push_back(absolute("coinless1d_max", "optimizer", v.value, 1.0, 1e-6));
    r.measurements.push_back(at_most("coinless1d_locus_distance", "optimizer", verify_variance_locus_1d(v.point[0], v.point[1]).distance,
                                     0.0, locus_tolerance));
    const auto m = sweep_and_refine(coinless2d_msd_objective(false), 17, opt);
    r.measurements.push_back(absolute("coinless2d_max", "optimizer", m.value, 8 * D2, 1e-6));
    r.measurements.push_back(at_most("coinless2d_locus_distance", "optimizer",
                                     verify_point_locus(real_sphere_point(m.point), {uniform_cell}).distance, 0.0, locus_tolerance));
    const auto g = sweep_and_refine(grover_sigma_objective(false), 17, opt);
    r.measurements.push_back(absolute("grover_max", "optimizer", g.value, std::sqrt(D2), 1e-6));
    r.measurements.push_back(at_most("grover_locus_distance", "optimizer",
                                     verify_point_locus(real_sphere_point(g.point), {grover_max_cell}).distance, 0.0,
                                     locus_tolerance));
    double excess = -1e300;
    for (const auto& [obj, res] : {std::pair{coinless1d_variance_objective(), v}, std::pair{coinless2d_msd_objective(false), m},
                                   std::pair{grover_sigma_objective(false), g}})
        excess = std::max(excess, res.value - obj.bound);
    r.measurements.push_back(at_most("max_excess_over_bound", "optimizer", excess, 0.0, 1e-6));
    return r;
}

/// 100 randomized cases per property.
inline CheckResult check_properties(const VerifyOptions& o) {
    using namespace verify_detail;
    CheckResult r{"properties", "unitarity, involutive reflections, locality, eigenvectors, Fourier completeness", 0, {}, 0.0,
                  120.0, o.enforce_time};
    std::mt19937_64 rng(o.seed + 4);
    constexpr int cases = 100;

    double unitarity = 0.0, involution = 0.0, eig = 0.0, fourier = 0.0;
    int locality_violations = 0;
    for (int i = 0; i < cases; ++i) {
        const auto spec = random_spec(rng);
        const auto g1 = Geometry<1>::periodic(32);
        const auto g2 = Geometry<2>::periodic(8);
        const LatticeState<1> a(g1, random_amplitudes(rng, g1.size())), b(g1, random_amplitudes(rng, g1.size()));
        const CoinlessWalk<1> w1(spec, g1);
        auto inner = [](const LatticeState<1>& x, const LatticeState<1>& y) {
            Complex s{};
            for (std::size_t k = 0; k < x.amplitudes().size(); ++k) s += std::conj(x.amplitudes()[k]) * y.amplitudes()[k];
            return s;
        };
        unitarity = std::max(unitarity, std::abs(inner(w1.step(a), w1.step(b)) - inner(a, b)));
        const LatticeState<2> c(g2, random_amplitudes(rng, g2.size()));
        unitarity = std::max(unitarity, std::abs(CoinlessWalk<2>(TessellationSpec2D{}, g2).step(c).norm_squared() - 1.0));

        for (Which which : {Which::U0, Which::U1}) {
            std::vector<Complex> v(a.amplitudes().begin(), a.amplitudes().end());
            const auto refl = build_reflection(spec, which, g1);
            refl.apply(v);
            refl.apply(v);
            for (std::size_t k = 0; k < v.size(); ++k) involution = std::max(involution, std::abs(v[k] - a.amplitudes()[k]));
            std::vector<Complex> u(c.amplitudes().begin(), c.amplitudes().end());
            const auto r2 = build_reflection(TessellationSpec2D{}, which, g2);
            r2.apply(u);
            r2.apply(u);
            for (std::size_t k = 0; k < u.size(); ++k) involution = std::max(involution, std::abs(u[k] - c.amplitudes()[k]));
        }

        const int t = 1 + i % 20;
        for (const auto& [x, p] : probability_distribution(evolve(InitialCondition<1>::localized(), spec, t)))
            locality_violations += (x[0] < -2 * t || x[0] > 2 * t) && p > 1e-14;
        if (i % 10 == 0) {
            for (const auto& [x, p] : probability_distribution(evolve(InitialCondition<2>::localized(), TessellationSpec2D{}, t / 4 + 1)))
                locality_violations += (std::abs(x[0]) > 2 * (t / 4 + 1) || std::abs(x[1]) > 2 * (t / 4 + 1)) && p > 1e-14;
        }

        std::uniform_real_distribution<double> kd(-pi, pi);
        const double k = kd(rng), l = kd(rng);
        const auto op1 = reduced_operator_1d(spec, k);
        const auto es1 = eigensystem_1d(op1);
        const auto op2 = reduced_operator_2d(k, l);
        const auto es2 = eigensystem_2d(op2);
        for (int j = 0; j < 2; ++j)
            eig = std::max(eig, (op1.matrix() * es1.vectors.col(j) - es1.eigenvalue(j) * es1.vectors.col(j)).norm());
        for (int j = 0; j < 4; ++j)
            eig = std::max(eig, (op2.m * es2.vectors.col(j) - es2.eigenvalue(j) * es2.vectors.col(j)).norm());
        eig = std::max(eig, (es2.vectors.adjoint() * es2.vectors - Block<2>::Identity()).norm());

        StaggeredFourier<1> f1(g1);
        const auto back1 = f1.inverse(f1.forward(a.amplitudes()));
        for (std::size_t s = 0; s < back1.size(); ++s) fourier = std::max(fourier, std::abs(back1[s] - a.amplitudes()[s]));
        StaggeredFourier<2> f2(g2);
        const auto back2 = f2.inverse(f2.forward(c.amplitudes()));
        for (std::size_t s = 0; s < back2.size(); ++s) fourier = std::max(fourier, std::abs(back2[s] - c.amplitudes()[s]));
    }
    r.measurements.push_back(at_most("unitarity_defect", "property", unitarity, 0.0, 1e-12));
    r.measurements.push_back(at_most("reflection_square_defect", "property", involution, 0.0, 1e-12));
    r.measurements.push_back(absolute("locality_violations", "property", locality_violations, 0.0, 0.0));
    r.measurements.push_back(at_most("eigen_residual", "property", eig, 0.0, 1e-12));
    r.measurements.push_back(at_most("fourier_roundtrip_defect", "property", fourier, 0.0, 1e-12));
    r.measurements.push_back(at_least("cases_per_property", "property", cases, 100));
    return r;
}

struct CheckEntry {
    const char* id;
    std::function<CheckResult(const VerifyOptions&)> run;
};

inline const std::vector<CheckEntry>& verification_checks() {
    static const std::vector<CheckEntry> checks{
        {"ballistic", check_ballistic},
        {"max-variance-1d", check_max_variance_1d},
        {"variance-surface", check_variance_surface},
        {"phase-independence", check_phase_independence},
        {"msd-2d", check_msd_2d},
        {"moments-2d", check_moments_2d},
        {"momentum-crosspath", check_momentum_crosspath},
        {"hadamard", check_hadamard},
        {"grover", check_grover},
        {"optimizer", check_optimizer},
        {"properties", check_properties},
    };
    return checks;
}

/// Runs one check by id and records its wall-clock time.
inline CheckResult run_check(const std::string& id, const VerifyOptions& o = {}) {
    for (const auto& c : verification_checks()) {
        if (id != c.id) continue;
        const auto start = std::chrono::steady_clock::now();
        auto r = c.run(o);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return r;
    }
    throw ConfigError("unknown check '" + id + "'");
}

inline std::vector<CheckResult> run_checks(const std::vector<std::string>& ids, const VerifyOptions& o = {}) {
    std::vector<CheckResult> out;
    if (ids.empty()) {
        for (const auto& c : verification_checks()) out.push_back(run_check(c.id, o));
    } else {
        for (const auto& id : ids) out.push_back(run_check(id, o));
    }
    return out;
}

}  // namespace cqw
