#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "cqw/momentum.hpp"
#include "oracles.hpp"

using namespace cqw;

namespace {

TessellationSpec1D random_spec(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ang(0.0, pi), ph(0.0, 2 * pi);
    return {ang(rng), ph(rng), ang(rng), ph(rng)};
}

template <int Dim>
double unitarity_defect(const Block<Dim>& u) {
    return (u.adjoint() * u - Block<Dim>::Identity()).norm();
}

template <int Dim>
double residual(const Block<Dim>& u, const EigenSystem<Dim>& es, int j) {
    return (u * es.vectors.col(j) - es.eigenvalue(j) * es.vectors.col(j)).norm();
}

// Sorted eigenphases of a matrix from the oracle eigensolver.
std::vector<double> sorted_phases(const Eigen::MatrixXcd& m) {
    const auto ev = oracle::eigenvalues(m);
    std::vector<double> p;
    for (int i = 0; i < ev.size(); ++i) p.push_back(std::arg(ev[i]));
    std::sort(p.begin(), p.end());
    return p;
}

// Compares eigenvalue multisets on the unit circle by greedy matching.
double spectrum_distance(const Eigen::VectorXcd& a, std::vector<Complex> b) {
    double worst = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        auto it = std::min_element(b.begin(), b.end(), [&](Complex x, Complex y) { return std::abs(x - a[i]) < std::abs(y - a[i]); });
        worst = std::max(worst, std::abs(*it - a[i]));
        b.erase(it);
    }
    return worst;
}

}  // namespace

TEST(ReducedOperator1D, BallisticPointIsIdentityAtZeroMomentum) {
    auto op = reduced_operator_1d({pi / 2, 0, pi / 2, 0}, 0.0);
    EXPECT_NEAR(std::abs(op.A - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(op.B), 0.0, 1e-15);
    EXPECT_NEAR(op.theta(), 0.0, 1e-7);
}

TEST(ReducedOperator1D, AlphaZeroEntries) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (int i = 0; i < 100; ++i) {
        const double beta = std::abs(u(rng)), phi2 = u(rng), k = u(rng);
        auto op = reduced_operator_1d({0.0, u(rng), beta, phi2}, k);
        EXPECT_NEAR(std::abs(op.A + std::cos(beta)), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(op.B - std::polar(std::sin(beta), -(k + phi2))), 0.0, 1e-15);
        EXPECT_NEAR(std::norm(op.A) + std::norm(op.B), 1.0, 1e-14);
    }
}

TEST(ReducedOperator1D, MatchesProjectionOracle) {
    const int L = 16;
    const double k = pi / 4;  // k_2 on a 16-site ring
    auto u = oracle::propagator_1d(pi / 3, 0, pi / 3, 0, L);
    auto block = oracle::project_1d(u, L, k);
    auto op = reduced_operator_1d({pi / 3, 0, pi / 3, 0}, k);
    EXPECT_LT((block - Eigen::MatrixXcd(op.matrix())).norm(), 1e-12);
}

TEST(ReducedOperator1D, MatchesProjectionOracleForRandomSpecs) {
    std::mt19937_64 rng(11);
    const int L = 12;
    for (int i = 0; i < 100; ++i) {
        const auto s = random_spec(rng);
        auto u = oracle::propagator_1d(s.alpha, s.phi1, s.beta, s.phi2, L);
        const double k = 2 * pi * (i % (L / 2)) / L;
        auto block = oracle::project_1d(u, L, k);
        ASSERT_LT((block - Eigen::MatrixXcd(reduced_operator_1d(s, k).matrix())).norm(), 1e-12) << "trial " << i;
    }
}

TEST(EigenSystem1D, DegenerateBlockUsesStandardBasis) {
    auto es = eigensystem_1d(reduced_operator_1d({pi / 2, 0, pi / 2, 0}, 0.0));
    EXPECT_FALSE(es.closed_form);
    EXPECT_NEAR(es.phases[0], 0.0, 1e-7);
    EXPECT_NEAR(es.phases[1], 0.0, 1e-7);
    EXPECT_LT((es.vectors - Block<1>::Identity()).norm(), 1e-12);
}

TEST(EigenSystem1D, PhasesMatchGenericSolver) {
    auto op = reduced_operator_1d({pi / 3, 0, pi / 3, 0}, pi / 4);
    auto es = eigensystem_1d(op);
    EXPECT_TRUE(es.closed_form);
    std::vector<double> ours(es.phases.begin(), es.phases.end());
    std::sort(ours.begin(), ours.end());
    auto ref = sorted_phases(op.matrix());
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(ours[j], ref[j], 1e-12);
}

TEST(EigenSystem1D, ResidualsAndOrthonormality) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> kd(-pi, pi);
    int closed = 0;
    for (int i = 0; i < 500; ++i) {
        const auto op = reduced_operator_1d(random_spec(rng), kd(rng));
        const auto es = eigensystem_1d(op);
        closed += es.closed_form;
        EXPECT_NEAR(es.phases[0], op.theta(), 1e-12);
        EXPECT_NEAR(es.phases[1], -op.theta(), 1e-12);
        for (int j = 0; j < 2; ++j) ASSERT_LT(residual<1>(op.matrix(), es, j), 1e-12);
        ASSERT_LT((es.vectors.adjoint() * es.vectors - Block<1>::Identity()).norm(), 1e-12);
        ASSERT_LT((es.reconstruct() - op.matrix()).norm(), 1e-12);
    }
    EXPECT_GT(closed, 400);
}

TEST(EigenSystem1D, FallbackNearBandEdge) {
    // theta ~ 1e-8: closed-form normalization would divide by ~1e-16.
    const TessellationSpec1D s{pi / 2, 0, pi / 2, 0};
    for (double k : {1e-8, -3e-9, pi / 2 + 1e-8}) {
        const auto op = reduced_operator_1d(s, k);
        const auto es = eigensystem_1d(op);
        EXPECT_FALSE(es.closed_form);
        for (int j = 0; j < 2; ++j) EXPECT_LT(residual<1>(op.matrix(), es, j), 1e-12);
        EXPECT_LT((es.reconstruct() - op.matrix()).norm(), 1e-12);
    }
}

TEST(Dispersion1D, BallisticGroupVelocity) {
    const TessellationSpec1D s{pi / 2, 0, pi / 2, 0};
    for (double k : {0.1, 0.4, 1.2, -0.7, 2.0}) {
        EXPECT_NEAR(std::abs(dispersion_derivative_1d(reduced_operator_1d(s, k))), 2.0, 1e-12) << "k = " << k;
    }
}

TEST(Dispersion1D, FlatBandAtAlphaZero) {
    for (double k : {0.1, 0.4, 1.2, -0.7, 2.0}) {
        EXPECT_EQ(dispersion_derivative_1d(reduced_operator_1d({0.0, 0.3, 1.0, 0.5}, k)), 0.0);
    }
}

TEST(Dispersion1D, MatchesFiniteDifference) {
    const TessellationSpec1D s{pi / 3, 0, pi / 3, 0};
    auto theta = [&](double k) { return reduced_operator_1d(s, k).theta(); };
    EXPECT_NEAR(dispersion_derivative_1d(reduced_operator_1d(s, 0.7)), oracle::derivative(theta, 0.7), 1e-6);

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> kd(-pi, pi);
    int checked = 0;
    while (checked < 100) {
        const auto spec = random_spec(rng);
        const double k = kd(rng);
        const auto op = reduced_operator_1d(spec, k);
        if (std::sin(op.theta()) < 1e-2) continue;
        auto th = [&](double q) { return reduced_operator_1d(spec, q).theta(); };
        ASSERT_NEAR(dispersion_derivative_1d(op), oracle::derivative(th, k), 1e-6);
        ++checked;
    }
}

TEST(Dispersion1D, BandEdgeThrows) {
    EXPECT_THROW(dispersion_derivative_1d(reduced_operator_1d({pi / 2, 0, pi / 2, 0}, 0.0)), BandEdgeError);
}

TEST(Dispersion1D, ThetaIsEvenWhenPhasesCancel) {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 100; ++i) {
        auto s = random_spec(rng);
        s.phi2 = -s.phi1;
        for (int j = 0; j < 32; ++j) {
            const double k = -pi + 2 * pi * (j + 0.3) / 32;
            ASSERT_NEAR(reduced_operator_1d(s, k).theta(), reduced_operator_1d(s, -k).theta(), 1e-12);
        }
    }
}

TEST(ReducedOperator2D, ZeroMomentumIsIdentity) {
    EXPECT_LT((reduced_operator_2d(0, 0).matrix() - Block<2>::Identity()).norm(), 1e-15);
}

TEST(ReducedOperator2D, HalfPiMomentumHasSpectrumPlusMinusOne) {
    const auto op = reduced_operator_2d(pi / 2, 0);
    EXPECT_LT(unitarity_defect<2>(op.matrix()), 1e-14);
    EXPECT_NEAR(op.cos_theta(), -1.0, 1e-15);
    EXPECT_LT(spectrum_distance(oracle::eigenvalues(op.matrix()), {1, 1, -1, -1}), 1e-7);
}

TEST(ReducedOperator2D, MatchesProjectionOracle) {
    // The oracle needs momenta on the lattice grid; check 0.3/1.1 via the
    // nearest 2 pi j / L on a fine ring and the exact value via a 2x2 grid.
    const int L = 12;
    const auto u = oracle::propagator_2d(L);
    for (int jk = 0; jk < L / 2; ++jk) {
        for (int jl = 0; jl < L / 2; ++jl) {
            const double k = 2 * pi * jk / L, l = 2 * pi * jl / L;
            const auto block = oracle::project_2d(u, L, k, l);
            ASSERT_LT((block - Eigen::MatrixXcd(reduced_operator_2d(k, l).matrix())).norm(), 1e-12)
                << "k = " << k << " l = " << l;
        }
    }
}

TEST(ReducedOperator2D, OffGridMomentumMatchesPeriodicBlochOracle) {
    // Bloch oracle at arbitrary (k, l): the block e^{i q.(m'-m)} <m+b|U|m'+b'>
    // summed over neighbouring cells m' of a fixed cell m.
    const int L = 12;
    const auto u = oracle::propagator_2d(L);
    const double k = 0.3, l = 1.1;
    Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(4, 4);
    const int mx = 4, my = 4;
    for (int b = 0; b < 4; ++b) {
        const int x = mx + (b >> 1), y = my + (b & 1);
        for (int dx = -4; dx <= 4; dx += 2) {
            for (int dy = -4; dy <= 4; dy += 2) {
                for (int bp = 0; bp < 4; ++bp) {
                    const int xp = mx + dx + (bp >> 1), yp = my + dy + (bp & 1);
                    const Complex amp = u(x * L + y, xp * L + yp);
                    // <psi^b|U|psi^b'> with psi^b = sum e^{-i(m+b).q}|m+b>.
                    block(b, bp) += amp * std::polar(1.0, (x - xp) * k + (y - yp) * l);
                }
            }
        }
    }
    EXPECT_LT((block - Eigen::MatrixXcd(reduced_operator_2d(k, l).matrix())).norm(), 1e-12);
}

TEST(ReducedOperator2D, UnitaryWithExpectedSpectrum) {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> q(-pi, pi);
    for (int i = 0; i < 200; ++i) {
        const auto op = reduced_operator_2d(q(rng), q(rng));
        ASSERT_LT(unitarity_defect<2>(op.matrix()), 1e-14);
        const double th = op.theta();
        ASSERT_LT(spectrum_distance(oracle::eigenvalues(op.matrix()), {1, 1, std::polar(1.0, th), std::polar(1.0, -th)}), 1e-7);
    }
}

TEST(EigenSystem2D, ZeroMomentumFallsBackToStandardBasis) {
    const auto es = eigensystem_2d(reduced_operator_2d(0, 0));
    EXPECT_FALSE(es.closed_form);
    for (double p : es.phases) EXPECT_NEAR(p, 0.0, 1e-7);
    EXPECT_LT((es.vectors - Block<2>::Identity()).norm(), 1e-12);
}

TEST(EigenSystem2D, QuarterPiResiduals) {
    const auto op = reduced_operator_2d(pi / 4, pi / 4);
    EXPECT_NEAR(op.cos_theta(), -0.5, 1e-15);
    // k = l makes c+ vanish, so this momentum takes the fallback path.
    const auto es = eigensystem_2d(op);
    EXPECT_FALSE(es.closed_form);
    for (int j = 0; j < 4; ++j) EXPECT_LT(residual<2>(op.matrix(), es, j), 1e-12);
    EXPECT_NEAR(es.phases[0], 0.0, 1e-12);
    EXPECT_NEAR(es.phases[1], 0.0, 1e-12);
    EXPECT_NEAR(es.phases[2], -op.theta(), 1e-12);
    EXPECT_NEAR(es.phases[3], op.theta(), 1e-12);

    const auto off = reduced_operator_2d(pi / 4, 0.6);
    const auto es2 = eigensystem_2d(off);
    EXPECT_TRUE(es2.closed_form);
    for (int j = 0; j < 4; ++j) EXPECT_LT(residual<2>(off.matrix(), es2, j), 1e-12);
}

TEST(EigenSystem2D, OrthonormalOnGrid) {
    for (int i = 0; i < 32; ++i) {
        for (int j = 0; j < 32; ++j) {
            const double k = -pi + 2 * pi * i / 32, l = -pi + 2 * pi * j / 32;
            const auto op = reduced_operator_2d(k, l);
            const auto es = eigensystem_2d(op);
            ASSERT_LT((es.vectors * es.vectors.adjoint() - Block<2>::Identity()).norm(), 1e-12) << k << " " << l;
            ASSERT_LT((es.reconstruct() - op.matrix()).norm(), 1e-12) << k << " " << l;
            for (int c = 0; c < 4; ++c) ASSERT_LT(residual<2>(op.matrix(), es, c), 1e-12);
        }
    }
}

TEST(EigenSystem2D, ClosedFormInEveryQuadrant) {
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> q(-pi, pi);
    int closed = 0;
    for (int i = 0; i < 400; ++i) {
        const auto op = reduced_operator_2d(q(rng), q(rng));
        const auto es = eigensystem_2d(op);
        closed += es.closed_form;
        for (int c = 0; c < 4; ++c) ASSERT_LT(residual<2>(op.matrix(), es, c), 1e-12);
        ASSERT_LT((es.vectors.adjoint() * es.vectors - Block<2>::Identity()).norm(), 1e-12);
    }
    EXPECT_GT(closed, 380);
}

TEST(StaggeredFourier, RejectsZeroPadded) {
    EXPECT_THROW(StaggeredFourier<1>(Geometry<1>::padded(0, 0, 8)), GeometryError);
}

TEST(StaggeredFourier, BasisIsOrthonormalAndComplete) {
    std::mt19937_64 rng(17);
    for (int L : {4, 8, 14}) {
        auto g = Geometry<1>::periodic(L);
        StaggeredFourier<1> f(g);
        EXPECT_EQ(f.momentum_count(), static_cast<std::size_t>(L / 2));
        for (int i = 0; i < 100; ++i) {
            auto v = oracle::random_unit(rng, L);
            std::vector<Complex> amp(v.begin(), v.end());
            const auto red = f.forward(amp);
            double n = 0.0;
            for (const auto& r : red) n += r.squaredNorm();
            ASSERT_NEAR(n, 1.0, 1e-12);
            const auto back = f.inverse(red);
            for (int s = 0; s < L; ++s) ASSERT_LT(std::abs(back[s] - amp[s]), 1e-12);
        }
    }
    for (int L : {4, 6}) {
        auto g = Geometry<2>::periodic(L);
        StaggeredFourier<2> f(g);
        for (int i = 0; i < 100; ++i) {
            auto v = oracle::random_unit(rng, L * L);
            std::vector<Complex> amp(v.begin(), v.end());
            const auto back = f.inverse(f.forward(amp));
            for (int s = 0; s < L * L; ++s) ASSERT_LT(std::abs(back[s] - amp[s]), 1e-12);
        }
    }
}

TEST(StaggeredFourier, ForwardMatchesExplicitBasisVectors) {
    const int L = 10;
    auto g = Geometry<1>::periodic(L);
    StaggeredFourier<1> f(g);
    std::mt19937_64 rng(18);
    auto v = oracle::random_unit(rng, L);
    Eigen::VectorXcd psi(L);
    for (int s = 0; s < L; ++s) psi[s] = v[s];
    std::vector<Complex> amp(v.begin(), v.end());
    const auto red = f.forward(amp);
    for (std::size_t m = 0; m < f.momentum_count(); ++m) {
        for (int b = 0; b < 2; ++b) {
            const Complex ref = oracle::fourier_1d(L, f.momentum(m)[0], b).dot(psi);
            EXPECT_LT(std::abs(red[m][b] - ref), 1e-12);
        }
    }
}

TEST(EvolveMomentum, ZeroStepsIsIdentity) {
    std::mt19937_64 rng(19);
    auto v = oracle::random_unit(rng, 12);
    auto g = Geometry<1>::periodic(12);
    LatticeState<1> s(g, std::vector<Complex>(v.begin(), v.end()));
    const auto out = evolve_momentum(s, random_spec(rng), 0);
    for (int i = 0; i < 12; ++i) EXPECT_LT(std::abs(out.amplitudes()[i] - s.amplitudes()[i]), 1e-12);
}

TEST(EvolveMomentum, AgreesWithDirectEvolution1D) {
    const TessellationSpec1D s{pi / 3, 0, pi / 3, 0};
    const auto g = Geometry<1>::periodic(64);
    const auto init = InitialCondition<1>::localized();
    const auto direct = evolve(init, s, 50, g);
    const auto mom = evolve_momentum(init, s, 50, 64);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LT(std::abs(direct.amplitudes()[i] - mom.amplitudes()[i]), 1e-10);
}

TEST(EvolveMomentum, AgreesWithDirectEvolution2D) {
    const auto g = Geometry<2>::periodic(32);
    const auto init = InitialCondition<2>::cell(0.5, 0.5, 0.5, 0.5);
    const auto direct = evolve(init, TessellationSpec2D{}, 10, g);
    const auto mom = evolve_momentum(init, TessellationSpec2D{}, 10, 32);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LT(std::abs(direct.amplitudes()[i] - mom.amplitudes()[i]), 1e-10);
}

TEST(EvolveMomentum, MasterConsistencyRandomized) {
    std::mt19937_64 rng(20);
    for (int i = 0; i < 100; ++i) {
        const auto s = random_spec(rng);
        const int L = 2 * (3 + i % 8), t = 1 + i % 13;
        auto g = Geometry<1>::periodic(L);
        auto v = oracle::random_unit(rng, L);
        LatticeState<1> st(g, std::vector<Complex>(v.begin(), v.end()));
        const auto direct = CoinlessWalk<1>(s, g).evolve(st, t);
        const auto mom = evolve_momentum(st, s, t);
        for (int x = 0; x < L; ++x) ASSERT_LT(std::abs(direct.amplitudes()[x] - mom.amplitudes()[x]), 1e-10) << "trial " << i;
    }
    for (int i = 0; i < 20; ++i) {
        const int L = 2 * (2 + i % 4), t = 1 + i % 7;
        auto g = Geometry<2>::periodic(L);
        auto v = oracle::random_unit(rng, L * L);
        LatticeState<2> st(g, std::vector<Complex>(v.begin(), v.end()));
        const auto direct = CoinlessWalk<2>(TessellationSpec2D{}, g).evolve(st, t);
        const auto mom = evolve_momentum(st, TessellationSpec2D{}, t);
        for (int x = 0; x < L * L; ++x) ASSERT_LT(std::abs(direct.amplitudes()[x] - mom.amplitudes()[x]), 1e-10) << "trial " << i;
    }
}
