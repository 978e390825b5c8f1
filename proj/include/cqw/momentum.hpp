#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cqw/core.hpp"
#include "cqw/lattice.hpp"
#include "cqw/walk.hpp"

namespace cqw {

template <int Dim>
using Momentum = std::array<double, Dim>;

/// Eigen-decomposition U = V diag(e^{i phase}) V^dagger of a reduced operator.
template <int Dim>
struct EigenSystem {
    static constexpr int P = patch_size<Dim>;
    std::array<double, P> phases{};
    Block<Dim> vectors = Block<Dim>::Identity();
    bool closed_form = false;

    Complex eigenvalue(int j) const { return std::polar(1.0, phases[j]); }

    /// V diag(e^{i t phase}) V^dagger.
    Block<Dim> power(int t) const {
        Eigen::Matrix<Complex, P, 1> d;
        for (int j = 0; j < P; ++j) d[j] = std::polar(1.0, t * phases[j]);
        return vectors * d.asDiagonal() * vectors.adjoint();
    }

    Block<Dim> reconstruct() const { return power(1); }
};

/// Generic diagonalization of a unitary block. For normal matrices the complex
/// Schur form is diagonal, so the Schur vectors are an orthonormal eigenbasis.
template <int Dim>
EigenSystem<Dim> generic_eigensystem(const Block<Dim>& u) {
    EigenSystem<Dim> es;
    Block<Dim> off = u;
    off.diagonal().setZero();
    if (off.norm() < 1e-15) {
        for (int j = 0; j < EigenSystem<Dim>::P; ++j) es.phases[j] = std::arg(u(j, j));
        es.vectors.setIdentity();
        return es;
    }
    Eigen::ComplexSchur<Block<Dim>> schur(u);
    es.vectors = schur.matrixU();
    for (int j = 0; j < EigenSystem<Dim>::P; ++j) es.phases[j] = std::arg(schur.matrixT()(j, j));
    return es;
}

namespace detail {

/// Reorders fallback eigenpairs so that column j carries the eigenvalue closest
/// to e^{i target[j]}.
template <int Dim>
void order_by_targets(EigenSystem<Dim>& es, const std::array<double, patch_size<Dim>>& target) {
    constexpr int P = patch_size<Dim>;
    std::array<bool, P> used{};
    EigenSystem<Dim> out = es;
    for (int j = 0; j < P; ++j) {
        int best = -1;
        double best_d = 1e300;
        for (int i = 0; i < P; ++i) {
            if (used[i]) continue;
            const double d = std::abs(es.eigenvalue(i) - std::polar(1.0, target[j]));
            if (d < best_d) best_d = d, best = i;
        }
        used[best] = true;
        out.phases[j] = es.phases[best];
        out.vectors.col(j) = es.vectors.col(best);
    }
    es = out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// One dimension

/// Reduced operator [[A, -B*], [B, A*]] at momentum k.
struct ReducedOperator1D {
    double k = 0.0;
    Complex A;
    Complex B;
    TessellationSpec1D spec;

    Block<1> matrix() const {
        Block<1> m;
        m << A, -std::conj(B), B, std::conj(A);
        return m;
    }

    /// theta in [0, pi] with cos(theta) = Re A. Uses sin(theta)^2 = Im(A)^2 + |B|^2
    /// so that theta stays accurate near 0 and pi.
    double theta() const { return std::atan2(std::sqrt(A.imag() * A.imag() + std::norm(B)), A.real()); }
};

inline ReducedOperator1D reduced_operator_1d(const TessellationSpec1D& s, double k) {
    const double ca = std::cos(s.alpha), sa = std::sin(s.alpha);
    const double cb = std::cos(s.beta), sb = std::sin(s.beta);
    ReducedOperator1D op;
    op.k = k;
    op.spec = s;
    op.A = -ca * cb + sa * sb * std::polar(1.0, 2 * k + s.phi1 + s.phi2);
    op.B = sa * cb * std::polar(1.0, k + s.phi1) + ca * sb * std::polar(1.0, -(k + s.phi2));
    return op;
}

inline constexpr double closed_form_threshold = 1e-6;

/// Eigenpairs (e^{+i theta}, v+), (e^{-i theta}, v-) with
/// v+- = (-B*, e^{+-i theta} - A) / sqrt(C+-).
inline EigenSystem<1> eigensystem_1d(const ReducedOperator1D& op) {
    const double theta = op.theta();
    const double st = std::sin(theta);
    const Complex diff = op.A - std::conj(op.A);  // 2i Im A
    const double cp = (st * (2 * st + I * diff)).real();
    const double cm = (st * (2 * st - I * diff)).real();
    if (st < closed_form_threshold || cp < closed_form_threshold || cm < closed_form_threshold) {
        EigenSystem<1> es = generic_eigensystem<1>(op.matrix());
        detail::order_by_targets<1>(es, {theta, -theta});
        return es;
    }
    EigenSystem<1> es;
    es.closed_form = true;
    es.phases = {theta, -theta};
    es.vectors(0, 0) = -std::conj(op.B);
    es.vectors(1, 0) = std::polar(1.0, theta) - op.A;
    es.vectors(0, 1) = -std::conj(op.B);
    es.vectors(1, 1) = std::polar(1.0, -theta) - op.A;
    es.vectors.col(0) /= std::sqrt(cp);
    es.vectors.col(1) /= std::sqrt(cm);
    return es;
}

inline constexpr double band_edge_threshold = 1e-9;

/// d theta / dk = (A - A*) / (i sin theta).
inline double dispersion_derivative_1d(const ReducedOperator1D& op) {
    const double st = std::sin(op.theta());
    if (st < band_edge_threshold)
        throw BandEdgeError("sin(theta) = " + std::to_string(st) + " at k = " + std::to_string(op.k));
    return ((op.A - std::conj(op.A)) / (I * st)).real();
}

// ---------------------------------------------------------------------------
// Two dimensions

struct ReducedOperator2D {
    double k = 0.0;
    double l = 0.0;
    Block<2> m;

    const Block<2>& matrix() const { return m; }
    double cos_theta() const {
        const double c = std::cos(k) * std::cos(l);
        return 2 * c * c - 1;
    }
    /// theta in [0, pi]; cos(theta) = 2p^2 - 1 with p = cos k cos l, so theta = 2 arccos|p|.
    double theta() const {
        const double p = std::abs(std::cos(k) * std::cos(l));
        return 2 * std::atan2(std::sqrt((1 - p) * (1 + p)), p);
    }
};

/// 4x4 reduced operator in the component order (0,0), (0,1), (1,0), (1,1).
inline ReducedOperator2D reduced_operator_2d(double k, double l) {
    const double ck = std::cos(k), sk = std::sin(k), cl = std::cos(l), sl = std::sin(l);
    const Complex ek = std::polar(1.0, k), el = std::polar(1.0, l);
    ReducedOperator2D op;
    op.k = k;
    op.l = l;
    // clang-format off
    op.m <<
        ek * el * ck * cl,              I * ek * sk * cl,              I * el * ck * sl,              sk * sl,
        I * ek * sk * cl,               ek * std::conj(el) * ck * cl,  -sk * sl,                      -I * std::conj(el) * ck * sl,
        I * el * ck * sl,               -sk * sl,                      std::conj(ek) * el * ck * cl,  -I * std::conj(ek) * sk * cl,
        sk * sl,                        -I * std::conj(el) * ck * sl,  -I * std::conj(ek) * sk * cl,  std::conj(ek * el) * ck * cl;
    // clang-format on
    return op;
}

/// Eigenvectors w0, w1 (eigenvalue 1), w2 (e^{-i theta}) and w3 (e^{+i theta}).
/// The closed forms hold for sin k, sin l > 0; other quadrants flip the signs
/// of components 1, 2, 3 by sgn(sin k), sgn(sin l) and their product.
inline EigenSystem<2> eigensystem_2d(const ReducedOperator2D& op) {
    const double k = op.k, l = op.l;
    const double ck = std::cos(k), sk = std::sin(k), cl = std::cos(l), sl = std::sin(l);
    const double prod = ck * cl;
    const double theta = op.theta();
    // 1 -+ cos(k - l) in half-angle form to avoid cancellation near k = l.
    const double half = (k - l) / 2;
    const double cplus = std::sqrt(std::max(0.0, (1 + prod) * 2 * std::sin(half) * std::sin(half)));
    const double cminus = std::sqrt(std::max(0.0, (1 - prod) * 2 * std::cos(half) * std::cos(half)));
    const double c = std::sqrt(std::max(0.0, 1 - prod * prod));

    const double t = closed_form_threshold;
    if (cplus < t || cminus < t || c < t || std::abs(prod) < t || std::abs(sk) < t || std::abs(sl) < t) {
        EigenSystem<2> es = generic_eigensystem<2>(op.m);
        detail::order_by_targets<2>(es, {0.0, 0.0, -theta, theta});
        return es;
    }

    EigenSystem<2> es;
    es.closed_form = true;
    es.phases = {0.0, 0.0, -theta, theta};
    // w0 = (sin(k-l), sl-sk, sl-sk, sin(k-l)) / 2c+ and
    // w1 = (sin(l-k), sl+sk, -sl-sk, sin(k-l)) / 2c-, with the common factors
    // 2 sin h and 2 cos h (h = (k-l)/2, g = (k+l)/2) cancelled analytically.
    const double chh = std::cos(half), shh = std::sin(half);
    const double g = (k + l) / 2, cg = std::cos(g), sg = std::sin(g);
    Eigen::Vector4d w0, w1;
    w0 << chh, -cg, -cg, chh;
    w1 << -shh, sg, -sg, shh;
    es.vectors.col(0) = (detail::sign_or_one(shh) * w0 / std::sqrt(2 * (1 + prod))).cast<Complex>();
    es.vectors.col(1) = (detail::sign_or_one(chh) * w1 / std::sqrt(2 * (1 - prod))).cast<Complex>();

    const double qk = detail::sign_or_one(sk), ql = detail::sign_or_one(sl);
    // sqrt(c - x) with c^2 - x^2 = sq known exactly, avoiding cancellation.
    auto r = [&](double x, double sq) { return std::sqrt(std::max(0.0, x > 0 ? sq / (c + x) : c - x)); };
    auto moving = [&](double eps) {
        const double a = eps * sk * cl, b = eps * ck * sl;
        Eigen::Vector4d w;
        w << -eps * r(a, sl * sl) * r(b, sk * sk),
            qk * r(a, sl * sl) * r(-b, sk * sk),
            ql * r(-a, sl * sl) * r(b, sk * sk),
            qk * ql * eps * r(-a, sl * sl) * r(-b, sk * sk);
        return (w / (2 * c)).cast<Complex>().eval();
    };
    const double eps = detail::sign_or_one(prod);
    es.vectors.col(2) = moving(eps);
    es.vectors.col(3) = moving(-eps);
    return es;
}

// ---------------------------------------------------------------------------
// Dimension-generic access used by the momentum-space evolution

inline Block<1> reduced_matrix(const TessellationSpec1D& s, const Momentum<1>& q) {
    return reduced_operator_1d(s, q[0]).matrix();
}
inline Block<2> reduced_matrix(const TessellationSpec2D&, const Momentum<2>& q) {
    return reduced_operator_2d(q[0], q[1]).matrix();
}
inline EigenSystem<1> eigensystem(const TessellationSpec1D& s, const Momentum<1>& q) {
    return eigensystem_1d(reduced_operator_1d(s, q[0]));
}
inline EigenSystem<2> eigensystem(const TessellationSpec2D&, const Momentum<2>& q) {
    return eigensystem_2d(reduced_operator_2d(q[0], q[1]));
}

/// Discrete staggered Fourier transform on a periodic lattice.
///
/// For L sites per axis the momenta are k_j = 2 pi j / L, j = 0 .. L/2 - 1; the
/// basis vector for momentum q and component beta is
///   (2/L)^{Dim/2} sum_{m even} e^{-i (m + beta) . q} |m + beta>.
template <int Dim>
class StaggeredFourier {
public:
    static constexpr int P = patch_size<Dim>;
    using Reduced = Eigen::Matrix<Complex, P, 1>;

    explicit StaggeredFourier(const Geometry<Dim>& geom) : geom_(geom) {
        geom_.validate();
        if (geom_.boundary != Boundary::periodic) throw GeometryError("staggered Fourier transform needs a periodic lattice");
        std::size_t cells = 1;
        for (int a = 0; a < Dim; ++a) {
            cells_[a] = geom_.extent[a] / 2;
            cells *= static_cast<std::size_t>(cells_[a]);
            // phase[a][j][x] = e^{i x k_j}
            phase_[a].assign(static_cast<std::size_t>(cells_[a]) * geom_.extent[a], Complex{});
            for (int j = 0; j < cells_[a]; ++j)
                for (int x = 0; x < geom_.extent[a]; ++x)
                    phase_[a][static_cast<std::size_t>(j) * geom_.extent[a] + x] =
                        std::polar(1.0, 2 * pi * j * x / geom_.extent[a]);
        }
        n_cells_ = cells;
        scale_ = 1.0 / std::sqrt(static_cast<double>(cells));
    }

    std::size_t momentum_count() const { return n_cells_; }

    Momentum<Dim> momentum(std::size_t idx) const {
        Momentum<Dim> q{};
        for (int a = Dim - 1; a >= 0; --a) {
            const auto j = idx % static_cast<std::size_t>(cells_[a]);
            idx /= static_cast<std::size_t>(cells_[a]);
            q[a] = 2 * pi * static_cast<double>(j) / geom_.extent[a];
        }
        return q;
    }

    /// Reduced vectors <psi_q^beta | psi> for every momentum.
    std::vector<Reduced> forward(std::span<const Complex> amp) const {
        std::vector<Reduced> out(n_cells_, Reduced::Zero());
        for (std::size_t site = 0; site < amp.size(); ++site) {
            if (amp[site] == Complex{}) continue;
            const auto x = logical_unwrapped(site);
            const int beta = component(x);
            for (std::size_t m = 0; m < n_cells_; ++m) out[m][beta] += phase(m, x) * amp[site];
        }
        for (auto& v : out) v *= scale_;
        return out;
    }

    std::vector<Complex> inverse(const std::vector<Reduced>& red) const {
        std::vector<Complex> amp(geom_.size());
        for (std::size_t site = 0; site < amp.size(); ++site) {
            const auto x = logical_unwrapped(site);
            const int beta = component(x);
            Complex acc{};
            for (std::size_t m = 0; m < n_cells_; ++m) acc += std::conj(phase(m, x)) * red[m][beta];
            amp[site] = acc * scale_;
        }
        return amp;
    }

private:
    Coord<Dim> logical_unwrapped(std::size_t site) const {
        auto x = geom_.storage_of(site);
        for (int a = 0; a < Dim; ++a) x[a] -= geom_.origin[a];
        return x;
    }

    static int component(const Coord<Dim>& x) {
        int beta = 0;
        for (int a = 0; a < Dim; ++a) beta = 2 * beta + (((x[a] % 2) + 2) % 2);
        return beta;
    }

    Complex phase(std::size_t m, const Coord<Dim>& x) const {
        Complex p{1.0, 0.0};
        for (int a = Dim - 1; a >= 0; --a) {
            const auto j = m % static_cast<std::size_t>(cells_[a]);
            m /= static_cast<std::size_t>(cells_[a]);
            const int L = geom_.extent[a];
            const int xs = ((x[a] % L) + L) % L;
            p *= phase_[a][j * L + xs];
        }
        return p;
    }

    Geometry<Dim> geom_;
    Coord<Dim> cells_{};
    std::size_t n_cells_ = 0;
    double scale_ = 1.0;
    std::array<std::vector<Complex>, Dim> phase_;
};

/// Momentum-space evolution: transform, apply U_q^t = V D^t V^dagger per
/// momentum, transform back.
template <class Spec>
LatticeState<Spec::dim> evolve_momentum(const LatticeState<Spec::dim>& initial, const Spec& spec, int t) {
    constexpr int Dim = Spec::dim;
    if (t < 0) throw ConfigError("negative step count");
    StaggeredFourier<Dim> fourier(initial.geometry());
    auto red = fourier.forward(initial.amplitudes());
    for (std::size_t m = 0; m < red.size(); ++m) {
        const auto es = eigensystem(spec, fourier.momentum(m));
        red[m] = es.power(t) * red[m];
    }
    return LatticeState<Dim>(initial.geometry(), fourier.inverse(red));
}

template <class Spec>
LatticeState<Spec::dim> evolve_momentum(const InitialCondition<Spec::dim>& init, const Spec& spec, int t, int L) {
    const auto geom = Geometry<Spec::dim>::periodic(L);
    return evolve_momentum(LatticeState<Spec::dim>(geom, init), spec, t);
}

}  // namespace cqw
