#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cqw/core.hpp"
#include "cqw/lattice.hpp"
#include "cqw/moments.hpp"
#include "cqw/walk.hpp"

namespace cqw {

/// Coin (x) position state; amplitude of (coin j, site s) at j * sites + s.
template <int Dim>
class CoinedState {
public:
    static constexpr int C = patch_size<Dim>;

    CoinedState() = default;
    explicit CoinedState(Geometry<Dim> geom) : geom_(geom), amp_(C * geom.size()) { geom_.validate(); }

    /// coin (x) |site>, coin given as C amplitudes.
    CoinedState(Geometry<Dim> geom, const std::array<Complex, C>& coin, const Coord<Dim>& site = {})
        : CoinedState(geom) {
        double n = 0.0;
        for (const auto& c : coin) n += std::norm(c);
        if (std::abs(n - 1.0) > 1e-12) throw NormError("coin state has squared norm " + std::to_string(n));
        const auto s = geom_.index(site);
        for (int j = 0; j < C; ++j) amp_[j * geom_.size() + s] = coin[j];
    }

    const Geometry<Dim>& geometry() const { return geom_; }
    std::span<const Complex> amplitudes() const { return amp_; }
    std::span<Complex> amplitudes() { return amp_; }

    Complex at(int coin, const Coord<Dim>& x) const {
        return geom_.contains(x) ? amp_[coin * geom_.size() + geom_.index(x)] : Complex{};
    }

    double norm_squared() const {
        double n = 0.0;
        for (const auto& a : amp_) n += std::norm(a);
        return n;
    }

private:
    Geometry<Dim> geom_{};
    std::vector<Complex> amp_;
};

/// Walk S (coin (x) I): coin everywhere, then a coin-conditioned unit shift.
template <int Dim>
class CoinedWalk {
public:
    static constexpr int C = patch_size<Dim>;

    CoinedWalk(Block<Dim> coin, std::array<Coord<Dim>, C> shifts) : coin_(std::move(coin)), shifts_(shifts) {}

    const Block<Dim>& coin() const { return coin_; }
    const std::array<Coord<Dim>, C>& shifts() const { return shifts_; }

    CoinedState<Dim> step(const CoinedState<Dim>& in) const {
        const auto& g = in.geometry();
        const std::size_t n = g.size();
        const auto src = in.amplitudes();
        CoinedState<Dim> out(g);
        auto dst = out.amplitudes();
        Eigen::Matrix<Complex, C, 1> v;
        for (std::size_t s = 0; s < n; ++s) {
            bool any = false;
            for (int j = 0; j < C; ++j) {
                v[j] = src[j * n + s];
                any = any || v[j] != Complex{};
            }
            if (!any) continue;
            v = coin_ * v;
            const auto pos = g.storage_of(s);
            for (int j = 0; j < C; ++j) {
                if (v[j] == Complex{}) continue;
                Coord<Dim> p{};
                bool inside = true;
                for (int a = 0; a < Dim; ++a) {
                    p[a] = pos[a] + shifts_[j][a];
                    if (g.boundary == Boundary::periodic) {
                        p[a] = ((p[a] % g.extent[a]) + g.extent[a]) % g.extent[a];
                    } else if (p[a] < 0 || p[a] >= g.extent[a]) {
                        inside = false;
                    }
                }
                if (!inside) {
                    if (std::abs(v[j]) > locality_tolerance) throw BoundaryError("coined walker left the zero-padded lattice");
                    continue;
                }
                dst[j * n + g.flat(p)] += v[j];
            }
        }
        return out;
    }

    CoinedState<Dim> evolve(CoinedState<Dim> s, int t) const {
        if (t < 0) throw ConfigError("negative step count");
        for (int i = 0; i < t; ++i) s = step(s);
        return s;
    }

private:
    Block<Dim> coin_;
    std::array<Coord<Dim>, C> shifts_;
};

/// Probability per site, summed over the coin.
template <int Dim>
Distribution<Dim> probability_distribution(const CoinedState<Dim>& state) {
    const auto& g = state.geometry();
    const std::size_t n = g.size();
    const auto amp = state.amplitudes();
    Distribution<Dim> out;
    for (std::size_t s = 0; s < n; ++s) {
        double p = 0.0;
        for (int j = 0; j < CoinedState<Dim>::C; ++j) p += std::norm(amp[j * n + s]);
        if (p >= 1e-16) out[g.logical(s)] += p;
    }
    return out;
}

/// Zero-padded lattice for t coined steps from the origin (reach 1 per step).
template <int Dim>
Geometry<Dim> coined_geometry_for(int t) {
    return Geometry<Dim>::padded(0, 0, t + locality_guard + 2);
}

// ---------------------------------------------------------------------------
// Hadamard walk on the line

inline Block<1> hadamard_coin() {
    Block<1> h;
    h << 1, 1, 1, -1;
    return h / std::sqrt(2.0);
}

/// Coin 0 moves to x+1, coin 1 to x-1.
inline CoinedWalk<1> hadamard_walk() { return CoinedWalk<1>(hadamard_coin(), {Coord<1>{1}, Coord<1>{-1}}); }

inline CoinedState<1> hadamard_step(const CoinedState<1>& s) { return hadamard_walk().step(s); }

/// (cos(alpha/2)|0> + e^{i phi} sin(alpha/2)|1>) |x=0>.
inline CoinedState<1> hadamard_initial(double alpha, double phi, const Geometry<1>& g) {
    return CoinedState<1>(g, {Complex{std::cos(alpha / 2), 0.0}, std::polar(std::sin(alpha / 2), phi)});
}

inline CoinedState<1> hadamard_evolve(double alpha, double phi, int t) {
    return hadamard_walk().evolve(hadamard_initial(alpha, phi, coined_geometry_for<1>(t)), t);
}

struct HadamardCoefficients {
    double first = 0.0;   // <x>/t
    double second = 0.0;  // <x^2>/t^2

    double sigma() const { return std::sqrt(std::max(0.0, second - first * first)); }
};

/// <x> = D1 (cos alpha + sin alpha cos phi) t, <x^2> = D1 t^2.
inline HadamardCoefficients hadamard_moment_coefficients(double alpha, double phi) {
    return {D1 * (std::cos(alpha) + std::sin(alpha) * std::cos(phi)), D1};
}

// ---------------------------------------------------------------------------
// Grover walk on the square lattice

inline Block<2> grover_coin() { return Block<2>::Constant(0.5) - Block<2>::Identity(); }

/// S|i,j>|x,y> = |i,j>|x + (-1)^j (1 - delta_ij), y + (-1)^j delta_ij>, coin
/// index 2i + j.
inline std::array<Coord<2>, 4> grover_shifts() {
    std::array<Coord<2>, 4> s{};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const int sign = j == 0 ? 1 : -1;
            s[2 * i + j] = i == j ? Coord<2>{0, sign} : Coord<2>{sign, 0};
        }
    }
    return s;
}

inline CoinedWalk<2> grover_walk() { return CoinedWalk<2>(grover_coin(), grover_shifts()); }

inline CoinedState<2> grover_step(const CoinedState<2>& s) { return grover_walk().step(s); }

inline CoinedState<2> grover_initial(const CellState& c, const Geometry<2>& g) {
    return CoinedState<2>(g, {c.a, c.b, c.c, c.d});
}

inline CoinedState<2> grover_evolve(const CellState& c, int t) {
    return grover_walk().evolve(grover_initial(c, coined_geometry_for<2>(t)), t);
}

struct GroverCoefficients {
    double x1 = 0.0, y1 = 0.0;  // <x>/t, <y>/t
    double x2 = 0.0, y2 = 0.0;  // <x^2>/t^2, <y^2>/t^2

    double sigma2_total() const { return x2 + y2 - x1 * x1 - y1 * y1; }
    double sigma() const { return std::sqrt(std::max(0.0, sigma2_total())); }
};

/// Leading moment coefficients of the Grover walk from coin a|00> + b|01> +
/// c|10> + d|11> at the origin. The x drift carries the sign produced by the
/// shift above (coin 01 moves to -x).
inline GroverCoefficients grover_moment_coefficients(const CellState& s) {
    s.require_unit();
    const Complex a = s.a, b = s.b, c = s.c, d = s.d;
    const double nb = std::norm(b), nc = std::norm(c), na = std::norm(a), nd = std::norm(d);
    GroverCoefficients g;
    g.x1 = -(D2 / 2) * (nb - nc - ((a + d) * std::conj(b - c)).real());
    g.y1 = (D2 / 2) * (na - nd - ((a - d) * std::conj(b + c)).real());
    const double k19 = 0.5 - 19 / (12 * pi), k4 = 0.5 - 4 / (3 * pi);
    g.x2 = (1 + nb + nc) / (6 * pi) + std::norm(a + d) / (12 * pi) + k19 * std::norm(b - c) -
           k4 * ((a + d) * std::conj(b + c)).real();
    g.y2 = (1 + na + nd) / (6 * pi) + std::norm(b + c) / (12 * pi) + k19 * std::norm(a - d) -
           k4 * ((b + c) * std::conj(a + d)).real();
    return g;
}

}  // namespace cqw
