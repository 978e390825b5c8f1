#pragma once

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "cqw/core.hpp"
#include "cqw/lattice.hpp"

namespace cqw {

/// One-dimensional patch vectors
///   u0 = cos(alpha/2)|2x> + e^{i phi1} sin(alpha/2)|2x+1>
///   u1 = cos(beta/2)|2x+1> + e^{i phi2} sin(beta/2)|2x+2>
struct TessellationSpec1D {
    static constexpr int dim = 1;
    double alpha = 0.0;
    double phi1 = 0.0;
    double beta = 0.0;
    double phi2 = 0.0;
};

/// Two-dimensional tessellation with the uniform 4-site patch vector on both
/// tessellations (U1 patches shifted by +1 along both axes).
struct TessellationSpec2D {
    static constexpr int dim = 2;
};

enum class Which { U0, U1 };

template <int Dim>
using PatchVector = Eigen::Matrix<Complex, patch_size<Dim>, 1>;

template <int Dim>
using Block = Eigen::Matrix<Complex, patch_size<Dim>, patch_size<Dim>>;

inline PatchVector<1> patch_vector(const TessellationSpec1D& s, Which w) {
    const double angle = w == Which::U0 ? s.alpha : s.beta;
    const double phase = w == Which::U0 ? s.phi1 : s.phi2;
    PatchVector<1> u;
    u << std::cos(angle / 2), std::polar(std::sin(angle / 2), phase);
    if (std::abs(u.norm() - 1.0) > 1e-14) throw NormError("patch vector is not normalized");
    return u;
}

inline PatchVector<2> patch_vector(const TessellationSpec2D&, Which) { return PatchVector<2>::Constant(0.5); }

/// Reflection 2 sum_x |u_x><u_x| - I as one dense block repeated over the
/// disjoint patches of a tessellation. U1 patches are offset by +1 per axis.
///
/// On a zero-padded lattice the U1 tessellation has truncated patches on the
/// outermost sites; they carry no reflection and must stay empty.
template <int Dim>
class Reflection {
public:
    static constexpr int P = patch_size<Dim>;
    using Patch = std::array<std::size_t, P>;

    Reflection(const Geometry<Dim>& geom, Which which, const PatchVector<Dim>& u) : geom_(geom), which_(which) {
        geom_.validate();
        block_ = 2.0 * u * u.adjoint() - Block<Dim>::Identity();
        build_patches();
    }

    const Geometry<Dim>& geometry() const { return geom_; }
    Which which() const { return which_; }
    int offset() const { return which_ == Which::U0 ? 0 : 1; }
    const Block<Dim>& block() const { return block_; }
    const std::vector<Patch>& patches() const { return patches_; }
    const std::vector<std::size_t>& truncated_sites() const { return truncated_; }

    void apply(std::span<Complex> amp) const {
        for (std::size_t s : truncated_)
            if (std::norm(amp[s]) > 1e-28)
                throw BoundaryError("amplitude reached a truncated U1 patch on the zero-padded boundary");
        Eigen::Matrix<Complex, P, 1> v;
        for (const auto& p : patches_) {
            bool any = false;
            for (int j = 0; j < P; ++j) {
                v[j] = amp[p[j]];
                any = any || v[j] != Complex{};
            }
            if (!any) continue;
            v = block_ * v;
            for (int j = 0; j < P; ++j) amp[p[j]] = v[j];
        }
    }

private:
    void build_patches() {
        // Per-axis list of patch starts (storage positions); second member is
        // the partner site, wrapped in periodic mode.
        std::array<std::vector<std::array<int, 2>>, Dim> starts;
        std::array<std::vector<int>, Dim> loose;
        const int off = offset();
        for (int a = 0; a < Dim; ++a) {
            const int L = geom_.extent[a];
            for (int s = off; s < L + off; s += 2) {
                if (s + 1 < L) {
                    starts[a].push_back({s, s + 1});
                } else if (geom_.boundary == Boundary::periodic) {
                    starts[a].push_back({s % L, (s + 1) % L});
                } else {
                    if (s < L) loose[a].push_back(s);
                    if (off == 1) loose[a].push_back(0);
                }
            }
        }
        std::array<std::size_t, Dim> counter{};
        while (true) {
            Patch p{};
            for (int j = 0; j < P; ++j) {
                Coord<Dim> pos{};
                for (int a = 0; a < Dim; ++a) {
                    const int bit = (j >> (Dim - 1 - a)) & 1;
                    pos[a] = starts[a][counter[a]][bit];
                }
                p[j] = geom_.flat(pos);
            }
            patches_.push_back(p);
            int a = Dim - 1;
            while (a >= 0 && ++counter[a] == starts[a].size()) counter[a--] = 0;
            if (a < 0) break;
        }
        if (geom_.boundary == Boundary::zero_padded) {
            for (std::size_t i = 0; i < geom_.size(); ++i) {
                const auto s = geom_.storage_of(i);
                for (int a = 0; a < Dim; ++a) {
                    if (std::find(loose[a].begin(), loose[a].end(), s[a]) != loose[a].end()) {
                        truncated_.push_back(i);
                        break;
                    }
                }
            }
        }
    }

    Geometry<Dim> geom_;
    Which which_;
    Block<Dim> block_;
    std::vector<Patch> patches_;
    std::vector<std::size_t> truncated_;
};

template <class Spec>
Reflection<Spec::dim> build_reflection(const Spec& spec, Which which, const Geometry<Spec::dim>& geom) {
    return Reflection<Spec::dim>(geom, which, patch_vector(spec, which));
}

/// Sites within this many positions of a zero-padded edge must stay empty.
inline constexpr int locality_guard = 2;
inline constexpr double locality_tolerance = 1e-14;

namespace detail {

/// Visits every storage index whose coordinate lies within `width` of a
/// zero-padded edge on some axis.
template <int Dim, class F>
void for_each_guard_site(const Geometry<Dim>& g, int width, F&& f) {
    if constexpr (Dim == 1) {
        const int L = g.extent[0];
        for (int x = 0; x < L; ++x)
            if (x < width || x >= L - width) f(static_cast<std::size_t>(x));
    } else {
        const int Lx = g.extent[0], Ly = g.extent[1];
        for (int x = 0; x < Lx; ++x) {
            const bool edge_x = x < width || x >= Lx - width;
            for (int y = 0; y < Ly; ++y) {
                if (edge_x || y < width || y >= Ly - width) f(static_cast<std::size_t>(x) * Ly + y);
                else if (y == width) y = Ly - width - 1;
            }
        }
    }
}

}  // namespace detail

template <int Dim>
void check_locality_guard(const LatticeState<Dim>& state) {
    const auto& g = state.geometry();
    if (g.boundary != Boundary::zero_padded) return;
    const auto amp = state.amplitudes();
    detail::for_each_guard_site(g, locality_guard, [&](std::size_t i) {
        if (std::norm(amp[i]) >= locality_tolerance * locality_tolerance)
            throw BoundaryError("walker reached the zero-padded boundary guard");
    });
}

/// One application of U1 U0, overwriting the state.
template <int Dim>
void step_in_place(LatticeState<Dim>& state, const Reflection<Dim>& u0, const Reflection<Dim>& u1) {
    if (!(u0.geometry() == state.geometry()) || !(u1.geometry() == state.geometry()))
        throw GeometryError("reflections were built for a different lattice geometry");
    if (u0.which() != Which::U0 || u1.which() != Which::U1) throw GeometryError("reflections passed in the wrong order");
    u0.apply(state.amplitudes());
    u1.apply(state.amplitudes());
    check_locality_guard(state);
}

/// One application of U1 U0.
template <int Dim>
LatticeState<Dim> step(const LatticeState<Dim>& state, const Reflection<Dim>& u0, const Reflection<Dim>& u1) {
    LatticeState<Dim> next = state;
    step_in_place(next, u0, u1);
    return next;
}

/// Propagator U = U1 U0 for a fixed tessellation on a fixed geometry.
template <int Dim>
class CoinlessWalk {
public:
    template <class Spec>
    CoinlessWalk(const Spec& spec, const Geometry<Dim>& geom)
        : u0_(build_reflection(spec, Which::U0, geom)), u1_(build_reflection(spec, Which::U1, geom)) {}

    const Geometry<Dim>& geometry() const { return u0_.geometry(); }
    const Reflection<Dim>& u0() const { return u0_; }
    const Reflection<Dim>& u1() const { return u1_; }

    LatticeState<Dim> step(const LatticeState<Dim>& s) const { return cqw::step(s, u0_, u1_); }

    LatticeState<Dim> evolve(LatticeState<Dim> s, int t) const {
        if (t < 0) throw ConfigError("negative step count");
        for (int i = 0; i < t; ++i) step_in_place(s, u0_, u1_);
        return s;
    }

private:
    Reflection<Dim> u0_;
    Reflection<Dim> u1_;
};

/// Number of sites the coinless walker can travel per step and axis.
inline constexpr int coinless_reach_per_step = 2;

/// Smallest zero-padded geometry that holds t coinless steps from `init`
/// exactly, with the locality guard kept empty.
template <int Dim>
Geometry<Dim> padded_geometry_for(const InitialCondition<Dim>& init, int t, int reach_per_step = coinless_reach_per_step) {
    int lo = 0, hi = 0;
    for (int a = 0; a < Dim; ++a) {
        auto [l, h] = init.support(a);
        lo = std::min(lo, l);
        hi = std::max(hi, h);
    }
    return Geometry<Dim>::padded(lo, hi, reach_per_step * t + locality_guard + 2);
}

template <int Dim>
void require_capacity(const Geometry<Dim>& g, const InitialCondition<Dim>& init, int t,
                      int reach_per_step = coinless_reach_per_step) {
    if (g.boundary != Boundary::zero_padded) return;
    const int margin = reach_per_step * t + locality_guard;
    for (int a = 0; a < Dim; ++a) {
        auto [lo, hi] = init.support(a);
        if (lo - margin < -g.origin[a] || hi + margin > g.extent[a] - 1 - g.origin[a])
            throw BoundaryError("zero-padded extent " + std::to_string(g.extent[a]) + " is too small for t = " +
                                std::to_string(t));
    }
}

/// |psi(t)> = (U1 U0)^t |psi(0)> on the given geometry.
template <class Spec>
LatticeState<Spec::dim> evolve(const InitialCondition<Spec::dim>& init, const Spec& spec, int t,
                               const Geometry<Spec::dim>& geom) {
    if (t < 0) throw ConfigError("negative step count");
    require_capacity(geom, init, t);
    CoinlessWalk<Spec::dim> walk(spec, geom);
    return walk.evolve(LatticeState<Spec::dim>(geom, init), t);
}

/// Infinite-lattice evolution on an automatically sized zero-padded lattice.
template <class Spec>
LatticeState<Spec::dim> evolve(const InitialCondition<Spec::dim>& init, const Spec& spec, int t) {
    if (t < 0) throw ConfigError("negative step count");
    return evolve(init, spec, t, padded_geometry_for(init, t));
}

template <int Dim>
using Distribution = std::map<Coord<Dim>, double>;

/// |amplitude|^2 per logical site; sites below 1e-16 are dropped.
template <int Dim>
Distribution<Dim> probability_distribution(const LatticeState<Dim>& state) {
    Distribution<Dim> out;
    const auto amp = state.amplitudes();
    for (std::size_t i = 0; i < amp.size(); ++i) {
        const double p = std::norm(amp[i]);
        if (p >= 1e-16) out[state.geometry().logical(i)] += p;
    }
    return out;
}

}  // namespace cqw
