#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cqw/core.hpp"

namespace cqw {

enum class Boundary { periodic, zero_padded };

inline const char* to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "zero_padded"; }

/// Finite embedding of the infinite lattice.
///
/// Storage index i along an axis corresponds to logical coordinate i - origin.
/// The origin is required to be even so that logical sites 0 and 1 share a U0
/// patch and sites 1 and 2 share a U1 patch. In periodic mode logical
/// coordinates are reported in the minimal-image window [-L/2, L/2).
template <int Dim>
struct Geometry {
    Coord<Dim> extent{};
    Coord<Dim> origin{};
    Boundary boundary = Boundary::zero_padded;

    void validate() const {
        for (int a = 0; a < Dim; ++a) {
            if (extent[a] < 4 || extent[a] % 2 != 0)
                throw GeometryError("extent " + std::to_string(extent[a]) + " on axis " + std::to_string(a) +
                                    " must be even and at least 4");
            if (origin[a] < 0 || origin[a] >= extent[a] || origin[a] % 2 != 0)
                throw GeometryError("origin " + std::to_string(origin[a]) + " on axis " + std::to_string(a) +
                                    " must be an even storage index inside the lattice");
        }
    }

    std::size_t size() const {
        std::size_t n = 1;
        for (int a = 0; a < Dim; ++a) n *= static_cast<std::size_t>(extent[a]);
        return n;
    }

    /// Storage position along one axis, or -1 when outside a zero-padded lattice.
    int storage(int axis, int logical) const {
        int s = logical + origin[axis];
        if (boundary == Boundary::periodic) {
            s %= extent[axis];
            if (s < 0) s += extent[axis];
            return s;
        }
        return (s < 0 || s >= extent[axis]) ? -1 : s;
    }

    bool contains(const Coord<Dim>& x) const {
        for (int a = 0; a < Dim; ++a)
            if (storage(a, x[a]) < 0) return false;
        return true;
    }

    /// Row-major flat index (last axis fastest).
    std::size_t flat(const Coord<Dim>& storage_pos) const {
        std::size_t idx = 0;
        for (int a = 0; a < Dim; ++a) idx = idx * static_cast<std::size_t>(extent[a]) + storage_pos[a];
        return idx;
    }

    std::size_t index(const Coord<Dim>& x) const {
        Coord<Dim> s{};
        for (int a = 0; a < Dim; ++a) {
            s[a] = storage(a, x[a]);
            if (s[a] < 0) throw BoundaryError("site outside the zero-padded lattice");
        }
        return flat(s);
    }

    Coord<Dim> storage_of(std::size_t idx) const {
        Coord<Dim> s{};
        for (int a = Dim - 1; a >= 0; --a) {
            s[a] = static_cast<int>(idx % static_cast<std::size_t>(extent[a]));
            idx /= static_cast<std::size_t>(extent[a]);
        }
        return s;
    }

    Coord<Dim> logical(std::size_t idx) const {
        Coord<Dim> x = storage_of(idx);
        for (int a = 0; a < Dim; ++a) {
            x[a] -= origin[a];
            if (boundary == Boundary::periodic) {
                const int half = extent[a] / 2;
                if (x[a] >= half) x[a] -= extent[a];
                if (x[a] < -half) x[a] += extent[a];
            }
        }
        return x;
    }

    bool operator==(const Geometry&) const = default;

    static Geometry periodic(int length) {
        Geometry g;
        g.extent.fill(length);
        g.origin.fill(0);
        g.boundary = Boundary::periodic;
        g.validate();
        return g;
    }

    /// Zero-padded lattice with `reach` free sites on either side of the
    /// support window [lo, hi] (per axis).
    static Geometry padded(int lo, int hi, int reach) {
        Geometry g;
        g.boundary = Boundary::zero_padded;
        int left = reach - lo;  // storage index of logical 0
        left += left % 2;
        const int length = left + hi + reach + 1;
        g.extent.fill(length + length % 2);
        g.origin.fill(left);
        g.validate();
        return g;
    }
};

/// Sparse initial condition: a list of (site, amplitude) pairs with unit norm.
template <int Dim>
class InitialCondition {
public:
    using Entry = std::pair<Coord<Dim>, Complex>;

    InitialCondition() = default;

    explicit InitialCondition(std::vector<Entry> entries, double tol = 1e-12) : entries_(std::move(entries)) {
        if (entries_.empty()) throw NormError("initial condition has no support");
        double n = 0.0;
        for (const auto& e : entries_) n += std::norm(e.second);
        if (std::abs(n - 1.0) > tol)
            throw NormError("initial condition has squared norm " + std::to_string(n) + ", expected 1");
    }

    static InitialCondition localized() { return InitialCondition({{Coord<Dim>{}, Complex{1.0, 0.0}}}); }

    /// Cell state a|00> + b|01> + c|10> + d|11> on the U0 patch containing the
    /// origin, |xy> meaning x = first digit, y = second digit.
    static InitialCondition cell(Complex a, Complex b, Complex c, Complex d)
        requires(Dim == 2)
    {
        return InitialCondition({{{0, 0}, a}, {{0, 1}, b}, {{1, 0}, c}, {{1, 1}, d}});
    }

    const std::vector<Entry>& entries() const { return entries_; }

    /// Inclusive bounding box of the support on one axis.
    std::pair<int, int> support(int axis) const {
        int lo = entries_.front().first[axis], hi = lo;
        for (const auto& e : entries_) {
            lo = std::min(lo, e.first[axis]);
            hi = std::max(hi, e.first[axis]);
        }
        return {lo, hi};
    }

private:
    std::vector<Entry> entries_;
};

/// Complex amplitude vector over the sites of a finite lattice.
template <int Dim>
class LatticeState {
public:
    LatticeState() = default;

    explicit LatticeState(Geometry<Dim> geom) : geom_(geom), amp_(geom.size()) { geom_.validate(); }

    LatticeState(Geometry<Dim> geom, std::vector<Complex> amplitudes) : geom_(geom), amp_(std::move(amplitudes)) {
        geom_.validate();
        if (amp_.size() != geom_.size()) throw GeometryError("amplitude count does not match lattice size");
    }

    LatticeState(Geometry<Dim> geom, const InitialCondition<Dim>& init) : LatticeState(geom) {
        for (const auto& [x, a] : init.entries()) amp_[geom_.index(x)] += a;
    }

    const Geometry<Dim>& geometry() const { return geom_; }
    std::span<const Complex> amplitudes() const { return amp_; }
    std::span<Complex> amplitudes() { return amp_; }

    Complex at(const Coord<Dim>& x) const { return geom_.contains(x) ? amp_[geom_.index(x)] : Complex{}; }

    double norm_squared() const {
        double n = 0.0;
        for (const auto& a : amp_) n += std::norm(a);
        return n;
    }

private:
    Geometry<Dim> geom_{};
    std::vector<Complex> amp_;
};

}  // namespace cqw
