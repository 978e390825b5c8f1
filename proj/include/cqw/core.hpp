#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cqw {

using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex I{0.0, 1.0};

/// Characteristic constant of the Hadamard walk, 1 - 1/sqrt(2).
inline constexpr double D1 = 1.0 - 1.0 / std::numbers::sqrt2;
/// Characteristic constant of the two-dimensional walks, 1 - 2/pi.
inline constexpr double D2 = 1.0 - 2.0 / std::numbers::pi;

/// Number of sites in a tessellation patch (and components of a reduced vector).
template <int Dim>
inline constexpr int patch_size = 1 << Dim;

template <int Dim>
using Coord = std::array<int, Dim>;

// Error hierarchy. Every library failure derives from cqw::Error so callers
// (the CLI in particular) can map categories onto exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

struct GeometryError : Error {
    using Error::Error;
    const char* kind() const noexcept override { return "geometry"; }
};

struct BoundaryError : Error {
    using Error::Error;
    const char* kind() const noexcept override { return "boundary"; }
};

struct NormError : Error {
    using Error::Error;
    const char* kind() const noexcept override { return "norm"; }
};

struct BandEdgeError : Error {
    using Error::Error;
    const char* kind() const noexcept override { return "band-edge"; }
};

struct ConvergenceError : Error {
    using Error::Error;
    const char* kind() const noexcept override { return "convergence"; }
};

struct ConfigError : Error {
    using Error::Error;
    const char* kind() const noexcept override { return "config"; }
};

namespace detail {

inline double clamp_unit(double x) { return x > 1.0 ? 1.0 : (x < -1.0 ? -1.0 : x); }

inline double sign_or_one(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace detail

}  // namespace cqw
