/**
 * @file core.hpp
 * @brief Shared vocabulary: vector types, physical constants and error types.
 */

#ifndef INTPATH_CORE_HPP
#define INTPATH_CORE_HPP

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>

namespace intpath {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

namespace constants {
constexpr double kSpeedOfLight = 299792458.0;  // [m/s]
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace constants

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document (scene or run configuration).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input parsed but violates an invariant. The message names the entity.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Coincident points, singular normal matrices and similar.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// A base station has no path surviving the path-loss threshold.
class NoCoverage : public Error {
public:
    using Error::Error;
};

/// Too few measurements to form a redundant 4-state solution.
class InsufficientRedundancy : public Error {
public:
    using Error::Error;
};

inline Vec2 horizontal(const Vec3& p) { return {p.x(), p.y()}; }

/// z-component of the 2D cross product.
inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace intpath

#endif  // INTPATH_CORE_HPP
