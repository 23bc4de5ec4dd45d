#pragma once

#include <stdexcept>
#include <string>

namespace calib {

/// Horizon line too close to vertical for the slope/offset parameterization.
class DegenerateLineError : public std::domain_error {
public:
    explicit DegenerateLineError(const std::string& what) : std::domain_error(what) {}
};

/// A point at or behind the camera plane cannot be projected.
class BehindCameraError : public std::domain_error {
public:
    explicit BehindCameraError(const std::string& what) : std::domain_error(what) {}
};

/// The back-projected ray never reaches the ground plane.
class NoGroundIntersectionError : public std::domain_error {
public:
    explicit NoGroundIntersectionError(const std::string& what) : std::domain_error(what) {}
};

} // namespace calib
