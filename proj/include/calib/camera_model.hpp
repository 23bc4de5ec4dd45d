#pragma once

#include <Eigen/Core>

#include "calib/errors.hpp"

namespace calib {

/// Row signal of an image, expressed in units where the vertical half-height
/// is 1: the top edge sits at +1 and the bottom edge at -1. Horizontal
/// positions use the same scale, so x spans [-aspect, +aspect].
///
/// Conventions shared by the whole toolkit:
///   - world frame is right-handed, +y up, camera looks along +z at identity
///   - positive pitch tilts the camera down, which moves the horizon above
///     the image center (positive midpoint)
///   - positive roll raises the horizon at the left image edge
struct CameraCalibration {
    double vfov = 0.0;     ///< vertical field of view, radians, in (0, pi)
    double midpoint = 0.0; ///< horizon midpoint in image units
    double roll = 0.0;     ///< radians, in [-pi/2, pi/2]
};

struct ImageDims {
    int width = 0;
    int height = 0;

    double aspect() const { return static_cast<double>(width) / static_cast<double>(height); }
};

/// Horizon line as inclination angle plus signed perpendicular distance from
/// the image center (image units).
struct HorizonLine {
    double slope = 0.0;
    double offset = 0.0;
};

/// y-coordinates (image units) where the horizon line crosses the left and
/// right image boundaries. The retrieval key.
struct HorizonFeature {
    double y_left = 0.0;
    double y_right = 0.0;
};

using RotationMatrix = Eigen::Matrix3d;

/// Throws std::invalid_argument if the calibration violates its invariants.
void validate_calibration(const CameraCalibration& calib);
void validate_dims(const ImageDims& dims);

double vfov_from_focal_px(double focal_px, const ImageDims& dims);
double focal_px_from_vfov(double vfov, const ImageDims& dims);

/// Horizon midpoint of a camera pitched down by `pitch`: tan(pitch) / tan(vfov/2).
double midpoint_from_pitch(double pitch, double vfov);
double pitch_from_midpoint(double midpoint, double vfov);

HorizonLine slope_offset_from_calibration(const CameraCalibration& calib);
CameraCalibration calibration_from_slope_offset(const HorizonLine& line, double vfov);

/// World-to-camera rotation built from pitch about the lateral axis, roll
/// about the optical axis and yaw about the vertical axis. With yaw = 0 the
/// product reduces to the roll-pitch two-factor form.
RotationMatrix rotation_from_angles(double pitch, double roll, double yaw = 0.0);

/// Pinhole projection with the camera at (0, camera_height, 0). Returns pixel
/// coordinates with the image center at (width/2, height/2) and rows growing
/// downward. Throws BehindCameraError when the point has non-positive depth.
Eigen::Vector2d project(const Eigen::Vector3d& point_world, const CameraCalibration& calib,
                        const ImageDims& dims, double camera_height);

/// Intersection of the pixel's back-projected ray with the ground plane y = 0.
/// Throws NoGroundIntersectionError for pixels on or above the horizon.
Eigen::Vector3d unproject_to_ground(const Eigen::Vector2d& pixel, const CameraCalibration& calib,
                                    const ImageDims& dims, double camera_height);

HorizonFeature horizon_edge_intersections(const CameraCalibration& calib, const ImageDims& dims);

} // namespace calib
