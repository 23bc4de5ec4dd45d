#include "calib/camera_model.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Geometry>

#include "calib/angles.hpp"

namespace calib {

namespace {

constexpr double kHalfPi = kPi / 2.0;

// cos(roll) below this makes the midpoint representation meaningless.
constexpr double kDegenerateCos = 1e-6;

void require_vfov(double vfov) {
    if (!(vfov > 0.0 && vfov < kPi)) {
        throw std::invalid_argument("vertical field of view must lie in (0, pi)");
    }
}

} // namespace

void validate_calibration(const CameraCalibration& calib) {
    require_vfov(calib.vfov);
    if (!(std::abs(calib.roll) <= kHalfPi)) {
        throw std::invalid_argument("roll must lie in [-pi/2, pi/2]");
    }
    if (!std::isfinite(calib.midpoint)) {
        throw std::invalid_argument("horizon midpoint must be finite");
    }
}

void validate_dims(const ImageDims& dims) {
    if (dims.width < 1 || dims.height < 1) {
        throw std::invalid_argument("image dimensions must be at least 1x1");
    }
}

double vfov_from_focal_px(double focal_px, const ImageDims& dims) {
    validate_dims(dims);
    if (!(focal_px > 0.0)) {
        throw std::invalid_argument("focal length must be positive");
    }
    return 2.0 * std::atan(dims.height / (2.0 * focal_px));
}

double focal_px_from_vfov(double vfov, const ImageDims& dims) {
    validate_dims(dims);
    require_vfov(vfov);
    return dims.height / (2.0 * std::tan(vfov / 2.0));
}

double midpoint_from_pitch(double pitch, double vfov) {
    require_vfov(vfov);
    if (!(std::abs(pitch) < kHalfPi)) {
        throw std::invalid_argument("pitch must lie strictly inside (-pi/2, pi/2)");
    }
    return std::tan(pitch) / std::tan(vfov / 2.0);
}

double pitch_from_midpoint(double midpoint, double vfov) {
    require_vfov(vfov);
    if (!std::isfinite(midpoint)) {
        throw std::invalid_argument("midpoint must be finite");
    }
    return std::atan(midpoint * std::tan(vfov / 2.0));
}

HorizonLine slope_offset_from_calibration(const CameraCalibration& calib) {
    validate_calibration(calib);
    double c = std::cos(calib.roll);
    if (c < kDegenerateCos) {
        throw DegenerateLineError("horizon too close to vertical for slope/offset");
    }
    return HorizonLine{calib.roll, calib.midpoint * c};
}

CameraCalibration calibration_from_slope_offset(const HorizonLine& line, double vfov) {
    require_vfov(vfov);
    double c = std::cos(line.slope);
    if (c < kDegenerateCos) {
        throw DegenerateLineError("slope too close to vertical to recover a midpoint");
    }
    return CameraCalibration{vfov, line.offset / c, line.slope};
}

RotationMatrix rotation_from_angles(double pitch, double roll, double yaw) {
    if (!std::isfinite(pitch) || !std::isfinite(roll) || !std::isfinite(yaw)) {
        throw std::invalid_argument("rotation angles must be finite");
    }
    // Camera-to-world: yaw about world up, then pitch, then roll about the
    // optical axis. The returned world-to-camera matrix is its transpose.
    Eigen::Matrix3d cam_to_world =
        (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) *
         Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()) *
         Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()))
            .toRotationMatrix();
    return cam_to_world.transpose();
}

Eigen::Vector2d project(const Eigen::Vector3d& point_world, const CameraCalibration& calib,
                        const ImageDims& dims, double camera_height) {
    validate_calibration(calib);
    validate_dims(dims);
    double pitch = pitch_from_midpoint(calib.midpoint, calib.vfov);
    double focal = focal_px_from_vfov(calib.vfov, dims);
    RotationMatrix world_to_cam = rotation_from_angles(pitch, calib.roll);

    Eigen::Vector3d cam = world_to_cam * (point_world - Eigen::Vector3d(0.0, camera_height, 0.0));
    if (!(cam.z() > 0.0)) {
        throw BehindCameraError("point at or behind the camera plane");
    }
    return {dims.width / 2.0 + focal * cam.x() / cam.z(),
            dims.height / 2.0 - focal * cam.y() / cam.z()};
}

Eigen::Vector3d unproject_to_ground(const Eigen::Vector2d& pixel, const CameraCalibration& calib,
                                    const ImageDims& dims, double camera_height) {
    validate_calibration(calib);
    validate_dims(dims);
    if (!(camera_height > 0.0)) {
        throw std::invalid_argument("camera height must be positive");
    }
    double pitch = pitch_from_midpoint(calib.midpoint, calib.vfov);
    double focal = focal_px_from_vfov(calib.vfov, dims);
    RotationMatrix world_to_cam = rotation_from_angles(pitch, calib.roll);

    Eigen::Vector3d ray_cam((pixel.x() - dims.width / 2.0) / focal,
                            (dims.height / 2.0 - pixel.y()) / focal, 1.0);
    Eigen::Vector3d ray_world = world_to_cam.transpose() * ray_cam;
    if (!(ray_world.y() < 0.0)) {
        throw NoGroundIntersectionError("pixel on or above the horizon");
    }
    double t = -camera_height / ray_world.y();
    return {t * ray_world.x(), 0.0, t * ray_world.z()};
}

HorizonFeature horizon_edge_intersections(const CameraCalibration& calib, const ImageDims& dims) {
    validate_calibration(calib);
    validate_dims(dims);
    if (std::cos(calib.roll) < kDegenerateCos) {
        throw DegenerateLineError("near-vertical horizon has no boundary intersections");
    }
    double a = dims.aspect();
    double rise = a * std::tan(calib.roll);
    return HorizonFeature{calib.midpoint + rise, calib.midpoint - rise};
}

} // namespace calib
