#pragma once

#include <json.hpp>

#include "calib/camera_model.hpp"

namespace calib {

inline nlohmann::ordered_json calibration_to_json(const CameraCalibration& calib) {
    nlohmann::ordered_json j;
    j["vfov_rad"] = calib.vfov;
    j["midpoint_units"] = calib.midpoint;
    j["roll_rad"] = calib.roll;
    return j;
}

inline CameraCalibration calibration_from_json(const nlohmann::json& j) {
    return CameraCalibration{j.at("vfov_rad").get<double>(), j.at("midpoint_units").get<double>(),
                             j.at("roll_rad").get<double>()};
}

} // namespace calib
