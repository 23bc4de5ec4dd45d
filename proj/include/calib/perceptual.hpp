#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "calib/camera_model.hpp"
#include "calib/random.hpp"

namespace calib {

/// One A/B study condition: ground-truth and distorted calibrations plus the
/// fraction of voters who picked the ground-truth composite.
struct StudyRecord {
    CameraCalibration gt;
    CameraCalibration distorted;
    double pct_chose_gt = 50.0; // percent in [0, 100]
    int n_votes = 1;
};

/// Query point of the sensitivity function: parameter value and error for
/// pitch (image units), roll and field of view (degrees).
struct SensitivityQuery {
    double pitch_value = 0.0;
    double pitch_error = 0.0;
    double roll_value = 0.0;
    double roll_error = 0.0;
    double vfov_value = 0.0;
    double vfov_error = 0.0;

    std::array<double, 6> to_array() const {
        return {pitch_value, pitch_error, roll_value, roll_error, vfov_value, vfov_error};
    }
};

// Observed human tolerances; each query dimension is divided by its
// parameter's tolerance before the Euclidean distance.
inline constexpr double kPitchToleranceUnits = 0.2;
inline constexpr double kRollToleranceDeg = 12.0;
inline constexpr double kVfovToleranceDeg = 15.0;

inline constexpr int kDefaultKnnNeighbors = 15;

/// Maps the 50-100% confusion-to-detection band onto 0-100% sensitivity.
double sensitivity_from_pct(double pct);

/// The 6-vector a study record contributes to the kNN fit.
SensitivityQuery query_from_record(const StudyRecord& record);

/// Tolerance-scaled Euclidean kNN over the study records: averages the
/// percent-chose-ground-truth of the k nearest records (ties at the k-th
/// distance break by record order), then maps the average to sensitivity.
double knn_sensitivity(const SensitivityQuery& query, const std::vector<StudyRecord>& records,
                       int k = kDefaultKnnNeighbors);

struct DistortionMask {
    bool pitch = false;
    bool roll = false;
    bool vfov = false;

    bool any() const { return pitch || roll || vfov; }
};

/// Signed parameter perturbations in degrees; inactive components are 0.
struct DistortionSpec {
    double d_pitch_deg = 0.0;
    double d_roll_deg = 0.0;
    double d_vfov_deg = 0.0;
};

// Distortion magnitude ranges (degrees).
inline constexpr double kPitchDistortionMinDeg = 1.0;
inline constexpr double kPitchDistortionMaxDeg = 30.0;
inline constexpr double kRollDistortionMinDeg = 0.5;
inline constexpr double kRollDistortionMaxDeg = 20.0;
inline constexpr double kVfovDistortionMinDeg = 5.0;
inline constexpr double kVfovDistortionMaxDeg = 55.0;

/// Uniform magnitude in each active range with an independent fair sign flip.
DistortionSpec sample_distortion(UniformRng& rng, const DistortionMask& active);

struct Placement {
    Eigen::Vector2d anchor_px{0.0, 0.0};
    double scale_factor = 1.0;
};

/// Placement correction for rendering under a distorted camera: the anchor
/// pixel stays put and the object scale is multiplied by the focal-length
/// ratio, so the apparent size (focal * height / depth) matches the
/// ground-truth render. Throws NoGroundIntersectionError when the anchor is
/// not on the ground under either camera.
Placement compensate_placement(const CameraCalibration& gt, const CameraCalibration& distorted,
                               const Eigen::Vector2d& anchor_px, double apparent_height_px,
                               const ImageDims& dims, double camera_height = 1.6);

std::vector<StudyRecord> load_study(const std::filesystem::path& path);
void save_study(const std::vector<StudyRecord>& records, const std::filesystem::path& path);

/// Smooth stand-in for the unavailable raw study: detection percentage rises
/// steeply with roll error (wider tolerance at large roll values), gently
/// with pitch error, and asymmetrically with field-of-view error (over-
/// estimation is far more visible than underestimation).
double synthetic_detection_pct(const SensitivityQuery& query);

/// Synthetic study records for tests and demos, labeled by
/// synthetic_detection_pct over randomly drawn conditions.
std::vector<StudyRecord> make_synthetic_study(UniformRng& rng, int count);

} // namespace calib
