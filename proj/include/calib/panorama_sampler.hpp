#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "calib/camera_model.hpp"
#include "calib/image.hpp"
#include "calib/random.hpp"

namespace calib {

struct AspectChoice {
    int w = 1;
    int h = 1;
    double prob = 0.0;

    double ratio() const { return static_cast<double>(w) / static_cast<double>(h); }
};

/// Camera-parameter sampling scheme used to label panorama crops.
///
/// Focal length is lognormal in millimeters (loc + scale * exp(shape * Z)),
/// the horizon midpoint is normal in image units, roll is a two-component
/// Cauchy mixture, the aspect ratio is categorical and yaw is uniform over
/// the full circle.
struct SamplingConfig {
    double focal_shape = 0.8;
    double focal_loc_mm = 14.0;
    double focal_scale_mm = 17.0;

    double horizon_mean = 0.046;
    double horizon_stddev = 0.6;

    std::array<double, 2> roll_scales{0.001, 0.1};
    std::array<double, 2> roll_weights{1.0 / 3.0, 2.0 / 3.0};

    std::vector<AspectChoice> aspect_ratios{
        {1, 1, 0.1}, {5, 4, 0.1}, {4, 3, 0.6}, {3, 2, 0.1}, {16, 9, 0.1}};

    int crops_per_pano = 7;
    int out_size = 224;
    double sensor_height_mm = 24.0;

    void validate() const; ///< throws std::invalid_argument on bad fields
};

std::string sampling_config_to_json(const SamplingConfig& config);
SamplingConfig sampling_config_from_json(const std::string& text);
SamplingConfig load_sampling_config(const std::filesystem::path& path);

/// One draw from the marginals of SamplingConfig before range rejection.
struct RawCameraDraw {
    double focal_mm = 0.0;
    double midpoint = 0.0;
    double roll = 0.0;
    AspectChoice aspect;
    double yaw = 0.0;
};

/// An accepted draw, with the millimeter focal length already converted.
struct CameraParams {
    double vfov = 0.0;
    double midpoint = 0.0;
    double roll = 0.0;
    double yaw = 0.0;
    AspectChoice aspect;
    double focal_mm = 0.0;
};

double focal_mm_to_vfov(double focal_mm, double sensor_height_mm);

RawCameraDraw sample_raw_params(UniformRng& rng, const SamplingConfig& config);

/// Rejection-resamples raw draws until the derived calibration fits the label
/// codec ranges (vfov in [0.2, 1.8], offset in [-1.6, 1.6], |roll| <= pi/2).
/// Throws std::runtime_error after 10,000 rejected attempts.
CameraParams sample_camera_params(UniformRng& rng, const SamplingConfig& config);

bool params_within_codec_ranges(const CameraParams& params);

/// Renders a pinhole view from a 2:1 equirectangular panorama. The output is
/// out_size x out_size; `aspect` widens the horizontal field of view before
/// the square resampling, mimicking a crop at that aspect ratio followed by a
/// resize. Bilinear sampling with horizontal wraparound and vertical clamp.
Image extract_crop(const Image& pano, double yaw, double pitch, double roll, double vfov,
                   double aspect, int out_size);

enum class Split { train, val, test };
std::string to_string(Split split);
Split split_from_string(const std::string& name);

struct SplitFractions {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

/// Deterministic split assignment from the panorama id alone, so every crop
/// of a panorama lands in the same split regardless of seed or corpus order.
Split split_for_pano(const std::string& pano_id, const SplitFractions& fractions);

struct CropRecord {
    std::string pano_id;
    std::string crop_id;
    std::string image_path; // relative to the manifest directory
    double vfov = 0.0;
    double midpoint = 0.0;
    double roll = 0.0;
    double yaw = 0.0;
    int aspect_w = 1;
    int aspect_h = 1;
    Split split = Split::train;

    CameraCalibration calibration() const { return {vfov, midpoint, roll}; }
};

struct DatasetManifest {
    std::vector<CropRecord> records;
    std::uint64_t seed = 0;
    SamplingConfig config;
};

/// Extracts crops_per_pano labeled crops from every readable panorama in
/// pano_dir, writes the PNGs plus manifest.jsonl and run_config.json under
/// out_dir, and returns the manifest. Unreadable or non-2:1 files are skipped
/// with a warning on stderr; an empty corpus is a hard error.
DatasetManifest build_dataset(const std::filesystem::path& pano_dir,
                              const std::filesystem::path& out_dir, const SamplingConfig& config,
                              std::uint64_t seed, const SplitFractions& fractions = {});

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
std::vector<CropRecord> load_manifest(const std::filesystem::path& path);

} // namespace calib
