#include "calib/panorama_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "calib/angles.hpp"
#include "calib/image_io.hpp"
#include "calib/stats.hpp"

namespace calib {

namespace {

constexpr double kVfovMin = 0.2;
constexpr double kVfovMax = 1.8;
constexpr double kOffsetBound = 1.6;
constexpr int kMaxRejections = 10000;

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    // splitmix64 finalizer; raw FNV leaves the high bits poorly mixed on
    // short ids and the split fraction reads them.
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

} // namespace

void SamplingConfig::validate() const {
    if (!(focal_shape > 0.0) || !(focal_scale_mm > 0.0)) {
        throw std::invalid_argument("lognormal shape and scale must be positive");
    }
    if (!(horizon_stddev > 0.0)) {
        throw std::invalid_argument("horizon stddev must be positive");
    }
    double weight_sum = 0.0;
    for (double w : roll_weights) {
        if (!(w > 0.0)) throw std::invalid_argument("roll mixture weights must be positive");
        weight_sum += w;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) {
        throw std::invalid_argument("roll mixture weights must sum to 1");
    }
    for (double s : roll_scales) {
        if (!(s > 0.0)) throw std::invalid_argument("roll Cauchy scales must be positive");
    }
    if (aspect_ratios.empty()) {
        throw std::invalid_argument("at least one aspect ratio is required");
    }
    double prob_sum = 0.0;
    for (const AspectChoice& a : aspect_ratios) {
        if (a.w < 1 || a.h < 1 || !(a.prob > 0.0)) {
            throw std::invalid_argument("aspect ratios need positive sides and probability");
        }
        prob_sum += a.prob;
    }
    if (std::abs(prob_sum - 1.0) > 1e-9) {
        throw std::invalid_argument("aspect probabilities must sum to 1");
    }
    if (crops_per_pano < 1) throw std::invalid_argument("crops_per_pano must be at least 1");
    if (out_size < 2) throw std::invalid_argument("out_size must be at least 2");
    if (!(sensor_height_mm > 0.0)) throw std::invalid_argument("sensor height must be positive");
}

std::string sampling_config_to_json(const SamplingConfig& config) {
    nlohmann::ordered_json j;
    j["focal_mm_lognormal"] = {{"shape", config.focal_shape},
                               {"loc", config.focal_loc_mm},
                               {"scale", config.focal_scale_mm}};
    j["horizon_normal"] = {{"mean", config.horizon_mean}, {"stddev", config.horizon_stddev}};
    j["roll_cauchy"] = {{"scales", config.roll_scales}, {"weights", config.roll_weights}};
    nlohmann::ordered_json aspects = nlohmann::ordered_json::array();
    for (const AspectChoice& a : config.aspect_ratios) {
        aspects.push_back({{"w", a.w}, {"h", a.h}, {"prob", a.prob}});
    }
    j["aspect_ratios"] = aspects;
    j["crops_per_pano"] = config.crops_per_pano;
    j["out_size"] = config.out_size;
    j["sensor_height_mm"] = config.sensor_height_mm;
    return j.dump(2);
}

SamplingConfig sampling_config_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SamplingConfig config;
    if (j.contains("focal_mm_lognormal")) {
        const auto& f = j.at("focal_mm_lognormal");
        config.focal_shape = f.at("shape").get<double>();
        config.focal_loc_mm = f.at("loc").get<double>();
        config.focal_scale_mm = f.at("scale").get<double>();
    }
    if (j.contains("horizon_normal")) {
        const auto& h = j.at("horizon_normal");
        config.horizon_mean = h.at("mean").get<double>();
        config.horizon_stddev = h.at("stddev").get<double>();
    }
    if (j.contains("roll_cauchy")) {
        const auto& r = j.at("roll_cauchy");
        config.roll_scales = r.at("scales").get<std::array<double, 2>>();
        config.roll_weights = r.at("weights").get<std::array<double, 2>>();
    }
    if (j.contains("aspect_ratios")) {
        config.aspect_ratios.clear();
        for (const auto& a : j.at("aspect_ratios")) {
            config.aspect_ratios.push_back(
                {a.at("w").get<int>(), a.at("h").get<int>(), a.at("prob").get<double>()});
        }
    }
    if (j.contains("crops_per_pano")) config.crops_per_pano = j.at("crops_per_pano").get<int>();
    if (j.contains("out_size")) config.out_size = j.at("out_size").get<int>();
    if (j.contains("sensor_height_mm")) {
        config.sensor_height_mm = j.at("sensor_height_mm").get<double>();
    }
    config.validate();
    return config;
}

SamplingConfig load_sampling_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return sampling_config_from_json(buffer.str());
}

double focal_mm_to_vfov(double focal_mm, double sensor_height_mm) {
    if (!(focal_mm > 0.0) || !(sensor_height_mm > 0.0)) {
        throw std::invalid_argument("focal length and sensor height must be positive");
    }
    return 2.0 * std::atan(sensor_height_mm / (2.0 * focal_mm));
}

RawCameraDraw sample_raw_params(UniformRng& rng, const SamplingConfig& config) {
    RawCameraDraw draw;

    double z = normal_quantile(std::max(rng.next(), 1e-300));
    draw.focal_mm = config.focal_loc_mm + config.focal_scale_mm * std::exp(config.focal_shape * z);

    draw.midpoint =
        config.horizon_mean + config.horizon_stddev * normal_quantile(std::max(rng.next(), 1e-300));

    double component = rng.next();
    double scale = component < config.roll_weights[0] ? config.roll_scales[0] : config.roll_scales[1];
    draw.roll = scale * std::tan(kPi * (rng.next() - 0.5));

    double pick = rng.next();
    double cumulative = 0.0;
    draw.aspect = config.aspect_ratios.back();
    for (const AspectChoice& a : config.aspect_ratios) {
        cumulative += a.prob;
        if (pick < cumulative) {
            draw.aspect = a;
            break;
        }
    }

    draw.yaw = -kPi + 2.0 * kPi * rng.next();
    return draw;
}

bool params_within_codec_ranges(const CameraParams& params) {
    if (!(params.vfov >= kVfovMin && params.vfov <= kVfovMax)) return false;
    if (!(std::abs(params.roll) <= kPi / 2.0)) return false;
    double offset = params.midpoint * std::cos(params.roll);
    return std::abs(offset) <= kOffsetBound;
}

CameraParams sample_camera_params(UniformRng& rng, const SamplingConfig& config) {
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        RawCameraDraw draw = sample_raw_params(rng, config);
        CameraParams params;
        params.vfov = focal_mm_to_vfov(draw.focal_mm, config.sensor_height_mm);
        params.midpoint = draw.midpoint;
        params.roll = draw.roll;
        params.yaw = draw.yaw;
        params.aspect = draw.aspect;
        params.focal_mm = draw.focal_mm;
        if (params_within_codec_ranges(params)) {
            return params;
        }
    }
    throw std::runtime_error("camera parameter sampling exceeded 10000 rejections");
}

namespace {

double bilinear_channel(const Image& pano, double x, double y, int c) {
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    double fx = x - x0;
    double fy = y - y0;

    auto wrap_x = [&](int xi) {
        int m = xi % pano.width;
        return m < 0 ? m + pano.width : m;
    };
    auto clamp_y = [&](int yi) { return std::clamp(yi, 0, pano.height - 1); };

    double v00 = pano.at(wrap_x(x0), clamp_y(y0), c);
    double v10 = pano.at(wrap_x(x0 + 1), clamp_y(y0), c);
    double v01 = pano.at(wrap_x(x0), clamp_y(y0 + 1), c);
    double v11 = pano.at(wrap_x(x0 + 1), clamp_y(y0 + 1), c);
    return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
}

} // namespace

Image extract_crop(const Image& pano, double yaw, double pitch, double roll, double vfov,
                   double aspect, int out_size) {
    if (pano.empty() || pano.width != 2 * pano.height) {
        throw std::invalid_argument("panorama must be a non-empty 2:1 equirectangular raster");
    }
    if (!(vfov > 0.0 && vfov < kPi)) {
        throw std::invalid_argument("vertical field of view must lie in (0, pi)");
    }
    if (!(aspect > 0.0)) throw std::invalid_argument("aspect must be positive");
    if (out_size < 2) throw std::invalid_argument("out_size must be at least 2");

    Image crop = Image::make(out_size, out_size, pano.channels);
    Eigen::Matrix3d cam_to_world = rotation_from_angles(pitch, roll, yaw).transpose();
    double tan_half = std::tan(vfov / 2.0);
    double half = out_size / 2.0;

    for (int i = 0; i < out_size; ++i) {
        double y_units = (half - (i + 0.5)) / half;
        for (int j = 0; j < out_size; ++j) {
            double x_units = ((j + 0.5) - half) / half * aspect;
            Eigen::Vector3d dir =
                cam_to_world * Eigen::Vector3d(x_units * tan_half, y_units * tan_half, 1.0);
            double lon = std::atan2(dir.x(), dir.z());
            double lat = std::atan2(dir.y(), std::hypot(dir.x(), dir.z()));

            double px = (lon + kPi) / (2.0 * kPi) * pano.width - 0.5;
            double py = (kPi / 2.0 - lat) / kPi * pano.height - 0.5;
            for (int c = 0; c < pano.channels; ++c) {
                double v = bilinear_channel(pano, px, py, c);
                crop.at(j, i, c) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            }
        }
    }
    return crop;
}

std::string to_string(Split split) {
    switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    }
    throw std::invalid_argument("unknown split");
}

Split split_from_string(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "val") return Split::val;
    if (name == "test") return Split::test;
    throw std::invalid_argument("unknown split: " + name);
}

Split split_for_pano(const std::string& pano_id, const SplitFractions& fractions) {
    double total = fractions.train + fractions.val + fractions.test;
    if (!(fractions.train >= 0.0 && fractions.val >= 0.0 && fractions.test >= 0.0) ||
        std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("split fractions must be nonnegative and sum to 1");
    }
    double u = static_cast<double>(fnv1a64(pano_id) >> 11) * 0x1.0p-53;
    if (u < fractions.train) return Split::train;
    if (u < fractions.train + fractions.val) return Split::val;
    return Split::test;
}

namespace {

nlohmann::ordered_json record_to_json(const CropRecord& record) {
    nlohmann::ordered_json j;
    j["pano_id"] = record.pano_id;
    j["crop_id"] = record.crop_id;
    j["image_path"] = record.image_path;
    j["vfov_rad"] = record.vfov;
    j["midpoint_units"] = record.midpoint;
    j["roll_rad"] = record.roll;
    j["yaw_rad"] = record.yaw;
    j["aspect_w"] = record.aspect_w;
    j["aspect_h"] = record.aspect_h;
    j["split"] = to_string(record.split);
    return j;
}

CropRecord record_from_json(const nlohmann::json& j) {
    CropRecord record;
    record.pano_id = j.at("pano_id").get<std::string>();
    record.crop_id = j.at("crop_id").get<std::string>();
    record.image_path = j.at("image_path").get<std::string>();
    record.vfov = j.at("vfov_rad").get<double>();
    record.midpoint = j.at("midpoint_units").get<double>();
    record.roll = j.at("roll_rad").get<double>();
    record.yaw = j.at("yaw_rad").get<double>();
    record.aspect_w = j.at("aspect_w").get<int>();
    record.aspect_h = j.at("aspect_h").get<int>();
    record.split = split_from_string(j.at("split").get<std::string>());
    return record;
}

bool has_image_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

} // namespace

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest " + path.string());
    for (const CropRecord& record : manifest.records) {
        out << record_to_json(record).dump() << '\n';
    }
}

std::vector<CropRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path.string());
    std::vector<CropRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

DatasetManifest build_dataset(const std::filesystem::path& pano_dir,
                              const std::filesystem::path& out_dir, const SamplingConfig& config,
                              std::uint64_t seed, const SplitFractions& fractions) {
    config.validate();
    if (!std::filesystem::is_directory(pano_dir)) {
        throw std::runtime_error("panorama directory not found: " + pano_dir.string());
    }

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(pano_dir)) {
        if (entry.is_regular_file() && has_image_extension(entry.path())) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    std::filesystem::create_directories(out_dir / "crops");

    DatasetManifest manifest;
    manifest.seed = seed;
    manifest.config = config;

    UniformRng rng(seed);
    for (const auto& file : files) {
        Image pano;
        try {
            pano = load_image(file);
        } catch (const std::exception& e) {
            std::cerr << "warning: skipping unreadable panorama " << file << ": " << e.what() << '\n';
            continue;
        }
        if (pano.width != 2 * pano.height || pano.height < 2) {
            std::cerr << "warning: skipping non-equirectangular panorama " << file << " ("
                      << pano.width << "x" << pano.height << ")\n";
            continue;
        }

        std::string pano_id = file.stem().string();
        Split split = split_for_pano(pano_id, fractions);
        for (int k = 0; k < config.crops_per_pano; ++k) {
            CameraParams params = sample_camera_params(rng, config);
            double pitch = pitch_from_midpoint(params.midpoint, params.vfov);
            Image crop = extract_crop(pano, params.yaw, pitch, params.roll, params.vfov,
                                      params.aspect.ratio(), config.out_size);

            CropRecord record;
            record.pano_id = pano_id;
            record.crop_id = pano_id + "_" + std::to_string(k);
            record.image_path = "crops/" + record.crop_id + ".png";
            record.vfov = params.vfov;
            record.midpoint = params.midpoint;
            record.roll = params.roll;
            record.yaw = params.yaw;
            record.aspect_w = params.aspect.w;
            record.aspect_h = params.aspect.h;
            record.split = split;

            save_png(crop, out_dir / record.image_path);
            manifest.records.push_back(std::move(record));
        }
    }

    if (manifest.records.empty()) {
        throw std::runtime_error("no usable panoramas in " + pano_dir.string());
    }

    save_manifest(manifest, out_dir / "manifest.jsonl");

    nlohmann::ordered_json run;
    run["seed"] = seed;
    run["split_fractions"] = {{"train", fractions.train}, {"val", fractions.val}, {"test", fractions.test}};
    run["config"] = nlohmann::ordered_json::parse(sampling_config_to_json(config));
    std::ofstream cfg(out_dir / "run_config.json");
    cfg << run.dump(2) << '\n';

    return manifest;
}

} // namespace calib
