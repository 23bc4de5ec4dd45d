#include "calib/perceptual.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "calib/angles.hpp"
#include "calib/serde.hpp"

namespace calib {

double sensitivity_from_pct(double pct) {
    if (!(pct >= 0.0 && pct <= 100.0)) {
        throw std::invalid_argument("percentage must lie in [0, 100]");
    }
    double sensitivity = (pct - 50.0) / 50.0 * 100.0;
    return std::clamp(sensitivity, 0.0, 100.0);
}

SensitivityQuery query_from_record(const StudyRecord& record) {
    SensitivityQuery q;
    q.pitch_value = record.gt.midpoint;
    q.pitch_error = record.distorted.midpoint - record.gt.midpoint;
    q.roll_value = rad_to_deg(record.gt.roll);
    q.roll_error = rad_to_deg(record.distorted.roll - record.gt.roll);
    q.vfov_value = rad_to_deg(record.gt.vfov);
    q.vfov_error = rad_to_deg(record.distorted.vfov - record.gt.vfov);
    return q;
}

namespace {

std::array<double, 6> scaled(const SensitivityQuery& q) {
    return {q.pitch_value / kPitchToleranceUnits, q.pitch_error / kPitchToleranceUnits,
            q.roll_value / kRollToleranceDeg,     q.roll_error / kRollToleranceDeg,
            q.vfov_value / kVfovToleranceDeg,     q.vfov_error / kVfovToleranceDeg};
}

double squared_distance(const std::array<double, 6>& a, const std::array<double, 6>& b) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        double d = a[i] - b[i];
        d2 += d * d;
    }
    return d2;
}

} // namespace

double knn_sensitivity(const SensitivityQuery& query, const std::vector<StudyRecord>& records,
                       int k) {
    if (records.empty()) throw std::invalid_argument("study record list is empty");
    if (k < 1 || static_cast<std::size_t>(k) > records.size()) {
        throw std::invalid_argument("k must lie in [1, record count]");
    }

    std::array<double, 6> q = scaled(query);
    std::vector<std::pair<double, std::size_t>> dist(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        dist[i] = {squared_distance(q, scaled(query_from_record(records[i]))), i};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

    std::vector<std::size_t> picked(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) picked[i] = dist[i].second;
    std::sort(picked.begin(), picked.end());

    double sum = 0.0;
    for (std::size_t idx : picked) sum += records[idx].pct_chose_gt;
    return sensitivity_from_pct(sum / k);
}

DistortionSpec sample_distortion(UniformRng& rng, const DistortionMask& active) {
    if (!active.any()) {
        throw std::invalid_argument("at least one parameter must be distorted");
    }
    auto draw = [&](double lo, double hi) {
        double magnitude = rng.next_in(lo, hi);
        return rng.next() < 0.5 ? magnitude : -magnitude;
    };
    DistortionSpec spec;
    if (active.pitch) spec.d_pitch_deg = draw(kPitchDistortionMinDeg, kPitchDistortionMaxDeg);
    if (active.roll) spec.d_roll_deg = draw(kRollDistortionMinDeg, kRollDistortionMaxDeg);
    if (active.vfov) spec.d_vfov_deg = draw(kVfovDistortionMinDeg, kVfovDistortionMaxDeg);
    return spec;
}

Placement compensate_placement(const CameraCalibration& gt, const CameraCalibration& distorted,
                               const Eigen::Vector2d& anchor_px, double apparent_height_px,
                               const ImageDims& dims, double camera_height) {
    if (!(apparent_height_px > 0.0)) {
        throw std::invalid_argument("apparent height must be positive");
    }
    // Both throw NoGroundIntersectionError if the anchor misses the ground.
    unproject_to_ground(anchor_px, gt, dims, camera_height);
    unproject_to_ground(anchor_px, distorted, dims, camera_height);

    double scale = focal_px_from_vfov(gt.vfov, dims) / focal_px_from_vfov(distorted.vfov, dims);
    return Placement{anchor_px, scale};
}

namespace {

StudyRecord record_from_json_line(const nlohmann::json& j) {
    StudyRecord record;
    record.gt = calibration_from_json(j.at("gt"));
    record.distorted = calibration_from_json(j.at("distorted"));
    record.pct_chose_gt = j.at("pct_chose_gt").get<double>();
    record.n_votes = j.at("n_votes").get<int>();
    if (!(record.pct_chose_gt >= 0.0 && record.pct_chose_gt <= 100.0)) {
        throw std::invalid_argument("pct_chose_gt must lie in [0, 100]");
    }
    if (record.n_votes < 1) {
        throw std::invalid_argument("n_votes must be at least 1");
    }
    validate_calibration(record.gt);
    validate_calibration(record.distorted);
    return record;
}

} // namespace

std::vector<StudyRecord> load_study(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open study file " + path.string());
    std::vector<StudyRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json_line(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void save_study(const std::vector<StudyRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write study file " + path.string());
    for (const StudyRecord& record : records) {
        nlohmann::ordered_json j;
        j["gt"] = calibration_to_json(record.gt);
        j["distorted"] = calibration_to_json(record.distorted);
        j["pct_chose_gt"] = record.pct_chose_gt;
        j["n_votes"] = record.n_votes;
        out << j.dump() << '\n';
    }
}

double synthetic_detection_pct(const SensitivityQuery& query) {
    double pitch_term = std::abs(query.pitch_error) / kPitchToleranceUnits;
    double roll_tolerance_deg = 3.2 + 0.12 * std::abs(query.roll_value);
    double roll_term = std::abs(query.roll_error) / roll_tolerance_deg;
    double vfov_term = query.vfov_error >= 0.0 ? query.vfov_error / kVfovToleranceDeg
                                               : -query.vfov_error / 50.0;
    double d2 = pitch_term * pitch_term + roll_term * roll_term + vfov_term * vfov_term;
    // Quartic falloff: detection stays near confusion inside the tolerance
    // band and rises steeply past it.
    return 50.0 + 50.0 * (1.0 - std::exp(-0.8 * d2 * d2));
}

std::vector<StudyRecord> make_synthetic_study(UniformRng& rng, int count) {
    if (count < 1) throw std::invalid_argument("record count must be at least 1");
    std::vector<StudyRecord> records;
    records.reserve(static_cast<std::size_t>(count));

    // Magnitudes are concentrated toward the low end of each range so the
    // confusion-to-detection transition is densely sampled.
    auto draw_magnitude = [&](double lo, double hi) {
        double u = rng.next();
        double magnitude = lo + (hi - lo) * u * u * u;
        return rng.next() < 0.5 ? magnitude : -magnitude;
    };

    while (records.size() < static_cast<std::size_t>(count)) {
        StudyRecord record;
        record.gt.vfov = rng.next_in(0.35, 1.55);
        record.gt.midpoint = rng.next_in(-0.5, 0.5);
        record.gt.roll = deg_to_rad(rng.next_in(-20.0, 20.0));

        DistortionMask mask;
        // All seven non-empty parameter subsets, equally likely.
        int subset = 1 + static_cast<int>(rng.next() * 7.0);
        mask.pitch = (subset & 1) != 0;
        mask.roll = (subset & 2) != 0;
        mask.vfov = (subset & 4) != 0;
        DistortionSpec distortion;
        if (mask.pitch) {
            distortion.d_pitch_deg = draw_magnitude(kPitchDistortionMinDeg, kPitchDistortionMaxDeg);
        }
        if (mask.roll) {
            distortion.d_roll_deg = draw_magnitude(kRollDistortionMinDeg, kRollDistortionMaxDeg);
        }
        if (mask.vfov) {
            distortion.d_vfov_deg = draw_magnitude(kVfovDistortionMinDeg, kVfovDistortionMaxDeg);
        }

        record.distorted.vfov = record.gt.vfov + deg_to_rad(distortion.d_vfov_deg);
        record.distorted.roll = record.gt.roll + deg_to_rad(distortion.d_roll_deg);
        if (!(record.distorted.vfov > 0.2 && record.distorted.vfov < 1.8) ||
            std::abs(record.distorted.roll) > kPi / 2.0) {
            continue;
        }
        double pitch = pitch_from_midpoint(record.gt.midpoint, record.gt.vfov) +
                       deg_to_rad(distortion.d_pitch_deg);
        if (std::abs(pitch) >= kPi / 2.0 - 0.01) continue;
        record.distorted.midpoint = midpoint_from_pitch(pitch, record.distorted.vfov);

        record.pct_chose_gt = synthetic_detection_pct(query_from_record(record));
        record.n_votes = 11;
        records.push_back(record);
    }
    return records;
}

} // namespace calib
