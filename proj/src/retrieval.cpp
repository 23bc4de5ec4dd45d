#include "calib/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace calib {

namespace {

void require_unique_ids(const std::vector<RetrievalEntry>& entries) {
    std::unordered_set<std::string> seen;
    seen.reserve(entries.size());
    for (const RetrievalEntry& entry : entries) {
        if (!seen.insert(entry.image_id).second) {
            throw std::runtime_error("duplicate image id in retrieval index: " + entry.image_id);
        }
    }
}

} // namespace

RetrievalIndex::RetrievalIndex(std::vector<RetrievalEntry> entries) : entries_(std::move(entries)) {
    require_unique_ids(entries_);
}

RetrievalIndex RetrievalIndex::from_manifest(const std::vector<CropRecord>& records) {
    std::vector<RetrievalEntry> entries;
    entries.reserve(records.size());
    for (const CropRecord& record : records) {
        ImageDims dims{record.aspect_w, record.aspect_h};
        entries.push_back({record.crop_id, horizon_edge_intersections(record.calibration(), dims)});
    }
    return RetrievalIndex(std::move(entries));
}

std::vector<RetrievalMatch> RetrievalIndex::query(const HorizonFeature& feature,
                                                  std::size_t top_k) const {
    if (top_k < 1) throw std::invalid_argument("top_k must be at least 1");

    std::vector<RetrievalMatch> matches;
    matches.reserve(entries_.size());
    for (const RetrievalEntry& entry : entries_) {
        double dl = entry.feature.y_left - feature.y_left;
        double dr = entry.feature.y_right - feature.y_right;
        matches.push_back({entry.image_id, std::sqrt(dl * dl + dr * dr)});
    }

    auto closer = [](const RetrievalMatch& a, const RetrievalMatch& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.image_id < b.image_id;
    };
    std::size_t keep = std::min(top_k, matches.size());
    std::partial_sort(matches.begin(), matches.begin() + keep, matches.end(), closer);
    matches.resize(keep);
    return matches;
}

const RetrievalEntry* RetrievalIndex::find(const std::string& image_id) const {
    for (const RetrievalEntry& entry : entries_) {
        if (entry.image_id == image_id) return &entry;
    }
    return nullptr;
}

void RetrievalIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write index " + path.string());
    for (const RetrievalEntry& entry : entries_) {
        nlohmann::ordered_json j;
        j["image_id"] = entry.image_id;
        j["y_left"] = entry.feature.y_left;
        j["y_right"] = entry.feature.y_right;
        out << j.dump() << '\n';
    }
}

RetrievalIndex RetrievalIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open index " + path.string());
    std::vector<RetrievalEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            entries.push_back({j.at("image_id").get<std::string>(),
                               {j.at("y_left").get<double>(), j.at("y_right").get<double>()}});
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return RetrievalIndex(std::move(entries));
}

} // namespace calib
