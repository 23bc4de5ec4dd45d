#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "calib/camera_model.hpp"
#include "calib/panorama_sampler.hpp"

namespace calib {

struct RetrievalEntry {
    std::string image_id;
    HorizonFeature feature;
};

struct RetrievalMatch {
    std::string image_id;
    double distance = 0.0;
};

/// Horizon-feature index over an image corpus. Immutable once built; queries
/// rank entries by Euclidean distance in (y_left, y_right) space, ties broken
/// by image id.
class RetrievalIndex {
public:
    RetrievalIndex() = default;

    /// Validates id uniqueness; duplicate ids are a hard error.
    explicit RetrievalIndex(std::vector<RetrievalEntry> entries);

    static RetrievalIndex from_manifest(const std::vector<CropRecord>& records);

    std::vector<RetrievalMatch> query(const HorizonFeature& feature, std::size_t top_k) const;

    const std::vector<RetrievalEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    const RetrievalEntry* find(const std::string& image_id) const;

    void save(const std::filesystem::path& path) const;
    static RetrievalIndex load(const std::filesystem::path& path);

private:
    std::vector<RetrievalEntry> entries_;
};

} // namespace calib
