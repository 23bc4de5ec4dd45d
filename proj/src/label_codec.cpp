#include "calib/label_codec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "calib/angles.hpp"
#include "calib/stats.hpp"

namespace calib {

namespace {

constexpr double kKlFloor = 1e-12;
constexpr double kVfovMin = 0.2;
constexpr double kVfovMax = 1.8;
constexpr double kOffsetBound = 1.6;

struct Range {
    double lo;
    double hi;
};

Range range_for(ParamKind kind) {
    switch (kind) {
    case ParamKind::slope: return {-kPi / 2.0, kPi / 2.0};
    case ParamKind::offset: return {-kOffsetBound, kOffsetBound};
    case ParamKind::vfov: return {kVfovMin, kVfovMax};
    }
    throw std::invalid_argument("unknown parameter kind");
}

// Equal-probability edges of N(0, sigma) truncated to [-bound, bound].
// Computed for the lower half and mirrored, so edges[i] == -edges[256 - i]
// holds exactly.
std::vector<double> quantile_edges(double sigma, double bound) {
    std::vector<double> edges(kBinCount + 1);
    double tail = normal_cdf(-bound / sigma);
    double span = 1.0 - 2.0 * tail;
    edges[0] = -bound;
    edges[kBinCount] = bound;
    edges[kBinCount / 2] = 0.0;
    for (int i = 1; i < kBinCount / 2; ++i) {
        double p = tail + span * (static_cast<double>(i) / kBinCount);
        double e = sigma * normal_quantile(p);
        edges[i] = e;
        edges[kBinCount - i] = -e;
    }
    return edges;
}

std::vector<double> uniform_edges(double lo, double hi) {
    std::vector<double> edges(kBinCount + 1);
    double width = (hi - lo) / kBinCount;
    for (int i = 0; i <= kBinCount; ++i) {
        edges[i] = lo + i * width;
    }
    edges[kBinCount] = hi;
    return edges;
}

void require_distribution(const LabelDistribution& dist, const char* who) {
    if (dist.probs.size() != kBinCount) {
        throw std::invalid_argument(std::string(who) + ": distribution must have 256 entries");
    }
    double sum = 0.0;
    for (double p : dist.probs) {
        if (!(p >= 0.0)) {
            throw std::invalid_argument(std::string(who) + ": probabilities must be nonnegative");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument(std::string(who) + ": probabilities must sum to 1");
    }
}

} // namespace

std::string to_string(ParamKind kind) {
    switch (kind) {
    case ParamKind::slope: return "slope";
    case ParamKind::offset: return "offset";
    case ParamKind::vfov: return "vfov";
    }
    throw std::invalid_argument("unknown parameter kind");
}

ParamKind param_kind_from_string(const std::string& name) {
    if (name == "slope") return ParamKind::slope;
    if (name == "offset") return ParamKind::offset;
    if (name == "vfov") return ParamKind::vfov;
    throw std::invalid_argument("unknown parameter kind: " + name);
}

BinSpec make_bins(ParamKind kind) {
    BinSpec spec;
    spec.kind = kind;
    Range range = range_for(kind);
    switch (kind) {
    case ParamKind::vfov:
        spec.edges = uniform_edges(range.lo, range.hi);
        break;
    case ParamKind::slope:
        spec.edges = quantile_edges(0.5, range.hi);
        break;
    case ParamKind::offset:
        spec.edges = quantile_edges(1.0, range.hi);
        break;
    }
    spec.centers.resize(kBinCount);
    for (int i = 0; i < kBinCount; ++i) {
        spec.centers[i] = 0.5 * (spec.edges[i] + spec.edges[i + 1]);
    }
    return spec;
}

int bin_index(double value, const BinSpec& spec) {
    if (!(value >= spec.range_min() && value <= spec.range_max())) {
        throw std::invalid_argument(to_string(spec.kind) + " value out of range");
    }
    if (value == spec.range_max()) {
        return kBinCount - 1;
    }
    // First edge strictly greater than value; ties on an edge move up a bin.
    auto it = std::upper_bound(spec.edges.begin(), spec.edges.end(), value);
    return static_cast<int>(it - spec.edges.begin()) - 1;
}

LabelDistribution encode(double value, const BinSpec& spec) {
    LabelDistribution dist;
    dist.probs.assign(kBinCount, 0.0);
    dist.probs[static_cast<std::size_t>(bin_index(value, spec))] = 1.0;
    return dist;
}

double decode(const LabelDistribution& dist, const BinSpec& spec, DecodeMode mode) {
    require_distribution(dist, "decode");
    if (mode == DecodeMode::argmax) {
        auto it = std::max_element(dist.probs.begin(), dist.probs.end());
        return spec.centers[static_cast<std::size_t>(it - dist.probs.begin())];
    }
    double value = 0.0;
    for (int i = 0; i < kBinCount; ++i) {
        value += dist.probs[i] * spec.centers[i];
    }
    return value;
}

double kl_divergence(const LabelDistribution& pred, const LabelDistribution& target) {
    require_distribution(pred, "kl_divergence(pred)");
    require_distribution(target, "kl_divergence(target)");
    double total = 0.0;
    for (int i = 0; i < kBinCount; ++i) {
        double t = target.probs[i];
        if (t == 0.0) continue;
        double p = std::max(pred.probs[i], kKlFloor);
        total += t * (std::log(t) - std::log(p));
    }
    return std::max(total, 0.0);
}

double kl_loss(const std::array<LabelDistribution, 3>& pred,
               const std::array<LabelDistribution, 3>& target) {
    double total = 0.0;
    for (std::size_t head = 0; head < 3; ++head) {
        total += kl_divergence(pred[head], target[head]);
    }
    return total;
}

std::string bin_spec_to_json(const BinSpec& spec) {
    nlohmann::ordered_json j;
    j["param"] = to_string(spec.kind);
    j["edges"] = spec.edges;
    return j.dump();
}

BinSpec bin_spec_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    BinSpec spec;
    spec.kind = param_kind_from_string(j.at("param").get<std::string>());
    spec.edges = j.at("edges").get<std::vector<double>>();
    if (spec.edges.size() != kBinCount + 1) {
        throw std::invalid_argument("bin spec must carry 257 edges");
    }
    for (std::size_t i = 1; i < spec.edges.size(); ++i) {
        if (!(spec.edges[i] > spec.edges[i - 1])) {
            throw std::invalid_argument("bin edges must be strictly increasing");
        }
    }
    spec.centers.resize(kBinCount);
    for (int i = 0; i < kBinCount; ++i) {
        spec.centers[i] = 0.5 * (spec.edges[i] + spec.edges[i + 1]);
    }
    return spec;
}

} // namespace calib
