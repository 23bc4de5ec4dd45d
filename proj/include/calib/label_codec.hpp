#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace calib {

inline constexpr int kBinCount = 256;

enum class ParamKind { slope, offset, vfov };

std::string to_string(ParamKind kind);
ParamKind param_kind_from_string(const std::string& name);

/// Fixed discretization of one calibration parameter into 256 bins.
///
/// vfov bins are uniform over [0.2, 1.8] rad. Slope and offset bins are the
/// equal-probability quantiles of a zero-mean normal truncated to the
/// parameter range (sigma 0.5 for slope over [-pi/2, pi/2], sigma 1 for
/// offset over [-1.6, 1.6]), giving narrow bins near 0 and wide ones at the
/// range ends.
struct BinSpec {
    ParamKind kind = ParamKind::vfov;
    std::vector<double> edges;   // 257 strictly increasing, ends exactly on the range bounds
    std::vector<double> centers; // 256 midpoints of adjacent edges

    double range_min() const { return edges.front(); }
    double range_max() const { return edges.back(); }
};

struct LabelDistribution {
    std::vector<double> probs; // 256 nonnegative reals summing to 1
};

BinSpec make_bins(ParamKind kind);

/// Index of the bin containing `value`; values exactly on an interior edge go
/// to the higher bin. Throws std::invalid_argument when out of range.
int bin_index(double value, const BinSpec& spec);

/// One-hot distribution on the containing bin.
LabelDistribution encode(double value, const BinSpec& spec);

enum class DecodeMode { expectation, argmax };

double decode(const LabelDistribution& dist, const BinSpec& spec,
              DecodeMode mode = DecodeMode::expectation);

/// KL divergence D(target || pred) for one head, with pred floored at 1e-12
/// inside the log and 0*log(0) taken as 0.
double kl_divergence(const LabelDistribution& pred, const LabelDistribution& target);

/// Sum of the per-head divergences over the three heads.
double kl_loss(const std::array<LabelDistribution, 3>& pred,
               const std::array<LabelDistribution, 3>& target);

std::string bin_spec_to_json(const BinSpec& spec);
BinSpec bin_spec_from_json(const std::string& text);

} // namespace calib
