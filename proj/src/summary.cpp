#include "calib/summary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace calib {

double interpolated_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    double pos = q * (static_cast<double>(values.size()) - 1.0);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

ParamErrorSummary summarize_param(const std::string& name, const std::vector<double>& truths,
                                  const std::vector<double>& errors, int bin_count) {
    ParamErrorSummary summary;
    summary.param = name;

    double lo = *std::min_element(truths.begin(), truths.end());
    double hi = *std::max_element(truths.begin(), truths.end());
    double width = (hi - lo) / bin_count;

    std::vector<std::vector<double>> buckets(static_cast<std::size_t>(bin_count));
    for (std::size_t i = 0; i < truths.size(); ++i) {
        int idx = 0;
        if (width > 0.0) {
            idx = std::min(static_cast<int>((truths[i] - lo) / width), bin_count - 1);
        }
        buckets[static_cast<std::size_t>(idx)].push_back(errors[i]);
    }

    for (int b = 0; b < bin_count; ++b) {
        BinStats stats;
        stats.lo = lo + b * width;
        stats.hi = (b == bin_count - 1) ? hi : lo + (b + 1) * width;
        stats.count = buckets[static_cast<std::size_t>(b)].size();
        if (stats.count > 0) {
            const auto& sample = buckets[static_cast<std::size_t>(b)];
            stats.quartiles.q1 = interpolated_quantile(sample, 0.25);
            stats.quartiles.median = interpolated_quantile(sample, 0.5);
            stats.quartiles.q3 = interpolated_quantile(sample, 0.75);
        }
        summary.bins.push_back(stats);
    }
    return summary;
}

} // namespace

ErrorSummary summarize_errors(
    const std::vector<std::pair<CameraCalibration, CameraCalibration>>& pairs, int bin_count) {
    if (pairs.empty()) throw std::invalid_argument("summarize_errors: no pairs");
    if (bin_count < 1) throw std::invalid_argument("summarize_errors: bin_count must be >= 1");

    std::vector<double> vfov_true, vfov_err, mid_true, mid_err, roll_true, roll_err;
    vfov_true.reserve(pairs.size());
    for (const auto& [gt, pred] : pairs) {
        vfov_true.push_back(gt.vfov);
        vfov_err.push_back(pred.vfov - gt.vfov);
        mid_true.push_back(gt.midpoint);
        mid_err.push_back(pred.midpoint - gt.midpoint);
        roll_true.push_back(gt.roll);
        roll_err.push_back(pred.roll - gt.roll);
    }

    ErrorSummary summary;
    summary.vfov = summarize_param("vfov", vfov_true, vfov_err, bin_count);
    summary.midpoint = summarize_param("midpoint", mid_true, mid_err, bin_count);
    summary.roll = summarize_param("roll", roll_true, roll_err, bin_count);

    std::vector<double> abs_err(vfov_err.size());
    std::transform(vfov_err.begin(), vfov_err.end(), abs_err.begin(),
                   [](double e) { return std::abs(e); });
    std::sort(abs_err.begin(), abs_err.end());
    summary.vfov_abs_error_cdf.reserve(abs_err.size());
    for (std::size_t i = 0; i < abs_err.size(); ++i) {
        summary.vfov_abs_error_cdf.emplace_back(
            abs_err[i], static_cast<double>(i + 1) / static_cast<double>(abs_err.size()));
    }
    return summary;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_param_rows(const ParamErrorSummary& summary, std::ostream& out) {
    for (const BinStats& bin : summary.bins) {
        out << summary.param << ',' << fmt(bin.lo) << ',' << fmt(bin.hi) << ',' << bin.count;
        if (bin.count > 0) {
            out << ',' << fmt(bin.quartiles.q1) << ',' << fmt(bin.quartiles.median) << ','
                << fmt(bin.quartiles.q3);
        } else {
            out << ",,,";
        }
        out << '\n';
    }
}

} // namespace

void write_summary_csv(const ErrorSummary& summary, std::ostream& out) {
    out << "param,bin_lo,bin_hi,count,q1,median,q3\n";
    write_param_rows(summary.vfov, out);
    write_param_rows(summary.midpoint, out);
    write_param_rows(summary.roll, out);
    out << '\n';
    out << "vfov_abs_error,cdf\n";
    for (const auto& [value, fraction] : summary.vfov_abs_error_cdf) {
        out << fmt(value) << ',' << fmt(fraction) << '\n';
    }
}

} // namespace calib
