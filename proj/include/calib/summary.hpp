#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "calib/camera_model.hpp"

namespace calib {

struct QuartileStats {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

struct BinStats {
    double lo = 0.0; // bin range over the true parameter value
    double hi = 0.0;
    std::size_t count = 0;
    QuartileStats quartiles; // meaningful only when count > 0
};

struct ParamErrorSummary {
    std::string param;
    std::vector<BinStats> bins;
};

/// Per-parameter estimation-error quartiles grouped by the true parameter
/// value, plus a CDF table of the absolute field-of-view error.
struct ErrorSummary {
    ParamErrorSummary vfov;     // radians
    ParamErrorSummary midpoint; // image units
    ParamErrorSummary roll;     // radians
    std::vector<std::pair<double, double>> vfov_abs_error_cdf; // (|error|, fraction <=)
};

/// Quantile by linear interpolation between order statistics.
double interpolated_quantile(std::vector<double> values, double q);

ErrorSummary summarize_errors(
    const std::vector<std::pair<CameraCalibration, CameraCalibration>>& pairs, int bin_count);

/// Two CSV tables: per-bin quartiles, then the |vfov error| CDF.
void write_summary_csv(const ErrorSummary& summary, std::ostream& out);

} // namespace calib
