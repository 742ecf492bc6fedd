#pragma once

#include <span>
#include <utility>
#include <vector>

namespace dlab {

struct FitPoint {
    double x = 0.0;  // log N
    double y = 0.0;  // log of the normalized measurement
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double r_squared = 0.0;
    std::vector<FitPoint> points;
};

// Ordinary least squares y = slope*x + intercept. Requires at least three
// points with at least two distinct abscissae (DegeneratePoints otherwise).
FitResult loglog_fit(std::span<const FitPoint> points);

}  // namespace dlab
