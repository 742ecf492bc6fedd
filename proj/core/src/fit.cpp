#include "dlab/fit.hpp"

#include <cmath>

#include "dlab/error.hpp"

namespace dlab {

FitResult loglog_fit(std::span<const FitPoint> points) {
    require(points.size() >= 3, ErrorCode::DegeneratePoints, "need at least 3 points for a fit");
    const double n = static_cast<double>(points.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& p : points) {
        require(std::isfinite(p.x) && std::isfinite(p.y), ErrorCode::DegeneratePoints,
                "non-finite point in fit");
        mean_x += p.x;
        mean_y += p.y;
    }
    mean_x /= n;
    mean_y /= n;

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        const double dx = p.x - mean_x;
        const double dy = p.y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    require(sxx > 0.0, ErrorCode::DegeneratePoints, "abscissae are not distinct");

    FitResult fit;
    fit.points.assign(points.begin(), points.end());
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;

    double ssr = 0.0;
    for (const auto& p : points) {
        const double r = p.y - (fit.intercept + fit.slope * p.x);
        ssr += r * r;
    }
    fit.stderr_slope = points.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
    fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    return fit;
}

}  // namespace dlab
