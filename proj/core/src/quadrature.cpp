#include "dlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "dlab/error.hpp"

namespace dlab {
namespace {

TimeRule build_gauss_legendre(int q) {
    TimeRule rule;
    rule.nodes.resize(static_cast<std::size_t>(q));
    rule.weights.resize(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= q; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = q * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= q; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = q * (x * p1 - p0) / (x * x - 1.0);
        const auto j = static_cast<std::size_t>(q - 1 - i);
        rule.nodes[j] = x;
        rule.weights[j] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

const TimeRule& gauss_legendre(int points) {
    require(points >= 1 && points <= 64, ErrorCode::InvalidArgument, "Gauss-Legendre order out of range");
    static std::mutex m;
    static std::map<int, TimeRule> cache;
    std::lock_guard lock(m);
    auto it = cache.find(points);
    if (it == cache.end()) it = cache.emplace(points, build_gauss_legendre(points)).first;
    return it->second;
}

TimeRule composite_gauss_legendre(const Interval& interval, std::size_t panels) {
    require(panels >= 1, ErrorCode::InvalidArgument, "at least one panel required");
    require(interval.t1 > interval.t0, ErrorCode::InvalidArgument, "interval must satisfy t1 > t0");
    const TimeRule& base = gauss_legendre(kGaussPointsPerPanel);
    const double h = interval.length() / static_cast<double>(panels);
    TimeRule rule;
    rule.nodes.reserve(panels * base.nodes.size());
    rule.weights.reserve(panels * base.nodes.size());
    for (std::size_t k = 0; k < panels; ++k) {
        const double a = interval.t0 + h * static_cast<double>(k);
        for (std::size_t i = 0; i < base.nodes.size(); ++i) {
            rule.nodes.push_back(a + 0.5 * h * (base.nodes[i] + 1.0));
            rule.weights.push_back(0.5 * h * base.weights[i]);
        }
    }
    return rule;
}

}  // namespace dlab
