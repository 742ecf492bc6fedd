#pragma once

#include <cstddef>
#include <vector>

namespace dlab {

struct Interval {
    double t0 = 0.0;
    double t1 = 1.0;

    double length() const noexcept { return t1 - t0; }
};

// Nodes and weights of a composite rule, ordered by increasing time.
struct TimeRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline constexpr int kGaussPointsPerPanel = 16;

// Gauss-Legendre nodes/weights on [-1, 1] (Newton iteration on P_q).
const TimeRule& gauss_legendre(int points);

// `panels` equal panels over the interval, each with the 16-point rule.
TimeRule composite_gauss_legendre(const Interval& interval, std::size_t panels);

}  // namespace dlab
