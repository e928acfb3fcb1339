#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "belief/stats/resampling.hpp"

namespace belief::stats {

/// Linear-interpolation quantile (the "type 7" rule) of an unsorted sample.
template <typename Derived>
typename Derived::Scalar quantile(const Eigen::MatrixBase<Derived>& x, double q) {
    using Scalar = typename Derived::Scalar;
    if (x.size() == 0) return std::numeric_limits<Scalar>::quiet_NaN();
    std::vector<Scalar> v(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) v[static_cast<std::size_t>(i)] = x(i);
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + Scalar(h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

template <typename Derived>
typename Derived::Scalar median(const Eigen::MatrixBase<Derived>& x) {
    return quantile(x, 0.5);
}

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

inline Summary summarize(const Eigen::Ref<const Eigen::VectorXd>& x) {
    Summary s;
    s.n = static_cast<std::size_t>(x.size());
    if (x.size() == 0) return s;
    const Eigen::VectorXd v = x;
    s.mean = v.mean();
    s.sd = sample_sd(v);
    s.median = median(v);
    s.q1 = quantile(v, 0.25);
    s.q3 = quantile(v, 0.75);
    return s;
}

}  // namespace belief::stats
