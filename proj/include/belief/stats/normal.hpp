#pragma once

#include <cmath>
#include <numbers>

namespace belief::stats {

template <typename Scalar>
Scalar normal_pdf(Scalar z) {
    return std::exp(Scalar(-0.5) * z * z) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

template <typename Scalar>
Scalar normal_cdf(Scalar z) {
    return Scalar(0.5) * std::erfc(-z / std::numbers::sqrt2_v<Scalar>);
}

// Upper tail, accurate far into the tail.
template <typename Scalar>
Scalar normal_sf(Scalar z) {
    return Scalar(0.5) * std::erfc(z / std::numbers::sqrt2_v<Scalar>);
}

}  // namespace belief::stats
