#pragma once

#include <cmath>
#include <stdexcept>

namespace vulnreach {

template <typename Scalar>
BasicEmbedding<Scalar> BasicEmbedding<Scalar>::normalized(const Eigen::Ref<const Vector>& raw) {
    if (raw.size() == 0)
        throw std::invalid_argument("embedding has zero dimensions");
    const Scalar norm = raw.norm();
    if (!(norm > Scalar(0)) || !std::isfinite(norm))
        throw std::invalid_argument("embedding cannot be normalized (norm is zero or not finite)");
    return BasicEmbedding(raw / norm);
}

template <typename Scalar>
BasicEmbedding<Scalar> BasicEmbedding<Scalar>::from_unit(Vector unit) {
    if (unit.size() == 0)
        throw std::invalid_argument("embedding has zero dimensions");
    if (std::abs(unit.norm() - Scalar(1)) > kNormTolerance)
        throw std::invalid_argument("embedding is not unit norm");
    return BasicEmbedding(std::move(unit));
}

} // namespace vulnreach
