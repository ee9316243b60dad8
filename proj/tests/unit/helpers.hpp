#pragma once

#include <concepts>
#include <random>

#include "fbfp/linalg.hpp"

namespace testutil {

inline fbfp::Vector randn(std::mt19937_64& rng, fbfp::Index n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    fbfp::Vector v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

template <std::integral I>
inline fbfp::Matrix randn(std::mt19937_64& rng, fbfp::Index r, I c) {
    std::normal_distribution<double> g(0.0, 1.0);
    fbfp::Matrix m(r, c);
    for (fbfp::Index i = 0; i < r; ++i)
        for (fbfp::Index j = 0; j < c; ++j) m(i, j) = g(rng);
    return m;
}

inline fbfp::Matrix random_psd(std::mt19937_64& rng, fbfp::Index n) {
    const fbfp::Matrix G = randn(rng, n, n);
    return G * G.transpose() / static_cast<double>(n);
}

inline fbfp::Vector vec(std::initializer_list<double> xs) {
    fbfp::Vector v(static_cast<fbfp::Index>(xs.size()));
    fbfp::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

inline double max_abs(const fbfp::Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace testutil
