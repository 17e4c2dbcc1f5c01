#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "plagdet/classifiers/feature_matrix.hpp"
#include "plagdet/common.hpp"
#include "plagdet/rng.hpp"

namespace plagdet::fixture {

inline std::filesystem::path source_dir() { return PLAGDET_SOURCE_DIR; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("plagdet_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

/// Two unit-variance Gaussian blobs in the plane centred at
/// (centre - c, centre - c) and (centre + c, centre + c), n points
/// alternating between classes.
inline classifiers::FeatureMatrix blobs(size_t n, double c, std::uint64_t seed, double centre = 0.0)
{
    Rng rng(seed);
    classifiers::FeatureMatrix fm;
    for (size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % 2);
        const double s = centre + (y == 1 ? c : -c);
        fm.add({s + rng.normal(), s + rng.normal()}, y);
    }
    return fm;
}

/// Linearly separable blobs centred at (1, 1) and (5, 5); points closer than
/// margin / 2 to the separating line x + y = 6 are redrawn. Kept off the
/// origin so that kernels invariant under x -> -x can still separate them.
inline classifiers::FeatureMatrix separable_blobs(size_t n, double margin, std::uint64_t seed)
{
    Rng rng(seed);
    classifiers::FeatureMatrix fm;
    while (fm.size() < n) {
        const int y = static_cast<int>(fm.size() % 2);
        const double s = y == 1 ? 5.0 : 1.0;
        const double x0 = s + rng.normal(), x1 = s + rng.normal();
        const double dist = (x0 + x1 - 6.0) / std::sqrt(2.0);
        if ((y == 1 && dist >= margin / 2) || (y == 0 && dist <= -margin / 2))
            fm.add({x0, x1}, y);
    }
    return fm;
}

inline double accuracy_on(const classifiers::FeatureMatrix& fm, auto&& predict)
{
    size_t ok = 0;
    for (size_t i = 0; i < fm.size(); ++i)
        ok += (predict(fm.rows[i]) > 0.5 ? 1 : 0) == fm.labels[i];
    return static_cast<double>(ok) / static_cast<double>(fm.size());
}

} // namespace plagdet::fixture
