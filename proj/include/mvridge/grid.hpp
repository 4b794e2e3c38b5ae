#pragma once

#include <cmath>
#include <stdexcept>

#include "mvridge/types.hpp"

namespace mvridge {

/// Logarithmically spaced analysis frequencies (radian, strictly decreasing)
/// and the matching scales s = peak_frequency / frequency (strictly increasing).
struct ScaleGrid {
    Eigen::VectorXd frequencies;  // radian per unit time, decreasing
    Eigen::VectorXd scales;       // increasing
    double peak_frequency = 1.0;  // of the wavelet the scales refer to

    static ScaleGrid logspace(Eigen::Index levels, double f_min, double f_max, double peak_frequency) {
        if (levels < 2) throw std::invalid_argument("ScaleGrid: need at least 2 levels");
        if (!(f_min > 0.0) || !(f_min < f_max))
            throw std::invalid_argument("ScaleGrid: need 0 < f_min < f_max");
        ScaleGrid g;
        g.peak_frequency = peak_frequency;
        g.frequencies.resize(levels);
        g.scales.resize(levels);
        const double step = (std::log(f_max) - std::log(f_min)) / static_cast<double>(levels - 1);
        for (Eigen::Index j = 0; j < levels; ++j) {
            g.frequencies[j] = std::exp(std::log(f_max) - step * static_cast<double>(j));
            g.scales[j] = peak_frequency / g.frequencies[j];
        }
        return g;
    }

    Eigen::Index levels() const { return frequencies.size(); }

    /// Log-scale spacing between adjacent levels (uniform by construction).
    double log_spacing() const {
        return std::log(scales[1]) - std::log(scales[0]);
    }
};

}  // namespace mvridge
