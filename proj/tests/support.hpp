#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace testsupport {

/// Upper-tail p-value of Pearson's statistic against equal expected counts.
inline double chi_square_uniform_p(const std::vector<std::size_t>& counts)
{
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    const double expect = total / static_cast<double>(counts.size());
    double stat = 0;
    for (std::size_t c : counts) {
        const double diff = static_cast<double>(c) - expect;
        stat += diff * diff / expect;
    }
    if (counts.size() < 2)
        return 1.0;
    boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Homogeneity p-value for two histograms over the same cells.
inline double chi_square_two_sample_p(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b)
{
    const double na = static_cast<double>(std::accumulate(a.begin(), a.end(), std::size_t{0}));
    const double nb = static_cast<double>(std::accumulate(b.begin(), b.end(), std::size_t{0}));
    double stat = 0;
    std::size_t cells = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double col = static_cast<double>(a[i] + b[i]);
        if (col == 0)
            continue;
        ++cells;
        const double ea = col * na / (na + nb);
        const double eb = col * nb / (na + nb);
        stat += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
    }
    if (cells < 2)
        return 1.0;
    boost::math::chi_squared dist(static_cast<double>(cells - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

} // namespace testsupport
