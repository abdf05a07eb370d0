#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "boltz/observables.hpp"

namespace boltz::testing {

/// CDF of the minimal distance between two particles on a 2-torus whose joint density is
/// proportional to weight(distance), tabulated on a fine grid of the disk-area measure.
class PairDistanceLaw {
public:
    PairDistanceLaw(const Torus<double>& torus, const std::function<double(double)>& weight, int points = 40000)
    {
        r_max_ = 0.5 * torus.side_lengths().norm();
        r_.resize(points + 1);
        cdf_.resize(points + 1);
        double acc = 0;
        for (int k = 0; k <= points; ++k) {
            r_[k] = r_max_ * k / points;
            if (k > 0) {
                const double mid = 0.5 * (r_[k - 1] + r_[k]);
                acc += weight(mid) * torus_annulus_area(r_[k - 1], r_[k], torus);
            }
            cdf_[k] = acc;
        }
        for (auto& c : cdf_) c /= acc;
    }

    double operator()(double r) const
    {
        if (r <= 0) return 0;
        if (r >= r_max_) return 1;
        const double pos = r / r_max_ * (static_cast<double>(r_.size()) - 1);
        const auto k = static_cast<std::size_t>(pos);
        const double f = pos - static_cast<double>(k);
        return cdf_[k] + f * (cdf_[std::min(k + 1, cdf_.size() - 1)] - cdf_[k]);
    }

    /// Probability of each of `bins` equal-width bins on [lo, hi).
    Eigen::VectorXd bin_probabilities(double lo, double hi, int bins) const
    {
        Eigen::VectorXd p(bins);
        for (int b = 0; b < bins; ++b) p[b] = (*this)(lo + (hi - lo) * (b + 1) / bins) - (*this)(lo + (hi - lo) * b / bins);
        return p / p.sum();
    }

private:
    double r_max_ = 0;
    std::vector<double> r_, cdf_;
};

}  // namespace boltz::testing
