#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boltz/hard_disks.hpp"
#include "boltz/torus.hpp"

namespace boltz {

enum class TimeUnit { MetropolisSweep, WolffStep, EcmcEventTime, MdTime };

std::string to_string(TimeUnit u);
TimeUnit time_unit_from_string(const std::string& s);

struct ObservableSeries {
    std::vector<double> values;
    TimeUnit time_unit = TimeUnit::MetropolisSweep;
    std::size_t burn_in = 0;

    /// Values after the burn-in prefix.
    std::span<const double> kept() const;
};

/// beta^2 times the unbiased sample variance of the energy trace.
double specific_heat_estimate(const ObservableSeries& energies, double beta);

/// Normalized autocovariance of a series, lags 0 .. n - 1.
std::vector<double> autocorrelation(std::span<const double> x);

/// 1 + 2 sum rho(k), truncated by the initial monotone positive-sequence rule.
double integrated_autocorrelation_time(std::span<const double> x);
double integrated_autocorrelation_time(const ObservableSeries& s);

using NeighborSets = std::vector<std::vector<int>>;

/// i and j are neighbours when the midpoint of their minimal separation is strictly
/// closer to both of them than to any third particle.
NeighborSets neighbor_sets(const Positions& x, const Torus<double>& torus);

/// Psi_i = mean over neighbours of exp(6 i phi_ij); empty for particles without neighbours.
std::vector<std::optional<std::complex<double>>> local_orientation(const Positions& x, const Torus<double>& torus);
std::vector<std::optional<std::complex<double>>> local_orientation(const Positions& x, const Torus<double>& torus,
                                                                   const NeighborSets& nb);

/// Geometric grid of n points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct CorrelationCurve {
    std::vector<double> r;
    std::vector<std::optional<double>> values;
    std::vector<double> pair_counts;  ///< ensemble mean number of pairs per bin
    double half_width = 0;
    std::string normalization;
    std::size_t excluded = 0;  ///< particles dropped for lack of neighbours
};

/// Mean number of unordered pairs with | r - d_ij | < half_width; bins without pairs are missing.
CorrelationCurve positional_correlation(std::span<const Positions> ensemble, const Torus<double>& torus,
                                        std::span<const double> r, double half_width);

/// Same bins weighted by Re(conj(Psi_i) Psi_j), divided by the ensemble mean of |Psi|^2.
CorrelationCurve orientational_correlation(std::span<const Positions> ensemble, const Torus<double>& torus,
                                           std::span<const double> r, double half_width);

/// Area of the points of a 2-torus whose minimal distance from the origin is below r.
double torus_disk_area(double r, const Torus<double>& torus);

/// Area of the annulus lo <= |s| < hi on a 2-torus.
double torus_annulus_area(double lo, double hi, const Torus<double>& torus);

struct PressureEstimate {
    double beta_p = 0;
    double stderr_ = 0;
    double contact_g = 0;
    std::size_t contact_pairs = 0;
    std::size_t chains = 0;
};

/// beta p = (eta / (pi sigma^2)) (1 + 2 eta g(2 sigma)), with g extrapolated linearly
/// from ten bins on (2 sigma, 2.1 sigma]. g counts pairs against N^2 / (2 V).
/// Each inner vector is one chain; the error comes from the spread between chains.
PressureEstimate pressure_estimate(const std::vector<std::vector<Positions>>& chains, const DiskSpec& spec,
                                   std::size_t min_contact_pairs = 100);

/// Contact value of g for one set of configurations.
double contact_value(std::span<const Positions> ensemble, const DiskSpec& spec, std::size_t* pairs = nullptr);

}  // namespace boltz
