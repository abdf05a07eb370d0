#include "boltz/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "boltz/errors.hpp"
#include "boltz/stats.hpp"

namespace boltz {

namespace {

void require_plane(const Torus<double>& torus)
{
    if (torus.dim() != 2) throw Unsupported("planar configurations only");
}

void check_grid(std::span<const double> r, double eps)
{
    if (r.empty()) throw InvalidInput("empty r grid");
    if (!(eps > 0)) throw InvalidInput("bin half-width must be positive");
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (!(r[k] - eps >= 0)) throw InvalidInput("bins must lie at positive r");
        if (k > 0 && r[k] - r[k - 1] < 2 * eps * (1 - 1e-12)) throw InvalidInput("bins overlap");
    }
}

/// Index of the bin containing d, or -1.
long find_bin(std::span<const double> r, double eps, double d)
{
    auto it = std::lower_bound(r.begin(), r.end(), d - eps);
    for (; it != r.end() && *it < d + eps; ++it)
        if (std::abs(d - *it) < eps) return it - r.begin();
    return -1;
}

}  // namespace

std::string to_string(TimeUnit u)
{
    switch (u) {
    case TimeUnit::MetropolisSweep: return "metropolis_sweep";
    case TimeUnit::WolffStep: return "wolff_step";
    case TimeUnit::EcmcEventTime: return "ecmc_event_time";
    case TimeUnit::MdTime: return "md_time";
    }
    return "?";
}

TimeUnit time_unit_from_string(const std::string& s)
{
    for (auto u : {TimeUnit::MetropolisSweep, TimeUnit::WolffStep, TimeUnit::EcmcEventTime, TimeUnit::MdTime})
        if (to_string(u) == s) return u;
    throw InvalidInput("unknown time unit '" + s + "'");
}

std::span<const double> ObservableSeries::kept() const
{
    if (burn_in >= values.size()) throw InsufficientData("burn-in consumes the whole series");
    return std::span<const double>(values).subspan(burn_in);
}

double specific_heat_estimate(const ObservableSeries& energies, double beta)
{
    return beta * beta * sample_variance(energies.kept());
}

std::vector<double> autocorrelation(std::span<const double> x)
{
    const std::size_t n = x.size();
    if (n < 2) throw InsufficientData("need at least two values");
    double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    std::size_t m = 1;
    while (m < 2 * n) m <<= 1;
    std::vector<double> padded(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) padded[i] = x[i] - mean;
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, padded);
    for (auto& c : spec) c = std::norm(c);
    std::vector<double> acov;
    fft.inv(acov, spec);
    acov.resize(n);
    const double c0 = acov[0];
    if (!(c0 > 1e-300 * static_cast<double>(n))) throw InsufficientData("constant series");
    for (auto& c : acov) c /= c0;
    return acov;
}

double integrated_autocorrelation_time(std::span<const double> x)
{
    if (x.size() < 100) throw InsufficientData("need at least 100 values");
    const auto rho = autocorrelation(x);
    double sum = -1.0, prev = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; 2 * m + 1 < rho.size(); ++m) {
        double g = rho[2 * m] + rho[2 * m + 1];
        if (g <= 0) break;
        g = std::min(g, prev);
        sum += 2 * g;
        prev = g;
    }
    return sum;
}

double integrated_autocorrelation_time(const ObservableSeries& s) { return integrated_autocorrelation_time(s.kept()); }

NeighborSets neighbor_sets(const Positions& x, const Torus<double>& torus)
{
    require_plane(torus);
    const Eigen::Index n = x.cols();
    NeighborSets nb(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const Vec<double> s = min_sep_vector(x.col(i), x.col(j), torus);
            const Vec<double> mid = x.col(j) + s / 2;
            const double half = s.norm() / 2;
            bool blocked = false;
            for (Eigen::Index k = 0; k < n && !blocked; ++k) {
                if (k == i || k == j) continue;
                blocked = min_sep_distance(mid, x.col(k), torus) <= half;
            }
            if (!blocked) {
                nb[i].push_back(static_cast<int>(j));
                nb[j].push_back(static_cast<int>(i));
            }
        }
    return nb;
}

std::vector<std::optional<std::complex<double>>> local_orientation(const Positions& x, const Torus<double>& torus)
{
    return local_orientation(x, torus, neighbor_sets(x, torus));
}

std::vector<std::optional<std::complex<double>>> local_orientation(const Positions& x, const Torus<double>& torus,
                                                                   const NeighborSets& nb)
{
    require_plane(torus);
    std::vector<std::optional<std::complex<double>>> psi(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        if (nb[i].empty()) continue;
        std::complex<double> acc = 0;
        for (int j : nb[i]) {
            const Vec<double> s = min_sep_vector(x.col(i), x.col(j), torus);
            acc += std::polar(1.0, 6 * std::atan2(s[1], s[0]));
        }
        psi[i] = acc / static_cast<double>(nb[i].size());
    }
    return psi;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n)
{
    if (!(lo > 0 && hi > lo) || n < 2) throw InvalidInput("log grid needs 0 < lo < hi and n >= 2");
    std::vector<double> g(n);
    const double step = std::log(hi / lo) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) g[k] = lo * std::exp(step * static_cast<double>(k));
    g.back() = hi;
    return g;
}

CorrelationCurve positional_correlation(std::span<const Positions> ens, const Torus<double>& torus,
                                        std::span<const double> r, double eps)
{
    require_plane(torus);
    check_grid(r, eps);
    if (ens.empty()) throw InsufficientData("empty ensemble");
    std::vector<double> counts(r.size(), 0.0);
    for (const auto& x : ens)
        for (Eigen::Index i = 0; i < x.cols(); ++i)
            for (Eigen::Index j = i + 1; j < x.cols(); ++j) {
                const long b = find_bin(r, eps, min_sep_distance(x.col(i), x.col(j), torus));
                if (b >= 0) counts[b] += 1;
            }
    CorrelationCurve c;
    c.r.assign(r.begin(), r.end());
    c.half_width = eps;
    c.normalization = "mean unordered pair count per configuration";
    c.values.resize(r.size());
    c.pair_counts.resize(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        c.pair_counts[k] = counts[k] / static_cast<double>(ens.size());
        if (counts[k] > 0) c.values[k] = c.pair_counts[k];
    }
    return c;
}

CorrelationCurve orientational_correlation(std::span<const Positions> ens, const Torus<double>& torus,
                                           std::span<const double> r, double eps)
{
    require_plane(torus);
    check_grid(r, eps);
    if (ens.empty()) throw InsufficientData("empty ensemble");
    std::vector<double> counts(r.size(), 0.0), weights(r.size(), 0.0);
    double norm2 = 0;
    std::size_t with_psi = 0, excluded = 0;
    for (const auto& x : ens) {
        const auto psi = local_orientation(x, torus);
        for (const auto& p : psi) {
            if (!p) {
                ++excluded;
                continue;
            }
            norm2 += std::norm(*p);
            ++with_psi;
        }
        for (Eigen::Index i = 0; i < x.cols(); ++i) {
            if (!psi[i]) continue;
            for (Eigen::Index j = i + 1; j < x.cols(); ++j) {
                if (!psi[j]) continue;
                const long b = find_bin(r, eps, min_sep_distance(x.col(i), x.col(j), torus));
                if (b < 0) continue;
                counts[b] += 1;
                weights[b] += (std::conj(*psi[i]) * *psi[j]).real();
            }
        }
    }
    if (with_psi == 0) throw InsufficientData("no particle has neighbours");
    const double e_psi2 = norm2 / static_cast<double>(with_psi);
    if (!(e_psi2 > 0)) throw InsufficientData("orientation order vanishes identically");
    CorrelationCurve c;
    c.r.assign(r.begin(), r.end());
    c.half_width = eps;
    c.normalization = "mean of Re(conj(psi_i) psi_j) over unordered pairs per configuration, divided by mean |psi|^2";
    c.excluded = excluded;
    c.values.resize(r.size());
    c.pair_counts.resize(r.size());
    const double m = static_cast<double>(ens.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        c.pair_counts[k] = counts[k] / m;
        if (counts[k] > 0) c.values[k] = weights[k] / m / e_psi2;
    }
    return c;
}

double torus_disk_area(double r, const Torus<double>& torus)
{
    require_plane(torus);
    if (r <= 0) return 0;
    const double ax = torus.side(0) / 2, ay = torus.side(1) / 2;
    if (r * r >= ax * ax + ay * ay) return torus.volume();
    auto F = [r](double x) { return 0.5 * (x * std::sqrt(std::max(0.0, r * r - x * x)) + r * r * std::asin(std::min(1.0, x / r))); };
    // Quarter of the disk clipped to [0, ax] x [0, ay].
    double q;
    const double xe = std::min(r, ax);
    if (r <= ay) {
        q = F(xe);
    } else {
        const double x0 = std::sqrt(r * r - ay * ay);
        q = x0 >= ax ? ay * ax : ay * x0 + F(xe) - F(x0);
    }
    return 4 * q;
}

double torus_annulus_area(double lo, double hi, const Torus<double>& torus)
{
    return torus_disk_area(hi, torus) - torus_disk_area(lo, torus);
}

double contact_value(std::span<const Positions> ens, const DiskSpec& spec, std::size_t* pairs)
{
    require_plane(spec.torus);
    if (ens.empty()) throw InsufficientData("empty ensemble");
    const double sigma = disk_radius(spec);
    constexpr int bins = 10;
    const double lo = 2 * sigma, w = 0.1 * sigma / bins;
    std::vector<double> counts(bins, 0.0);
    std::size_t total = 0;
    for (const auto& x : ens)
        for (Eigen::Index i = 0; i < x.cols(); ++i)
            for (Eigen::Index j = i + 1; j < x.cols(); ++j) {
                const double d = min_sep_distance(x.col(i), x.col(j), spec.torus);
                if (d <= lo || d > lo + bins * w) continue;
                const int b = std::min(bins - 1, static_cast<int>(std::ceil((d - lo) / w)) - 1);
                counts[std::max(0, b)] += 1;
                ++total;
            }
    if (pairs) *pairs = total;
    const double n = spec.n, v = spec.torus.volume();
    const double ideal_pairs = n * n / (2 * v);
    std::vector<double> rc(bins), g(bins);
    for (int b = 0; b < bins; ++b) {
        const double a = lo + b * w;
        rc[b] = a + w / 2;
        g[b] = counts[b] / static_cast<double>(ens.size()) / (ideal_pairs * torus_annulus_area(a, a + w, spec.torus));
    }
    const auto fit = least_squares(rc, g);
    return fit.intercept + fit.slope * lo;
}

PressureEstimate pressure_estimate(const std::vector<std::vector<Positions>>& chains, const DiskSpec& spec,
                                   std::size_t min_contact_pairs)
{
    if (!spec.is_hard_disk()) throw InvalidInput("pressure estimator needs hard disks");
    if (chains.empty()) throw InsufficientData("no chains");
    const double sigma = disk_radius(spec), eta = spec.density();
    const double ideal = eta / (std::numbers::pi * sigma * sigma);
    PressureEstimate out;
    out.chains = chains.size();
    std::vector<Positions> all;
    std::vector<double> per_chain;
    for (const auto& c : chains) {
        std::size_t pairs = 0;
        const double g = contact_value(c, spec, &pairs);
        out.contact_pairs += pairs;
        per_chain.push_back(ideal * (1 + 2 * eta * g));
        all.insert(all.end(), c.begin(), c.end());
    }
    if (out.contact_pairs < min_contact_pairs)
        throw InsufficientData("only " + std::to_string(out.contact_pairs) + " pairs within 0.1 sigma of contact; need " +
                               std::to_string(min_contact_pairs) + " (about " +
                               std::to_string(min_contact_pairs * all.size() / std::max<std::size_t>(1, out.contact_pairs)) +
                               " configurations)");
    out.contact_g = contact_value(all, spec);
    out.beta_p = ideal * (1 + 2 * eta * out.contact_g);
    if (per_chain.size() >= 2) out.stderr_ = mean_error(per_chain).stderr_;
    return out;
}

}  // namespace boltz
