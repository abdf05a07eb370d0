#include "boltz/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>

#include "boltz/errors.hpp"

namespace boltz {

MeanError mean_error(std::span<const double> v)
{
    if (v.size() < 2) throw InsufficientData("need at least two values");
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    return {m, std::sqrt(sample_variance(v) / static_cast<double>(v.size()))};
}

double sample_variance(std::span<const double> v)
{
    if (v.size() < 2) throw InsufficientData("need at least two values");
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

MeanError batch_means(std::span<const double> v, std::size_t batches)
{
    if (batches < 2 || v.size() < batches) throw InsufficientData("too few values for the requested batches");
    const std::size_t len = v.size() / batches;
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0;
        for (std::size_t k = 0; k < len; ++k) s += v[b * len + k];
        means[b] = s / static_cast<double>(len);
    }
    return mean_error(means);
}

double chi_square_sf(double x, double dof)
{
    if (x <= 0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

TestResult chi_square_gof(std::span<const double> observed, const Eigen::VectorXd& p, double min_expected)
{
    if (static_cast<Eigen::Index>(observed.size()) != p.size()) throw InvalidInput("observed and expected sizes differ");
    double n = 0;
    for (double o : observed) n += o;
    if (!(n > 0)) throw InsufficientData("no observations");
    double stat = 0, pooled_o = 0, pooled_e = 0;
    int cats = 0;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        const double e = n * p[static_cast<Eigen::Index>(k)];
        if (e < min_expected) {
            pooled_o += observed[k];
            pooled_e += e;
            continue;
        }
        stat += (observed[k] - e) * (observed[k] - e) / e;
        ++cats;
    }
    if (pooled_e > 0) {
        stat += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
        ++cats;
    }
    if (cats < 2) throw InsufficientData("fewer than two categories after pooling");
    const double dof = cats - 1;
    return {stat, dof, chi_square_sf(stat, dof)};
}

TestResult chi_square_homogeneity(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw InvalidInput("histograms must share bins");
    double na = 0, nb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        na += a[k];
        nb += b[k];
    }
    if (!(na > 0 && nb > 0)) throw InsufficientData("empty histogram");
    double stat = 0;
    int cols = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double col = a[k] + b[k];
        if (col == 0) continue;
        const double ea = col * na / (na + nb), eb = col * nb / (na + nb);
        stat += (a[k] - ea) * (a[k] - ea) / ea + (b[k] - eb) * (b[k] - eb) / eb;
        ++cols;
    }
    if (cols < 2) throw InsufficientData("fewer than two occupied bins");
    return {stat, double(cols - 1), chi_square_sf(stat, cols - 1)};
}

double kolmogorov_sf(double lambda)
{
    if (lambda <= 0) return 1.0;
    if (lambda < 1.18) {
        // Theta-function form, accurate for small arguments.
        const double pi = std::numbers::pi;
        const double y = std::exp(-pi * pi / (8 * lambda * lambda));
        double s = 0;
        for (int k = 1; k <= 40; k += 2) s += std::pow(y, k * k);
        return 1 - std::sqrt(2 * pi) / lambda * s;
    }
    double s = 0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 2 : -2) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

double ks_p_value(double D, double n_eff)
{
    const double rn = std::sqrt(n_eff);
    return kolmogorov_sf((rn + 0.12 + 0.11 / rn) * D);
}

TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf)
{
    if (samples.size() < 2) throw InsufficientData("need at least two samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double D = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        D = std::max({D, (i + 1) / n - F, F - i / n});
    }
    return {D, n, ks_p_value(D, n)};
}

TestResult batch_means_frequency_test(std::span<const int> states, const Eigen::VectorXd& p, std::size_t batches,
                                      double min_expected)
{
    const std::size_t n = states.size();
    if (batches < 3 || n < batches) throw InsufficientData("too few samples for the requested batches");
    // Categories: states with enough expected visits, plus one pooled remainder; the last
    // category is implied by the others and dropped.
    std::vector<int> category(static_cast<std::size_t>(p.size()), -1);
    int kept = 0;
    for (Eigen::Index s = 0; s < p.size(); ++s)
        if (p[s] * static_cast<double>(n) >= min_expected) category[s] = kept++;
    const int pooled = kept;
    int cats = kept + 1;
    double p_pooled = 0;
    for (Eigen::Index s = 0; s < p.size(); ++s)
        if (category[s] < 0) {
            category[s] = pooled;
            p_pooled += p[s];
        }
    if (p_pooled * static_cast<double>(n) < min_expected) {
        // Fold a too-small remainder into the last kept category.
        for (auto& c : category)
            if (c == pooled) c = kept - 1;
        cats = kept;
    }
    const int k = cats - 1;
    if (k < 1) throw InsufficientData("fewer than two categories after pooling");
    if (static_cast<std::size_t>(k) + 2 > batches) throw InsufficientData("more categories than batches");

    Eigen::VectorXd expect = Eigen::VectorXd::Zero(cats);
    for (Eigen::Index s = 0; s < p.size(); ++s) expect[category[s]] += p[s];

    const std::size_t len = n / batches;
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(batches));
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t t = 0; t < len; ++t) {
            const int st = states[b * len + t];
            if (st < 0 || st >= p.size()) throw InvalidInput("state index out of range");
            const int c = category[st];
            if (c < k) means(c, static_cast<Eigen::Index>(b)) += 1;
        }
    }
    means /= static_cast<double>(len);
    const Eigen::VectorXd mean = means.rowwise().mean();
    const Eigen::MatrixXd centered = means.colwise() - mean;
    const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(batches - 1);
    const Eigen::VectorXd diff = mean - expect.head(k);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0).all())
        throw InsufficientData("singular batch covariance");
    const double B = static_cast<double>(batches);
    const double t2 = B * diff.dot(ldlt.solve(diff));
    const double f = (B - k) / (k * (B - 1)) * t2;
    const double pval = boost::math::cdf(boost::math::complement(boost::math::fisher_f(k, B - k), f));
    return {f, double(k), pval};
}

std::vector<double> thin(std::span<const double> v, std::size_t stride)
{
    if (stride == 0) throw InvalidInput("stride must be positive");
    std::vector<double> out;
    out.reserve(v.size() / stride + 1);
    for (std::size_t i = 0; i < v.size(); i += stride) out.push_back(v[i]);
    return out;
}

std::vector<double> histogram(std::span<const double> v, double lo, double hi, std::size_t bins)
{
    if (!(hi > lo) || bins == 0) throw InvalidInput("bad histogram range");
    std::vector<double> h(bins, 0.0);
    const double w = (hi - lo) / static_cast<double>(bins);
    for (double x : v) {
        if (!(x >= lo && x < hi)) continue;
        const auto b = std::min(bins - 1, static_cast<std::size_t>((x - lo) / w));
        h[b] += 1;
    }
    return h;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) throw InsufficientData("need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0)) throw InsufficientData("degenerate abscissae");
    const double slope = sxy / sxx;
    return {my - slope * mx, slope};
}

}  // namespace boltz
