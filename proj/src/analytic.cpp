#include "boltz/analytic.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/ellint_1.hpp>
#include <boost/math/special_functions/ellint_2.hpp>

#include "boltz/errors.hpp"

namespace boltz {

TransferMatrixResult ising1d_free_energy(double beta, double J, double h, int N)
{
    if (!(beta > 0) || !(J > 0)) throw InvalidInput("transfer matrix needs beta, J > 0");
    if (N < 2) throw InvalidInput("chain needs N >= 2");
    const double bh = beta * h;
    const double root = std::sqrt(std::sinh(bh) * std::sinh(bh) + std::exp(-4 * beta * J));
    const double ch = std::cosh(bh);
    TransferMatrixResult r;
    const double log_plus = beta * J + std::log(ch + root);
    const double log_minus = beta * J + std::log(-std::expm1(-4 * beta * J) / (ch + root));
    r.lambda_plus = std::exp(log_plus);
    r.lambda_minus = std::exp(log_minus);
    r.log_partition = N * log_plus + std::log1p(std::exp(N * (log_minus - log_plus)));
    r.free_energy = -r.log_partition / beta;
    r.per_particle_free_energy = r.free_energy / N;
    return r;
}

double critical_coupling() { return std::log(1 + std::numbers::sqrt2) / 2; }

double onsager_gamma(double K)
{
    if (!(K > 0)) throw InvalidInput("coupling must be positive");
    const double s = std::sinh(2 * K), c = std::cosh(2 * K);
    const double kappa2 = 4 * s * s / (c * c * c * c);
    auto integrand = [kappa2](double w) {
        const double sw = std::sin(w);
        const double arg = std::max(0.0, 1 - kappa2 * sw * sw);
        return std::log((1 + std::sqrt(arg)) / 2);
    };
    using boost::math::quadrature::gauss_kronrod;
    const double integral = gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::numbers::pi / 2, 20, 1e-15);
    return std::log(2 * c) + integral / std::numbers::pi;
}

SpecificHeatValue onsager_specific_heat(double K)
{
    if (!(K > 0)) throw InvalidInput("coupling must be positive");
    const bool near = std::abs(K - critical_coupling()) < 1e-4;
    const double sh = std::sinh(2 * K), ch = std::cosh(2 * K);
    const double t = sh / ch, ct = ch / sh;
    const double kappa = std::min(2 * sh / (ch * ch), 1 - 1e-16);
    const double k1 = boost::math::ellint_1(kappa), e1 = boost::math::ellint_2(kappa);
    // -u / J = coth(2K) (1 + (2 / pi) (2 tanh^2(2K) - 1) K1(kappa)); c = K^2 d(-u / J) / dK.
    const double two_pi = 2 / std::numbers::pi;
    const double dct = -2 / (sh * sh);
    const double dt2 = 4 * t / (ch * ch);
    const double dkappa = 4 / ch - 8 * sh * sh / (ch * ch * ch);
    const double dk1 = e1 / (kappa * (1 - kappa * kappa)) - k1 / kappa;
    const double de = dct * (1 + two_pi * (2 * t * t - 1) * k1) + ct * two_pi * (2 * dt2 * k1 + (2 * t * t - 1) * dk1 * dkappa);
    return {K * K * de, near};
}

double spontaneous_magnetization(double K)
{
    if (!(K > 0)) throw InvalidInput("coupling must be positive");
    if (K <= critical_coupling()) return 0.0;
    const double s = std::sinh(2 * K);
    return std::pow(std::max(0.0, 1 - std::pow(s, -4)), 0.125);
}

namespace {

int alphabet(const Lattice& lattice)
{
    switch (lattice.spec().model) {
    case LatticeModel::Ising: return 2;
    case LatticeModel::Potts: return lattice.spec().q;
    case LatticeModel::XY: break;
    }
    throw Unsupported("enumeration needs a discrete spin model");
}

double digit_value(int digit, LatticeModel model) { return model == LatticeModel::Ising ? (digit ? -1.0 : 1.0) : digit + 1.0; }

int value_digit(double v, LatticeModel model) { return model == LatticeModel::Ising ? (v > 0 ? 0 : 1) : static_cast<int>(v) - 1; }

double state_count(const Lattice& lattice)
{
    return std::pow(static_cast<double>(alphabet(lattice)), static_cast<double>(lattice.size()));
}

}  // namespace

LatticeConfig ExactEnsemble::state(std::size_t index, const Lattice& lattice) const
{
    const auto model = lattice.spec().model;
    LatticeConfig c{Eigen::VectorXd(static_cast<Eigen::Index>(sites))};
    for (std::size_t k = 0; k < sites; ++k) {
        c.spins[static_cast<Eigen::Index>(k)] = digit_value(static_cast<int>(index % q), model);
        index /= q;
    }
    return c;
}

std::size_t state_index(const LatticeConfig& config, const Lattice& lattice)
{
    const int q = alphabet(lattice);
    std::size_t s = 0;
    for (Eigen::Index k = config.spins.size() - 1; k >= 0; --k)
        s = s * q + value_digit(config.spins[k], lattice.spec().model);
    return s;
}

ExactEnsemble enumerate_exact(const Lattice& lattice)
{
    const int q = alphabet(lattice);
    if (state_count(lattice) > double(1 << 20)) throw Refusal("state space larger than 2^20");
    const auto& spec = lattice.spec();
    const std::size_t n = lattice.size();
    std::size_t total = 1;
    for (std::size_t k = 0; k < n; ++k) total *= q;

    ExactEnsemble ens;
    ens.q = q;
    ens.sites = n;
    ens.beta = spec.beta;
    ens.energies.resize(static_cast<Eigen::Index>(total));
    ens.magnetization.resize(static_cast<Eigen::Index>(total));

    LatticeConfig c = ens.state(0, lattice);
    std::vector<int> digits(n, 0);
    double u = lattice_energy(c, lattice);
    for (std::size_t s = 0; s < total; ++s) {
        ens.energies[s] = u;
        ens.magnetization[s] = magnetic_density(c, lattice)[0];
        if (s + 1 == total) break;
        // q-ary increment with incremental energy updates.
        for (std::size_t k = 0; k < n; ++k) {
            const int next = (digits[k] + 1) % q;
            const double v = digit_value(next, spec.model);
            u += local_energy_delta(c, k, v, lattice);
            c.spins[static_cast<Eigen::Index>(k)] = v;
            digits[k] = next;
            if (next != 0) break;
        }
    }

    const double emin = ens.energies.minCoeff();
    Eigen::VectorXd w = (-spec.beta * (ens.energies.array() - emin)).exp();
    const double wsum = w.sum();
    ens.probabilities = w / wsum;
    ens.log_partition = std::log(wsum) - spec.beta * emin;
    const auto& p = ens.probabilities;
    ens.mean_energy = p.dot(ens.energies);
    ens.energy_variance = p.dot((ens.energies.array() - ens.mean_energy).square().matrix());
    ens.mean_abs_m = p.dot(ens.magnetization.cwiseAbs());
    ens.entropy = 0;
    for (Eigen::Index s = 0; s < p.size(); ++s)
        if (p[s] > 0) ens.entropy -= p[s] * std::log(p[s]);
    return ens;
}

Eigen::MatrixXd transition_matrix(SingleSiteKernel kind, const Lattice& lattice)
{
    const int q = alphabet(lattice);
    if (state_count(lattice) > double(1 << 12)) throw Refusal("transition matrix limited to 2^12 states");
    if (kind == SingleSiteKernel::Glauber && lattice.spec().model != LatticeModel::Ising)
        throw Unsupported("Glauber dynamics is implemented for the Ising model only");
    const ExactEnsemble ens = enumerate_exact(lattice);
    const std::size_t total = ens.count();
    const std::size_t n = lattice.size();
    const double beta = lattice.spec().beta;
    const double proposal = 1.0 / (static_cast<double>(n) * (q - 1));
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
    std::size_t power = 1;
    for (std::size_t k = 0; k < n; ++k, power *= q)
        for (std::size_t s = 0; s < total; ++s) {
            const int digit = static_cast<int>((s / power) % q);
            for (int d = 0; d < q; ++d) {
                if (d == digit) continue;
                const std::size_t t = s + (static_cast<long>(d) - digit) * static_cast<long>(power);
                const double x = beta * (ens.energies[t] - ens.energies[s]);
                const double accept = kind == SingleSiteKernel::Metropolis ? std::min(1.0, std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
                P(s, t) += proposal * accept;
            }
        }
    for (Eigen::Index s = 0; s < P.rows(); ++s) P(s, s) = 1.0 - (P.row(s).sum() - P(s, s));
    return P;
}

double asymptotic_variance(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi, const Eigen::VectorXd& f)
{
    const Eigen::Index m = P.rows();
    if (P.cols() != m || pi.size() != m || f.size() != m) throw InvalidInput("kernel, target and observable sizes differ");
    if ((pi.transpose() * P - pi.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidState("target is not stationary for the kernel");
    const Eigen::VectorXd fbar = f.array() - pi.dot(f);
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m) - P + Eigen::VectorXd::Ones(m) * pi.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw InvalidState("kernel is not ergodic");
    const Eigen::VectorXd g = lu.solve(fbar);
    const double var = pi.dot(fbar.cwiseProduct(fbar));
    return 2 * pi.dot(fbar.cwiseProduct(g)) - var;
}

double exact_kernel_variance(SingleSiteKernel kind, const Lattice& lattice,
                             const std::function<double(const LatticeConfig&)>& f)
{
    const Eigen::MatrixXd P = transition_matrix(kind, lattice);
    const ExactEnsemble ens = enumerate_exact(lattice);
    Eigen::VectorXd fv(static_cast<Eigen::Index>(ens.count()));
    for (std::size_t s = 0; s < ens.count(); ++s) fv[static_cast<Eigen::Index>(s)] = f(ens.state(s, lattice));
    return asymptotic_variance(P, ens.probabilities, fv);
}

}  // namespace boltz
