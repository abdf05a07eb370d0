#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Core>

#include "boltz/lattice.hpp"

namespace boltz {

struct TransferMatrixResult {
    double lambda_plus = 0;
    double lambda_minus = 0;
    double log_partition = 0;  // ln(lambda_+^N + lambda_-^N)
    double free_energy = 0;
    double per_particle_free_energy = 0;
};

/// Periodic 1D Ising chain via its 2x2 transfer matrix.
TransferMatrixResult ising1d_free_energy(double beta, double J, double h, int N);

/// beta_c J of the square-lattice Ising model, ln(1 + sqrt 2) / 2.
double critical_coupling();

/// gamma(K) = -beta f per site at zero field, by adaptive quadrature.
double onsager_gamma(double K);

struct SpecificHeatValue {
    double value = 0;
    bool near_singular = false;  // within 1e-4 of the critical coupling
};

/// K^2 gamma''(K) from the closed-form energy in complete elliptic integrals.
SpecificHeatValue onsager_specific_heat(double K);

/// (1 - sinh(2K)^-4)^(1/8) above the critical coupling, else 0.
double spontaneous_magnetization(double K);

/// Every state of a small Ising or Potts lattice with its Boltzmann weight.
/// State s sets site k to digit (s / q^k) mod q; Ising digit 0 is +1.
struct ExactEnsemble {
    int q = 2;
    std::size_t sites = 0;
    double beta = 1;
    Eigen::VectorXd probabilities;
    Eigen::VectorXd energies;
    Eigen::VectorXd magnetization;  // first component of magnetic_density per state
    double log_partition = 0;
    double mean_energy = 0;
    double energy_variance = 0;
    double mean_abs_m = 0;
    double entropy = 0;

    std::size_t count() const { return static_cast<std::size_t>(probabilities.size()); }
    /// beta^2 Var U (extensive).
    double specific_heat() const { return beta * beta * energy_variance; }
    LatticeConfig state(std::size_t index, const Lattice& lattice) const;
};

std::size_t state_index(const LatticeConfig& config, const Lattice& lattice);

/// Refuses lattices with more than 2^20 states.
ExactEnsemble enumerate_exact(const Lattice& lattice);

enum class SingleSiteKernel { Metropolis, Glauber };

/// Random-scan single-site kernel over all states (at most 2^12).
Eigen::MatrixXd transition_matrix(SingleSiteKernel kind, const Lattice& lattice);

/// nu(P, f) = 2 <fbar, (I - P)^-1 fbar>_pi - Var_pi f via the fundamental matrix.
double asymptotic_variance(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi, const Eigen::VectorXd& f);

double exact_kernel_variance(SingleSiteKernel kind, const Lattice& lattice,
                             const std::function<double(const LatticeConfig&)>& f);

}  // namespace boltz
