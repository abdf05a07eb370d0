#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "boltz/events.hpp"
#include "boltz/lattice.hpp"
#include "boltz/rng.hpp"

namespace boltz {

/// One chain's configuration, generator and clock (sweeps, cluster steps or angle units).
struct LatticeChainState {
    LatticeConfig config;
    Rng rng;
    double time = 0;
};

enum class ScanOrder { Random, Systematic };

struct SingleSiteOptions {
    ScanOrder scan = ScanOrder::Random;
    double xy_step = 1.0;  // half-width of the XY angular proposal
};

/// min(1, exp(-beta dU)).
double metropolis_acceptance(double beta_delta);
/// exp(-beta dU) / (1 + exp(-beta dU)).
double glauber_acceptance(double beta_delta);
/// 1 - exp(-2 beta J) for aligned spins, else 0.
double bond_probability(double beta, double J, bool aligned);

/// N single-site Metropolis updates; returns the number accepted.
std::size_t metropolis_sweep(LatticeChainState& state, const Lattice& lattice, const SingleSiteOptions& opt = {});

/// N heat-bath (Barker) spin flips; Ising only.
std::size_t glauber_sweep(LatticeChainState& state, const Lattice& lattice, const SingleSiteOptions& opt = {});

/// Bond variables on the dN lattice edges.
struct BondField {
    std::vector<std::pair<int, int>> edges;
    std::vector<std::uint8_t> open;
};

BondField sample_bonds(const LatticeConfig& config, const Lattice& lattice, Rng& rng);

/// One Swendsen-Wang update; returns the number of clusters.
std::size_t swendsen_wang_step(LatticeChainState& state, const Lattice& lattice);

/// One Wolff cluster flip; returns the cluster size.
std::size_t wolff_step(LatticeChainState& state, const Lattice& lattice);

struct XYEventChainState {
    std::size_t active = 0;
    int direction = 1;
    double chain_length = 0;     // angle units between direction refreshes; 0 means 2 pi N
    double chain_remaining = 0;  // 0 triggers a refresh on the next run
    std::uint64_t events = 0;
};

/// beta max(0, J sin(theta_i - theta_j) v).
double xy_factor_rate(double theta_i, double theta_j, int direction, double beta, double J);

/// Angle advance until sum of beta J max(0, sin) along psi0 + t reaches beta J delta.
double xy_factor_event_delay(double psi0, double delta);

/// Advances the active spin for `duration` angle units. XY, zero field, J > 0.
void ecmc_xy_run(LatticeChainState& state, XYEventChainState& chain, const Lattice& lattice, double duration,
                 EventLog* log = nullptr);

}  // namespace boltz
