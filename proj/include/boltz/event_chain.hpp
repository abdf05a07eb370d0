#pragma once

#include <cstdint>
#include <vector>

#include "boltz/events.hpp"
#include "boltz/hard_disks.hpp"
#include "boltz/particles.hpp"
#include "boltz/rng.hpp"

namespace boltz {

/// One active particle moving at unit speed along u; all others at rest.
struct ECMCState {
    Positions positions;
    int active = 0;
    Vec<double> u;
    double time = 0;
    std::uint64_t lifts = 0;
    double refresh_clock = -1;  // time to the next refreshment; negative means undrawn
};

enum class RefreshMode { XYFixed, XYPoisson, Uniform };

struct RefreshSpec {
    RefreshMode mode = RefreshMode::Uniform;
    double interval = 1.0;  // XYFixed
    double rate = 1.0;      // XYPoisson, Uniform
};

/// Axis-aligned (xy) or isotropic initial direction.
Vec<double> initial_direction(int dim, RefreshMode mode, Rng& rng);

/// Straight event-chain Monte Carlo for hard disks.
void ecmc_hard_disk_run(ECMCState& state, const DiskSpec& spec, double duration, const RefreshSpec& refresh, Rng& rng,
                        EventLog* log = nullptr);

struct ThinningStats {
    std::uint64_t candidates = 0;
    std::uint64_t accepted = 0;
    std::uint64_t discontinuity_lifts = 0;
};

struct SmoothEcmcOptions {
    RefreshSpec refresh;
    double lookahead = 0;  // bound segment length; 0 means 0.1 sigma
};

/// Generalised event-chain Monte Carlo for pairwise smooth potentials, with
/// per-factor event times drawn by thinning against segment-wise rate bounds.
void ecmc_smooth_run(ECMCState& state, const ParticleSpec<double>& spec, double duration, const SmoothEcmcOptions& opt,
                     Rng& rng, EventLog* log = nullptr, ThinningStats* stats = nullptr);

/// Upper bound of |dU/dr| for r in [lo, hi] (clipped to the cutoff).
double pair_derivative_bound(double lo, double hi, const ParticleSpec<double>& spec);

/// Product of per-factor Metropolis probabilities.
double factorized_filter_probability(const std::vector<double>& deltas, double beta);

/// One coin per factor; accepts iff every factor accepts.
bool factorized_filter_accept(const std::vector<double>& deltas, double beta, Rng& rng);

}  // namespace boltz
