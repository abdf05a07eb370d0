#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "boltz/events.hpp"
#include "boltz/particles.hpp"
#include "boltz/rng.hpp"

namespace boltz {

using DiskSpec = ParticleSpec<double>;
using Positions = Coords<double>;

double disk_radius(const DiskSpec& spec);

/// Hexagonal arrangement of spec.n disks filling the torus row by row.
Positions hexagonal_start(const DiskSpec& spec);

/// Move one uniformly chosen disk by a uniform offset in [-eps, eps]^d; accept iff no overlap.
bool hard_disk_metropolis_step(Positions& x, const DiskSpec& spec, double eps_move, Rng& rng);

struct JasterOutcome {
    bool accepted = false;
    int stages = 0;
};

/// Chained displacement: each overlap with exactly one disk passes the same offset on.
JasterOutcome jaster_step(Positions& x, const DiskSpec& spec, double eps_move, int max_attempts, Rng& rng);

/// Earliest contact time of two disks in straight-line flow on the torus, if any.
std::optional<double> md_collision_time(const Vec<double>& xi, const Vec<double>& xj, const Vec<double>& vi,
                                        const Vec<double>& vj, double sigma, const Torus<double>& torus);

/// Equal-mass elastic collision given the contact separation x_ij = x_i - x_j.
std::pair<Vec<double>, Vec<double>> md_collide(const Vec<double>& vi, const Vec<double>& vj, const Vec<double>& x_ij,
                                               double sigma);

struct MdState {
    Positions positions;
    Positions velocities;
    double time = 0;
    std::uint64_t collisions = 0;
};

/// Runs until `collisions` further collisions have happened.
void md_run(MdState& state, const DiskSpec& spec, std::uint64_t collisions, EventLog* log = nullptr);

/// Runs for `duration` units of time.
void md_advance(MdState& state, const DiskSpec& spec, double duration, EventLog* log = nullptr);

namespace detail {

/// Next pair event for separation s and relative velocity v: a contact, or a time
/// beyond which the 3^d-image search is no longer conclusive.
struct PairEvent {
    double time = 0;
    bool contact = false;
};

PairEvent next_pair_event(const Vec<double>& s, const Vec<double>& v, double sigma, const Torus<double>& torus);

}  // namespace detail

}  // namespace boltz
