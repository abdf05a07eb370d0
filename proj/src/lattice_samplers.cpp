#include "boltz/lattice_samplers.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "boltz/errors.hpp"

namespace boltz {

namespace {

constexpr double two_pi = 2 * std::numbers::pi;

std::size_t pick_site(LatticeChainState& state, std::size_t n, std::size_t step, ScanOrder scan)
{
    return scan == ScanOrder::Random ? state.rng.index(n) : step;
}

double neighbor_sum(const LatticeConfig& c, const Lattice& lattice, std::size_t site)
{
    const int* nb = lattice.neighbors()[site];
    double s = 0;
    for (int k = 0; k < lattice.neighbors().degree(); ++k) s += c.spins[nb[k]];
    return s;
}

/// Acceptance probabilities for an Ising flip indexed by spin sign and neighbour sum.
template <typename Rule>
std::array<std::vector<double>, 2> ising_table(const Lattice& lattice, Rule rule)
{
    const auto& spec = lattice.spec();
    const int deg = lattice.neighbors().degree();
    std::array<std::vector<double>, 2> table;
    for (int sign = 0; sign < 2; ++sign) {
        const double x = sign ? 1.0 : -1.0;
        table[sign].resize(2 * deg + 1);
        for (int s = -deg; s <= deg; ++s) table[sign][s + deg] = rule(spec.beta * (2 * spec.J * x * s + 2 * spec.h * x));
    }
    return table;
}

int find_root(std::vector<int>& parent, int i)
{
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

void require_cluster_model(const Lattice& lattice)
{
    const auto& spec = lattice.spec();
    if (spec.model != LatticeModel::Ising) throw Unsupported("cluster updates are implemented for the Ising model only");
    if (spec.h != 0) throw Unsupported("cluster updates require zero field");
    if (spec.J < 0) throw Unsupported("cluster updates require J >= 0");
}

}  // namespace

double metropolis_acceptance(double beta_delta) { return beta_delta <= 0 ? 1.0 : std::exp(-beta_delta); }

double glauber_acceptance(double beta_delta)
{
    return beta_delta >= 0 ? std::exp(-beta_delta) / (1 + std::exp(-beta_delta)) : 1 / (1 + std::exp(beta_delta));
}

double bond_probability(double beta, double J, bool aligned) { return aligned ? -std::expm1(-2 * beta * J) : 0.0; }

std::size_t metropolis_sweep(LatticeChainState& state, const Lattice& lattice, const SingleSiteOptions& opt)
{
    const auto& spec = lattice.spec();
    const std::size_t n = lattice.size();
    auto& x = state.config.spins;
    std::size_t accepted = 0;
    if (spec.model == LatticeModel::Ising) {
        const auto table = ising_table(lattice, metropolis_acceptance);
        const int deg = lattice.neighbors().degree();
        for (std::size_t step = 0; step < n; ++step) {
            const std::size_t i = pick_site(state, n, step, opt.scan);
            const int s = static_cast<int>(neighbor_sum(state.config, lattice, i));
            const double a = table[x[i] > 0][s + deg];
            if (a >= 1 || state.rng.uniform() < a) {
                x[i] = -x[i];
                ++accepted;
            }
        }
    } else {
        for (std::size_t step = 0; step < n; ++step) {
            const std::size_t i = pick_site(state, n, step, opt.scan);
            double v;
            if (spec.model == LatticeModel::Potts) {
                v = static_cast<double>(state.rng.index(spec.q - 1) + 1);
                if (v >= x[i]) v += 1;
            } else {
                v = reduce_angle(x[i] + state.rng.uniform(-opt.xy_step, opt.xy_step));
            }
            const double a = metropolis_acceptance(spec.beta * local_energy_delta(state.config, i, v, lattice));
            if (a >= 1 || state.rng.uniform() < a) {
                x[i] = v;
                ++accepted;
            }
        }
    }
    state.time += 1;
    return accepted;
}

std::size_t glauber_sweep(LatticeChainState& state, const Lattice& lattice, const SingleSiteOptions& opt)
{
    if (lattice.spec().model != LatticeModel::Ising) throw Unsupported("Glauber dynamics is implemented for the Ising model only");
    const std::size_t n = lattice.size();
    auto& x = state.config.spins;
    const auto table = ising_table(lattice, glauber_acceptance);
    const int deg = lattice.neighbors().degree();
    std::size_t accepted = 0;
    for (std::size_t step = 0; step < n; ++step) {
        const std::size_t i = pick_site(state, n, step, opt.scan);
        const int s = static_cast<int>(neighbor_sum(state.config, lattice, i));
        if (state.rng.uniform() < table[x[i] > 0][s + deg]) {
            x[i] = -x[i];
            ++accepted;
        }
    }
    state.time += 1;
    return accepted;
}

BondField sample_bonds(const LatticeConfig& config, const Lattice& lattice, Rng& rng)
{
    require_cluster_model(lattice);
    BondField field;
    field.edges = lattice.neighbors().edges();
    field.open.assign(field.edges.size(), 0);
    const double p = bond_probability(lattice.spec().beta, lattice.spec().J, true);
    for (std::size_t e = 0; e < field.edges.size(); ++e) {
        const auto [i, j] = field.edges[e];
        if (config.spins[i] == config.spins[j]) field.open[e] = rng.uniform() < p;
    }
    return field;
}

std::size_t swendsen_wang_step(LatticeChainState& state, const Lattice& lattice)
{
    const BondField bonds = sample_bonds(state.config, lattice, state.rng);
    const int n = static_cast<int>(lattice.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (std::size_t e = 0; e < bonds.edges.size(); ++e) {
        if (!bonds.open[e]) continue;
        const int a = find_root(parent, bonds.edges[e].first);
        const int b = find_root(parent, bonds.edges[e].second);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    // Roots are visited in increasing site order, so the coin sequence is deterministic.
    std::vector<std::int8_t> flip(n, -1);
    std::size_t clusters = 0;
    for (int i = 0; i < n; ++i) {
        const int r = find_root(parent, i);
        if (flip[r] < 0) {
            flip[r] = state.rng.uniform() < 0.5;
            ++clusters;
        }
        if (flip[r]) state.config.spins[i] = -state.config.spins[i];
    }
    state.time += 1;
    return clusters;
}

std::size_t wolff_step(LatticeChainState& state, const Lattice& lattice)
{
    require_cluster_model(lattice);
    const auto& nb = lattice.neighbors();
    auto& x = state.config.spins;
    const double p = bond_probability(lattice.spec().beta, lattice.spec().J, true);
    const std::size_t seed = state.rng.index(lattice.size());
    const double s0 = x[seed];
    std::vector<int> stack{static_cast<int>(seed)};
    x[seed] = -s0;
    std::size_t size = 1;
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        for (int k = 0; k < nb.degree(); ++k) {
            const int j = nb[i][k];
            // Cluster members are flipped on entry, so x_j == s0 means "aligned and outside".
            if (x[j] == s0 && state.rng.uniform() < p) {
                x[j] = -s0;
                stack.push_back(j);
                ++size;
            }
        }
    }
    state.time += 1;
    return size;
}

double xy_factor_rate(double theta_i, double theta_j, int direction, double beta, double J)
{
    return beta * std::max(0.0, J * std::sin(theta_i - theta_j) * direction);
}

double xy_factor_event_delay(double psi0, double delta)
{
    // Cumulative positive part of sin over [0, psi) within one period.
    auto cumulative = [](double psi) { return psi <= std::numbers::pi ? 1 - std::cos(psi) : 2.0; };
    const double p0 = reduce_angle(psi0);
    const double target = cumulative(p0) + delta;
    const double cycles = std::ceil(target / 2) - 1;
    const double rest = target - 2 * cycles;
    const double psi_end = two_pi * cycles + std::acos(std::clamp(1 - rest, -1.0, 1.0));
    return std::max(0.0, psi_end - p0);
}

void ecmc_xy_run(LatticeChainState& state, XYEventChainState& chain, const Lattice& lattice, double duration,
                 EventLog* log)
{
    const auto& spec = lattice.spec();
    if (spec.model != LatticeModel::XY) throw Unsupported("event-chain XY run needs the XY model");
    if (!spec.h_xy.isZero()) throw Unsupported("event-chain XY run requires zero field");
    if (!(spec.J > 0)) throw Unsupported("event-chain XY run requires J > 0");
    if (chain.active >= lattice.size()) throw InvalidInput("active spin out of range");
    const double chain_length = chain.chain_length > 0 ? chain.chain_length : two_pi * static_cast<double>(lattice.size());
    const auto& nb = lattice.neighbors();
    auto& x = state.config.spins;
    double left = duration;
    while (left > 0) {
        if (chain.chain_remaining <= 0) {
            chain.direction = state.rng.uniform() < 0.5 ? 1 : -1;
            chain.chain_remaining = chain_length;
            if (log) log->add(state.time, EventKind::Refresh, static_cast<int>(chain.active), -1, chain.direction);
        }
        const std::size_t i = chain.active;
        double best = std::numeric_limits<double>::infinity(), second = best;
        int best_slot = -1;
        for (int k = 0; k < nb.degree(); ++k) {
            const double psi = chain.direction * (x[i] - x[nb[i][k]]);
            const double t = xy_factor_event_delay(psi, state.rng.exponential() / (spec.beta * spec.J));
            if (t < best) {
                second = best;
                best = t;
                best_slot = k;
            } else if (t < second) {
                second = t;
            }
        }
        const double stop = std::min(left, chain.chain_remaining);
        const bool event = best < stop;
        if (event && second - best < 1e-12) throw Degeneracy("two XY factors fire within 1e-12");
        const double t = event ? best : stop;
        x[i] = reduce_angle(x[i] + chain.direction * t);
        state.time += t;
        left -= t;
        chain.chain_remaining -= t;
        if (event) {
            chain.active = static_cast<std::size_t>(nb[i][best_slot]);
            ++chain.events;
            if (log) log->add(state.time, EventKind::Lift, static_cast<int>(i), static_cast<int>(chain.active));
        }
    }
}

}  // namespace boltz
