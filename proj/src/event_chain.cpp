#include "boltz/event_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace boltz {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Vec<double> random_unit(int dim, Rng& rng)
{
    Vec<double> u(dim);
    do {
        for (int k = 0; k < dim; ++k) u[k] = rng.normal();
    } while (!(u.norm() > 1e-12));
    return u / u.norm();
}

void draw_refresh_clock(ECMCState& st, const RefreshSpec& r, Rng& rng)
{
    if (r.mode == RefreshMode::XYFixed) st.refresh_clock = r.interval;
    else st.refresh_clock = r.rate > 0 ? rng.exponential() / r.rate : inf;
}

void apply_refresh(ECMCState& st, const RefreshSpec& r, int n, Rng& rng)
{
    if (r.mode == RefreshMode::Uniform) {
        st.u = random_unit(static_cast<int>(st.u.size()), rng);
        st.active = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
    } else {
        std::swap(st.u[0], st.u[1]);
    }
}

void check_state(const ECMCState& st, int dim, int n, const RefreshSpec& r)
{
    if (st.positions.rows() != dim || st.positions.cols() != n) throw InvalidInput("configuration shape does not match spec");
    if (st.active < 0 || st.active >= n) throw InvalidInput("active index out of range");
    if (st.u.size() != dim || std::abs(st.u.norm() - 1) > 1e-9) throw InvalidInput("direction must be a unit vector");
    if (r.mode != RefreshMode::Uniform && dim != 2) throw Unsupported("xy refreshment needs two dimensions");
    if (r.mode == RefreshMode::XYFixed && !(r.interval > 0)) throw InvalidInput("refresh interval must be positive");
    if (r.mode != RefreshMode::XYFixed && r.rate < 0) throw InvalidInput("refresh rate must be nonnegative");
}

/// Shared driver: `segment` advances the active particle by at most `limit` and
/// returns the elapsed time; it performs any lift itself.
template <typename Segment>
void run_with_refresh(ECMCState& st, double duration, const RefreshSpec& refresh, int n, Rng& rng, EventLog* log,
                      Segment segment)
{
    double left = duration;
    while (left > 0) {
        if (st.refresh_clock < 0) draw_refresh_clock(st, refresh, rng);
        const double clock = st.refresh_clock;
        const double limit = std::min(left, clock);
        const double dt = segment(limit);
        const bool reached = dt >= limit;
        left = reached && limit == left ? 0 : left - dt;
        st.refresh_clock = clock - dt;
        if (reached && limit == clock) {
            apply_refresh(st, refresh, n, rng);
            st.refresh_clock = -1;
            if (log) log->add(st.time, EventKind::Refresh, st.active);
        }
    }
}

}  // namespace

Vec<double> initial_direction(int dim, RefreshMode mode, Rng& rng)
{
    if (mode == RefreshMode::Uniform) return random_unit(dim, rng);
    if (dim != 2) throw Unsupported("xy refreshment needs two dimensions");
    Vec<double> u = Vec<double>::Zero(2);
    u[rng.uniform() < 0.5 ? 0 : 1] = 1;
    return u;
}

void ecmc_hard_disk_run(ECMCState& st, const DiskSpec& spec, double duration, const RefreshSpec& refresh, Rng& rng,
                        EventLog* log)
{
    if (!spec.is_hard_disk()) throw Unsupported("hard-disk event chain needs the hard-disk potential");
    const double sigma = disk_radius(spec);
    if (4 * sigma >= spec.torus.min_side()) throw Unsupported("disk diameter must be below half the box");
    check_state(st, spec.dim(), spec.n, refresh);
    if (!hard_disk_valid(st.positions, spec)) throw InvalidState("overlapping hard-disk configuration");
    const int n = spec.n;

    run_with_refresh(st, duration, refresh, n, rng, log, [&](double limit) {
        const int i = st.active;
        double first = inf, second = inf, recheck = inf;
        int partner = -1;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto ev = detail::next_pair_event(min_sep_vector(st.positions.col(i), st.positions.col(j), spec.torus),
                                                    st.u, sigma, spec.torus);
            if (!ev.contact) {
                recheck = std::min(recheck, ev.time);
            } else if (ev.time < first) {
                second = first;
                first = ev.time;
                partner = j;
            } else if (ev.time < second) {
                second = ev.time;
            }
        }
        const double dt = std::min({first, recheck, limit});
        const bool lift = first == dt && first < limit;
        if (lift && second - first < 1e-12) throw Degeneracy("active disk touches two disks within 1e-12");
        st.positions.col(i) = wrap(Vec<double>(st.positions.col(i) + dt * st.u), spec.torus);
        st.time += dt;
        if (lift) {
            st.active = partner;
            ++st.lifts;
            if (log) log->add(st.time, EventKind::Lift, i, partner);
        }
        return dt;
    });
}

double pair_derivative_bound(double lo, double hi, const ParticleSpec<double>& spec)
{
    if (!(lo > 0)) throw InvalidState("particles too close for a derivative bound");
    if (const auto cut = pair_cutoff(spec)) {
        if (lo > *cut) return 0;
        hi = std::min(hi, *cut);
    }
    double bound = std::max(std::abs(pair_derivative(lo, spec)), std::abs(pair_derivative(hi, spec)));
    if (const auto* lj = std::get_if<LennardJones<double>>(&spec.potential)) {
        const double inflection = std::pow(26.0 / 7.0, 1.0 / 6.0) * lj->sigma;
        if (lo < inflection && inflection < hi) bound = std::max(bound, std::abs(pair_derivative(inflection, spec)));
    }
    return bound;
}

void ecmc_smooth_run(ECMCState& st, const ParticleSpec<double>& spec, double duration, const SmoothEcmcOptions& opt,
                     Rng& rng, EventLog* log, ThinningStats* stats)
{
    double sigma = 0;
    if (const auto* lj = std::get_if<LennardJones<double>>(&spec.potential)) sigma = lj->sigma;
    else if (const auto* sd = std::get_if<SoftDisk<double>>(&spec.potential)) sigma = sd->sigma;
    else throw Unsupported("smooth event chain needs a soft-disk or Lennard-Jones potential");
    check_state(st, spec.dim(), spec.n, opt.refresh);
    const double look = opt.lookahead > 0 ? opt.lookahead : 0.1 * sigma;
    const auto cutoff = pair_cutoff(spec);
    if (cutoff && *cutoff + look >= spec.torus.min_side() / 2) throw Unsupported("cutoff plus look-ahead must stay below half the box");
    const int n = spec.n;
    const double beta = spec.beta;
    ThinningStats local;
    ThinningStats& ts = stats ? *stats : local;

    struct Crossing {
        double time;
        int partner;
        double delta_u;
    };
    std::vector<double> bounds(n);
    std::vector<Crossing> crossings;

    run_with_refresh(st, duration, opt.refresh, n, rng, log, [&](double limit) {
        const int i = st.active;
        const double seg = std::min(look, limit);
        double total = 0;
        crossings.clear();
        for (int k = 0; k < n; ++k) {
            bounds[k] = 0;
            if (k == i) continue;
            const Vec<double> s0 = min_sep_vector(st.positions.col(i), st.positions.col(k), spec.torus);
            const double r0 = s0.norm();
            bounds[k] = beta * pair_derivative_bound(r0 - seg, r0 + seg, spec);
            total += bounds[k];
            if (cutoff) {
                const double b = s0.dot(st.u);
                const double disc = b * b - (r0 * r0 - *cutoff * *cutoff);
                if (disc > 0) {
                    const double u_in = pair_energy(*cutoff, spec);
                    for (double t : {-b - std::sqrt(disc), -b + std::sqrt(disc)}) {
                        if (!(t > 0 && t < seg)) continue;
                        const bool outward = (s0 + t * st.u).dot(st.u) > 0;
                        crossings.push_back({t, k, outward ? -u_in : u_in});
                    }
                }
            }
        }
        std::sort(crossings.begin(), crossings.end(), [](const Crossing& a, const Crossing& b) { return a.time < b.time; });

        double t = 0;
        std::size_t next = 0;
        auto advance_to = [&](double target) {
            st.positions.col(i) = wrap(Vec<double>(st.positions.col(i) + (target - t) * st.u), spec.torus);
            t = target;
        };
        auto lift_to = [&](int k) {
            st.active = k;
            ++st.lifts;
            if (log) log->add(st.time + t, EventKind::Lift, i, k);
        };
        while (true) {
            const double cand = total > 0 ? t + rng.exponential() / total : inf;
            const double cross = next < crossings.size() ? crossings[next].time : inf;
            if (std::min(cand, cross) >= seg) {
                advance_to(seg);
                break;
            }
            if (cross <= cand) {
                advance_to(cross);
                const Crossing& c = crossings[next++];
                if (rng.uniform() < -std::expm1(-beta * std::max(0.0, c.delta_u))) {
                    ++ts.discontinuity_lifts;
                    lift_to(c.partner);
                    break;
                }
                continue;
            }
            advance_to(cand);
            ++ts.candidates;
            double pick = rng.uniform() * total;
            int k = 0;
            for (; k < n - 1; ++k) {
                if (pick < bounds[k]) break;
                pick -= bounds[k];
            }
            while (bounds[k] == 0) --k;
            const Vec<double> s = min_sep_vector(st.positions.col(i), st.positions.col(k), spec.torus);
            const double r = s.norm();
            const double rate = beta * std::max(0.0, pair_derivative(r, spec) * s.dot(st.u) / r);
            if (rate > bounds[k] * (1 + 1e-9)) throw InvalidState("event rate exceeds its thinning bound");
            if (rng.uniform() * bounds[k] < rate) {
                ++ts.accepted;
                lift_to(k);
                break;
            }
        }
        st.time += t;
        return t;
    });
}

double factorized_filter_probability(const std::vector<double>& deltas, double beta)
{
    double p = 1;
    for (double d : deltas) p *= std::min(1.0, std::exp(-beta * d));
    return p;
}

bool factorized_filter_accept(const std::vector<double>& deltas, double beta, Rng& rng)
{
    bool accept = true;
    for (double d : deltas) {
        if (!std::isfinite(d)) throw InvalidInput("factor energy change must be finite");
        if (beta * d > 0 && !(rng.uniform() < std::exp(-beta * d))) accept = false;
    }
    return accept;
}

}  // namespace boltz
