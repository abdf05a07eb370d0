#include "boltz/hard_disks.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace boltz {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

/// Smallest positive contact time with separation s moving at relative velocity v.
std::optional<double> contact_root(const Vec<double>& s, const Vec<double>& v, double sigma)
{
    const double b = s.dot(v);
    if (b >= 0) return std::nullopt;
    const double vv = v.squaredNorm();
    const double disc = b * b - vv * (s.squaredNorm() - 4 * sigma * sigma);
    if (disc <= 0) return std::nullopt;
    return std::max(0.0, (-b - std::sqrt(disc)) / vv);
}

bool overlaps(const Positions& x, const DiskSpec& spec, Eigen::Index i, const Vec<double>& xi, double contact)
{
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        if (j != i && !(min_sep_distance(xi, x.col(j), spec.torus) > contact)) return true;
    return false;
}

void require_disks(const DiskSpec& spec)
{
    if (!spec.is_hard_disk()) throw Unsupported("hard-disk sampler needs the hard-disk potential");
    if (4 * disk_radius(spec) >= spec.torus.min_side()) throw Unsupported("disk diameter must be below half the box");
}

/// Overlap check with a 1e-9 contact tolerance.
void check_touching(const Positions& x, const DiskSpec& spec)
{
    if (x.rows() != spec.dim() || x.cols() != spec.n) throw InvalidInput("configuration shape does not match spec");
    const double contact = 2 * disk_radius(spec) - 1e-9;
    for (Eigen::Index i = 0; i < x.cols(); ++i)
        for (Eigen::Index j = i + 1; j < x.cols(); ++j)
            if (min_sep_distance(x.col(i), x.col(j), spec.torus) < contact)
                throw InvalidState("overlapping hard-disk configuration");
}

}  // namespace

double disk_radius(const DiskSpec& spec) { return std::get<HardDisk<double>>(spec.potential).sigma; }

Positions hexagonal_start(const DiskSpec& spec)
{
    const int n = spec.n;
    const int d = spec.dim();
    Positions x = Positions::Zero(d, n);
    if (d == 1) {
        for (int i = 0; i < n; ++i) x(0, i) = spec.torus.side(0) * i / n;
        return x;
    }
    const double Lx = spec.torus.side(0), Ly = spec.torus.side(1);
    // Choose the column count that maximizes the smallest spacing of the staggered rows.
    int cols = 1;
    double best = -1;
    for (int c = 1; c <= n; ++c) {
        const int r = (n + c - 1) / c;
        const double ax = Lx / c, ay = Ly / r;
        double gap = std::min(ax, r == 1 ? Ly : std::hypot(ax / 2, ay));
        if (r % 2 == 1) gap = std::min(gap, ay);
        if (r >= 3) gap = std::min(gap, 2 * ay);
        if (gap > best) {
            best = gap;
            cols = c;
        }
    }
    const int rows = (n + cols - 1) / cols;
    const double ax = Lx / cols, ay = Ly / rows;
    for (int i = 0; i < n; ++i) {
        const int r = i / cols, c = i % cols;
        x(0, i) = spec.torus.wrap_coord((c + 0.5 * (r % 2) + 0.25) * ax, 0);
        x(1, i) = spec.torus.wrap_coord((r + 0.5) * ay, 1);
        for (int k = 2; k < d; ++k) x(k, i) = spec.torus.side(k) / 2;
    }
    return x;
}

bool hard_disk_metropolis_step(Positions& x, const DiskSpec& spec, double eps_move, Rng& rng)
{
    const double contact = 2 * disk_radius(spec);
    const Eigen::Index i = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(x.cols())));
    Vec<double> trial(spec.dim());
    for (int k = 0; k < spec.dim(); ++k) trial[k] = x(k, i) + rng.uniform(-eps_move, eps_move);
    trial = wrap(trial, spec.torus);
    if (overlaps(x, spec, i, trial, contact)) return false;
    x.col(i) = trial;
    return true;
}

JasterOutcome jaster_step(Positions& x, const DiskSpec& spec, double eps_move, int max_attempts, Rng& rng)
{
    const double contact = 2 * disk_radius(spec);
    Eigen::Index i = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(x.cols())));
    Vec<double> u(spec.dim());
    for (int k = 0; k < spec.dim(); ++k) u[k] = rng.uniform(-eps_move, eps_move);
    const Positions initial = x;
    JasterOutcome out;
    for (out.stages = 1; out.stages <= max_attempts; ++out.stages) {
        const Vec<double> moved = wrap(x.col(i) + u, spec.torus);
        x.col(i) = moved;
        Eigen::Index hit = -1;
        int hits = 0;
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (j != i && !(min_sep_distance(moved, x.col(j), spec.torus) > contact)) {
                hit = j;
                ++hits;
            }
        if (hits == 0) {
            out.accepted = true;
            return out;
        }
        if (hits > 1) break;
        i = hit;
    }
    x = initial;
    out.stages = std::min(out.stages, max_attempts);
    return out;
}

namespace detail {

PairEvent next_pair_event(const Vec<double>& s, const Vec<double>& v, double sigma, const Torus<double>& torus)
{
    const double speed = v.norm();
    if (!(speed > 0)) return {inf, false};
    const int d = torus.dim();
    // Images with some |n_k| >= 2 lie at least 1.5 L_min away.
    const double horizon = (1.5 * torus.min_side() - 2 * sigma) / speed;
    double best = inf;
    Vec<double> shift(d);
    int images = 1;
    for (int k = 0; k < d; ++k) images *= 3;
    for (int code = 0; code < images; ++code) {
        int c = code;
        for (int k = 0; k < d; ++k, c /= 3) shift[k] = (c % 3 - 1) * torus.side(k);
        if (auto t = contact_root(s + shift, v, sigma); t && *t < best) best = *t;
    }
    if (best <= horizon) return {best, true};
    return {horizon, false};
}

}  // namespace detail

std::optional<double> md_collision_time(const Vec<double>& xi, const Vec<double>& xj, const Vec<double>& vi,
                                        const Vec<double>& vj, double sigma, const Torus<double>& torus)
{
    const Vec<double> s = min_sep_vector(xi, xj, torus);
    if (!(s.norm() > 2 * sigma)) throw InvalidState("disks overlap or touch");
    const Vec<double> v = vi - vj;
    const double speed = v.norm();
    if (!(speed > 0)) return std::nullopt;
    // Widen the image shell until the earliest root precedes every unchecked image.
    const int d = torus.dim();
    Vec<double> shift(d);
    for (int reach = 1; reach <= 64; reach *= 2) {
        double best = inf;
        const int width = 2 * reach + 1;
        int images = 1;
        for (int k = 0; k < d; ++k) images *= width;
        for (int code = 0; code < images; ++code) {
            int c = code;
            for (int k = 0; k < d; ++k, c /= width) shift[k] = (c % width - reach) * torus.side(k);
            if (auto t = contact_root(s + shift, v, sigma); t && *t < best) best = *t;
        }
        if (best <= ((reach + 0.5) * torus.min_side() - 2 * sigma) / speed) return best;
    }
    return std::nullopt;
}

std::pair<Vec<double>, Vec<double>> md_collide(const Vec<double>& vi, const Vec<double>& vj, const Vec<double>& x_ij,
                                               double sigma)
{
    if (std::abs(x_ij.norm() - 2 * sigma) > 1e-9) throw InvalidState("disks are not in contact");
    const Vec<double> delta = (x_ij.dot(vi - vj) / (4 * sigma * sigma)) * x_ij;
    return {vi - delta, vj + delta};
}

namespace {

void md_evolve(MdState& st, const DiskSpec& spec, std::uint64_t max_collisions, double max_time, EventLog* log)
{
    require_disks(spec);
    check_touching(st.positions, spec);
    if (st.velocities.rows() != st.positions.rows() || st.velocities.cols() != st.positions.cols())
        throw InvalidInput("velocity shape does not match positions");
    const double sigma = disk_radius(spec);
    const int n = spec.n, d = spec.dim();
    const double t_end = st.time + max_time;
    std::uint64_t done = 0;
    Positions& x = st.positions;
    Positions& v = st.velocities;
    while (done < max_collisions && st.time < t_end) {
        double first = inf, second = inf;
        int fi = -1, fj = -1;
        double recheck = inf;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const auto ev = detail::next_pair_event(min_sep_vector(x.col(i), x.col(j), spec.torus),
                                                        Vec<double>(v.col(i) - v.col(j)), sigma, spec.torus);
                if (!ev.contact) {
                    recheck = std::min(recheck, ev.time);
                } else if (ev.time < first) {
                    second = first;
                    first = ev.time;
                    fi = i;
                    fj = j;
                } else if (ev.time < second) {
                    second = ev.time;
                }
            }
        double boundary = inf;
        int bi = -1, bk = -1;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < d; ++k) {
                const double vk = v(k, i), L = spec.torus.side(k);
                double t = inf;
                if (vk > 0) t = (L - x(k, i)) / vk;
                else if (vk < 0) t = (x(k, i) > 0 ? x(k, i) : L) / -vk;
                if (t < boundary) {
                    boundary = t;
                    bi = i;
                    bk = k;
                }
            }
        const double stop = t_end - st.time;
        const double dt = std::min({first, recheck, boundary, stop});
        if (dt == inf) break;
        const bool collide = first == dt && first < stop;
        if (collide && second - first < 1e-12) throw Degeneracy("two collisions within 1e-12");
        x += dt * v;
        if (dt == boundary && !collide) x(bk, bi) = 0.0;
        wrap_all(x, spec.torus);
        st.time = dt == stop ? t_end : st.time + dt;
        if (collide) {
            const Vec<double> s = min_sep_vector(x.col(fi), x.col(fj), spec.torus);
            auto [vi, vj] = md_collide(Vec<double>(v.col(fi)), Vec<double>(v.col(fj)), s, sigma);
            v.col(fi) = vi;
            v.col(fj) = vj;
            ++st.collisions;
            ++done;
            if (log) log->add(st.time, EventKind::Collision, fi, fj, std::abs(s.norm() - 2 * sigma));
        } else if (dt == boundary && log) {
            log->add(st.time, EventKind::Boundary, bi);
        }
    }
}

}  // namespace

void md_run(MdState& state, const DiskSpec& spec, std::uint64_t collisions, EventLog* log)
{
    if (spec.n < 2 && collisions > 0) throw InvalidInput("a single disk never collides");
    md_evolve(state, spec, collisions, inf, log);
}

void md_advance(MdState& state, const DiskSpec& spec, double duration, EventLog* log)
{
    if (duration < 0) throw InvalidInput("duration must be nonnegative");
    md_evolve(state, spec, std::numeric_limits<std::uint64_t>::max(), duration, log);
}

}  // namespace boltz
