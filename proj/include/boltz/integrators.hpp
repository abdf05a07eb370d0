#pragma once

#include <cmath>
#include <concepts>
#include <functional>

#include "boltz/errors.hpp"
#include "boltz/particles.hpp"
#include "boltz/rng.hpp"
#include "boltz/torus.hpp"

namespace boltz {

/// Anything with a smooth potential: energy, gradient, inverse temperature, and a
/// coordinate map applied after each drift (identity on Euclidean space).
template <typename T>
concept SmoothTarget = requires(const T& t, typename T::coords_type& x) {
    typename T::scalar_type;
    { t.energy(x) } -> std::convertible_to<typename T::scalar_type>;
    { t.gradient(x) } -> std::convertible_to<typename T::coords_type>;
    { t.beta() } -> std::convertible_to<typename T::scalar_type>;
    t.wrap(x);
};

/// Potential on R^(d x N) given by callables.
template <typename Scalar = double>
class FunctionTarget {
public:
    using scalar_type = Scalar;
    using coords_type = Coords<Scalar>;

    FunctionTarget(std::function<Scalar(const coords_type&)> u, std::function<coords_type(const coords_type&)> grad, Scalar beta)
        : u_(std::move(u)), grad_(std::move(grad)), beta_(beta)
    {
        if (!(beta > 0)) throw InvalidInput("beta must be positive");
    }

    Scalar energy(const coords_type& x) const { return u_(x); }
    coords_type gradient(const coords_type& x) const { return grad_(x); }
    Scalar beta() const { return beta_; }
    void wrap(coords_type&) const {}

private:
    std::function<Scalar(const coords_type&)> u_;
    std::function<coords_type(const coords_type&)> grad_;
    Scalar beta_;
};

/// Smooth particle model on its torus.
template <typename Scalar = double>
class ParticleTarget {
public:
    using scalar_type = Scalar;
    using coords_type = Coords<Scalar>;

    explicit ParticleTarget(ParticleSpec<Scalar> spec) : spec_(std::move(spec))
    {
        spec_.validate();
        if (spec_.is_hard_disk()) throw Unsupported("gradient-based samplers need a smooth potential");
    }

    Scalar energy(const coords_type& x) const { return total_energy(x, spec_).value(); }
    coords_type gradient(const coords_type& x) const { return total_gradient(x, spec_); }
    Scalar beta() const { return spec_.beta; }
    void wrap(coords_type& x) const { wrap_all(x, spec_.torus); }
    const ParticleSpec<Scalar>& spec() const { return spec_; }

private:
    ParticleSpec<Scalar> spec_;
};

enum class KineticKind { Quadratic, AdaptivelyRestrained };

template <typename Scalar = double>
struct IntegratorSpec {
    Scalar step = Scalar(0.1);
    int leapfrog_steps = 1;
    Scalar friction = 0;
    Scalar refresh_rate = 0;
    KineticKind kinetic = KineticKind::Quadratic;
    Scalar p_min = 0, p_max = 0;
    int xtra_chances = 0;

    void validate() const
    {
        if (!(step > 0)) throw InvalidInput("step must be positive");
        if (leapfrog_steps < 1) throw InvalidInput("need at least one leapfrog step");
        if (friction < 0 || refresh_rate < 0) throw InvalidInput("friction and refresh rate must be nonnegative");
        if (kinetic == KineticKind::AdaptivelyRestrained && !(p_min >= 0 && p_min < p_max))
            throw InvalidInput("adaptively restrained kinetic energy needs 0 <= p_min < p_max");
        if (xtra_chances < 0) throw InvalidInput("xtra chances must be nonnegative");
    }
};

template <typename Scalar = double>
struct PhaseState {
    Coords<Scalar> positions;
    Coords<Scalar> momenta;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> masses;
    Scalar time = 0;
};

/// Per-particle adaptively restrained kinetic energy and its derivative in s = |p|:
/// zero below p_min, s^2/2m above p_max, the C^2 quintic in between.
template <typename Scalar>
std::pair<Scalar, Scalar> ar_kinetic(Scalar s, Scalar m, Scalar p_min, Scalar p_max)
{
    if (s <= p_min) return {0, 0};
    if (s >= p_max) return {s * s / (2 * m), s / m};
    const Scalar w = p_max - p_min;
    const Scalar t = (s - p_min) / w;
    const Scalar A = p_max * p_max / (2 * m), B = w * p_max / m, C = w * w / m;
    const Scalar c3 = 10 * A - 4 * B + C / 2, c4 = -15 * A + 7 * B - C, c5 = 6 * A - 3 * B + C / 2;
    const Scalar k = t * t * t * (c3 + t * (c4 + t * c5));
    const Scalar dk_dt = t * t * (3 * c3 + t * (4 * c4 + t * 5 * c5));
    return {k, dk_dt / w};
}

template <typename Scalar>
Scalar kinetic_energy(const Coords<Scalar>& p, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& m,
                      const IntegratorSpec<Scalar>& integ)
{
    if (integ.kinetic == KineticKind::Quadratic)
        return (p.colwise().squaredNorm().transpose().array() / m.array()).sum() / 2;
    Scalar k = 0;
    for (Eigen::Index i = 0; i < p.cols(); ++i) k += ar_kinetic(p.col(i).norm(), m[i], integ.p_min, integ.p_max).first;
    return k;
}

/// grad_p K: the drift velocity.
template <typename Scalar>
Coords<Scalar> kinetic_gradient(const Coords<Scalar>& p, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& m,
                                const IntegratorSpec<Scalar>& integ)
{
    if (integ.kinetic == KineticKind::Quadratic) return p * m.cwiseInverse().asDiagonal();
    Coords<Scalar> v = Coords<Scalar>::Zero(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
        const Scalar s = p.col(i).norm();
        if (s > 0) v.col(i) = (ar_kinetic(s, m[i], integ.p_min, integ.p_max).second / s) * p.col(i);
    }
    return v;
}

template <SmoothTarget Target>
typename Target::scalar_type hamiltonian(const PhaseState<typename Target::scalar_type>& st, const Target& target,
                                         const IntegratorSpec<typename Target::scalar_type>& integ)
{
    return target.energy(st.positions) + kinetic_energy(st.momenta, st.masses, integ);
}

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& g)
{
    if (!g.allFinite()) throw Divergence("non-finite force");
}

}  // namespace detail

/// Velocity Verlet for leapfrog_steps steps: half kick, drift, half kick.
template <SmoothTarget Target>
void leapfrog_trajectory(PhaseState<typename Target::scalar_type>& st, const Target& target,
                         const IntegratorSpec<typename Target::scalar_type>& integ)
{
    using Scalar = typename Target::scalar_type;
    const Scalar eps = integ.step;
    Coords<Scalar> g = target.gradient(st.positions);
    detail::require_finite(g);
    for (int n = 0; n < integ.leapfrog_steps; ++n) {
        st.momenta -= (eps / 2) * g;
        st.positions += eps * kinetic_gradient(st.momenta, st.masses, integ);
        target.wrap(st.positions);
        g = target.gradient(st.positions);
        detail::require_finite(g);
        st.momenta -= (eps / 2) * g;
        st.time += eps;
    }
}

/// Momenta drawn from N(0, m / beta) per component.
template <typename Scalar>
Coords<Scalar> draw_momenta(int rows, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& m, Scalar beta, Rng& rng)
{
    Coords<Scalar> p(rows, m.size());
    for (Eigen::Index i = 0; i < p.cols(); ++i)
        for (int k = 0; k < rows; ++k) p(k, i) = std::sqrt(m[i] / beta) * Scalar(rng.normal());
    return p;
}

struct HmcResult {
    int accepted_stage = 0;  // 0 when every proposal was rejected
    bool diverged = false;
};

/// Hybrid Monte Carlo with xtra_chances extra trajectories judged against one uniform.
template <SmoothTarget Target>
HmcResult hmc_step(PhaseState<typename Target::scalar_type>& st, const Target& target,
                   const IntegratorSpec<typename Target::scalar_type>& integ, Rng& rng)
{
    using Scalar = typename Target::scalar_type;
    if (integ.kinetic != KineticKind::Quadratic) throw Unsupported("hybrid Monte Carlo uses the quadratic kinetic energy");
    const Scalar beta = target.beta();
    st.momenta = draw_momenta<Scalar>(static_cast<int>(st.positions.rows()), st.masses, beta, rng);
    const Scalar h0 = hamiltonian(st, target, integ);
    const double u = rng.uniform();
    PhaseState<Scalar> trial = st;
    HmcResult res;
    for (int k = 1; k <= integ.xtra_chances + 1; ++k) {
        try {
            leapfrog_trajectory(trial, target, integ);
        } catch (const Divergence&) {
            res.diverged = true;
            break;
        }
        const Scalar dh = hamiltonian(trial, target, integ) - h0;
        if (std::isfinite(double(dh)) && u < std::exp(-double(beta * dh))) {
            st = trial;
            res.accepted_stage = k;
            return res;
        }
    }
    st.momenta = -st.momenta;
    return res;
}

/// Exact Ornstein-Uhlenbeck transition for time t, one mass per column.
template <typename Scalar>
Coords<Scalar> ou_exact_update(const Coords<Scalar>& p, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& m, Scalar gamma,
                               Scalar beta, Scalar t, Rng& rng)
{
    if (gamma < 0 || t < 0) throw InvalidInput("friction and time must be nonnegative");
    Coords<Scalar> out(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
        const Scalar decay = std::exp(-gamma * t / m[i]);
        const Scalar sd = std::sqrt(m[i] / beta * -std::expm1(-2 * gamma * t / m[i]));
        for (Eigen::Index k = 0; k < p.rows(); ++k) out(k, i) = p(k, i) * decay + (sd > 0 ? sd * Scalar(rng.normal()) : 0);
    }
    return out;
}

/// One velocity-Verlet step of length eps followed by the momentum fluctuation step.
template <SmoothTarget Target>
void langevin_underdamped_step(PhaseState<typename Target::scalar_type>& st, const Target& target,
                               const IntegratorSpec<typename Target::scalar_type>& integ, Rng& rng)
{
    using Scalar = typename Target::scalar_type;
    IntegratorSpec<Scalar> one = integ;
    one.leapfrog_steps = 1;
    leapfrog_trajectory(st, target, one);
    const Scalar beta = target.beta();
    if (integ.kinetic == KineticKind::Quadratic) {
        st.momenta = ou_exact_update(st.momenta, st.masses, integ.friction, beta, integ.step, rng);
    } else {
        const Coords<Scalar> v = kinetic_gradient(st.momenta, st.masses, integ);
        const Scalar sd = std::sqrt(2 * integ.friction * integ.step / beta);
        st.momenta -= integ.friction * integ.step * v;
        for (Eigen::Index i = 0; i < st.momenta.cols(); ++i)
            for (Eigen::Index k = 0; k < st.momenta.rows(); ++k) st.momenta(k, i) += sd * Scalar(rng.normal());
    }
}

/// x' = x + (eps^2/2) F(x) + eps N(0, 1/beta), then wrapped.
template <SmoothTarget Target>
void langevin_overdamped_step(Coords<typename Target::scalar_type>& x, const Target& target,
                              const IntegratorSpec<typename Target::scalar_type>& integ, Rng& rng)
{
    using Scalar = typename Target::scalar_type;
    const Coords<Scalar> g = target.gradient(x);
    detail::require_finite(g);
    const Scalar eps = integ.step;
    const Scalar sd = eps / std::sqrt(target.beta());
    x -= (eps * eps / 2) * g;
    for (Eigen::Index i = 0; i < x.cols(); ++i)
        for (Eigen::Index k = 0; k < x.rows(); ++k) x(k, i) += sd * Scalar(rng.normal());
    target.wrap(x);
}

}  // namespace boltz
