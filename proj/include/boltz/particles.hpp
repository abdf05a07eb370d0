#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "boltz/errors.hpp"
#include "boltz/text.hpp"
#include "boltz/torus.hpp"

namespace boltz {

template <typename Scalar>
struct HardDisk {
    Scalar sigma = 1;
};

/// epsilon (2 sigma / r)^k, optionally truncated.
template <typename Scalar>
struct SoftDisk {
    Scalar sigma = 1;
    Scalar epsilon = 1;
    int k = 12;
    std::optional<Scalar> cutoff;
};

/// 4 epsilon [(sigma/r)^12 - (sigma/r)^6], plainly truncated at `cutoff` when set.
template <typename Scalar>
struct LennardJones {
    Scalar sigma = 1;
    Scalar epsilon = 1;
    std::optional<Scalar> cutoff;

    /// The usual truncation at 2 sigma.
    static LennardJones truncated(Scalar sigma, Scalar epsilon) { return {sigma, epsilon, 2 * sigma}; }
};

template <typename Scalar>
struct StretchTerm {
    int i = 0, j = 1;
    Scalar r0 = 1, kb = 1;
};

template <typename Scalar>
struct AngleTerm {
    int i = 0, j = 1, k = 2;
    Scalar phi0 = 1, ka = 1;
};

template <typename Scalar>
using BondTerm = std::variant<StretchTerm<Scalar>, AngleTerm<Scalar>>;

template <typename Scalar>
struct Bonded {
    std::vector<BondTerm<Scalar>> terms;
};

template <typename Scalar>
using Potential = std::variant<HardDisk<Scalar>, SoftDisk<Scalar>, LennardJones<Scalar>, Bonded<Scalar>>;

template <typename Scalar = double>
struct ParticleSpec {
    using vector_type = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Torus<Scalar> torus;
    int n = 0;
    Potential<Scalar> potential;
    Scalar beta = 1;
    vector_type masses;  // empty means unit masses

    int dim() const { return torus.dim(); }
    Scalar mass(int i) const { return masses.size() ? masses[i] : Scalar(1); }
    vector_type mass_vector() const { return masses.size() ? masses : vector_type::Ones(n); }

    bool is_hard_disk() const { return std::holds_alternative<HardDisk<Scalar>>(potential); }

    /// Packing fraction N v(sigma) / V, v the d-ball volume; zero for bonded models.
    Scalar density() const
    {
        const Scalar s = std::visit(
            [](const auto& p) -> Scalar {
                if constexpr (requires { p.sigma; }) return p.sigma;
                else return Scalar(0);
            },
            potential);
        const Scalar pi = std::numbers::pi_v<Scalar>;
        const Scalar ball = dim() == 1 ? 2 * s : dim() == 2 ? pi * s * s : Scalar(4) / 3 * pi * s * s * s;
        return n * ball / torus.volume();
    }

    void validate() const
    {
        if (n < 1) throw InvalidInput("particle count must be positive");
        if (!(beta > 0)) throw InvalidInput("beta must be positive");
        if (masses.size() && (masses.size() != n || (masses.array() <= 0).any()))
            throw InvalidInput("masses must be N positive values");
        std::visit(
            [this](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, Bonded<Scalar>>) {
                    for (const auto& t : p.terms) std::visit([this](const auto& b) { check_term(b); }, t);
                } else {
                    if (!(p.sigma > 0)) throw InvalidInput("sigma must be positive");
                    if constexpr (!std::is_same_v<P, HardDisk<Scalar>>) {
                        if (!(p.epsilon > 0)) throw InvalidInput("epsilon must be positive");
                        if (p.cutoff && !(*p.cutoff > p.sigma)) throw InvalidInput("cutoff must exceed sigma");
                    }
                    if constexpr (std::is_same_v<P, SoftDisk<Scalar>>)
                        if (p.k < 1) throw InvalidInput("soft-disk exponent must be at least 1");
                }
            },
            potential);
    }

    std::string canonical() const
    {
        std::ostringstream os;
        os << "torus=";
        for (int k = 0; k < dim(); ++k) os << (k ? "x" : "") << format_double(double(torus.side(k)));
        os << " n=" << n << " beta=" << format_double(double(beta)) << ' ';
        std::visit(
            [&os](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                auto cut = [](const auto& c) { return c ? format_double(double(*c)) : std::string("none"); };
                if constexpr (std::is_same_v<P, HardDisk<Scalar>>) os << "hard_disk sigma=" << format_double(double(p.sigma));
                else if constexpr (std::is_same_v<P, SoftDisk<Scalar>>)
                    os << "soft_disk sigma=" << format_double(double(p.sigma)) << " eps=" << format_double(double(p.epsilon))
                       << " k=" << p.k << " cutoff=" << cut(p.cutoff);
                else if constexpr (std::is_same_v<P, LennardJones<Scalar>>)
                    os << "lennard_jones sigma=" << format_double(double(p.sigma))
                       << " eps=" << format_double(double(p.epsilon)) << " cutoff=" << cut(p.cutoff);
                else os << "bonded terms=" << p.terms.size();
            },
            potential);
        if (masses.size())
            for (Eigen::Index i = 0; i < masses.size(); ++i) os << (i ? "," : " masses=") << format_double(double(masses[i]));
        return os.str();
    }

    std::uint64_t hash() const { return fnv1a(canonical()); }

private:
    void check_term(const StretchTerm<Scalar>& t) const
    {
        check_indices({t.i, t.j});
        if (!(t.r0 > 0 && t.kb > 0)) throw InvalidInput("stretch term needs r0, kb > 0");
    }
    void check_term(const AngleTerm<Scalar>& t) const
    {
        check_indices({t.i, t.j, t.k});
        if (!(t.phi0 > 0 && t.ka > 0)) throw InvalidInput("angle term needs phi0, ka > 0");
    }
    void check_indices(std::initializer_list<int> idx) const
    {
        for (int a : idx)
            if (a < 0 || a >= n) throw InvalidInput("bond index out of range");
        const std::vector<int> v(idx);
        for (std::size_t a = 0; a < v.size(); ++a)
            for (std::size_t b = a + 1; b < v.size(); ++b)
                if (v[a] == v[b]) throw InvalidInput("bond indices must be distinct");
    }
};

/// Energy that may be forbidden (hard-core overlap) without using infinities.
template <typename Scalar>
class Energy {
public:
    explicit Energy(Scalar value) : value_(value) {}
    static Energy forbidden()
    {
        Energy e(0);
        e.forbidden_ = true;
        return e;
    }
    bool is_forbidden() const { return forbidden_; }
    Scalar value() const
    {
        if (forbidden_) throw InvalidState("energy of a forbidden configuration");
        return value_;
    }

private:
    Scalar value_ = 0;
    bool forbidden_ = false;
};

namespace detail {

template <typename Scalar>
bool beyond_cutoff(Scalar r, const std::optional<Scalar>& cutoff)
{
    return cutoff && r > *cutoff;
}

template <typename Scalar>
Scalar ipow(Scalar x, int k)
{
    Scalar out = 1;
    for (; k > 0; --k) out *= x;
    return out;
}

}  // namespace detail

/// Two-particle energy at separation r (soft disk or Lennard-Jones).
template <typename Scalar>
Scalar pair_energy(Scalar r, const ParticleSpec<Scalar>& spec)
{
    if (!(r > 0)) throw Singularity("pair energy at zero separation");
    if (const auto* lj = std::get_if<LennardJones<Scalar>>(&spec.potential)) {
        if (detail::beyond_cutoff(r, lj->cutoff)) return 0;
        const Scalar s6 = detail::ipow(lj->sigma / r, 6);
        return 4 * lj->epsilon * (s6 * s6 - s6);
    }
    if (const auto* sd = std::get_if<SoftDisk<Scalar>>(&spec.potential)) {
        if (detail::beyond_cutoff(r, sd->cutoff)) return 0;
        return sd->epsilon * detail::ipow(2 * sd->sigma / r, sd->k);
    }
    throw Unsupported("pair energy needs a soft-disk or Lennard-Jones potential");
}

/// dU/dr of the two-particle energy (zero beyond the cutoff).
template <typename Scalar>
Scalar pair_derivative(Scalar r, const ParticleSpec<Scalar>& spec)
{
    if (!(r > 0)) throw Singularity("pair force at zero separation");
    if (const auto* lj = std::get_if<LennardJones<Scalar>>(&spec.potential)) {
        if (detail::beyond_cutoff(r, lj->cutoff)) return 0;
        const Scalar s6 = detail::ipow(lj->sigma / r, 6);
        return 4 * lj->epsilon * (-12 * s6 * s6 + 6 * s6) / r;
    }
    if (const auto* sd = std::get_if<SoftDisk<Scalar>>(&spec.potential)) {
        if (detail::beyond_cutoff(r, sd->cutoff)) return 0;
        return -sd->k * sd->epsilon * detail::ipow(2 * sd->sigma / r, sd->k) / r;
    }
    throw Unsupported("pair force needs a soft-disk or Lennard-Jones potential");
}

/// Cutoff radius of a pair potential, if any.
template <typename Scalar>
std::optional<Scalar> pair_cutoff(const ParticleSpec<Scalar>& spec)
{
    if (const auto* lj = std::get_if<LennardJones<Scalar>>(&spec.potential)) return lj->cutoff;
    if (const auto* sd = std::get_if<SoftDisk<Scalar>>(&spec.potential)) return sd->cutoff;
    return std::nullopt;
}

/// Gradient of the pair term with respect to xi; the xj gradient is its negative.
template <typename DerivedA, typename DerivedB, typename Scalar>
Vec<Scalar> pair_gradient(const Eigen::MatrixBase<DerivedA>& xi, const Eigen::MatrixBase<DerivedB>& xj,
                          const ParticleSpec<Scalar>& spec)
{
    const Vec<Scalar> s = min_sep_vector(xi, xj, spec.torus);
    const Scalar r = s.norm();
    if (!(r > 0)) throw Singularity("coincident particles");
    return (pair_derivative(r, spec) / r) * s;
}

template <typename Scalar>
bool hard_disk_valid(const Coords<Scalar>& x, const ParticleSpec<Scalar>& spec)
{
    const auto& hd = std::get<HardDisk<Scalar>>(spec.potential);
    const Scalar contact = 2 * hd.sigma;
    for (Eigen::Index i = 0; i < x.cols(); ++i)
        for (Eigen::Index j = i + 1; j < x.cols(); ++j)
            if (!(min_sep_distance(x.col(i), x.col(j), spec.torus) > contact)) return false;
    return true;
}

template <typename Scalar>
Scalar bonded_energy(const Coords<Scalar>& x, const std::vector<BondTerm<Scalar>>& terms, const Torus<Scalar>& torus)
{
    Scalar u = 0;
    for (const auto& term : terms) {
        if (const auto* st = std::get_if<StretchTerm<Scalar>>(&term)) {
            const Scalar d = min_sep_distance(x.col(st->i), x.col(st->j), torus);
            u += st->kb / 2 * (d - st->r0) * (d - st->r0);
        } else {
            const auto& an = std::get<AngleTerm<Scalar>>(term);
            const Vec<Scalar> a = min_sep_vector(x.col(an.i), x.col(an.j), torus);
            const Vec<Scalar> b = min_sep_vector(x.col(an.j), x.col(an.k), torus);
            const Scalar na = a.norm(), nb = b.norm();
            if (!(na > 0 && nb > 0)) throw Singularity("coincident atoms in an angle term");
            const Scalar c = std::clamp(a.dot(b) / (na * nb), Scalar(-1), Scalar(1));
            const Scalar phi = std::acos(c);
            u += an.ka / 2 * (phi - an.phi0) * (phi - an.phi0);
        }
    }
    return u;
}

template <typename Scalar>
void add_bonded_gradient(const Coords<Scalar>& x, const std::vector<BondTerm<Scalar>>& terms, const Torus<Scalar>& torus,
                         Coords<Scalar>& grad)
{
    for (const auto& term : terms) {
        if (const auto* st = std::get_if<StretchTerm<Scalar>>(&term)) {
            const Vec<Scalar> s = min_sep_vector(x.col(st->i), x.col(st->j), torus);
            const Scalar d = s.norm();
            if (!(d > 0)) throw Singularity("coincident bonded atoms");
            const Vec<Scalar> g = (st->kb * (d - st->r0) / d) * s;
            grad.col(st->i) += g;
            grad.col(st->j) -= g;
        } else {
            const auto& an = std::get<AngleTerm<Scalar>>(term);
            const Vec<Scalar> a = min_sep_vector(x.col(an.i), x.col(an.j), torus);
            const Vec<Scalar> b = min_sep_vector(x.col(an.j), x.col(an.k), torus);
            const Scalar na = a.norm(), nb = b.norm();
            if (!(na > 0 && nb > 0)) throw Singularity("coincident atoms in an angle term");
            const Scalar c = std::clamp(a.dot(b) / (na * nb), Scalar(-1), Scalar(1));
            const Scalar phi = std::acos(c);
            const Scalar guard = 1 - Scalar(1e-12);
            const Scalar cg = std::clamp(c, -guard, guard);
            const Scalar du_dc = -an.ka * (phi - an.phi0) / std::sqrt(1 - cg * cg);
            const Vec<Scalar> dc_da = b / (na * nb) - (c / (na * na)) * a;
            const Vec<Scalar> dc_db = a / (na * nb) - (c / (nb * nb)) * b;
            grad.col(an.i) += du_dc * dc_da;
            grad.col(an.j) += du_dc * (dc_db - dc_da);
            grad.col(an.k) -= du_dc * dc_db;
        }
    }
}

/// Sum over unordered pairs and bond terms. Hard disks: 0 or forbidden.
template <typename Scalar>
Energy<Scalar> total_energy(const Coords<Scalar>& x, const ParticleSpec<Scalar>& spec)
{
    if (x.rows() != spec.dim() || x.cols() != spec.n) throw InvalidInput("configuration shape does not match spec");
    if (spec.is_hard_disk()) return hard_disk_valid(x, spec) ? Energy<Scalar>(0) : Energy<Scalar>::forbidden();
    if (const auto* bonded = std::get_if<Bonded<Scalar>>(&spec.potential))
        return Energy<Scalar>(bonded_energy(x, bonded->terms, spec.torus));
    const auto cutoff = pair_cutoff(spec);
    Scalar u = 0;
    for (Eigen::Index i = 0; i < x.cols(); ++i)
        for (Eigen::Index j = i + 1; j < x.cols(); ++j) {
            const Scalar r = min_sep_distance(x.col(i), x.col(j), spec.torus);
            if (cutoff && r > *cutoff) continue;
            u += pair_energy(r, spec);
        }
    return Energy<Scalar>(u);
}

/// d x N gradient of total_energy.
template <typename Scalar>
Coords<Scalar> total_gradient(const Coords<Scalar>& x, const ParticleSpec<Scalar>& spec)
{
    if (x.rows() != spec.dim() || x.cols() != spec.n) throw InvalidInput("configuration shape does not match spec");
    Coords<Scalar> g = Coords<Scalar>::Zero(x.rows(), x.cols());
    if (spec.is_hard_disk()) return g;
    if (const auto* bonded = std::get_if<Bonded<Scalar>>(&spec.potential)) {
        add_bonded_gradient(x, bonded->terms, spec.torus, g);
        return g;
    }
    const auto cutoff = pair_cutoff(spec);
    for (Eigen::Index i = 0; i < x.cols(); ++i)
        for (Eigen::Index j = i + 1; j < x.cols(); ++j) {
            const Vec<Scalar> s = min_sep_vector(x.col(i), x.col(j), spec.torus);
            const Scalar r = s.norm();
            if (cutoff && r > *cutoff) continue;
            if (!(r > 0)) throw Singularity("coincident particles");
            const Vec<Scalar> gi = (pair_derivative(r, spec) / r) * s;
            g.col(i) += gi;
            g.col(j) -= gi;
        }
    return g;
}

/// Header "torus L1 [L2 [L3]] spec-hash", then one "x y [z]" line per particle.
template <typename Scalar>
void write_snapshot(std::ostream& os, const Coords<Scalar>& x, const ParticleSpec<Scalar>& spec)
{
    os << "torus";
    for (int k = 0; k < spec.dim(); ++k) os << ' ' << format_double(double(spec.torus.side(k)));
    os << ' ' << std::hex << spec.hash() << std::dec << '\n';
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        for (int k = 0; k < spec.dim(); ++k) os << (k ? " " : "") << format_double(double(x(k, i)));
        os << '\n';
    }
}

template <typename Scalar>
Coords<Scalar> read_snapshot(std::istream& is, const ParticleSpec<Scalar>& spec)
{
    auto parse = [](const std::string& tok) {
        double v = 0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw InvalidInput("bad number '" + tok + "' in snapshot");
        return v;
    };
    std::string tok;
    if (!(is >> tok) || tok != "torus") throw InvalidInput("malformed snapshot header");
    for (int k = 0; k < spec.dim(); ++k) {
        if (!(is >> tok)) throw InvalidInput("malformed snapshot header");
        if (Scalar(parse(tok)) != spec.torus.side(k)) throw InvalidInput("snapshot torus does not match spec");
    }
    std::ostringstream expect;
    expect << std::hex << spec.hash();
    if (!(is >> tok) || tok != expect.str()) throw InvalidInput("snapshot hash does not match spec");
    Coords<Scalar> x(spec.dim(), spec.n);
    for (int i = 0; i < spec.n; ++i)
        for (int k = 0; k < spec.dim(); ++k) {
            if (!(is >> tok)) throw InvalidInput("snapshot truncated");
            x(k, i) = Scalar(parse(tok));
        }
    if (is >> tok) throw InvalidInput("trailing data in snapshot");
    return x;
}

}  // namespace boltz
