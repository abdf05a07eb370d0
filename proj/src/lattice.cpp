#include "boltz/lattice.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "boltz/errors.hpp"

namespace boltz {

std::string to_string(LatticeModel m)
{
    switch (m) {
    case LatticeModel::Ising: return "ising";
    case LatticeModel::Potts: return "potts";
    case LatticeModel::XY: return "xy";
    }
    return "?";
}

LatticeModel lattice_model_from_string(const std::string& name)
{
    if (name == "ising") return LatticeModel::Ising;
    if (name == "potts") return LatticeModel::Potts;
    if (name == "xy") return LatticeModel::XY;
    throw InvalidInput("unknown lattice model '" + name + "'");
}

std::size_t LatticeSpec::size() const
{
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    return n;
}

void LatticeSpec::validate() const
{
    if (dims.empty() || dims.size() > 3) throw InvalidInput("lattice dimension must be 1, 2 or 3");
    for (int d : dims)
        if (d < 2) throw InvalidInput("every lattice axis needs at least 2 sites");
    if (!(beta > 0) || !std::isfinite(beta)) throw InvalidInput("beta must be positive");
    if (!std::isfinite(J) || !std::isfinite(h) || !h_xy.allFinite()) throw InvalidInput("non-finite coupling");
    if (model == LatticeModel::Potts) {
        if (q < 2) throw InvalidInput("Potts model needs q >= 2");
        if (h != 0) throw InvalidInput("Potts model has no field term");
    }
    if (model != LatticeModel::XY && !h_xy.isZero()) throw InvalidInput("h_xy only applies to the XY model");
    if (model == LatticeModel::XY && h != 0) throw InvalidInput("XY model takes its field as h_xy");
}

std::string LatticeSpec::canonical() const
{
    std::ostringstream os;
    os << to_string(model) << " dims=";
    for (std::size_t k = 0; k < dims.size(); ++k) os << (k ? "x" : "") << dims[k];
    os << " q=" << (model == LatticeModel::Potts ? q : 0) << " J=" << format_double(J) << " h=" << format_double(h)
       << " hx=" << format_double(h_xy[0]) << " hy=" << format_double(h_xy[1]) << " beta=" << format_double(beta);
    return os.str();
}

std::uint64_t LatticeSpec::hash() const { return fnv1a(canonical()); }

NeighborTable::NeighborTable(const std::vector<int>& dims)
{
    const int d = static_cast<int>(dims.size());
    degree_ = 2 * d;
    std::size_t n = 1;
    for (int L : dims) n *= static_cast<std::size_t>(L);
    table_.resize(n * degree_);

    // Row-major: the last axis varies fastest.
    std::vector<std::size_t> stride(d, 1);
    for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * dims[k + 1];

    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) {
            const int c = static_cast<int>((i / stride[k]) % dims[k]);
            const int down = (c + dims[k] - 1) % dims[k];
            const int up = (c + 1) % dims[k];
            table_[i * degree_ + 2 * k] = static_cast<int>(i + (down - c) * static_cast<long>(stride[k]));
            table_[i * degree_ + 2 * k + 1] = static_cast<int>(i + (up - c) * static_cast<long>(stride[k]));
        }
}

std::vector<std::pair<int, int>> NeighborTable::edges() const
{
    std::vector<std::pair<int, int>> out;
    const std::size_t n = sites();
    out.reserve(n * degree_ / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < degree_ / 2; ++k) out.emplace_back(static_cast<int>(i), (*this)[i][2 * k + 1]);
    return out;
}

Lattice::Lattice(LatticeSpec spec) : spec_(std::move(spec))
{
    spec_.validate();
    neighbors_ = NeighborTable(spec_.dims);
}

LatticeConfig ordered_config(const Lattice& lattice)
{
    const double v = lattice.spec().model == LatticeModel::XY ? 0.0 : 1.0;
    return {Eigen::VectorXd::Constant(static_cast<Eigen::Index>(lattice.size()), v)};
}

namespace {

bool in_domain(double x, const LatticeSpec& spec)
{
    switch (spec.model) {
    case LatticeModel::Ising: return x == 1.0 || x == -1.0;
    case LatticeModel::Potts: return x >= 1 && x <= spec.q && x == std::floor(x);
    case LatticeModel::XY: return x >= 0 && x < 2 * std::numbers::pi;
    }
    return false;
}

double coupling(double a, double b, LatticeModel model)
{
    switch (model) {
    case LatticeModel::Ising: return a * b;
    case LatticeModel::Potts: return a == b ? 1.0 : 0.0;
    case LatticeModel::XY: return std::cos(a - b);
    }
    return 0;
}

double field_term(double x, const LatticeSpec& spec)
{
    switch (spec.model) {
    case LatticeModel::Ising: return spec.h * x;
    case LatticeModel::Potts: return 0.0;
    case LatticeModel::XY: return spec.h_xy[0] * std::cos(x) + spec.h_xy[1] * std::sin(x);
    }
    return 0;
}

}  // namespace

void check_config(const LatticeConfig& config, const Lattice& lattice)
{
    if (static_cast<std::size_t>(config.spins.size()) != lattice.size())
        throw InvalidState("configuration length does not match the lattice");
    for (Eigen::Index i = 0; i < config.spins.size(); ++i)
        if (!in_domain(config.spins[i], lattice.spec()))
            throw InvalidState("spin " + std::to_string(i) + " outside the model domain");
}

double lattice_energy(const LatticeConfig& config, const Lattice& lattice)
{
    check_config(config, lattice);
    const auto& spec = lattice.spec();
    const auto& nb = lattice.neighbors();
    const auto& x = config.spins;
    double pair = 0, field = 0;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        for (int s = 0; s < nb.degree(); ++s) pair += coupling(x[i], x[nb[i][s]], spec.model);
        field += field_term(x[i], spec);
    }
    return -0.5 * spec.J * pair - field;
}

double local_energy_delta(const LatticeConfig& config, std::size_t site, double value, const Lattice& lattice)
{
    const auto& spec = lattice.spec();
    if (site >= lattice.size()) throw InvalidInput("site index out of range");
    if (!in_domain(value, spec)) throw InvalidState("proposed spin outside the model domain");
    const auto& x = config.spins;
    const double old = x[site];
    const int* nb = lattice.neighbors()[site];
    double d_pair = 0;
    for (int s = 0; s < lattice.neighbors().degree(); ++s) {
        const double xj = x[nb[s]];
        d_pair += coupling(value, xj, spec.model) - coupling(old, xj, spec.model);
    }
    // Site i appears once as the centre and once in each neighbour's sum.
    return -spec.J * d_pair - (field_term(value, spec) - field_term(old, spec));
}

Eigen::Vector2d magnetic_density(const LatticeConfig& config, const Lattice& lattice)
{
    const auto& spec = lattice.spec();
    const auto& x = config.spins;
    const double n = static_cast<double>(x.size());
    switch (spec.model) {
    case LatticeModel::Ising: return {x.mean(), 0.0};
    case LatticeModel::Potts: {
        const double f = static_cast<double>((x.array() == 1.0).count()) / n;
        return {(spec.q * f - 1.0) / (spec.q - 1.0), 0.0};
    }
    case LatticeModel::XY: return {x.array().cos().mean(), x.array().sin().mean()};
    }
    return Eigen::Vector2d::Zero();
}

double reduce_angle(double theta)
{
    constexpr double two_pi = 2 * std::numbers::pi;
    double r = theta - two_pi * std::floor(theta / two_pi);
    if (r >= two_pi || r < 0) r = 0;
    return r;
}

void write_snapshot(std::ostream& os, const LatticeConfig& config, const LatticeSpec& spec)
{
    os << to_string(spec.model) << ' ';
    for (std::size_t k = 0; k < spec.dims.size(); ++k) os << (k ? "x" : "") << spec.dims[k];
    os << ' ' << std::hex << spec.hash() << std::dec << '\n';
    for (Eigen::Index i = 0; i < config.spins.size(); ++i) os << format_double(config.spins[i]) << '\n';
}

LatticeConfig read_snapshot(std::istream& is, const LatticeSpec& spec)
{
    std::string model, dims, hash;
    if (!(is >> model >> dims >> hash)) throw InvalidInput("malformed snapshot header");
    std::ostringstream expect;
    expect << std::hex << spec.hash();
    if (model != to_string(spec.model) || hash != expect.str())
        throw InvalidInput("snapshot header does not match the lattice spec");
    LatticeConfig config{Eigen::VectorXd(static_cast<Eigen::Index>(spec.size()))};
    std::string token;
    for (Eigen::Index i = 0; i < config.spins.size(); ++i) {
        if (!(is >> token)) throw InvalidInput("snapshot truncated");
        double v = 0;
        auto res = std::from_chars(token.data(), token.data() + token.size(), v);
        if (res.ec != std::errc() || res.ptr != token.data() + token.size())
            throw InvalidInput("bad spin value '" + token + "'");
        config.spins[i] = v;
    }
    if (is >> token) throw InvalidInput("trailing data in snapshot");
    return config;
}

}  // namespace boltz
