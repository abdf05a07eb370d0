#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "boltz/text.hpp"

namespace boltz {

enum class LatticeModel { Ising, Potts, XY };

std::string to_string(LatticeModel m);
LatticeModel lattice_model_from_string(const std::string& name);

struct LatticeSpec {
    std::vector<int> dims;
    LatticeModel model = LatticeModel::Ising;
    int q = 2;
    double J = 1.0;
    double h = 0.0;
    Eigen::Vector2d h_xy = Eigen::Vector2d::Zero();
    double beta = 1.0;

    std::size_t size() const;
    int dim() const { return static_cast<int>(dims.size()); }
    /// Throws InvalidInput on any violated invariant.
    void validate() const;
    /// Stable text form of every field; hashed into snapshot headers.
    std::string canonical() const;
    std::uint64_t hash() const;
};

/// For each site the 2d neighbours, ordered (-axis0, +axis0, -axis1, +axis1, ...).
class NeighborTable {
public:
    NeighborTable() = default;
    explicit NeighborTable(const std::vector<int>& dims);

    int degree() const { return degree_; }
    std::size_t sites() const { return degree_ ? table_.size() / degree_ : 0; }
    const int* operator[](std::size_t site) const { return table_.data() + site * degree_; }

    /// The dN lattice edges (site, +axis neighbour); wrap edges appear once.
    std::vector<std::pair<int, int>> edges() const;

private:
    int degree_ = 0;
    std::vector<int> table_;
};

/// Spin values per site, row-major over the lattice axes. Ising: +-1, Potts: 1..q,
/// XY: angle in [0, 2pi).
struct LatticeConfig {
    Eigen::VectorXd spins;
};

/// A validated spec bundled with its neighbour table.
class Lattice {
public:
    explicit Lattice(LatticeSpec spec);

    const LatticeSpec& spec() const { return spec_; }
    const NeighborTable& neighbors() const { return neighbors_; }
    std::size_t size() const { return spec_.size(); }

private:
    LatticeSpec spec_;
    NeighborTable neighbors_;
};

LatticeConfig ordered_config(const Lattice& lattice);
void check_config(const LatticeConfig& config, const Lattice& lattice);

/// U = -(J/2) sum_i sum_{j in S_i} coupling(x_i, x_j) - field term.
double lattice_energy(const LatticeConfig& config, const Lattice& lattice);

/// Energy change from setting `site` to `value`, from the 2d local terms.
double local_energy_delta(const LatticeConfig& config, std::size_t site, double value, const Lattice& lattice);

/// Ising: (mean spin, 0). Potts: ((q f_1 - 1)/(q - 1), 0) with f_1 the fraction of sites in state 1.
/// XY: mean of (cos x, sin x).
Eigen::Vector2d magnetic_density(const LatticeConfig& config, const Lattice& lattice);

double reduce_angle(double theta);

void write_snapshot(std::ostream& os, const LatticeConfig& config, const LatticeSpec& spec);
/// Reads a snapshot written for `spec`; the header must match its hash.
LatticeConfig read_snapshot(std::istream& is, const LatticeSpec& spec);

}  // namespace boltz
