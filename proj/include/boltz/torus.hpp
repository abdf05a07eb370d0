#pragma once

#include <cmath>

#include <Eigen/Core>

#include "boltz/errors.hpp"

namespace boltz {

/// Column vector of at most three coordinates.
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, 3, 1>;

/// Positions or momenta of N particles, one particle per column (d x N).
template <typename Scalar>
using Coords = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Rectangular d-torus, d in {1, 2, 3}.
template <typename Scalar = double>
class Torus {
public:
    using vector_type = Vec<Scalar>;

    Torus() = default;

    explicit Torus(vector_type side_lengths) : side_(std::move(side_lengths))
    {
        if (side_.size() < 1 || side_.size() > 3)
            throw InvalidInput("torus dimension must be 1, 2 or 3");
        for (Eigen::Index k = 0; k < side_.size(); ++k)
            if (!(side_[k] > Scalar(0)) || !std::isfinite(side_[k]))
                throw InvalidInput("torus side lengths must be positive and finite");
    }

    static Torus cube(int dim, Scalar length) { return Torus(vector_type::Constant(dim, length)); }

    int dim() const { return static_cast<int>(side_.size()); }
    const vector_type& side_lengths() const { return side_; }
    Scalar side(int axis) const { return side_[axis]; }
    Scalar volume() const { return side_.prod(); }
    Scalar min_side() const { return side_.minCoeff(); }

    /// Reduce one coordinate into [0, L).
    Scalar wrap_coord(Scalar x, int axis) const
    {
        const Scalar L = side_[axis];
        Scalar r = x - L * std::floor(x / L);
        if (r >= L) r -= L;
        if (r < Scalar(0)) r += L;
        if (r >= L) r = Scalar(0);
        return r;
    }

    /// Reduce one separation component into [-L/2, L/2).
    Scalar reduce_coord(Scalar s, int axis) const
    {
        const Scalar L = side_[axis];
        const Scalar h = L / 2;
        Scalar r = s - L * std::floor(s / L + Scalar(0.5));
        if (r >= h) r -= L;
        if (r < -h) r += L;
        return r;
    }

private:
    vector_type side_;
};

namespace detail {

template <typename Derived, typename Scalar>
void check_point(const Eigen::MatrixBase<Derived>& x, const Torus<Scalar>& t)
{
    if (x.size() != t.dim()) throw InvalidInput("point dimension does not match torus");
}

}  // namespace detail

/// Coordinates reduced into the fundamental domain [0, L_k).
template <typename Derived, typename Scalar>
Vec<Scalar> wrap(const Eigen::MatrixBase<Derived>& raw, const Torus<Scalar>& t)
{
    detail::check_point(raw, t);
    Vec<Scalar> out(t.dim());
    for (int k = 0; k < t.dim(); ++k) {
        if (!std::isfinite(raw[k])) throw InvalidInput("non-finite coordinate");
        out[k] = t.wrap_coord(raw[k], k);
    }
    return out;
}

/// Wrap every column of a d x N coordinate block in place.
template <typename Scalar>
void wrap_all(Coords<Scalar>& x, const Torus<Scalar>& t)
{
    if (x.rows() != t.dim()) throw InvalidInput("coordinate rows do not match torus");
    for (Eigen::Index i = 0; i < x.cols(); ++i)
        for (int k = 0; k < t.dim(); ++k) {
            if (!std::isfinite(x(k, i))) throw InvalidInput("non-finite coordinate");
            x(k, i) = t.wrap_coord(x(k, i), k);
        }
}

/// Shortest vector from xj to xi; components in [-L/2, L/2).
template <typename DerivedA, typename DerivedB, typename Scalar>
Vec<Scalar> min_sep_vector(const Eigen::MatrixBase<DerivedA>& xi, const Eigen::MatrixBase<DerivedB>& xj,
                           const Torus<Scalar>& t)
{
    detail::check_point(xi, t);
    detail::check_point(xj, t);
    Vec<Scalar> s(t.dim());
    for (int k = 0; k < t.dim(); ++k) s[k] = t.reduce_coord(xi[k] - xj[k], k);
    return s;
}

template <typename DerivedA, typename DerivedB, typename Scalar>
Scalar min_sep_distance(const Eigen::MatrixBase<DerivedA>& xi, const Eigen::MatrixBase<DerivedB>& xj,
                        const Torus<Scalar>& t)
{
    return min_sep_vector(xi, xj, t).norm();
}

}  // namespace boltz
