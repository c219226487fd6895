#pragma once

#include <Eigen/Dense>

namespace glkde {

//! Polynomial defined piecewise on a bounded interval, zero outside.
//!
//! Piece i lives on [breakpoints[i], breakpoints[i+1]] and stores its
//! coefficients in powers of (u - center(i)) with center(i) the midpoint of
//! the piece. The centered representation keeps evaluation well conditioned
//! for pieces far from the origin and for very small scales.
class PiecewisePolynomial {
public:
  PiecewisePolynomial() = default;
  PiecewisePolynomial(Eigen::ArrayXd breakpoints, Eigen::MatrixXd coeffs);

  double operator()(double u) const;

  double lo() const { return breakpoints_(0); }
  double hi() const { return breakpoints_(breakpoints_.size() - 1); }
  Eigen::Index pieces() const { return coeffs_.rows(); }
  Eigen::Index degree() const { return coeffs_.cols() - 1; }
  double center(Eigen::Index piece) const {
    return 0.5 * (breakpoints_(piece) + breakpoints_(piece + 1));
  }

  const Eigen::ArrayXd& breakpoints() const { return breakpoints_; }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }

private:
  Eigen::ArrayXd breakpoints_; //!< strictly increasing, size pieces()+1
  Eigen::MatrixXd coeffs_;     //!< row per piece, column per power
};

//! Exact convolution (p * q)(t) = integral of p(u) q(t-u) du.
//!
//! Computed analytically cell by cell: the result is piecewise polynomial
//! with breakpoints at all pairwise sums of the input breakpoints.
PiecewisePolynomial convolve(const PiecewisePolynomial& p,
                             const PiecewisePolynomial& q);

} // namespace glkde
