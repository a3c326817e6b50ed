// types.hpp — shared scalar/matrix aliases and small numeric helpers.

#pragma once

#include <Eigen/Dense>

#include <complex>

namespace pacap {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

inline bool all_finite(const CMat& a) { return a.allFinite(); }
inline bool all_finite(const RVec& v) { return v.allFinite(); }

// (a + a†)/2, absorbs round-off asymmetry before Hermitian factorizations.
inline CMat hermitize(const CMat& a) { return 0.5 * (a + a.adjoint()); }

inline CMat diag_matrix(const RVec& d) {
    return d.cast<Complex>().asDiagonal().toDenseMatrix();
}

inline RVec real_diag(const CMat& a) { return a.diagonal().real(); }

}  // namespace pacap
