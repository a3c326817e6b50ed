// numerics.hpp — dense complex linear-algebra kernels: Hermitian eigendecomposition,
// SVD, PSD tests, and signed eigenmode splitting. All functions are pure.

#pragma once

#include "pacap/types.hpp"

namespace pacap::numerics {

// Eigenvalues sorted descending; column i of eigenvectors pairs with eigenvalue i.
struct HermitianEig {
    RVec eigenvalues;
    CMat eigenvectors;
};

// a = left * diag(singulars) * right†, singulars descending, left m×m, right n×n.
struct SvdResult {
    CMat left;
    RVec singulars;
    CMat right;
};

// s = -(sum of eigenmodes with eigenvalue <= tau), dropped = their count.
struct ModeSplit {
    CMat s;
    Index dropped{};
};

// Input is symmetrized (a+a†)/2 before factoring. Throws NonSquare, NonFinite.
HermitianEig hermitian_eig(const CMat& a);

// Full SVD of an arbitrary complex matrix. Throws NonFinite.
SvdResult svd(const CMat& a);

// Splits a Hermitian matrix f into retained (eigenvalue > tau) and dropped
// modes, with tau = 1e-12 * max(1, |f|_2). Returns the negated dropped part,
// which is positive semidefinite up to tau. Throws NonSquare.
ModeSplit split_nonpositive_modes(const CMat& f);

// True iff the smallest eigenvalue of the symmetrized input is >= -tol.
bool is_psd(const CMat& a, double tol);

// Eigenvalues only, descending. Same preconditions as hermitian_eig.
RVec hermitian_eigenvalues(const CMat& a);

}  // namespace pacap::numerics
