#include "pacap/numerics.hpp"

#include "pacap/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace pacap::numerics {

namespace {

void require_square_finite(const CMat& a, const char* who) {
    if (a.rows() != a.cols()) {
        throw NonSquare(std::string(who) + ": matrix must be square");
    }
    if (!all_finite(a)) {
        throw NonFinite(std::string(who) + ": matrix has NaN/Inf entries");
    }
}

}  // namespace

HermitianEig hermitian_eig(const CMat& a) {
    require_square_finite(a, "hermitian_eig");
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(a));
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("hermitian_eig: eigensolver failed to converge");
    }
    const Index n = a.rows();
    HermitianEig out;
    out.eigenvalues = es.eigenvalues().reverse();
    out.eigenvectors.resize(n, n);
    for (Index i = 0; i < n; ++i) {
        out.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    return out;
}

RVec hermitian_eigenvalues(const CMat& a) {
    require_square_finite(a, "hermitian_eigenvalues");
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(a), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("hermitian_eigenvalues: eigensolver failed to converge");
    }
    return es.eigenvalues().reverse();
}

SvdResult svd(const CMat& a) {
    if (!all_finite(a)) {
        throw NonFinite("svd: matrix has NaN/Inf entries");
    }
    Eigen::JacobiSVD<CMat> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return SvdResult{solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

ModeSplit split_nonpositive_modes(const CMat& f) {
    const HermitianEig eig = hermitian_eig(f);
    const Index n = f.rows();
    const double scale = (n > 0) ? std::max(std::abs(eig.eigenvalues(0)),
                                            std::abs(eig.eigenvalues(n - 1)))
                                 : 0.0;
    const double tau = 1e-12 * std::max(1.0, scale);

    ModeSplit out;
    out.s = CMat::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        if (eig.eigenvalues(i) <= tau) {
            out.s.noalias() -=
                eig.eigenvalues(i) * (eig.eigenvectors.col(i) * eig.eigenvectors.col(i).adjoint());
            ++out.dropped;
        }
    }
    out.s = hermitize(out.s);
    return out;
}

bool is_psd(const CMat& a, double tol) {
    const RVec lam = hermitian_eigenvalues(a);
    return lam(lam.size() - 1) >= -tol;
}

}  // namespace pacap::numerics
