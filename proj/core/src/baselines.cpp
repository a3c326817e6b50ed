#include "pacap/baselines.hpp"

#include "pacap/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <vector>

namespace pacap {

namespace {

// Lawson-Hanson nonnegative least squares, min |Ax - b| s.t. x >= 0.
// Only used in the degenerate singular-W branch, so plain and unoptimized.
RVec nnls(const RMat& a, const RVec& b, long max_iter = 300) {
    const Index n = a.cols();
    RVec x = RVec::Zero(n);
    std::vector<bool> passive(n, false);

    for (long it = 0; it < max_iter; ++it) {
        const RVec w = a.transpose() * (b - a * x);
        Index t = -1;
        double wmax = 1e-12;
        for (Index j = 0; j < n; ++j) {
            if (!passive[j] && w(j) > wmax) {
                wmax = w(j);
                t = j;
            }
        }
        if (t < 0) break;
        passive[t] = true;

        while (true) {
            std::vector<Index> idx;
            for (Index j = 0; j < n; ++j) {
                if (passive[j]) idx.push_back(j);
            }
            RMat ap(a.rows(), static_cast<Index>(idx.size()));
            for (size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Index>(k)) = a.col(idx[k]);
            const RVec zp = ap.colPivHouseholderQr().solve(b);

            bool all_pos = true;
            for (Index k = 0; k < zp.size(); ++k) {
                if (zp(k) <= 0.0) all_pos = false;
            }
            if (all_pos) {
                x.setZero();
                for (size_t k = 0; k < idx.size(); ++k) x(idx[k]) = zp(static_cast<Index>(k));
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            for (size_t k = 0; k < idx.size(); ++k) {
                const double zk = zp(static_cast<Index>(k));
                if (zk <= 0.0) {
                    const double xk = x(idx[k]);
                    alpha = std::min(alpha, xk / (xk - zk));
                }
            }
            for (size_t k = 0; k < idx.size(); ++k) {
                x(idx[k]) += alpha * (zp(static_cast<Index>(k)) - x(idx[k]));
                if (x(idx[k]) <= 1e-14) {
                    x(idx[k]) = 0.0;
                    passive[idx[k]] = false;
                }
            }
        }
    }
    return x;
}

}  // namespace

WaterfillResult waterfill_sum(const ChannelMatrix& ch, double total_power) {
    if (!(total_power > 0.0)) {
        throw std::invalid_argument("waterfill_sum: total power must be positive");
    }
    const ChannelDecomposition& dec = ch.decomposition();
    const Index n = ch.tx();
    const Index r = std::min(ch.rx(), n);

    // Channel eigenvalues λ_i = σ_i², descending by SVD convention.
    const RVec lam_h = dec.svd.singulars.head(r).cwiseAbs2();

    // Greedy largest-first activation: drop the weakest candidate mode while
    // its water level cannot cover 1/λ.
    Index k = r;
    double mu = 0.0;
    while (k > 0) {
        double inv_sum = 0.0;
        for (Index i = 0; i < k; ++i) inv_sum += 1.0 / lam_h(i);
        mu = (total_power + inv_sum) / static_cast<double>(k);
        if (mu > 1.0 / lam_h(k - 1)) break;
        --k;
    }

    RVec lam_q = RVec::Zero(n);
    for (Index i = 0; i < k; ++i) {
        lam_q(i) = std::max(mu - 1.0 / lam_h(i), 0.0);
    }
    lam_q *= total_power / lam_q.sum();  // exact trace after round-off

    WaterfillResult out;
    out.q = InputCovariance(hermitize(
        dec.svd.right * lam_q.cast<Complex>().asDiagonal() * dec.svd.right.adjoint()));
    out.water_level = mu;
    out.active_modes = k;
    out.nu_star = 1.0 / mu;
    return out;
}

double mac_rate(const ChannelMatrix& ch, const PowerConstraint& p) {
    if (p.size() != ch.tx()) {
        throw DimensionMismatch("mac_rate: constraint length must equal transmit count");
    }
    return rate(ch, InputCovariance(diag_matrix(p.p)));
}

ForcedEigenbeamResult forced_eigenbeam(const ChannelMatrix& ch, const PowerConstraint& p) {
    const Index n = ch.tx();
    if (p.size() != n) {
        throw DimensionMismatch("forced_eigenbeam: constraint length must equal transmit count");
    }
    const ChannelDecomposition& dec = ch.decomposition();
    const RMat w = dec.svd.right.cwiseAbs2();  // W_ji = |V_ji|²

    const double scale = std::max(1.0, p.p.maxCoeff());
    constexpr double kClipBand = 1e-10;
    const double residual_tol = 1e-9 * scale;

    Eigen::FullPivLU<RMat> lu(w);
    lu.setThreshold(1e-12);
    RVec lambda;
    if (lu.isInvertible()) {
        lambda = lu.solve(p.p);
    } else {
        // Singular W: minimum-norm least-squares solution first, nonnegative
        // least squares as the fallback when that solution has negative parts.
        lambda = w.completeOrthogonalDecomposition().solve(p.p);
        if ((w * lambda - p.p).norm() > residual_tol) {
            return {};  // p not in the range of W
        }
        if ((lambda.array() < -kClipBand).any()) {
            lambda = nnls(w, p.p);
            if ((w * lambda - p.p).norm() > residual_tol) {
                return {};
            }
        }
    }

    if ((lambda.array() < -kClipBand).any()) {
        return {};
    }
    lambda = lambda.cwiseMax(0.0);

    ForcedEigenbeamResult out;
    out.feasible = true;
    out.lambda_q = lambda;
    out.q = InputCovariance(hermitize(
        dec.svd.right * lambda.cast<Complex>().asDiagonal() * dec.svd.right.adjoint()));
    out.rate = rate(ch, *out.q);
    return out;
}

MisoResult miso_closed_form(const ChannelMatrix& ch, const PowerConstraint& p) {
    if (ch.rx() != 1) {
        throw NotMiso("miso_closed_form: channel must have a single receive antenna");
    }
    const Index n = ch.tx();
    if (p.size() != n) {
        throw DimensionMismatch("miso_closed_form: constraint length must equal transmit count");
    }

    CVec wvec(n);
    double amp = 0.0;
    for (Index k = 0; k < n; ++k) {
        const Complex hk = ch.h()(0, k);
        const double root_p = std::sqrt(p.p(k));
        wvec(k) = root_p * std::exp(Complex(0.0, -std::arg(hk)));
        amp += std::abs(hk) * root_p;
    }

    MisoResult out;
    out.q = InputCovariance(hermitize(wvec * wvec.adjoint()));
    out.rate = std::log1p(amp * amp);
    return out;
}

CMat mac_dual(const ChannelDecomposition& dec, const PowerConstraint& p) {
    if (!dec.tall) {
        throw BranchMismatch("mac_dual: closed form only available for n <= m");
    }
    if (p.size() != dec.tx()) {
        throw DimensionMismatch("mac_dual: constraint length must equal transmit count");
    }
    CMat b_star = hermitize((diag_matrix(p.p) + dec.g_check).inverse());

    // Stationarity cross-check: H†(I + HPH†)⁻¹H = (P + Ǧ)⁻¹, computed through
    // K in place of H (K†K = H†H, so the push-through forms coincide).
    const Index n = dec.tx();
    const CMat kp = dec.k_mat * diag_matrix(p.p) * dec.k_mat.adjoint();
    const CMat grad =
        dec.k_mat.adjoint() * (CMat::Identity(n, n) + kp).ldlt().solve(dec.k_mat);
    if ((grad - b_star).norm() > 1e-6 * (1.0 + b_star.norm())) {
        throw std::logic_error("mac_dual: stationarity residual check failed");
    }
    return b_star;
}

}  // namespace pacap
