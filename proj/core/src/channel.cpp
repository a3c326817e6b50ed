#include "pacap/channel.hpp"

#include "pacap/errors.hpp"

#include <cmath>
#include <sstream>

namespace pacap {

namespace {

constexpr double kRankGate = 1e-10;

ChannelDecomposition build_decomposition(const CMat& h) {
    const Index m = h.rows();
    const Index n = h.cols();
    const Index r = std::min(m, n);

    ChannelDecomposition dec;
    dec.svd = numerics::svd(h);
    dec.tall = (n <= m);

    const RVec& sig = dec.svd.singulars;
    if (sig(r - 1) <= kRankGate * sig(0)) {
        std::ostringstream msg;
        msg << "channel is rank deficient: smallest singular value " << sig(r - 1)
            << " below " << kRankGate << " * largest " << sig(0);
        throw RankDeficient(msg.str());
    }

    if (dec.tall) {
        const CMat& v = dec.svd.right;  // n×n
        const RVec inv_sig = sig.cwiseInverse();
        dec.k_mat = v * sig.cast<Complex>().asDiagonal() * v.adjoint();
        dec.k_inv = v * inv_sig.cast<Complex>().asDiagonal() * v.adjoint();
        dec.g_check = v * inv_sig.cwiseAbs2().cast<Complex>().asDiagonal() * v.adjoint();
        dec.v1 = v;
        dec.v2 = CMat::Zero(n, 0);
        dec.k_mat = hermitize(dec.k_mat);
        dec.k_inv = hermitize(dec.k_inv);
    } else {
        dec.v1 = dec.svd.right.leftCols(m);
        dec.v2 = dec.svd.right.rightCols(n - m);
        const RVec inv_sig = sig.cwiseInverse();
        dec.h_inv = dec.v1 * inv_sig.cast<Complex>().asDiagonal() * dec.svd.left.adjoint();
        dec.g_check = dec.v1 * inv_sig.cwiseAbs2().cast<Complex>().asDiagonal() * dec.v1.adjoint();
    }
    dec.g_check = hermitize(dec.g_check);
    return dec;
}

}  // namespace

PowerConstraint::PowerConstraint(RVec budgets) : p(std::move(budgets)) {
    if (p.size() < 1) {
        throw DimensionMismatch("PowerConstraint: need at least one antenna budget");
    }
    if (!all_finite(p)) {
        throw NonFinite("PowerConstraint: budgets must be finite");
    }
    if ((p.array() < 0.0).any()) {
        throw std::invalid_argument("PowerConstraint: budgets must be nonnegative");
    }
}

bool covariance_valid(const InputCovariance& q, double herm_tol, double psd_tol) {
    if (q.q.rows() != q.q.cols() || !all_finite(q.q)) return false;
    const double scale = std::max(1.0, q.q.norm());
    if ((q.q - q.q.adjoint()).norm() > herm_tol * scale) return false;
    if (!numerics::is_psd(q.q, psd_tol * scale)) return false;
    return (q.q.diagonal().real().array() >= -psd_tol * scale).all();
}

ChannelMatrix::ChannelMatrix(CMat gains)
    : h_(std::move(gains)), cache_(std::make_shared<Cache>()) {
    if (h_.rows() < 1 || h_.cols() < 1) {
        throw DimensionMismatch("ChannelMatrix: dimensions must be at least 1x1");
    }
    if (!all_finite(h_)) {
        throw NonFinite("ChannelMatrix: gains must be finite");
    }
}

const ChannelDecomposition& ChannelMatrix::decomposition() const {
    // A throwing builder leaves the flag unset, so a later call retries and
    // rethrows RankDeficient.
    std::call_once(cache_->flag, [this] {
        cache_->value = std::make_shared<const ChannelDecomposition>(build_decomposition(h_));
    });
    return *cache_->value;
}

const ChannelDecomposition& decompose(const ChannelMatrix& ch) {
    return ch.decomposition();
}

double rate(const ChannelMatrix& ch, const InputCovariance& q) {
    if (q.q.rows() != ch.tx() || q.q.cols() != ch.tx()) {
        throw DimensionMismatch("rate: covariance size does not match transmit antenna count");
    }
    const CMat r_m = ch.h() * q.q * ch.h().adjoint();
    const RVec lam = numerics::hermitian_eigenvalues(r_m);
    double out = 0.0;
    for (Index i = 0; i < lam.size(); ++i) {
        out += std::log1p(std::max(lam(i), 0.0));
    }
    return out;
}

bool check_constraint(const InputCovariance& q, const PowerConstraint& p,
                      ConstraintMode mode, double tol) {
    if (q.q.rows() != p.size() || q.q.cols() != p.size()) {
        throw DimensionMismatch("check_constraint: covariance/constraint size mismatch");
    }
    switch (mode) {
        case ConstraintMode::sum:
            return q.q.trace().real() <= p.total() + tol;
        case ConstraintMode::per_antenna:
            return (q.q.diagonal().real().array() <= p.p.array() + tol).all();
        case ConstraintMode::mac: {
            if (!(q.q.diagonal().real().array() <= p.p.array() + tol).all()) return false;
            for (Index i = 0; i < q.q.rows(); ++i) {
                for (Index j = 0; j < q.q.cols(); ++j) {
                    if (i != j && std::abs(q.q(i, j)) >= tol) return false;
                }
            }
            return true;
        }
    }
    return false;
}

}  // namespace pacap
