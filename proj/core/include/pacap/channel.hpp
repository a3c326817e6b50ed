// channel.hpp — MIMO channel model, achievable-rate functional, power
// constraints, and the channel-derived matrices the dual solvers consume.

#pragma once

#include "pacap/numerics.hpp"
#include "pacap/types.hpp"

#include <memory>
#include <mutex>

namespace pacap {

// Per-antenna transmit power budgets (noise-normalized). Entries must be
// finite and nonnegative; an all-zero vector is degenerate but accepted, the
// solvers short-circuit it to Q = 0.
struct PowerConstraint {
    RVec p;

    explicit PowerConstraint(RVec budgets);

    Index size() const { return p.size(); }
    double total() const { return p.sum(); }
};

// Hermitian PSD transmit covariance Q = E[xx†].
struct InputCovariance {
    CMat q;

    InputCovariance() = default;
    explicit InputCovariance(CMat m) : q(std::move(m)) {}

    Index size() const { return q.rows(); }
};

// Hermitian within herm_tol, PSD within psd_tol, real nonnegative diagonal.
bool covariance_valid(const InputCovariance& q, double herm_tol = 1e-10,
                      double psd_tol = 1e-9);

enum class ConstraintMode { sum, per_antenna, mac };

// Everything the dual solvers need, computed once from the channel SVD.
// Tall case (n <= m):  k_mat = V Σn V†, k_inv = k_mat⁻¹, g_check = k_inv k_inv†.
// Wide case (n > m):   h_inv = V1 Σm⁻¹ U†  (so H h_inv = I_m),
//                      g_check = h_inv h_inv†, v2 spans the channel null space.
struct ChannelDecomposition {
    numerics::SvdResult svd;
    bool tall{};       // n <= m
    CMat k_mat;        // tall only
    CMat k_inv;        // tall only
    CMat h_inv;        // wide only
    CMat v1;           // first min(m,n) right singular vectors
    CMat v2;           // last n-m right singular vectors (wide only, else 0 cols)
    CMat g_check;

    Index tx() const { return svd.right.rows(); }
    Index rx() const { return svd.left.rows(); }
};

// m×n complex channel gain matrix with a lazily built decomposition cache.
// The decomposition (and therefore the full-rank gate) is computed on first
// access and shared between copies.
class ChannelMatrix {
  public:
    explicit ChannelMatrix(CMat gains);

    const CMat& h() const { return h_; }
    Index rx() const { return h_.rows(); }  // m
    Index tx() const { return h_.cols(); }  // n

    // Throws RankDeficient when the smallest singular value is below
    // 1e-10 times the largest.
    const ChannelDecomposition& decomposition() const;

  private:
    struct Cache {
        std::once_flag flag;
        std::shared_ptr<const ChannelDecomposition> value;
    };

    CMat h_;
    std::shared_ptr<Cache> cache_;
};

const ChannelDecomposition& decompose(const ChannelMatrix& ch);

// log det(I_m + H Q H†) in nats, computed from the eigenvalues of H Q H†.
double rate(const ChannelMatrix& ch, const InputCovariance& q);

// sum: tr(Q) <= Σp + tol.  per_antenna: Q_ii <= p_i + tol for all i.
// mac: per-antenna diagonal caps plus all off-diagonal magnitudes < tol.
bool check_constraint(const InputCovariance& q, const PowerConstraint& p,
                      ConstraintMode mode, double tol);

}  // namespace pacap
