#include "pacap/perantenna.hpp"

#include "pacap/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace pacap {

namespace {

RVec diag_of(const InputCovariance& q) { return q.q.diagonal().real(); }

double gap_raw(const RVec& d_check, const InputCovariance& q, const PowerConstraint& p) {
    return ((p.p - diag_of(q)).array() / d_check.array()).sum();
}

// Tall-branch closed form, no positivity validation so the iteration can
// pass raw duals.
DualToPrimal tall_map(const ChannelDecomposition& dec, const RVec& d_check) {
    const Index n = dec.tx();
    const CMat d_mat = diag_matrix(d_check);
    const CMat f_minus_i =
        hermitize(dec.k_mat * d_mat * dec.k_mat.adjoint()) - CMat::Identity(n, n);
    numerics::ModeSplit split = numerics::split_nonpositive_modes(f_minus_i);
    const CMat z = dec.k_inv * split.s * dec.k_inv.adjoint();
    DualToPrimal out;
    out.q = InputCovariance(hermitize(d_mat - dec.g_check + z));
    out.s = std::move(split.s);
    out.dropped = split.dropped;
    return out;
}

// Wide-branch closed form. F_m = H Ď H† is assembled from the SVD factors as
// U Σm (V1† Ď V1) Σm U†, so the decomposition alone suffices.
DualToPrimal wide_map(const ChannelDecomposition& dec, const RVec& d_check) {
    const Index m = dec.rx();
    const Index n = dec.tx();
    const CMat d_mat = diag_matrix(d_check);
    const auto sig = dec.svd.singulars.cast<Complex>().asDiagonal();

    const CMat core = dec.v1.adjoint() * d_mat * dec.v1;
    const CMat f_minus_i =
        hermitize(dec.svd.left * (sig * core * sig) * dec.svd.left.adjoint()) -
        CMat::Identity(m, m);
    numerics::ModeSplit split = numerics::split_nonpositive_modes(f_minus_i);
    const CMat z = dec.h_inv * split.s * dec.h_inv.adjoint();

    const CMat d_full = diag_matrix(d_check.cwiseInverse());
    const CMat dv2 = d_full * dec.v2;
    const CMat w = dec.v2.adjoint() * dv2;                    // V2† D V2
    Eigen::PartialPivLU<CMat> w_lu(w);
    const CMat b = w_lu.solve((dec.v1.adjoint() * ((z - dec.g_check) * dv2)).adjoint())
                       .adjoint();                            // B = V1†(Z-Ǧ)DV2 W⁻¹
    const CMat a = w_lu.solve(
        (CMat::Identity(n - m, n - m) - b.adjoint() * (dec.v1.adjoint() * dv2)).adjoint())
                       .adjoint();                            // A = (I - B†V1†DV2) W⁻¹
    const CMat x = hermitize(dec.v2 * a * dec.v2.adjoint() +
                             dec.v1 * b * dec.v2.adjoint() +
                             dec.v2 * b.adjoint() * dec.v1.adjoint());

    DualToPrimal out;
    out.q = InputCovariance(hermitize(d_mat - dec.g_check + z - x));
    out.s = std::move(split.s);
    out.dropped = split.dropped;
    return out;
}

// Rate from the decomposition: eigenvalues of H Q H† equal those of K Q K†
// (tall) or of Σm (V1† Q V1) Σm (wide).
double rate_from_dec(const ChannelDecomposition& dec, const InputCovariance& q) {
    CMat r_m;
    if (dec.tall) {
        r_m = dec.k_mat * q.q * dec.k_mat.adjoint();
    } else {
        const auto sig = dec.svd.singulars.cast<Complex>().asDiagonal();
        r_m = sig * (dec.v1.adjoint() * q.q * dec.v1) * sig;
    }
    const RVec lam = numerics::hermitian_eigenvalues(r_m);
    double out = 0.0;
    for (Index i = 0; i < lam.size(); ++i) {
        out += std::log1p(std::max(lam(i), 0.0));
    }
    return out;
}

SolveReport iterate_dual(const ChannelDecomposition& dec, const RVec& d0,
                         const PowerConstraint& p, double eps, long max_iter,
                         bool keep_trace, bool tall) {
    if (eps <= 0.0) {
        throw std::invalid_argument("dual iteration: eps must be positive");
    }
    constexpr long kMaxTraceSteps = 10000;
    // The gap weighs diagonal violations by 1/Ď, so on badly scaled problems
    // it can pass eps while diag(Q) is still far from p. Convergence is only
    // declared once the constraint residual itself is small too.
    constexpr double kDiagTol = 1e-6;

    SolveReport rep;
    rep.trace.tall_branch = tall;

    RVec d = d0;
    double best_score = std::numeric_limits<double>::infinity();

    for (long i = 0;; ++i) {
        DualToPrimal dp = tall ? tall_map(dec, d) : wide_map(dec, d);
        const bool finite = dp.q.q.allFinite();
        const double gap = finite ? gap_raw(d, dp.q, p)
                                  : std::numeric_limits<double>::quiet_NaN();
        const double viol =
            finite ? (diag_of(dp.q) - p.p).cwiseAbs().maxCoeff()
                   : std::numeric_limits<double>::quiet_NaN();

        if (keep_trace && static_cast<long>(rep.trace.steps.size()) < kMaxTraceSteps) {
            rep.trace.steps.push_back({d, gap, viol});
        }

        if (!finite || !std::isfinite(gap)) {
            rep.iterations = i;
            rep.converged = false;
            break;
        }

        // The closed forms keep Q ⪰ 0 whenever Ď ≻ 0; a gross breach means
        // the dual left the positive orthant and the iterate is unusable.
        const double scale = 1.0 + dp.q.q.norm();
        if (!numerics::is_psd(dp.q.q, 1e-7 * scale)) {
            rep.iterations = i;
            rep.converged = false;
            break;
        }

        if (std::max(std::abs(gap), viol) < best_score) {
            best_score = std::max(std::abs(gap), viol);
            rep.q = dp.q;
            rep.d_check = d;
            rep.gap = gap;
            rep.dropped_modes = dp.dropped;
        }

        if (std::abs(gap) < eps && viol < kDiagTol) {
            rep.q = std::move(dp.q);
            rep.d_check = d;
            rep.gap = gap;
            rep.dropped_modes = dp.dropped;
            rep.iterations = i;
            rep.converged = true;
            break;
        }
        if (i >= max_iter) {
            rep.iterations = i;
            rep.converged = false;
            break;
        }

        d += p.p - diag_of(dp.q);
    }

    if (rep.q.q.size() == 0) {
        // No usable iterate was produced at all.
        rep.q = InputCovariance(CMat::Zero(dec.tx(), dec.tx()));
        rep.d_check = d0;
        rep.gap = std::numeric_limits<double>::quiet_NaN();
    }
    rep.rate = rate_from_dec(dec, rep.q);
    return rep;
}

}  // namespace

DualDiagonal::DualDiagonal(RVec v) : d_check(std::move(v)) {
    if (d_check.size() < 1) {
        throw DimensionMismatch("DualDiagonal: empty dual vector");
    }
    if (!all_finite(d_check) || (d_check.array() <= 0.0).any()) {
        throw std::invalid_argument("DualDiagonal: entries must be finite and > 0");
    }
}

DualDiagonal init_dual(const ChannelDecomposition& dec, const PowerConstraint& p) {
    if (p.size() != dec.tx()) {
        throw DimensionMismatch("init_dual: constraint length must equal transmit count");
    }
    return DualDiagonal(p.p + real_diag(dec.g_check));
}

DualToPrimal q_from_dual_tall(const ChannelDecomposition& dec, const DualDiagonal& d) {
    if (!dec.tall) {
        throw BranchMismatch("q_from_dual_tall: decomposition is for n > m");
    }
    if (d.d_check.size() != dec.tx()) {
        throw DimensionMismatch("q_from_dual_tall: dual length mismatch");
    }
    return tall_map(dec, d.d_check);
}

DualToPrimal q_from_dual_wide(const ChannelDecomposition& dec, const DualDiagonal& d) {
    if (dec.tall) {
        throw BranchMismatch("q_from_dual_wide: decomposition is for n <= m");
    }
    if (d.d_check.size() != dec.tx()) {
        throw DimensionMismatch("q_from_dual_wide: dual length mismatch");
    }
    return wide_map(dec, d.d_check);
}

double duality_gap(const DualDiagonal& d, const InputCovariance& q,
                   const PowerConstraint& p) {
    if (q.size() != p.size() || d.d_check.size() != p.size()) {
        throw DimensionMismatch("duality_gap: dimension mismatch");
    }
    return gap_raw(d.d_check, q, p);
}

SolveReport drop_rank_n(const ChannelDecomposition& dec, const DualDiagonal& d0,
                        const PowerConstraint& p, double eps, long max_iter,
                        bool keep_trace) {
    if (!dec.tall) {
        throw BranchMismatch("drop_rank_n: decomposition is for n > m");
    }
    return iterate_dual(dec, d0.d_check, p, eps, max_iter, keep_trace, true);
}

SolveReport drop_rank_m(const ChannelDecomposition& dec, const DualDiagonal& d0,
                        const PowerConstraint& p, double eps, long max_iter,
                        bool keep_trace) {
    if (dec.tall) {
        throw BranchMismatch("drop_rank_m: decomposition is for n <= m");
    }
    return iterate_dual(dec, d0.d_check, p, eps, max_iter, keep_trace, false);
}

SolveReport opt_cov(const ChannelMatrix& ch, const PowerConstraint& p, double eps,
                    const SolveOptions& opts) {
    const Index n = ch.tx();
    if (p.size() != n) {
        throw DimensionMismatch("opt_cov: constraint length must equal transmit count");
    }
    if (eps <= 0.0) {
        throw std::invalid_argument("opt_cov: eps must be positive");
    }

    if (p.total() == 0.0) {
        SolveReport rep;
        rep.q = InputCovariance(CMat::Zero(n, n));
        rep.d_check = RVec::Zero(n);
        rep.gap = 0.0;
        rep.rate = 0.0;
        rep.converged = true;
        rep.dropped_modes = std::min(ch.rx(), n);
        rep.trace.tall_branch = (n <= ch.rx());
        return rep;
    }

    // Zero-budget antennas would force Ď entries to zero, which the
    // optimality conditions exclude (D stays positive definite). Delete
    // those columns, solve the reduced
    // problem, and re-embed with zero rows/columns (dual price left at 0).
    std::vector<Index> active;
    for (Index i = 0; i < n; ++i) {
        if (p.p(i) > 0.0) active.push_back(i);
    }
    if (static_cast<Index>(active.size()) < n) {
        CMat h_red(ch.rx(), static_cast<Index>(active.size()));
        RVec p_red(static_cast<Index>(active.size()));
        for (Index j = 0; j < static_cast<Index>(active.size()); ++j) {
            h_red.col(j) = ch.h().col(active[j]);
            p_red(j) = p.p(active[j]);
        }
        SolveReport rep = opt_cov(ChannelMatrix(std::move(h_red)),
                                  PowerConstraint(std::move(p_red)), eps, opts);
        CMat q_full = CMat::Zero(n, n);
        RVec d_full = RVec::Zero(n);
        for (Index r = 0; r < static_cast<Index>(active.size()); ++r) {
            d_full(active[r]) = rep.d_check(r);
            for (Index c = 0; c < static_cast<Index>(active.size()); ++c) {
                q_full(active[r], active[c]) = rep.q.q(r, c);
            }
        }
        rep.q = InputCovariance(std::move(q_full));
        rep.d_check = std::move(d_full);
        return rep;
    }

    const ChannelDecomposition& dec = ch.decomposition();
    const DualDiagonal d0 = init_dual(dec, p);
    SolveReport rep = dec.tall
                          ? drop_rank_n(dec, d0, p, eps, opts.max_iter, opts.keep_trace)
                          : drop_rank_m(dec, d0, p, eps, opts.max_iter, opts.keep_trace);
    if ((rep.d_check.array() > 0.0).all()) {
        rep.kkt = kkt_check(ch, rep.q, DualDiagonal(rep.d_check));
    }
    return rep;
}

KktResidual kkt_check(const ChannelMatrix& ch, const InputCovariance& q,
                      const DualDiagonal& d) {
    const Index m = ch.rx();
    const Index n = ch.tx();
    if (q.size() != n || d.d_check.size() != n) {
        throw DimensionMismatch("kkt_check: dimension mismatch");
    }

    const CMat r_m = hermitize(ch.h() * q.q * ch.h().adjoint());
    const CMat grad =
        ch.h().adjoint() *
        (CMat::Identity(m, m) + r_m).ldlt().solve(ch.h());  // H†(I+HQH†)⁻¹H
    const CMat m_raw = diag_matrix(d.d_check.cwiseInverse()) - grad;

    KktResidual out;
    out.m_matrix = hermitize(m_raw);
    out.stationarity_norm = (m_raw - out.m_matrix).norm();
    out.slackness_norm = (out.m_matrix * q.q).norm();
    const RVec lam = numerics::hermitian_eigenvalues(out.m_matrix);
    out.psd_violation = lam(lam.size() - 1);

    const CMat f_m = hermitize(ch.h() * diag_matrix(d.d_check) * ch.h().adjoint());
    out.mode_split_residual =
        ((r_m - f_m + CMat::Identity(m, m)) * r_m).norm();
    return out;
}

MonotonicityReport monotonicity_diag(const SolveTrace& trace) {
    if (trace.steps.empty()) {
        throw EmptyTrace("monotonicity_diag: trace has no steps");
    }
    const auto& steps = trace.steps;
    const long len = static_cast<long>(steps.size());
    const Index n = steps.front().d_check.size();

    auto pair_ok = [&](long i, const RVec& sign) {
        const RVec& cur = steps[i].d_check;
        const RVec& nxt = steps[i + 1].d_check;
        for (Index j = 0; j < n; ++j) {
            const double slack = 1e-12 * (1.0 + std::abs(cur(j)));
            if (sign(j) * nxt(j) > sign(j) * cur(j) + slack) return false;
        }
        return true;
    };

    MonotonicityReport out;
    const RVec plus = RVec::Ones(n);
    out.monotone_n_case = true;
    for (long i = 0; i + 1 < len; ++i) {
        if (!pair_ok(i, plus)) {
            out.monotone_n_case = false;
            break;
        }
    }

    if (trace.tall_branch) {
        out.settle_index = out.monotone_n_case ? 0 : -1;
        return out;
    }

    if (len < 2) {
        out.pi_vector = plus;
        out.settle_index = 0;
        return out;
    }
    if (n > 12) {
        return out;  // exhaustive sign search is only intended for small n
    }

    long best_settle = std::numeric_limits<long>::max();
    RVec best_pi;
    for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
        RVec sign(n);
        for (Index j = 0; j < n; ++j) {
            sign(j) = (mask >> j) & 1ul ? -1.0 : 1.0;
        }
        long settle = 0;
        for (long i = len - 2; i >= 0; --i) {
            if (!pair_ok(i, sign)) {
                settle = i + 1;
                break;
            }
        }
        // Require at least one monotone comparison after the prefix.
        if (settle <= len - 2 && settle < best_settle) {
            best_settle = settle;
            best_pi = sign;
        }
    }
    if (best_pi.size() == n) {
        out.pi_vector = best_pi;
        out.settle_index = best_settle;
    }
    return out;
}

}  // namespace pacap
