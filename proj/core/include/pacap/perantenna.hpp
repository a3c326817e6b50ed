// perantenna.hpp — capacity-achieving input covariance under per-antenna power
// constraints: closed-form Q(D) maps for both channel shapes, the dual-update
// iterations, the dispatching solver, and KKT/duality-gap diagnostics.

#pragma once

#include "pacap/channel.hpp"

#include <optional>
#include <vector>

namespace pacap {

// Entries of Ď = D⁻¹, the inverse per-antenna dual prices. Strictly positive.
struct DualDiagonal {
    RVec d_check;

    explicit DualDiagonal(RVec v);
};

struct TraceStep {
    RVec d_check;
    double gap{};
    double max_diag_violation{};
};

struct SolveTrace {
    bool tall_branch{};
    std::vector<TraceStep> steps;
};

// Diagnostics at a candidate optimum. m_matrix is the multiplier
// M = D - H†(I + HQH†)⁻¹H reconstructed from stationarity;
// stationarity_norm is the anti-Hermitian residual of that reconstruction,
// slackness_norm is |MQ|_F, psd_violation the smallest eigenvalue of M, and
// mode_split_residual is |(R_m - F_m + I_m) R_m|_F, the receive-space
// orthogonality of active and dropped modes.
struct KktResidual {
    CMat m_matrix;
    double stationarity_norm{};
    double slackness_norm{};
    double psd_violation{};
    double mode_split_residual{};
};

struct SolveReport {
    InputCovariance q;
    RVec d_check;
    double gap{};
    long iterations{};
    double rate{};
    Index dropped_modes{};
    bool converged{};
    SolveTrace trace;
    std::optional<KktResidual> kkt;
};

struct SolveOptions {
    long max_iter = 10000;
    bool keep_trace = true;
};

// Result of mapping a dual point to its optimal primal covariance.
struct DualToPrimal {
    InputCovariance q;
    CMat s;  // dropped-mode slack, PSD
    Index dropped{};
};

// Ď0 = p + diag(Ǧ), strictly positive whenever p is.
DualDiagonal init_dual(const ChannelDecomposition& dec, const PowerConstraint& p);

// n <= m: Q = Ď - ǨǨ† + Ǩ S_n Ǩ† with (-S_n) the non-positive eigenmodes of
// K Ď K† - I_n. Throws BranchMismatch on a wide decomposition.
DualToPrimal q_from_dual_tall(const ChannelDecomposition& dec, const DualDiagonal& d);

// n > m: Q = Ď - ȞȞ† + Z - X with Z = Ȟ S_m Ȟ† from the non-positive
// eigenmodes of H Ď H† - I_m, and X the null-space correction built from A, B.
// The result satisfies V2† D Q = 0. Throws BranchMismatch on a tall decomposition.
DualToPrimal q_from_dual_wide(const ChannelDecomposition& dec, const DualDiagonal& d);

// -tr[D (Q - P)] = Σ_i (p_i - Q_ii)/Ď_i. Sign-preserving; may be negative
// away from the optimum. Stopping rules use its absolute value.
double duality_gap(const DualDiagonal& d, const InputCovariance& q,
                   const PowerConstraint& p);

// Iterative dual search for n <= m: Ď_{i+1} = Ď_i + p - diag(Q_i) until
// |gap| < eps. Returns the report with iterations = number of dual updates
// performed; a start already satisfying the gap test reports zero iterations.
// On hitting max_iter the best-gap iterate is returned flagged non-converged.
SolveReport drop_rank_n(const ChannelDecomposition& dec, const DualDiagonal& d0,
                        const PowerConstraint& p, double eps, long max_iter,
                        bool keep_trace = true);

// Same dual update for n > m, with the wide-branch primal map per iteration.
SolveReport drop_rank_m(const ChannelDecomposition& dec, const DualDiagonal& d0,
                        const PowerConstraint& p, double eps, long max_iter,
                        bool keep_trace = true);

// Main entry: validates inputs, deletes zero-power antennas (re-embedding the
// solution with zero rows/columns afterwards), dispatches on channel shape,
// and attaches the KKT residual. Throws RankDeficient via the decomposition.
SolveReport opt_cov(const ChannelMatrix& ch, const PowerConstraint& p,
                    double eps = 1e-8, const SolveOptions& opts = {});

KktResidual kkt_check(const ChannelMatrix& ch, const InputCovariance& q,
                      const DualDiagonal& d);

// Monotonicity diagnostic over a solve trace. For the tall branch reports
// whether Ď was entrywise nonincreasing across all iterations. For the wide
// branch searches the 2^n sign patterns π for one under which Ď∘π is
// nonincreasing after a finite prefix; settle_index is that prefix length.
struct MonotonicityReport {
    bool monotone_n_case{};
    std::optional<RVec> pi_vector;
    long settle_index{-1};
};

MonotonicityReport monotonicity_diag(const SolveTrace& trace);

}  // namespace pacap
