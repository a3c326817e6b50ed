// baselines.hpp — reference signaling schemes the per-antenna solver is
// compared against: sum-power water-filling, independent (multiple-access)
// signaling, forced channel-eigenbeam signaling, the MISO closed form, and
// the closed-form multiple-access dual variable.

#pragma once

#include "pacap/channel.hpp"

#include <optional>

namespace pacap {

struct WaterfillResult {
    InputCovariance q;
    double water_level{};   // μ
    Index active_modes{};   // K
    double nu_star{};       // 1/μ
};

// Q = V diag((μ - 1/λ_i)⁺) V† with λ_i the squared singular values and μ set
// so tr(Q) = total_power (greedy largest-mode-first activation, eigenvalues
// renormalized so the trace is exact).
WaterfillResult waterfill_sum(const ChannelMatrix& ch, double total_power);

// Rate of independent signaling Q = diag(p).
double mac_rate(const ChannelMatrix& ch, const PowerConstraint& p);

struct ForcedEigenbeamResult {
    bool feasible{};
    std::optional<RVec> lambda_q;
    std::optional<InputCovariance> q;
    double rate{};  // 0 when infeasible
};

// Constrains the eigenvectors of Q to the channel right singular vectors and
// solves W λ = p with W_ji = |V_ji|². Entries in [-1e-10, 0) are round-off
// and clipped to zero; anything lower means no nonnegative solution exists
// and the scheme is infeasible (rate 0). A rank-deficient W falls back to the
// minimum-norm least-squares solution, then to a nonnegative least-squares
// search before declaring infeasibility.
ForcedEigenbeamResult forced_eigenbeam(const ChannelMatrix& ch, const PowerConstraint& p);

struct MisoResult {
    InputCovariance q;
    double rate{};
};

// Single receive antenna closed form: w_k = sqrt(p_k) e^{-j arg h_k},
// Q = w w†, rate = ln(1 + (Σ |h_k| sqrt(p_k))²). Throws NotMiso when m != 1.
MisoResult miso_closed_form(const ChannelMatrix& ch, const PowerConstraint& p);

// Optimal dual for the multiple-access constraint, B* = (P + Ǧ)⁻¹, for
// n <= m. Throws BranchMismatch for n > m.
CMat mac_dual(const ChannelDecomposition& dec, const PowerConstraint& p);

}  // namespace pacap
