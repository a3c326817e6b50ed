// oracle.hpp — independent correctness oracle for the capacity problem:
// projected-gradient ascent on the convex program with a Dykstra projection
// onto the feasible set, plus a brute-force grid check for n = 2. Kept free
// of the closed-form dual machinery so the two routes stay independent.

#pragma once

#include "pacap/channel.hpp"
#include "pacap/perantenna.hpp"

namespace pacap {

struct OracleConfig {
    double step_size = 1.0;       // initial step, adapted by backtracking
    long max_outer = 20000;
    double obj_tol = 1e-11;       // stall detector threshold
    long projection_iters = 300;  // Dykstra iteration cap
    ConstraintMode constraint_mode = ConstraintMode::per_antenna;
};

// Ascent direction H†(I + HQH†)⁻¹H of the rate functional, Hermitian.
CMat gradient(const ChannelMatrix& ch, const InputCovariance& q);

// Euclidean projection onto {Q ⪰ 0} ∩ {diag(Q) <= p} (per_antenna mode) or
// {Q ⪰ 0} ∩ {tr(Q) <= Σp} (sum mode), via Dykstra's alternating corrections.
InputCovariance project_feasible(const CMat& q, const PowerConstraint& p,
                                 const OracleConfig& cfg);

// Projected-gradient ascent with backtracking line search, started from the
// independent-signaling point. Stops after 50 consecutive accepted steps with
// improvement below obj_tol. The returned report reuses SolveReport with
// d_check empty; trace steps carry (gap = objective improvement,
// max_diag_violation = feasibility violation) per accepted step.
SolveReport pg_solve(const ChannelMatrix& ch, const PowerConstraint& p,
                     const OracleConfig& cfg);

// Brute-force bound for n = 2: fixes diag(Q) = p, sweeps the off-diagonal
// Q_12 = ρ sqrt(p1 p2) e^{jθ} over a resolution × resolution grid covering
// ρ in [0,1], θ in [0,2π), and returns the maximum rate found.
double grid_verify_2x2(const ChannelMatrix& ch, const PowerConstraint& p,
                       long resolution);

}  // namespace pacap
