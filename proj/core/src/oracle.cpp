#include "pacap/oracle.hpp"

#include "pacap/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace pacap {

namespace {

// Projection onto the PSD cone: clip negative eigenvalues.
CMat project_psd(const CMat& a) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(a));
    const RVec lam = es.eigenvalues().cwiseMax(0.0);
    return hermitize(es.eigenvectors() * lam.cast<Complex>().asDiagonal() *
                     es.eigenvectors().adjoint());
}

// Projection onto the power set: diagonal caps (per-antenna) or the trace
// half-space (sum).
CMat project_power(const CMat& a, const PowerConstraint& p, ConstraintMode mode) {
    CMat out = a;
    if (mode == ConstraintMode::sum) {
        const double excess = out.trace().real() - p.total();
        if (excess > 0.0) {
            out -= (excess / static_cast<double>(out.rows())) *
                   CMat::Identity(out.rows(), out.cols());
        }
        return out;
    }
    for (Index i = 0; i < out.rows(); ++i) {
        const double di = std::min(out(i, i).real(), p.p(i));
        out(i, i) = Complex(di, 0.0);
    }
    return out;
}

}  // namespace

CMat gradient(const ChannelMatrix& ch, const InputCovariance& q) {
    const Index m = ch.rx();
    if (q.size() != ch.tx()) {
        throw DimensionMismatch("gradient: covariance size must equal transmit count");
    }
    const CMat inner = CMat::Identity(m, m) + hermitize(ch.h() * q.q * ch.h().adjoint());
    return hermitize(ch.h().adjoint() * inner.ldlt().solve(ch.h()));
}

InputCovariance project_feasible(const CMat& q, const PowerConstraint& p,
                                 const OracleConfig& cfg) {
    if (q.rows() != q.cols() || q.rows() != p.size()) {
        throw DimensionMismatch("project_feasible: dimension mismatch");
    }
    CMat x = hermitize(q);
    CMat inc_psd = CMat::Zero(x.rows(), x.cols());
    CMat inc_pow = CMat::Zero(x.rows(), x.cols());

    for (long it = 0; it < cfg.projection_iters; ++it) {
        const CMat y = project_psd(x + inc_psd);
        inc_psd = x + inc_psd - y;
        const CMat x_next = project_power(y + inc_pow, p, cfg.constraint_mode);
        inc_pow = y + inc_pow - x_next;

        const double delta = (x_next - x).norm();
        x = x_next;
        if (delta <= 1e-12 * (1.0 + x.norm())) break;
    }

    // The cap projection runs last, so a truncated loop can leave x slightly
    // outside the PSD cone. Restore exact feasibility: clip to PSD (which can
    // only raise diagonal entries), then scale back under the power budget.
    x = project_psd(x);
    double scale = 1.0;
    if (cfg.constraint_mode == ConstraintMode::sum) {
        const double tr = x.trace().real();
        if (tr > p.total() && tr > 0.0) scale = p.total() / tr;
    } else {
        for (Index i = 0; i < x.rows(); ++i) {
            const double xi = x(i, i).real();
            if (xi > p.p(i)) scale = std::min(scale, p.p(i) / xi);
        }
    }
    if (scale < 1.0) x *= scale;
    return InputCovariance(std::move(x));
}

SolveReport pg_solve(const ChannelMatrix& ch, const PowerConstraint& p,
                     const OracleConfig& cfg) {
    if (p.size() != ch.tx()) {
        throw DimensionMismatch("pg_solve: constraint length must equal transmit count");
    }
    if (!(cfg.step_size > 0.0) || !(cfg.obj_tol > 0.0)) {
        throw std::invalid_argument("pg_solve: step_size and obj_tol must be positive");
    }

    SolveReport rep;
    rep.trace.tall_branch = (ch.tx() <= ch.rx());

    // Independent signaling is feasible for both constraint modes.
    InputCovariance q(diag_matrix(cfg.constraint_mode == ConstraintMode::sum
                                      ? RVec::Constant(p.size(), p.total() /
                                                                     static_cast<double>(p.size()))
                                      : p.p));
    double obj = rate(ch, q);

    double step = cfg.step_size;
    int stall = 0;
    long outer = 0;
    bool converged = false;

    for (; outer < cfg.max_outer; ++outer) {
        const CMat g = gradient(ch, q);
        bool accepted = false;
        double improvement = 0.0;

        for (double t = step; t > 1e-14; t *= 0.5) {
            InputCovariance cand = project_feasible(q.q + t * g, p, cfg);
            const double cand_obj = rate(ch, cand);
            if (cand_obj > obj) {
                improvement = cand_obj - obj;
                q = std::move(cand);
                obj = cand_obj;
                step = std::min(t * 1.5, 1e6);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            converged = true;  // no ascent step exists at line-search resolution
            break;
        }

        double viol = 0.0;
        if (cfg.constraint_mode == ConstraintMode::per_antenna) {
            viol = (q.q.diagonal().real() - p.p).cwiseMax(0.0).maxCoeff();
        } else {
            viol = std::max(q.q.trace().real() - p.total(), 0.0);
        }
        rep.trace.steps.push_back({RVec(), improvement, viol});

        stall = (improvement < cfg.obj_tol) ? stall + 1 : 0;
        if (stall >= 50) {
            converged = true;
            ++outer;
            break;
        }
    }

    rep.q = std::move(q);
    rep.rate = obj;
    rep.iterations = outer;
    rep.converged = converged;
    rep.gap = rep.trace.steps.empty() ? 0.0 : rep.trace.steps.back().gap;

    const RVec lam = numerics::hermitian_eigenvalues(rep.q.q);
    const double thresh = 1e-9 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
    rep.dropped_modes = std::min(ch.rx(), ch.tx()) -
                        (lam.array() > thresh).count();
    if (rep.dropped_modes < 0) rep.dropped_modes = 0;
    return rep;
}

double grid_verify_2x2(const ChannelMatrix& ch, const PowerConstraint& p,
                       long resolution) {
    if (ch.tx() != 2 || p.size() != 2) {
        throw NotTwoByTwo("grid_verify_2x2: needs a two-transmit-antenna channel");
    }
    if (resolution < 2) {
        throw std::invalid_argument("grid_verify_2x2: resolution must be at least 2");
    }

    // rate = ln det(I_2 + Q W) with W = H†H; for 2x2, det(I + A) expands to
    // 1 + tr(A) + det(A), so each grid cell is a handful of flops.
    const CMat w = hermitize(ch.h().adjoint() * ch.h());
    const double w11 = w(0, 0).real();
    const double w22 = w(1, 1).real();
    const Complex w21 = w(1, 0);
    const double det_w = (w(0, 0) * w(1, 1) - w(0, 1) * w(1, 0)).real();

    const double p1 = p.p(0);
    const double p2 = p.p(1);
    const double off_amp = std::sqrt(p1 * p2);
    const double base_tr = p1 * w11 + p2 * w22;
    const double base_det = p1 * p2;

    double best = 0.0;
    for (long ri = 0; ri < resolution; ++ri) {
        const double rho = static_cast<double>(ri) / static_cast<double>(resolution - 1);
        const double amp = rho * off_amp;
        const double det_q = base_det * (1.0 - rho * rho);
        for (long ti = 0; ti < resolution; ++ti) {
            const double theta = 2.0 * std::numbers::pi * static_cast<double>(ti) /
                                 static_cast<double>(resolution);
            const Complex q12 = amp * Complex(std::cos(theta), std::sin(theta));
            const double tr_qw = base_tr + 2.0 * (q12 * w21).real();
            const double det_arg = 1.0 + tr_qw + det_q * det_w;
            if (det_arg > 0.0) {
                best = std::max(best, std::log(det_arg));
            }
        }
    }
    return best;
}

}  // namespace pacap
