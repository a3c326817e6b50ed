#include "pacap/baselines.hpp"
#include "pacap/errors.hpp"
#include "pacap/ergodic.hpp"
#include "pacap/perantenna.hpp"

#include <doctest.h>

#include <cmath>

using namespace pacap;

namespace {

ChannelMatrix reference_channel() {
    CMat h(2, 2);
    h << Complex(0.0541, -0.4066), Complex(-0.4339, 0.0033),
        Complex(-1.3200, -0.1872), Complex(0.8269, -0.0279);
    return ChannelMatrix(std::move(h));
}

ChannelMatrix row_ones() {
    CMat h(1, 2);
    h << Complex(1, 0), Complex(1, 0);
    return ChannelMatrix(std::move(h));
}

RVec vec2(double a, double b) { return (RVec(2) << a, b).finished(); }

}  // namespace

TEST_SUITE_BEGIN("perantenna");

TEST_CASE("init_dual closed form") {
    {
        ChannelMatrix ch(CMat::Identity(2, 2));
        const DualDiagonal d0 = init_dual(decompose(ch), PowerConstraint(vec2(0.5, 0.5)));
        CHECK((d0.d_check - vec2(1.5, 1.5)).cwiseAbs().maxCoeff() < 1e-14);
    }
    {
        CMat h = CMat::Zero(2, 2);
        h(0, 0) = 2.0;
        h(1, 1) = 1.0;
        ChannelMatrix ch(h);
        const DualDiagonal d0 = init_dual(decompose(ch), PowerConstraint(vec2(1, 1)));
        CHECK((d0.d_check - vec2(1.25, 2.0)).cwiseAbs().maxCoeff() < 1e-14);
    }
    {
        ChannelMatrix ch = reference_channel();
        const ChannelDecomposition& dec = decompose(ch);
        const PowerConstraint p(vec2(0.5, 0.5));
        const DualDiagonal d0 = init_dual(dec, p);
        const RVec expected =
            p.p + (dec.k_inv * dec.k_inv.adjoint()).diagonal().real();
        CHECK((d0.d_check - expected).cwiseAbs().maxCoeff() < 1e-13);
        CHECK((d0.d_check.array() > 0.0).all());
    }
}

TEST_CASE("DualDiagonal requires strictly positive entries") {
    CHECK_THROWS_AS(DualDiagonal(vec2(1.0, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(DualDiagonal(vec2(-1.0, 1.0)), std::invalid_argument);
}

TEST_CASE("q_from_dual_tall identity-channel cases") {
    ChannelMatrix ch(CMat::Identity(2, 2));
    const ChannelDecomposition& dec = decompose(ch);

    DualToPrimal full = q_from_dual_tall(dec, DualDiagonal(vec2(1.5, 1.5)));
    CHECK(full.dropped == 0);
    CHECK((full.q.q - 0.5 * CMat::Identity(2, 2)).norm() < 1e-13);

    DualToPrimal dropped = q_from_dual_tall(dec, DualDiagonal(vec2(0.5, 0.5)));
    CHECK(dropped.dropped == 2);
    CHECK(dropped.q.q.norm() < 1e-13);
}

TEST_CASE("q_from_dual_tall produces PSD covariances at the analytic start") {
    ChannelMatrix ch = reference_channel();
    const ChannelDecomposition& dec = decompose(ch);
    const PowerConstraint p(vec2(0.5, 0.5));
    const DualToPrimal dp = q_from_dual_tall(dec, init_dual(dec, p));
    CHECK(numerics::is_psd(dp.q.q, 1e-9 * (1.0 + dp.q.q.norm())));
}

TEST_CASE("q_from_dual_tall is PSD for random positive duals on both branches") {
    StreamRng rng(31);
    for (int rep = 0; rep < 30; ++rep) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 4);
        const int m_extra = static_cast<int>(rng.next_u64() % 3);
        const int m = n + m_extra;
        ChannelMatrix ch = rayleigh_sample(m, n, rng);
        RVec d(n);
        for (int i = 0; i < n; ++i) d(i) = 0.05 + 4.0 * rng.next_double();
        const DualToPrimal dp = q_from_dual_tall(decompose(ch), DualDiagonal(d));
        CHECK(numerics::is_psd(dp.q.q, 1e-9 * (1.0 + dp.q.q.norm())));
    }
}

TEST_CASE("q_from_dual_wide satisfies the null-space condition") {
    ChannelMatrix ch = row_ones();
    const ChannelDecomposition& dec = decompose(ch);

    // c chosen so F - I = 2c - 1 > 0: no dropped modes.
    const DualDiagonal d(vec2(0.8, 0.8));
    const DualToPrimal dp = q_from_dual_wide(dec, d);
    CHECK(dp.dropped == 0);
    const CMat d_mat = diag_matrix(d.d_check.cwiseInverse());
    CHECK((dec.v2.adjoint() * d_mat * dp.q.q).norm() < 1e-9);
    const RVec lam = numerics::hermitian_eigenvalues(dp.q.q);
    CHECK((lam.array() > 1e-9).count() <= 1);  // rank at most m = 1
    CHECK(numerics::is_psd(dp.q.q, 1e-9 * (1.0 + dp.q.q.norm())));
}

TEST_CASE("q_from_dual_wide at the optimal dual recovers the MISO solution") {
    // For h = [1 1], p = (1/2, 1/2) the fixed point is Dcheck = (3/2, 3/2).
    ChannelMatrix ch = row_ones();
    const DualToPrimal dp = q_from_dual_wide(decompose(ch), DualDiagonal(vec2(1.5, 1.5)));
    CMat expect(2, 2);
    expect << Complex(0.5, 0), Complex(0.5, 0), Complex(0.5, 0), Complex(0.5, 0);
    CHECK((dp.q.q - expect).norm() < 1e-12);
}

TEST_CASE("q_from_dual_wide is PSD for random positive duals") {
    StreamRng rng(32);
    for (int rep = 0; rep < 30; ++rep) {
        const int m = 1 + static_cast<int>(rng.next_u64() % 3);
        const int n = m + 1 + static_cast<int>(rng.next_u64() % 3);
        ChannelMatrix ch = rayleigh_sample(m, n, rng);
        RVec d(n);
        for (int i = 0; i < n; ++i) d(i) = 0.05 + 4.0 * rng.next_double();
        const DualToPrimal dp = q_from_dual_wide(decompose(ch), DualDiagonal(d));
        CHECK(numerics::is_psd(dp.q.q, 1e-8 * (1.0 + dp.q.q.norm())));
        const CMat d_mat = diag_matrix(d.cwiseInverse());
        CHECK((decompose(ch).v2.adjoint() * d_mat * dp.q.q).norm() <
              1e-8 * (1.0 + dp.q.q.norm()));
    }
}

TEST_CASE("branch dispatch errors") {
    ChannelMatrix tall(CMat::Identity(2, 2));
    ChannelMatrix wide = row_ones();
    const DualDiagonal d(vec2(1.0, 1.0));
    CHECK_THROWS_AS(q_from_dual_wide(decompose(tall), d), BranchMismatch);
    CHECK_THROWS_AS(q_from_dual_tall(decompose(wide), d), BranchMismatch);
    const PowerConstraint p(vec2(0.5, 0.5));
    CHECK_THROWS_AS(drop_rank_m(decompose(tall), d, p, 1e-8, 100), BranchMismatch);
    CHECK_THROWS_AS(drop_rank_n(decompose(wide), d, p, 1e-8, 100), BranchMismatch);
}

TEST_CASE("duality_gap arithmetic") {
    const PowerConstraint p(vec2(0.5, 0.5));
    InputCovariance q(diag_matrix(vec2(0.5, 0.5)));
    CHECK(duality_gap(DualDiagonal(vec2(1.7, 0.3)), q, p) == 0.0);

    InputCovariance q2(diag_matrix(vec2(0.4, 0.4)));
    CHECK(duality_gap(DualDiagonal(vec2(1.0, 1.0)), q2, p) ==
          doctest::Approx(0.2).epsilon(1e-14));
    CHECK_THROWS_AS(
        duality_gap(DualDiagonal(RVec::Ones(3)), q, p), DimensionMismatch);
}

TEST_CASE("drop_rank_n exits with zero iterations when the start is optimal") {
    ChannelMatrix ch(CMat::Identity(2, 2));
    const ChannelDecomposition& dec = decompose(ch);
    const PowerConstraint p(vec2(0.5, 0.5));
    const SolveReport rep = drop_rank_n(dec, init_dual(dec, p), p, 1e-8, 1000);
    CHECK(rep.converged);
    CHECK(rep.iterations == 0);
    CHECK(rep.gap == 0.0);
    CHECK((rep.q.q - 0.5 * CMat::Identity(2, 2)).norm() < 1e-13);
}

TEST_CASE("drop_rank_n on the reference channel at equal split") {
    ChannelMatrix ch = reference_channel();
    const ChannelDecomposition& dec = decompose(ch);
    const PowerConstraint p(vec2(0.5, 0.5));
    const SolveReport rep = drop_rank_n(dec, init_dual(dec, p), p, 1e-8, 10000);
    CHECK(rep.converged);
    CHECK(std::abs(rep.gap) < 1e-8);
    CHECK((rep.q.q.diagonal().real() - p.p).cwiseAbs().maxCoeff() < 1e-6);
    const double c_mac = mac_rate(ch, p);
    const double c_sum = rate(ch, waterfill_sum(ch, 1.0).q);
    CHECK(rep.rate > c_mac + 1e-3);
    CHECK(rep.rate < c_sum - 1e-3);
}

TEST_CASE("drop_rank_n mode dropping keeps rank consistent") {
    CMat h = CMat::Zero(2, 2);
    h(0, 0) = 10.0;
    h(1, 1) = 0.1;
    ChannelMatrix ch(h);
    const ChannelDecomposition& dec = decompose(ch);
    const PowerConstraint p(vec2(0.5, 0.5));
    const SolveReport rep = drop_rank_n(dec, init_dual(dec, p), p, 1e-10, 10000);
    CHECK(rep.converged);
    const RVec lam = numerics::hermitian_eigenvalues(rep.q.q);
    const Index numeric_rank =
        (lam.array() > 1e-9 * std::max(lam.maxCoeff(), 1e-300)).count();
    CHECK(numeric_rank == 2 - rep.dropped_modes);
}

TEST_CASE("drop_rank_m reproduces the MISO closed form") {
    ChannelMatrix ch = row_ones();
    const ChannelDecomposition& dec = decompose(ch);
    const PowerConstraint p(vec2(0.5, 0.5));
    const SolveReport rep = drop_rank_m(dec, init_dual(dec, p), p, 1e-10, 10000);
    CHECK(rep.converged);
    CHECK(rep.rate == doctest::Approx(std::log(3.0)).epsilon(1e-9));
    CMat expect(2, 2);
    expect << Complex(0.5, 0), Complex(0.5, 0), Complex(0.5, 0), Complex(0.5, 0);
    CHECK((rep.q.q - expect).norm() < 1e-7);
}

TEST_CASE("drop_rank_m matches phases on a complex MISO channel") {
    CMat h(1, 2);
    h << Complex(1, 0), Complex(0, 1);
    ChannelMatrix ch(h);
    const PowerConstraint p(vec2(0.5, 0.5));
    const SolveReport rep = opt_cov(ch, p, 1e-10);
    CHECK(rep.rate == doctest::Approx(std::log(3.0)).epsilon(1e-9));
    // w = (sqrt(.5), sqrt(.5) e^{-i pi/2}), so Q12 = 0.5 e^{+i pi/2} = 0.5i.
    CHECK(std::abs(rep.q.q(0, 1) - Complex(0, 0.5)) < 1e-6);
}

TEST_CASE("drop_rank_m on random wide channels") {
    StreamRng rng(33);
    for (int rep_i = 0; rep_i < 10; ++rep_i) {
        ChannelMatrix ch = rayleigh_sample(2, 4, rng);
        const ChannelDecomposition& dec = decompose(ch);
        const PowerConstraint p(RVec::Constant(4, 0.25));
        const SolveReport rep = drop_rank_m(dec, init_dual(dec, p), p, 1e-8, 10000);
        CHECK(rep.converged);
        CHECK(std::abs(rep.gap) < 1e-8);
        CHECK((rep.q.q.diagonal().real() - p.p).cwiseAbs().maxCoeff() < 1e-6);
        // Dropped-mode count and numeric rank stay consistent: rank = m - k.
        const RVec lam = numerics::hermitian_eigenvalues(rep.q.q);
        const Index numeric_rank =
            (lam.array() > 1e-9 * std::max(lam.maxCoeff(), 1e-300)).count();
        CHECK(numeric_rank == 2 - rep.dropped_modes);
    }
}

TEST_CASE("opt_cov trivial and dispatch cases") {
    ChannelMatrix one(CMat::Identity(1, 1));
    const SolveReport rep = opt_cov(one, PowerConstraint(RVec::Ones(1)), 1e-10);
    CHECK(rep.converged);
    CHECK(rep.rate == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(std::abs(rep.q.q(0, 0).real() - 1.0) < 1e-9);
}

TEST_CASE("opt_cov equals the MISO closed form for 1x3 equal budgets") {
    StreamRng rng(34);
    ChannelMatrix ch = rayleigh_sample(1, 3, rng);
    const PowerConstraint p(RVec::Constant(3, 1.0 / 3.0));
    const SolveReport rep = opt_cov(ch, p, 1e-11);
    double amp = 0.0;
    for (Index k = 0; k < 3; ++k) amp += std::abs(ch.h()(0, k)) / std::sqrt(3.0);
    CHECK(rep.rate == doctest::Approx(std::log1p(amp * amp)).epsilon(1e-9));
}

TEST_CASE("opt_cov short-circuits zero power") {
    ChannelMatrix ch = reference_channel();
    const SolveReport rep = opt_cov(ch, PowerConstraint(RVec::Zero(2)), 1e-8);
    CHECK(rep.converged);
    CHECK(rep.rate == 0.0);
    CHECK(rep.q.q.norm() == 0.0);
    CHECK(rep.iterations == 0);
}

TEST_CASE("opt_cov deletes zero-power antennas and re-embeds") {
    ChannelMatrix ch = reference_channel();
    const SolveReport rep = opt_cov(ch, PowerConstraint(vec2(0.5, 0.0)), 1e-10);
    CHECK(rep.converged);
    // Column 2 carries no power: row/col of Q zero, rate from column 1 alone.
    CHECK(std::abs(rep.q.q(0, 0).real() - 0.5) < 1e-9);
    CHECK(std::abs(rep.q.q(1, 1)) == 0.0);
    CHECK(std::abs(rep.q.q(0, 1)) == 0.0);
    const double expected =
        std::log1p(0.5 * ch.h().col(0).squaredNorm());
    CHECK(rep.rate == doctest::Approx(expected).epsilon(1e-9));
    CHECK(rep.d_check(1) == 0.0);
}

TEST_CASE("opt_cov flags non-convergence at a tiny iteration cap") {
    ChannelMatrix ch = reference_channel();
    SolveOptions opts;
    opts.max_iter = 1;
    const SolveReport rep = opt_cov(ch, PowerConstraint(vec2(0.5, 0.5)), 1e-12, opts);
    CHECK_FALSE(rep.converged);
    CHECK(rep.q.q.rows() == 2);  // best iterate still reported
    CHECK(std::isfinite(rep.gap));
}

TEST_CASE("opt_cov input validation") {
    ChannelMatrix ch = reference_channel();
    CHECK_THROWS_AS(opt_cov(ch, PowerConstraint(RVec::Ones(3)), 1e-8),
                    DimensionMismatch);
    CHECK_THROWS_AS(opt_cov(ch, PowerConstraint(vec2(0.5, 0.5)), 0.0),
                    std::invalid_argument);
}

TEST_CASE("kkt_check at an optimum, at zero, and at a suboptimal point") {
    ChannelMatrix ch = reference_channel();
    const PowerConstraint p(vec2(0.5, 0.5));
    const SolveReport rep = opt_cov(ch, p, 1e-10);
    REQUIRE(rep.converged);

    const DualDiagonal d(rep.d_check);
    const KktResidual at_opt = kkt_check(ch, rep.q, d);
    CHECK(at_opt.slackness_norm < 1e-6 * (1.0 + rep.q.q.norm()));
    CHECK(at_opt.psd_violation > -1e-8);
    CHECK(at_opt.mode_split_residual < 1e-6);
    CHECK(at_opt.stationarity_norm < 1e-10);

    // Q = 0 with a dual dominating the gradient: slackness is exactly zero.
    const KktResidual at_zero =
        kkt_check(ch, InputCovariance(CMat::Zero(2, 2)), DualDiagonal(vec2(0.1, 0.1)));
    CHECK(at_zero.slackness_norm == 0.0);

    // Independent signaling with the optimal dual is not a KKT point.
    const KktResidual off = kkt_check(ch, InputCovariance(diag_matrix(p.p)), d);
    CHECK(off.slackness_norm > 1e-3);
}

TEST_CASE("monotonicity_diag on tall traces") {
    ChannelMatrix ch = reference_channel();
    const ChannelDecomposition& dec = decompose(ch);
    const PowerConstraint p(vec2(0.5, 0.5));
    const SolveReport rep = drop_rank_n(dec, init_dual(dec, p), p, 1e-8, 10000);
    const MonotonicityReport mono = monotonicity_diag(rep.trace);
    CHECK(mono.monotone_n_case);

    // Zero-iteration early exit: trivially monotone.
    ChannelMatrix id2(CMat::Identity(2, 2));
    const SolveReport early =
        drop_rank_n(decompose(id2), init_dual(decompose(id2), p), p, 1e-8, 1000);
    REQUIRE(early.iterations == 0);
    CHECK(monotonicity_diag(early.trace).monotone_n_case);

    SolveTrace empty;
    CHECK_THROWS_AS(monotonicity_diag(empty), EmptyTrace);
}

TEST_CASE("monotonicity_diag finds a sign pattern for wide traces") {
    ChannelMatrix ch = row_ones();
    const ChannelDecomposition& dec = decompose(ch);
    const PowerConstraint p(vec2(0.5, 0.5));
    const SolveReport rep = drop_rank_m(dec, init_dual(dec, p), p, 1e-10, 10000);
    const MonotonicityReport mono = monotonicity_diag(rep.trace);
    REQUIRE(mono.pi_vector.has_value());
    CHECK(mono.settle_index >= 0);
    // Dcheck rises toward the fixed point here, so pi = -1 works.
    CHECK((mono.pi_vector->array() == -1.0).all());
}

// Entrywise dual decrease does not hold universally: this frozen instance
// converges while one dual coordinate moves up mid-run.
// The diagnostic must report that faithfully.
TEST_CASE("monotonicity_diag detects a known non-monotone tall run") {
    StreamRng rng = StreamRng::derive(20250810, 701, 1);
    const Index n = 1 + static_cast<Index>(rng.next_u64() % 4);
    const Index m = n + static_cast<Index>(rng.next_u64() % (5 - n));
    REQUIRE(n == 3);
    REQUIRE(m == 3);
    CMat h(m, n);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j) h(i, j) = rng.next_cgaussian();
    ChannelMatrix ch(h);
    RVec pv(n);
    for (Index i = 0; i < n; ++i) pv(i) = 0.2 + 1.3 * rng.next_double();
    const PowerConstraint p(pv);
    const ChannelDecomposition& dec = decompose(ch);
    RVec d0 = init_dual(dec, p).d_check;
    for (Index i = 0; i < n; ++i) d0(i) *= 1.0 + 3.0 * rng.next_double();
    const SolveReport rep = drop_rank_n(dec, DualDiagonal(d0), p, 1e-8, 10000);
    CHECK(rep.converged);
    CHECK_FALSE(monotonicity_diag(rep.trace).monotone_n_case);
}

TEST_CASE("dual iteration converges from arbitrary positive starts") {
    StreamRng rng(35);
    for (int rep_i = 0; rep_i < 40; ++rep_i) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 4);
        const int m = n + static_cast<int>(rng.next_u64() % 3);
        ChannelMatrix ch = rayleigh_sample(m, n, rng);
        RVec pv(n), d0(n);
        for (int i = 0; i < n; ++i) {
            pv(i) = 0.2 + rng.next_double();
            d0(i) = 0.05 + 5.0 * rng.next_double();
        }
        const SolveReport rep = drop_rank_n(
            decompose(ch), DualDiagonal(d0), PowerConstraint(pv), 1e-8, 10000, false);
        CHECK(rep.converged);
        CHECK((rep.q.q.diagonal().real() - pv).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("capacity ordering holds across random instances") {
    StreamRng rng(36);
    for (int rep_i = 0; rep_i < 30; ++rep_i) {
        const int m = 1 + static_cast<int>(rng.next_u64() % 4);
        const int n = 1 + static_cast<int>(rng.next_u64() % 4);
        ChannelMatrix ch = rayleigh_sample(m, n, rng);
        RVec pv(n);
        for (int i = 0; i < n; ++i) pv(i) = 0.2 + rng.next_double();
        const PowerConstraint p(pv);
        const SolveReport rep = opt_cov(ch, p, 1e-9, {10000, false});
        REQUIRE(rep.converged);
        CHECK(mac_rate(ch, p) <= rep.rate + 1e-9);
        CHECK(rep.rate <= rate(ch, waterfill_sum(ch, p.total()).q) + 1e-9);
    }
}

TEST_CASE("solves are invariant to the null-space basis choice") {
    StreamRng rng(37);
    for (int rep_i = 0; rep_i < 8; ++rep_i) {
        ChannelMatrix ch = rayleigh_sample(2, 4, rng);
        const ChannelDecomposition base = decompose(ch);
        const PowerConstraint p(RVec::Constant(4, 0.25));

        // Random unitary on the
        // null-space block via the QR of a Gaussian matrix.
        CMat g(2, 2);
        for (Index i = 0; i < 2; ++i)
            for (Index j = 0; j < 2; ++j) g(i, j) = rng.next_cgaussian();
        const Eigen::HouseholderQR<CMat> qr(g);
        const CMat u = qr.householderQ();

        ChannelDecomposition rotated = base;
        rotated.v2 = base.v2 * u;

        const SolveReport a = drop_rank_m(base, init_dual(base, p), p, 1e-10, 10000, false);
        const SolveReport b =
            drop_rank_m(rotated, init_dual(rotated, p), p, 1e-10, 10000, false);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        CHECK(std::abs(a.rate - b.rate) < 1e-8);
        CHECK((a.q.q - b.q.q).norm() < 1e-7);
    }
}

TEST_SUITE_END();
