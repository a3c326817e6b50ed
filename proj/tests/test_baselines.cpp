#include "pacap/baselines.hpp"
#include "pacap/errors.hpp"
#include "pacap/ergodic.hpp"
#include "pacap/oracle.hpp"
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

ChannelMatrix diag_channel(double a, double b) {
    CMat h = CMat::Zero(2, 2);
    h(0, 0) = a;
    h(1, 1) = b;
    return ChannelMatrix(std::move(h));
}

RVec vec2(double a, double b) { return (RVec(2) << a, b).finished(); }

}  // namespace

TEST_SUITE_BEGIN("baselines");

TEST_CASE("waterfill on symmetric channel") {
    ChannelMatrix ch(CMat::Identity(2, 2));
    const WaterfillResult wf = waterfill_sum(ch, 1.0);
    CHECK((wf.q.q - 0.5 * CMat::Identity(2, 2)).norm() < 1e-12);
    // lambda_Q = mu - 1/lambda_H = 0.5 with lambda_H = 1 forces mu = 1.5.
    CHECK(wf.water_level == doctest::Approx(1.5).epsilon(1e-13));
    CHECK(wf.active_modes == 2);
    CHECK(rate(ch, wf.q) == doctest::Approx(2.0 * std::log(1.5)).epsilon(1e-13));
}

TEST_CASE("waterfill with both modes active, worked by hand") {
    // lambda_H = (4, 1); mu = (1 + 1/4 + 1)/2 = 1.125; lambda_Q = (.875, .125).
    ChannelMatrix ch = diag_channel(2.0, 1.0);
    const WaterfillResult wf = waterfill_sum(ch, 1.0);
    CHECK(wf.water_level == doctest::Approx(1.125).epsilon(1e-13));
    CHECK(wf.active_modes == 2);
    CHECK(wf.nu_star == doctest::Approx(1.0 / 1.125).epsilon(1e-13));
    CHECK(wf.q.q(0, 0).real() == doctest::Approx(0.875).epsilon(1e-12));
    CHECK(wf.q.q(1, 1).real() == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(rate(ch, wf.q) ==
          doctest::Approx(std::log(4.5) + std::log(1.125)).epsilon(1e-12));
}

TEST_CASE("waterfill drops a weak mode") {
    // lambda_H = (4, 0.01); mu = 0.5 + 1/4 = 0.75 < 100, so mode 2 drops.
    ChannelMatrix ch = diag_channel(2.0, 0.1);
    const WaterfillResult wf = waterfill_sum(ch, 0.5);
    CHECK(wf.active_modes == 1);
    CHECK(wf.water_level == doctest::Approx(0.75).epsilon(1e-13));
    CHECK(wf.q.q(0, 0).real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(wf.q.q(1, 1)) < 1e-14);
}

TEST_CASE("waterfill invariants on random channels") {
    StreamRng rng(41);
    for (int rep = 0; rep < 25; ++rep) {
        const int m = 1 + static_cast<int>(rng.next_u64() % 4);
        const int n = 1 + static_cast<int>(rng.next_u64() % 4);
        ChannelMatrix ch = rayleigh_sample(m, n, rng);
        const double total = 0.2 + 3.0 * rng.next_double();
        const WaterfillResult wf = waterfill_sum(ch, total);
        CHECK(std::abs(wf.q.q.trace().real() - total) < 1e-12 * std::max(1.0, total));
        // Q diagonalized by the right singular vectors.
        const ChannelDecomposition& dec = decompose(ch);
        const CMat in_basis = dec.svd.right.adjoint() * wf.q.q * dec.svd.right;
        CMat off = in_basis;
        off.diagonal().setZero();
        CHECK(off.norm() < 1e-8 * (1.0 + wf.q.q.norm()));
        // Dropped modes really sit below the water level.
        const RVec lam_h = dec.svd.singulars.cwiseAbs2();
        for (Index i = wf.active_modes; i < std::min<Index>(m, n); ++i) {
            CHECK(wf.water_level <= 1.0 / lam_h(i) + 1e-12);
        }
    }
    CHECK_THROWS_AS(waterfill_sum(reference_channel(), 0.0), std::invalid_argument);
}

TEST_CASE("waterfill agrees with the sum-constraint oracle") {
    StreamRng rng(42);
    for (int rep = 0; rep < 6; ++rep) {
        const int m = 1 + static_cast<int>(rng.next_u64() % 3);
        const int n = 1 + static_cast<int>(rng.next_u64() % 3);
        ChannelMatrix ch = rayleigh_sample(m, n, rng);
        const double total = 0.5 + rng.next_double();
        OracleConfig cfg;
        cfg.constraint_mode = ConstraintMode::sum;
        const SolveReport pg = pg_solve(ch, PowerConstraint(RVec::Constant(n, total / n)), cfg);
        CHECK(std::abs(rate(ch, waterfill_sum(ch, total).q) - pg.rate) < 1e-5);
    }
}

TEST_CASE("mac_rate basics") {
    ChannelMatrix id2(CMat::Identity(2, 2));
    CHECK(mac_rate(id2, PowerConstraint(vec2(0.5, 0.5))) ==
          doctest::Approx(2.0 * std::log(1.5)).epsilon(1e-13));
    CHECK(mac_rate(id2, PowerConstraint(RVec::Zero(2))) == 0.0);
    ChannelMatrix ch = reference_channel();
    const PowerConstraint p(vec2(0.5, 0.5));
    CHECK(mac_rate(ch, p) < opt_cov(ch, p, 1e-9).rate);
    CHECK_THROWS_AS(mac_rate(ch, PowerConstraint(RVec::Ones(3))), DimensionMismatch);
}

TEST_CASE("forced_eigenbeam equal budgets collapse to independent signaling") {
    StreamRng rng(43);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 3);
        const int m = 1 + static_cast<int>(rng.next_u64() % 4);
        ChannelMatrix ch = rayleigh_sample(m, n, rng);
        const double total = 0.5 + rng.next_double();
        const PowerConstraint p(RVec::Constant(n, total / n));
        const ForcedEigenbeamResult fr = forced_eigenbeam(ch, p);
        REQUIRE(fr.feasible);
        CHECK((fr.lambda_q->array() - total / n).abs().maxCoeff() < 1e-9);
        CHECK((fr.q->q - (total / n) * CMat::Identity(n, n)).norm() < 1e-9);
        CHECK(std::abs(fr.rate - mac_rate(ch, p)) < 1e-9);
    }
}

TEST_CASE("forced_eigenbeam on a diagonal channel returns the budgets") {
    ChannelMatrix ch = diag_channel(2.0, 1.0);
    const PowerConstraint p(vec2(0.7, 0.3));
    const ForcedEigenbeamResult fr = forced_eigenbeam(ch, p);
    REQUIRE(fr.feasible);
    CHECK((fr.q->q - diag_matrix(p.p)).norm() < 1e-12);
}

TEST_CASE("forced_eigenbeam reports infeasibility on the reference channel") {
    ChannelMatrix ch = reference_channel();
    // The skewed end of the split sweep falls outside the nonnegative range
    // of W; scan confirms a zero-rate band exists and is flagged infeasible.
    bool found_infeasible = false;
    for (double p1 : {0.02, 0.05, 0.1, 0.9, 0.95, 0.98}) {
        const ForcedEigenbeamResult fr =
            forced_eigenbeam(ch, PowerConstraint(vec2(p1, 1.0 - p1)));
        if (!fr.feasible) {
            found_infeasible = true;
            CHECK(fr.rate == 0.0);
            CHECK_FALSE(fr.lambda_q.has_value());
        } else {
            CHECK((fr.q->q.diagonal().real() - vec2(p1, 1.0 - p1)).cwiseAbs().maxCoeff() <
                  1e-9);
        }
    }
    CHECK(found_infeasible);
}

TEST_CASE("miso_closed_form examples") {
    {
        CMat h(1, 2);
        h << Complex(1, 0), Complex(1, 0);
        const MisoResult r = miso_closed_form(ChannelMatrix(h), PowerConstraint(vec2(0.5, 0.5)));
        CHECK(r.rate == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    }
    {
        CMat h(1, 1);
        h(0, 0) = 1.0;
        const MisoResult r = miso_closed_form(ChannelMatrix(h), PowerConstraint(RVec::Ones(1)));
        CHECK(r.rate == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    }
    {
        CMat h(1, 2);
        h << Complex(1, 0), Complex(-1, 0);
        const MisoResult r = miso_closed_form(ChannelMatrix(h), PowerConstraint(vec2(0.5, 0.5)));
        CHECK(r.q.q(0, 1).real() == doctest::Approx(-0.5).epsilon(1e-14));
        CHECK(r.rate == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(
        miso_closed_form(reference_channel(), PowerConstraint(vec2(0.5, 0.5))), NotMiso);
}

TEST_CASE("miso closed form matches the solver on random channels") {
    StreamRng rng(44);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 3);
        ChannelMatrix ch = rayleigh_sample(1, n, rng);
        RVec pv(n);
        for (int i = 0; i < n; ++i) pv(i) = 0.2 + rng.next_double();
        const PowerConstraint p(pv);
        const double closed = miso_closed_form(ch, p).rate;
        const double solved = opt_cov(ch, p, 1e-11, {20000, false}).rate;
        CHECK(std::abs(closed - solved) < 1e-8);
    }
}

TEST_CASE("mac_dual closed form") {
    {
        ChannelMatrix ch(CMat::Identity(2, 2));
        const CMat b = mac_dual(decompose(ch), PowerConstraint(vec2(0.5, 0.5)));
        CHECK((b - (1.0 / 1.5) * CMat::Identity(2, 2)).norm() < 1e-12);
    }
    {
        ChannelMatrix ch = diag_channel(2.0, 1.0);
        const CMat b = mac_dual(decompose(ch), PowerConstraint(vec2(1.0, 1.0)));
        CHECK(b(0, 0).real() == doctest::Approx(1.0 / 1.25).epsilon(1e-12));
        CHECK(b(1, 1).real() == doctest::Approx(0.5).epsilon(1e-12));
    }
    {
        ChannelMatrix ch = reference_channel();
        const PowerConstraint p(vec2(0.5, 0.5));
        const CMat b = mac_dual(decompose(ch), p);
        CHECK(numerics::is_psd(b, 1e-12));
        // Stationarity: B* equals the rate gradient at Q = P.
        const CMat inner = CMat::Identity(2, 2) +
                           ch.h() * diag_matrix(p.p) * ch.h().adjoint();
        const CMat grad = ch.h().adjoint() * inner.inverse() * ch.h();
        CHECK((b - grad).norm() < 1e-8);
    }
    CMat wide(1, 2);
    wide << Complex(1, 0), Complex(1, 0);
    ChannelMatrix wch(wide);
    CHECK_THROWS_AS(mac_dual(decompose(wch), PowerConstraint(vec2(0.5, 0.5))),
                    BranchMismatch);
}

TEST_SUITE_END();
