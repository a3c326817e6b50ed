#include "pacap/acceptance.hpp"

#include "pacap/baselines.hpp"
#include "pacap/ergodic.hpp"
#include "pacap/errors.hpp"
#include "pacap/io.hpp"
#include "pacap/oracle.hpp"
#include "pacap/perantenna.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

namespace pacap {

namespace {

using Clock = std::chrono::steady_clock;

// Distinct stream tags so criteria never share random draws.
enum StreamTag : std::uint64_t {
    kOracleChannels = 101,
    kOracleConstraints = 102,
    kKktChannels = 201,
    kKktConstraints = 202,
    kMisoChannels = 601,
    kMisoConstraints = 602,
    kMonotone = 701,
    kSpeed = 801,
    kPerf = 1001,
};

RVec random_powers(StreamRng& rng, Index n, double lo, double hi) {
    RVec p(n);
    for (Index i = 0; i < n; ++i) {
        p(i) = lo + (hi - lo) * rng.next_double();
    }
    return p;
}

CMat random_channel_matrix(StreamRng& rng, Index m, Index n) {
    CMat h(m, n);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) {
            h(i, j) = rng.next_cgaussian();
        }
    }
    return h;
}

double rank_of(const CMat& q) {
    const RVec lam = numerics::hermitian_eigenvalues(q);
    const double thresh = 1e-9 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
    return static_cast<double>((lam.array() > thresh).count());
}

struct CheckContext {
    std::ostringstream detail;
    bool pass = true;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (detail.tellp() > 0) detail << "; ";
            detail << what;
        }
    }
};

// ---------------------------------------------------------------- criteria

CriterionResult criterion_oracle_equivalence(const AcceptanceOptions& opts) {
    const auto t0 = Clock::now();
    CheckContext cc;

    const long per_shape = opts.quick ? 8 : 50;
    const long grid_res = opts.quick ? 200 : 500;
    double worst_gap = 0.0;
    double worst_grid = -1e300;

    long counter = 0;
    for (Index m = 1; m <= 4 && cc.pass; ++m) {
        for (Index n = 1; n <= 4 && cc.pass; ++n) {
            for (long c = 0; c < per_shape; ++c, ++counter) {
                StreamRng ch_rng = StreamRng::derive(opts.seed, kOracleChannels, counter);
                StreamRng p_rng = StreamRng::derive(opts.seed, kOracleConstraints, counter);
                ChannelMatrix ch(random_channel_matrix(ch_rng, m, n));
                try {
                    ch.decomposition();
                } catch (const RankDeficient&) {
                    continue;
                }
                const PowerConstraint p(random_powers(p_rng, n, 0.25, 1.25));

                const SolveReport solver = opt_cov(ch, p, 1e-8, {10000, false});
                cc.require(solver.converged, "solver did not converge");

                OracleConfig ocfg;
                const SolveReport pg = pg_solve(ch, p, ocfg);
                const double diff = std::abs(solver.rate - pg.rate);
                worst_gap = std::max(worst_gap, diff);
                if (diff >= 1e-4) {
                    std::ostringstream msg;
                    msg << "rate mismatch " << diff << " at shape " << m << "x" << n;
                    cc.require(false, msg.str());
                    break;
                }

                if (n == 2) {
                    const double gmax = grid_verify_2x2(ch, p, grid_res);
                    worst_grid = std::max(worst_grid, gmax - solver.rate);
                    if (gmax > solver.rate + 1e-3) {
                        cc.require(false, "grid bound exceeded solver rate");
                        break;
                    }
                }
            }
        }
    }

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    cc.require(secs < 300.0, "runtime budget of 5 min exceeded");
    cc.detail << (cc.detail.tellp() > 0 ? "; " : "") << "max |rate diff| " << worst_gap
              << ", max grid overshoot " << worst_grid;
    return {1, "oracle equivalence (pg + 2x2 grid)", cc.pass, cc.detail.str(), secs};
}

CriterionResult criterion_kkt_battery(const AcceptanceOptions& opts) {
    const auto t0 = Clock::now();
    CheckContext cc;

    const long per_shape = opts.quick ? 5 : 15;
    long counter = 0;
    long solves = 0;
    for (Index m = 1; m <= 4 && cc.pass; ++m) {
        for (Index n = 1; n <= 4 && cc.pass; ++n) {
            for (long c = 0; c < per_shape && cc.pass; ++c, ++counter) {
                StreamRng ch_rng = StreamRng::derive(opts.seed, kKktChannels, counter);
                StreamRng p_rng = StreamRng::derive(opts.seed, kKktConstraints, counter);
                ChannelMatrix ch(random_channel_matrix(ch_rng, m, n));
                try {
                    ch.decomposition();
                } catch (const RankDeficient&) {
                    continue;
                }
                const PowerConstraint p(random_powers(p_rng, n, 0.2, 1.5));
                const SolveReport rep = opt_cov(ch, p, 1e-8, {10000, false});
                if (!rep.converged) continue;
                ++solves;

                cc.require(std::abs(rep.gap) < 1e-8, "duality gap above 1e-8");
                cc.require((rep.q.q.diagonal().real() - p.p).cwiseAbs().maxCoeff() < 1e-6,
                           "diagonal violates constraint beyond 1e-6");
                cc.require(static_cast<bool>(rep.kkt), "report lacks KKT residuals");
                if (rep.kkt) {
                    cc.require(rep.kkt->slackness_norm < 1e-6 * (1.0 + rep.q.q.norm()),
                               "complementary slackness residual too large");
                    cc.require(rep.kkt->psd_violation > -1e-8,
                               "multiplier M has eigenvalue below -1e-8");
                }
                cc.require(rank_of(rep.q.q) <= static_cast<double>(std::min(m, n)),
                           "rank(Q) exceeds min(m,n)");
            }
        }
    }

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    cc.detail << (cc.detail.tellp() > 0 ? "; " : "") << solves << " converged solves checked";
    return {2, "KKT residual battery", cc.pass, cc.detail.str(), secs};
}

CriterionResult criterion_power_split(const AcceptanceOptions& opts) {
    (void)opts;
    const auto t0 = Clock::now();
    CheckContext cc;

    const ChannelMatrix ch = reference_channel_2x2();
    const double total = 1.0;  // 0 dB
    const long grid = 101;
    const auto rows = power_split_sweep(ch, total, grid);
    cc.require(static_cast<long>(rows.size()) == grid, "grid row count mismatch");

    // (a) ordering at every grid point
    for (const auto& r : rows) {
        cc.require(r.c_mac <= r.c_pa + 1e-9 && r.c_pa <= r.c_sum + 1e-9,
                   "capacity ordering violated on the grid");
        cc.require(r.c_forced <= r.c_pa + 1e-9, "forced eigenbeams beat the optimum");
    }

    // (b) strict separation at the midpoint
    const auto& mid = rows[grid / 2];
    cc.require(std::abs(mid.p1 - 0.5) < 1e-12, "midpoint row is not P1 = 0.5");
    cc.require(mid.c_mac + 1e-3 < mid.c_pa, "mac vs per-antenna not separated at 0.5");
    cc.require(mid.c_pa + 1e-3 < mid.c_sum, "per-antenna vs sum not separated at 0.5");

    // (c) the three curves meet where the constraint equals water-filling's
    // own per-antenna split
    const WaterfillResult wf = waterfill_sum(ch, total);
    const double p1_star = wf.q.q(0, 0).real();
    cc.require(p1_star > 0.0 && p1_star < total, "water-filling split outside (0, P)");
    const PowerConstraint p_star((RVec(2) << p1_star, total - p1_star).finished());
    const double c_sum = rate(ch, wf.q);
    const double c_pa_star = opt_cov(ch, p_star, 1e-10, {10000, false}).rate;
    const double c_forced_star = forced_eigenbeam(ch, p_star).rate;
    cc.require(std::abs(c_pa_star - c_sum) < 1e-6, "per-antenna curve misses meeting point");
    cc.require(std::abs(c_forced_star - c_sum) < 1e-6, "forced curve misses meeting point");

    // (d) an infeasible band with exactly zero forced rate
    long best_run = 0;
    long run = 0;
    for (const auto& r : rows) {
        run = (r.c_forced == 0.0) ? run + 1 : 0;
        best_run = std::max(best_run, run);
    }
    cc.require(best_run >= 2, "no contiguous zero-rate band for forced eigenbeams");

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    cc.require(secs < 10.0, "runtime budget of 10 s exceeded");
    std::ostringstream extra;
    extra << "meeting point P1 " << p1_star << ", zero band length " << best_run;
    cc.detail << (cc.detail.tellp() > 0 ? "; " : "") << extra.str();
    return {3, "power-split sweep on the reference 2x2 channel", cc.pass, cc.detail.str(),
            secs};
}

CriterionResult criterion_equal_profile(const AcceptanceOptions& opts) {
    const auto t0 = Clock::now();
    CheckContext cc;

    const long samples = opts.quick ? 50 : 200;
    const std::vector<double> snr = {-5, 0, 5, 10, 15, 20};

    for (auto [m, n] : {std::pair<int, int>{2, 4}, std::pair<int, int>{4, 2}}) {
        ErgodicConfig cfg;
        cfg.m = m;
        cfg.n = n;
        cfg.snr_db_grid = snr;
        cfg.samples = samples;
        cfg.seed = opts.seed;
        cfg.profile = ConstraintProfile::equal;
        const auto rows = sweep(cfg);

        for (const auto& row : rows) {
            cc.require(row.nonconverged == 0, "solver failed to converge on a sample");
            cc.require(row.c_sum - row.c_pa < 0.1 * row.c_sum,
                       "per-antenna mean not within 10% of sum-power mean");
            cc.require(row.infeasible_fraction == 0.0,
                       "equal constraints produced infeasible forced eigenbeams");
        }

        // Per-sample identity: with equal budgets the forced-eigenbeam solution
        // collapses to independent signaling. Re-derive the same channel
        // streams and compare sample by sample.
        for (size_t si = 0; si < snr.size() && cc.pass; ++si) {
            const PowerConstraint p(profile_powers(cfg, snr[si]));
            for (long k = 0; k < samples; ++k) {
                StreamRng rng = StreamRng::derive(cfg.seed, si, static_cast<std::uint64_t>(k));
                const ChannelMatrix ch = rayleigh_sample(m, n, rng);
                const double diff =
                    std::abs(forced_eigenbeam(ch, p).rate - mac_rate(ch, p));
                if (diff > 1e-9) {
                    cc.require(false, "per-sample forced != mac under equal constraints");
                    break;
                }
            }
        }
    }

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    cc.require(secs < 300.0, "runtime budget of 5 min exceeded");
    cc.detail << (cc.detail.tellp() > 0 ? "; " : "") << samples
              << " samples per SNR, both orientations";
    return {4, "equal-constraint ergodic sweep (both orientations)", cc.pass,
            cc.detail.str(), secs};
}

CriterionResult criterion_skewed_profile(const AcceptanceOptions& opts) {
    const auto t0 = Clock::now();
    CheckContext cc;

    ErgodicConfig cfg;
    cfg.m = 3;
    cfg.n = 3;
    cfg.snr_db_grid = {-5, 0, 5, 10, 15, 20};
    cfg.samples = opts.quick ? 50 : 200;
    cfg.seed = opts.seed;
    cfg.profile = ConstraintProfile::proportional_k_squared;
    const auto rows = sweep(cfg);

    std::ostringstream ratios;
    ratios << "forced/pa ratios:";
    for (const auto& row : rows) {
        cc.require(row.nonconverged == 0, "solver failed to converge on a sample");
        ratios << ' ' << row.c_forced / row.c_pa << "@" << row.snr_db << "dB";
        if (!(row.c_forced < 0.05 * row.c_pa)) {
            std::ostringstream msg;
            msg << "forced mean " << row.c_forced / row.c_pa << " of pa mean at "
                << row.snr_db << " dB (threshold 0.05)";
            cc.require(false, msg.str());
        }
        cc.require(row.infeasible_fraction > 0.0, "no infeasible samples observed");
    }

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    cc.require(secs < 300.0, "runtime budget of 5 min exceeded");
    cc.detail << (cc.detail.tellp() > 0 ? "; " : "") << cfg.samples << " samples per SNR, "
              << ratios.str();
    return {5, "skewed-constraint ergodic sweep (3x3, k^2)", cc.pass, cc.detail.str(), secs};
}

CriterionResult criterion_miso(const AcceptanceOptions& opts) {
    const auto t0 = Clock::now();
    CheckContext cc;

    const long runs = opts.quick ? 30 : 100;
    double worst = 0.0;
    for (long c = 0; c < runs; ++c) {
        const Index n = 2 + (c % 3);
        StreamRng ch_rng = StreamRng::derive(opts.seed, kMisoChannels, c);
        StreamRng p_rng = StreamRng::derive(opts.seed, kMisoConstraints, c);
        ChannelMatrix ch(random_channel_matrix(ch_rng, 1, n));
        const PowerConstraint p(random_powers(p_rng, n, 0.2, 1.2));

        const MisoResult closed = miso_closed_form(ch, p);
        const SolveReport rep = opt_cov(ch, p, 1e-11, {20000, false});
        cc.require(rep.converged, "solver did not converge on a MISO channel");
        const double diff = std::abs(rep.rate - closed.rate);
        worst = std::max(worst, diff);
        if (diff >= 1e-8) {
            cc.require(false, "MISO rate mismatch above 1e-8");
            break;
        }
    }

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    cc.detail << (cc.detail.tellp() > 0 ? "; " : "") << runs << " channels, max |diff| "
              << worst;
    return {6, "MISO closed-form cross-check", cc.pass, cc.detail.str(), secs};
}

CriterionResult criterion_monotonicity(const AcceptanceOptions& opts) {
    const auto t0 = Clock::now();
    CheckContext cc;

    const long runs = opts.quick ? 30 : 100;
    long violations = 0;
    double worst_up = 0.0;
    for (long c = 0; c < runs; ++c) {
        StreamRng rng = StreamRng::derive(opts.seed, kMonotone, c);
        const Index n = 1 + static_cast<Index>(rng.next_u64() % 4);
        const Index m = n + static_cast<Index>(rng.next_u64() % (5 - n));
        ChannelMatrix ch(random_channel_matrix(rng, m, n));
        try {
            ch.decomposition();
        } catch (const RankDeficient&) {
            continue;
        }
        const PowerConstraint p(random_powers(rng, n, 0.2, 1.5));
        const ChannelDecomposition& dec = ch.decomposition();

        // Randomized start dominating the analytic initializer entrywise,
        // where the entrywise-decrease argument is anchored. It still fails
        // on a few percent of instances; see the convergence tests for the
        // guarantee that actually holds from arbitrary positive starts.
        RVec d0 = init_dual(dec, p).d_check;
        for (Index i = 0; i < n; ++i) {
            d0(i) *= 1.0 + 3.0 * rng.next_double();
        }
        const SolveReport rep = drop_rank_n(dec, DualDiagonal(d0), p, 1e-8, 10000, true);
        cc.require(rep.converged, "tall solve did not converge");
        const MonotonicityReport mono = monotonicity_diag(rep.trace);
        if (!mono.monotone_n_case) {
            ++violations;
            const auto& steps = rep.trace.steps;
            for (size_t i = 0; i + 1 < steps.size(); ++i) {
                worst_up = std::max(
                    worst_up,
                    (steps[i + 1].d_check - steps[i].d_check).maxCoeff());
            }
        }
    }
    cc.require(violations == 0, "entrywise dual decrease violated");

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    cc.detail << (cc.detail.tellp() > 0 ? "; " : "") << runs << " randomized tall solves, "
              << violations << " violations, worst up-move " << worst_up;
    return {7, "dual monotonicity for n <= m", cc.pass, cc.detail.str(), secs};
}

CriterionResult criterion_convergence_speed(const AcceptanceOptions& opts) {
    const auto t0 = Clock::now();
    CheckContext cc;

    const long runs = opts.quick ? 30 : 100;
    long fast = 0;
    long total_runs = 0;
    std::ostringstream medians;

    for (auto [m, n] : {std::pair<int, int>{3, 3}, std::pair<int, int>{2, 4}}) {
        std::vector<long> iters;
        iters.reserve(runs);
        for (long c = 0; c < runs; ++c) {
            StreamRng rng = StreamRng::derive(
                opts.seed, kSpeed + static_cast<std::uint64_t>(m), c);
            const ChannelMatrix ch = rayleigh_sample(m, n, rng);
            const PowerConstraint p(RVec::Constant(n, 1.0 / n));  // 0 dB total
            const SolveReport rep = opt_cov(ch, p, 1e-6, {10000, true});
            cc.require(rep.converged, "solve did not converge at eps 1e-6");
            iters.push_back(rep.iterations);
            ++total_runs;

            bool decays = true;
            const auto& steps = rep.trace.steps;
            for (size_t i = 10; i + 25 < steps.size(); ++i) {
                if (std::abs(steps[i + 25].gap) > 0.1 * std::abs(steps[i].gap)) {
                    decays = false;
                    break;
                }
            }
            if (decays) ++fast;
        }
        std::sort(iters.begin(), iters.end());
        const long median = iters[iters.size() / 2];
        medians << m << "x" << n << " median " << median << " ";
        cc.require(median < 200, "median iteration count at or above 200");
    }

    const double frac = static_cast<double>(fast) / static_cast<double>(total_runs);
    cc.require(frac >= 0.9, "fewer than 90% of runs show 10x gap decay per 25 iterations");

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    cc.detail << (cc.detail.tellp() > 0 ? "; " : "") << medians.str() << "decay fraction "
              << frac;
    return {8, "convergence speed at 0 dB", cc.pass, cc.detail.str(), secs};
}

CriterionResult criterion_no_csit(const AcceptanceOptions& opts) {
    const auto t0 = Clock::now();
    CheckContext cc;

    const long samples = opts.quick ? 500 : 2000;
    const long challengers = 10;

    {
        const PowerConstraint p((RVec(2) << 0.5, 0.5).finished());
        cc.require(no_csit_check(2, 2, p, samples, challengers, opts.seed),
                   "independent signaling lost to a challenger on 2x2");
    }
    {
        RVec p(3);
        p << 1.0 / 14.0, 4.0 / 14.0, 9.0 / 14.0;  // k^2 profile, total 1
        cc.require(no_csit_check(2, 3, PowerConstraint(p), samples, challengers, opts.seed),
                   "independent signaling lost to a challenger on 2x3");
    }

    // Equal budgets: Q = diag(p) IS the no-CSIT sum-power optimum (P/n) I, so
    // the two ergodic curves coincide as an identity of inputs.
    {
        const Index n = 2;
        const double total = 1.0;
        const RVec equal = RVec::Constant(n, total / static_cast<double>(n));
        const CMat q_p = diag_matrix(equal);
        const CMat q_iso = (total / static_cast<double>(n)) * CMat::Identity(n, n);
        cc.require((q_p - q_iso).norm() == 0.0, "equal-budget identity broken");
        StreamRng rng = StreamRng::derive(opts.seed, 0x1D, 0);
        const ChannelMatrix ch = rayleigh_sample(2, 2, rng);
        cc.require(rate(ch, InputCovariance(q_p)) == rate(ch, InputCovariance(q_iso)),
                   "identical covariances gave different rates");
    }

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    cc.detail << (cc.detail.tellp() > 0 ? "; " : "") << samples << " paired samples, "
              << challengers << " challengers";
    return {9, "no-CSIT optimality of independent signaling", cc.pass, cc.detail.str(),
            secs};
}

CriterionResult criterion_performance(const AcceptanceOptions& opts,
                                      double elapsed_so_far) {
    const auto t0 = Clock::now();
    CheckContext cc;

    StreamRng rng = StreamRng::derive(opts.seed, kPerf, 0);
    const ChannelMatrix ch = rayleigh_sample(8, 8, rng);
    const PowerConstraint p(RVec::Constant(8, 1.0));

    const auto s0 = Clock::now();
    const SolveReport rep = opt_cov(ch, p, 1e-8, {10000, false});
    const double solve_secs = std::chrono::duration<double>(Clock::now() - s0).count();
    cc.require(rep.converged, "8x8 solve did not converge");
    cc.require(solve_secs < 1.0, "8x8 solve took 1 s or longer");

    // Only the runtime is at stake here; the quick battery's own pass/fail
    // lines are criteria 1-9 and are reported separately.
    double quick_secs = 0.0;
    if (opts.quick) {
        quick_secs = elapsed_so_far +
                     std::chrono::duration<double>(Clock::now() - t0).count();
    } else if (opts.measure_quick_total) {
        AcceptanceOptions nested = opts;
        nested.quick = true;
        nested.progress = nullptr;
        nested.measure_quick_total = true;  // in quick mode this self-measures
        nested.only = 0;                    // time the whole quick battery
        const auto q0 = Clock::now();
        (void)run_acceptance(nested);
        quick_secs = std::chrono::duration<double>(Clock::now() - q0).count();
    }
    cc.require(quick_secs < 60.0, "quick battery took 60 s or longer");

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream extra;
    extra << "8x8 solve " << solve_secs << " s, quick battery " << quick_secs << " s";
    cc.detail << (cc.detail.tellp() > 0 ? "; " : "") << extra.str();
    return {10, "performance budget", cc.pass, cc.detail.str(), secs};
}

}  // namespace

ChannelMatrix reference_channel_2x2() {
    CMat h(2, 2);
    h << Complex(0.0541, -0.4066), Complex(-0.4339, 0.0033),
        Complex(-1.3200, -0.1872), Complex(0.8269, -0.0279);
    return ChannelMatrix(std::move(h));
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
    std::vector<CriterionResult> results;
    double elapsed = 0.0;

    auto push = [&](CriterionResult r) {
        elapsed += r.seconds;
        if (opts.progress) {
            *opts.progress << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << ". " << r.name
                           << " (" << r.detail << ") [" << r.seconds << " s]\n";
            opts.progress->flush();
        }
        results.push_back(std::move(r));
    };

    const auto want = [&](int id) { return opts.only == 0 || opts.only == id; };
    if (want(1)) push(criterion_oracle_equivalence(opts));
    if (want(2)) push(criterion_kkt_battery(opts));
    if (want(3)) push(criterion_power_split(opts));
    if (want(4)) push(criterion_equal_profile(opts));
    if (want(5)) push(criterion_skewed_profile(opts));
    if (want(6)) push(criterion_miso(opts));
    if (want(7)) push(criterion_monotonicity(opts));
    if (want(8)) push(criterion_convergence_speed(opts));
    if (want(9)) push(criterion_no_csit(opts));
    if (want(10)) push(criterion_performance(opts, elapsed));
    return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const CriterionResult& r) { return r.pass; });
}

void print_results(std::ostream& os, const std::vector<CriterionResult>& results) {
    for (const auto& r : results) {
        os << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << ". " << r.name << " ("
           << r.detail << ") [" << r.seconds << " s]\n";
    }
    os << (all_passed(results) ? "all criteria passed\n" : "FAILURES present\n");
}

}  // namespace pacap
