// ergodic.hpp — Monte-Carlo ergodic-capacity harness: seeded Rayleigh channel
// sampling, per-sample solves under all four constraint regimes, SNR sweeps,
// the two-transmit power-split sweep, and the no-CSIT optimality check.

#pragma once

#include "pacap/baselines.hpp"
#include "pacap/channel.hpp"
#include "pacap/perantenna.hpp"

#include <cstdint>
#include <vector>

namespace pacap {

// Deterministic splitmix64 stream. Independent substreams are derived by
// hashing (seed, a, b), so sample k of SNR index s always sees the same draws
// regardless of evaluation order: derive(seed, snr_index, sample_index).
class StreamRng {
  public:
    explicit StreamRng(std::uint64_t seed) : state_(seed) {}

    static StreamRng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

    std::uint64_t next_u64();
    double next_double();     // uniform [0, 1)
    double next_gaussian();   // standard normal, Box-Muller
    Complex next_cgaussian(); // circular complex Gaussian, unit variance

  private:
    std::uint64_t state_;
    double spare_{};
    bool has_spare_{false};
};

enum class ConstraintProfile { equal, proportional_k_squared, explicit_weights };

struct ErgodicConfig {
    int m{};
    int n{};
    std::vector<double> snr_db_grid;
    long samples{};
    std::uint64_t seed{};
    ConstraintProfile profile = ConstraintProfile::equal;
    std::vector<double> weights;  // explicit_weights only; normalized to sum 1
    double eps = 1e-8;
    long max_iter = 10000;
};

struct SweepRow {
    double snr_db{};
    double c_sum{}, c_pa{}, c_mac{}, c_forced{};
    double se_sum{}, se_pa{}, se_mac{}, se_forced{};
    double infeasible_fraction{};
    long nonconverged{};
};

struct SplitRow {
    double p1{};
    double c_sum{}, c_pa{}, c_mac{}, c_forced{};
};

// i.i.d. entries with E|h_ij|² = 1; resamples in the measure-zero event of a
// numerically rank-deficient draw.
ChannelMatrix rayleigh_sample(int m, int n, StreamRng& rng);

// Power budgets for one SNR point: total power 10^(snr_db/10) split by the
// configured profile weights.
RVec profile_powers(const ErgodicConfig& cfg, double snr_db);

// One row per SNR point; every sample is solved under all four constraints
// with common random channels. The per-sample ordering
// c_mac <= c_pa <= c_sum (tolerance 1e-9) is asserted and a violation throws.
// Aggregation uses pairwise summation so results do not depend on
// accumulation order.
std::vector<SweepRow> sweep(const ErgodicConfig& cfg);

// n = 2 only: sweeps p = (P1, total - P1) for P1 = total * j/(grid+1),
// j = 1..grid (open-interval endpoints excluded). c_sum is computed once and
// repeated since the sum constraint ignores the split.
std::vector<SplitRow> power_split_sweep(const ChannelMatrix& ch, double total_power,
                                        long grid, double eps = 1e-8);

// Paired Monte-Carlo test of the no-CSIT result: estimates E[rate] under
// Q = diag(p) against `challengers` random fixed PSD covariances with the
// same diagonal (common channels per sample). True iff the Q = diag(p) mean
// is >= every challenger mean minus twice the paired standard error.
bool no_csit_check(int m, int n, const PowerConstraint& p, long samples,
                   long challengers, std::uint64_t seed);

// Order-independent sum (recursive pairwise reduction).
double pairwise_sum(const std::vector<double>& xs);

}  // namespace pacap
