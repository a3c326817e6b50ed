#include "pacap/errors.hpp"
#include "pacap/ergodic.hpp"
#include "pacap/io.hpp"
#include "pacap/perantenna.hpp"

#include <doctest.h>

#include <sstream>

using namespace pacap;

namespace {

ChannelMatrix reference_channel() {
    CMat h(2, 2);
    h << Complex(0.0541, -0.4066), Complex(-0.4339, 0.0033),
        Complex(-1.3200, -0.1872), Complex(0.8269, -0.0279);
    return ChannelMatrix(std::move(h));
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("channel JSON round-trips bit-exactly") {
    StreamRng rng(61);
    for (int rep = 0; rep < 10; ++rep) {
        const int m = 1 + static_cast<int>(rng.next_u64() % 4);
        const int n = 1 + static_cast<int>(rng.next_u64() % 4);
        const ChannelMatrix ch = rayleigh_sample(m, n, rng);
        const ChannelMatrix back = io::channel_from_json(io::channel_to_json(ch));
        REQUIRE(back.rx() == m);
        REQUIRE(back.tx() == n);
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < n; ++j) {
                CHECK(back.h()(i, j).real() == ch.h()(i, j).real());
                CHECK(back.h()(i, j).imag() == ch.h()(i, j).imag());
            }
        }
    }
}

TEST_CASE("channel JSON rejects malformed input") {
    CHECK_THROWS_AS(io::channel_from_json("not json"), InputParse);
    CHECK_THROWS_AS(io::channel_from_json(R"({"m": 2, "n": 2})"), InputParse);
    CHECK_THROWS_AS(io::channel_from_json(R"({"m": 2, "n": 2, "entries": [[1, 0]]})"),
                    InputParse);
    CHECK_THROWS_AS(
        io::channel_from_json(R"({"m": 0, "n": 1, "entries": []})"), InputParse);
    CHECK_THROWS_AS(
        io::channel_from_json(R"({"m": 1, "n": 1, "entries": [[1]]})"), InputParse);
    CHECK_THROWS_AS(io::load_channel("/nonexistent/file.json"), InputParse);
}

TEST_CASE("solve report JSON round-trips and the emitted Q stays valid") {
    ChannelMatrix ch = reference_channel();
    const PowerConstraint p((RVec(2) << 0.5, 0.5).finished());
    const SolveReport rep = opt_cov(ch, p, 1e-9);

    const std::string text = io::report_to_json(rep);
    const SolveReport back = io::report_from_json(text);
    CHECK(back.rate == rep.rate);
    CHECK(back.gap == rep.gap);
    CHECK(back.iterations == rep.iterations);
    CHECK(back.dropped_modes == rep.dropped_modes);
    CHECK(back.converged == rep.converged);
    CHECK((back.q.q - rep.q.q).norm() == 0.0);
    CHECK((back.d_check - rep.d_check).norm() == 0.0);
    CHECK(covariance_valid(back.q));

    CHECK_THROWS_AS(io::report_from_json("{}"), InputParse);
}

TEST_CASE("solve_to_json carries baselines, KKT block, and optional bits") {
    ChannelMatrix ch = reference_channel();
    const PowerConstraint p((RVec(2) << 0.5, 0.5).finished());
    const SolveReport rep = opt_cov(ch, p, 1e-9);
    io::SolveBaselines base;
    base.c_sum = 1.0;
    base.c_mac = 0.5;
    base.c_forced = 0.0;
    base.forced_feasible = false;

    const std::string nats = io::solve_to_json(rep, base, false);
    CHECK(nats.find("\"baselines\"") != std::string::npos);
    CHECK(nats.find("\"kkt\"") != std::string::npos);
    CHECK(nats.find("rate_bits") == std::string::npos);

    const std::string bits = io::solve_to_json(rep, base, true);
    CHECK(bits.find("rate_bits") != std::string::npos);
}

TEST_CASE("ergodic CSV format") {
    std::vector<SweepRow> rows(2);
    rows[0] = {0.0, 1.5, 1.25, 1.0, 0.5, 0.01, 0.01, 0.01, 0.01, 0.25, 0};
    rows[1] = {5.0, 2.5, 2.25, 2.0, 1.5, 0.02, 0.02, 0.02, 0.02, 0.0, 1};

    std::ostringstream os;
    io::write_ergodic_csv(os, rows, false);
    const std::string text = os.str();
    CHECK(text.rfind("snr_db,c_sum,c_pa,c_mac,c_forced,se_sum,se_pa,se_mac,"
                     "se_forced,infeasible_frac,nonconverged\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);

    std::ostringstream os_bits;
    io::write_ergodic_csv(os_bits, rows, true);
    CHECK(os_bits.str().find("2.16404256133") != std::string::npos);  // 1.5 / ln 2
}

TEST_CASE("split CSV flags the meeting point") {
    std::vector<SplitRow> rows = {
        {0.25, 1.0, 0.8, 0.7, 0.0},
        {0.50, 1.0, 0.99, 0.9, 0.98},
        {0.75, 1.0, 0.7, 0.6, 0.0},
    };
    std::ostringstream os;
    io::write_split_csv(os, rows, false);
    const std::string text = os.str();
    CHECK(text.rfind("p1,c_sum,c_pa,c_mac,c_forced\n", 0) == 0);
    CHECK(text.find("# meeting point: p1=0.5") != std::string::npos);
}

TEST_CASE("fmt12 renders 12 significant digits") {
    CHECK(io::fmt12(1.0) == "1");
    CHECK(io::fmt12(0.1234567890123456) == "0.123456789012");
    CHECK(io::fmt12(1e-30) == "1e-30");
}

TEST_SUITE_END();
