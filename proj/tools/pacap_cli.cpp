// pacap command-line front end: single-channel solves, power-split and
// ergodic sweeps, and the verification battery. Data goes to stdout or the
// --out file; diagnostics go to stderr. Exit codes: 0 success, 1 input error,
// 2 solver non-convergence.

#include "pacap/acceptance.hpp"
#include "pacap/baselines.hpp"
#include "pacap/ergodic.hpp"
#include "pacap/errors.hpp"
#include "pacap/io.hpp"
#include "pacap/oracle.hpp"
#include "pacap/perantenna.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace pacap;

std::vector<double> parse_csv_doubles(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t pos = 0;
            const double v = std::stod(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw InputParse(std::string(what) + ": cannot parse number '" + item + "'");
        }
    }
    if (out.empty()) {
        throw InputParse(std::string(what) + ": empty list");
    }
    return out;
}

std::vector<double> parse_snr_range(const std::string& text) {
    double start = 0, step = 0, stop = 0;
    char c1 = 0, c2 = 0;
    std::stringstream ss(text);
    if (!(ss >> start >> c1 >> step >> c2 >> stop) || c1 != ':' || c2 != ':' ||
        !(ss >> std::ws).eof()) {
        throw InputParse("--snr: expected start:step:stop, got '" + text + "'");
    }
    if (step <= 0.0 || stop < start) {
        throw InputParse("--snr: need step > 0 and stop >= start");
    }
    std::vector<double> grid;
    for (long i = 0;; ++i) {
        const double v = start + static_cast<double>(i) * step;
        if (v > stop + 1e-9 * step) break;
        grid.push_back(v);
    }
    return grid;
}

// Stream sink: --out path or stdout.
class OutputSink {
  public:
    explicit OutputSink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) {
                throw InputParse("cannot open output file " + path);
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

int cmd_solve(const std::string& channel_path, const std::string& power_list,
              double eps, long max_iter, const std::string& out_path, bool bits) {
    const ChannelMatrix ch = io::load_channel(channel_path);
    const auto powers = parse_csv_doubles(power_list, "--power");
    if (static_cast<Index>(powers.size()) != ch.tx()) {
        std::ostringstream msg;
        msg << "--power: got " << powers.size() << " budgets for " << ch.tx()
            << " transmit antennas";
        throw InputParse(msg.str());
    }
    const PowerConstraint p(
        Eigen::Map<const RVec>(powers.data(), static_cast<Index>(powers.size())));

    SolveOptions opts;
    opts.max_iter = max_iter;
    const SolveReport rep = opt_cov(ch, p, eps, opts);

    io::SolveBaselines base;
    base.c_sum = p.total() > 0.0 ? rate(ch, waterfill_sum(ch, p.total()).q) : 0.0;
    base.c_mac = mac_rate(ch, p);
    const ForcedEigenbeamResult forced = forced_eigenbeam(ch, p);
    base.c_forced = forced.rate;
    base.forced_feasible = forced.feasible;

    OutputSink sink(out_path);
    sink.stream() << io::solve_to_json(rep, base, bits) << '\n';

    if (!rep.converged) {
        std::cerr << "solver hit the iteration cap; best iterate reported (gap "
                  << rep.gap << ")\n";
        return 2;
    }
    return 0;
}

int cmd_sweep_split(const std::string& channel_path, double total_power, long grid,
                    double eps, const std::string& out_path, bool bits) {
    const ChannelMatrix ch = io::load_channel(channel_path);
    const auto rows = power_split_sweep(ch, total_power, grid, eps);
    OutputSink sink(out_path);
    io::write_split_csv(sink.stream(), rows, bits);
    return 0;
}

int cmd_ergodic(int m, int n, const std::string& profile, const std::string& snr,
                long samples, std::uint64_t seed, double eps,
                const std::string& out_path, bool bits) {
    ErgodicConfig cfg;
    cfg.m = m;
    cfg.n = n;
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.eps = eps;
    cfg.snr_db_grid = parse_snr_range(snr);
    if (profile == "equal") {
        cfg.profile = ConstraintProfile::equal;
    } else if (profile == "k2") {
        cfg.profile = ConstraintProfile::proportional_k_squared;
    } else {
        cfg.profile = ConstraintProfile::explicit_weights;
        cfg.weights = parse_csv_doubles(profile, "--profile");
    }

    const auto rows = sweep(cfg);
    OutputSink sink(out_path);
    io::write_ergodic_csv(sink.stream(), rows, bits);
    return 0;
}

int cmd_verify(bool quick, std::uint64_t seed) {
    AcceptanceOptions opts;
    opts.quick = quick;
    opts.seed = seed;
    opts.progress = &std::cerr;
    const auto results = run_acceptance(opts);
    print_results(std::cout, results);
    return all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MIMO capacity with per-antenna power constraints"};
    app.require_subcommand(1);

    std::string channel_path, power_list, out_path, profile = "equal", snr = "-5:5:20";
    double eps = 1e-8, total_power = 1.0;
    long grid = 101, samples = 200, max_iter = 10000;
    int m = 2, n = 2;
    std::uint64_t seed = 1;
    bool bits = false, quick = false;

    auto* solve = app.add_subcommand("solve", "optimal covariance for one channel");
    solve->add_option("--channel", channel_path, "channel JSON file")->required();
    solve->add_option("--power", power_list, "per-antenna budgets, comma separated")
        ->required();
    solve->add_option("--eps", eps, "duality-gap stopping tolerance");
    solve->add_option("--max-iter", max_iter, "dual iteration cap");
    solve->add_option("--out", out_path, "output file (default stdout)");
    solve->add_flag("--bits", bits, "report rates in bits as well");

    auto* split = app.add_subcommand("sweep-split", "two-antenna power-split sweep");
    split->add_option("--channel", channel_path, "channel JSON file")->required();
    split->add_option("--total-power", total_power, "total power to split");
    split->add_option("--grid", grid, "number of interior split points");
    split->add_option("--eps", eps, "solver tolerance");
    split->add_option("--out", out_path, "output CSV file (default stdout)");
    split->add_flag("--bits", bits, "emit rate columns in bits");

    auto* erg = app.add_subcommand("ergodic", "Rayleigh ergodic-capacity sweep");
    erg->add_option("--m", m, "receive antennas")->required();
    erg->add_option("--n", n, "transmit antennas")->required();
    erg->add_option("--profile", profile, "equal | k2 | comma-separated weights");
    erg->add_option("--snr", snr, "SNR grid in dB as start:step:stop");
    erg->add_option("--samples", samples, "channel draws per SNR point");
    erg->add_option("--seed", seed, "RNG seed");
    erg->add_option("--eps", eps, "solver tolerance");
    erg->add_option("--out", out_path, "output CSV file (default stdout)");
    erg->add_flag("--bits", bits, "emit rate columns in bits");

    auto* verify = app.add_subcommand("verify", "run the verification battery");
    verify->add_flag("--quick", quick, "reduced sample counts (< 60 s)");
    verify->add_option("--seed", seed, "battery seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (app.got_subcommand(solve)) {
            return cmd_solve(channel_path, power_list, eps, max_iter, out_path, bits);
        }
        if (app.got_subcommand(split)) {
            return cmd_sweep_split(channel_path, total_power, grid, eps, out_path, bits);
        }
        if (app.got_subcommand(erg)) {
            return cmd_ergodic(m, n, profile, snr, samples, seed, eps, out_path, bits);
        }
        if (app.got_subcommand(verify)) {
            return cmd_verify(quick, seed);
        }
    } catch (const RankDeficient& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
