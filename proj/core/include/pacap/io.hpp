// io.hpp — file formats: channel JSON, solve-report JSON, and the CSV
// emission used by the sweep commands. JSON doubles are written with enough
// digits to round-trip bit-exactly; CSV floats carry 12 significant digits.

#pragma once

#include "pacap/baselines.hpp"
#include "pacap/channel.hpp"
#include "pacap/ergodic.hpp"
#include "pacap/perantenna.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pacap::io {

// {"m": int, "n": int, "entries": [[re, im], ...]} row-major.
std::string channel_to_json(const ChannelMatrix& ch);
ChannelMatrix channel_from_json(const std::string& text);  // throws InputParse
ChannelMatrix load_channel(const std::string& path);       // throws InputParse
void save_channel(const ChannelMatrix& ch, const std::string& path);

// {"rate_nats", "gap", "iterations", "k_dropped", "Q", "D_check", "converged"}
// with Q as row-major [re, im] pairs.
std::string report_to_json(const SolveReport& rep);
SolveReport report_from_json(const std::string& text);  // throws InputParse

// Extra sections appended to the solve JSON by the CLI.
struct SolveBaselines {
    double c_sum{};
    double c_mac{};
    double c_forced{};
    bool forced_feasible{};
};

std::string solve_to_json(const SolveReport& rep, const SolveBaselines& baselines,
                          bool bits);

// Header then one row per SNR point:
// snr_db,c_sum,c_pa,c_mac,c_forced,se_sum,se_pa,se_mac,se_forced,infeasible_frac,nonconverged
void write_ergodic_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool bits);

// Header then one row per split point: p1,c_sum,c_pa,c_mac,c_forced followed
// by a trailing comment line flagging the curve meeting point.
void write_split_csv(std::ostream& os, const std::vector<SplitRow>& rows, bool bits);

// %.12g formatting used for all CSV floats.
std::string fmt12(double x);

}  // namespace pacap::io
