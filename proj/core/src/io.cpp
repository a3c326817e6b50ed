#include "pacap/io.hpp"

#include "pacap/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace pacap::io {

namespace {

using nlohmann::json;

json pairs_from_matrix(const CMat& a) {
    json entries = json::array();
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            entries.push_back(json::array({a(i, j).real(), a(i, j).imag()}));
        }
    }
    return entries;
}

CMat matrix_from_pairs(const json& entries, Index rows, Index cols, const char* who) {
    if (!entries.is_array() || static_cast<Index>(entries.size()) != rows * cols) {
        throw InputParse(std::string(who) + ": entry count does not match dimensions");
    }
    CMat a(rows, cols);
    Index k = 0;
    for (const auto& e : entries) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
            throw InputParse(std::string(who) + ": entries must be [re, im] pairs");
        }
        a(k / cols, k % cols) = Complex(e[0].get<double>(), e[1].get<double>());
        ++k;
    }
    return a;
}

json parse(const std::string& text, const char* who) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw InputParse(std::string(who) + ": malformed JSON");
    }
    return j;
}

}  // namespace

std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::string channel_to_json(const ChannelMatrix& ch) {
    json j;
    j["m"] = ch.rx();
    j["n"] = ch.tx();
    j["entries"] = pairs_from_matrix(ch.h());
    return j.dump();
}

ChannelMatrix channel_from_json(const std::string& text) {
    const json j = parse(text, "channel_from_json");
    if (!j.contains("m") || !j.contains("n") || !j.contains("entries") ||
        !j["m"].is_number_integer() || !j["n"].is_number_integer()) {
        throw InputParse("channel_from_json: expected keys m, n, entries");
    }
    const auto m = j["m"].get<Index>();
    const auto n = j["n"].get<Index>();
    if (m < 1 || n < 1) {
        throw InputParse("channel_from_json: dimensions must be at least 1");
    }
    CMat h = matrix_from_pairs(j["entries"], m, n, "channel_from_json");
    if (!all_finite(h)) {
        throw InputParse("channel_from_json: entries must be finite");
    }
    return ChannelMatrix(std::move(h));
}

ChannelMatrix load_channel(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputParse("load_channel: cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return channel_from_json(buf.str());
}

void save_channel(const ChannelMatrix& ch, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw InputParse("save_channel: cannot open " + path);
    }
    out << channel_to_json(ch) << '\n';
}

std::string report_to_json(const SolveReport& rep) {
    json j;
    j["rate_nats"] = rep.rate;
    j["gap"] = rep.gap;
    j["iterations"] = rep.iterations;
    j["k_dropped"] = rep.dropped_modes;
    j["Q"] = pairs_from_matrix(rep.q.q);
    j["D_check"] = std::vector<double>(rep.d_check.data(),
                                       rep.d_check.data() + rep.d_check.size());
    j["converged"] = rep.converged;
    return j.dump();
}

SolveReport report_from_json(const std::string& text) {
    const json j = parse(text, "report_from_json");
    for (const char* key : {"rate_nats", "gap", "iterations", "k_dropped", "Q",
                            "D_check", "converged"}) {
        if (!j.contains(key)) {
            throw InputParse(std::string("report_from_json: missing key ") + key);
        }
    }
    SolveReport rep;
    rep.rate = j["rate_nats"].get<double>();
    rep.gap = j["gap"].get<double>();
    rep.iterations = j["iterations"].get<long>();
    rep.dropped_modes = j["k_dropped"].get<Index>();
    rep.converged = j["converged"].get<bool>();
    const auto dvec = j["D_check"].get<std::vector<double>>();
    if (dvec.empty()) {
        throw InputParse("report_from_json: D_check must not be empty");
    }
    rep.d_check = Eigen::Map<const RVec>(dvec.data(), static_cast<Index>(dvec.size()));
    const Index n = rep.d_check.size();
    rep.q = InputCovariance(matrix_from_pairs(j["Q"], n, n, "report_from_json"));
    return rep;
}

std::string solve_to_json(const SolveReport& rep, const SolveBaselines& baselines,
                          bool bits) {
    json j = json::parse(report_to_json(rep));
    json b;
    b["c_sum"] = baselines.c_sum;
    b["c_mac"] = baselines.c_mac;
    b["c_forced"] = baselines.c_forced;
    b["forced_feasible"] = baselines.forced_feasible;
    j["baselines"] = b;
    if (rep.kkt) {
        json k;
        k["stationarity_norm"] = rep.kkt->stationarity_norm;
        k["slackness_norm"] = rep.kkt->slackness_norm;
        k["psd_violation"] = rep.kkt->psd_violation;
        k["mode_split_residual"] = rep.kkt->mode_split_residual;
        j["kkt"] = k;
    }
    if (bits) {
        constexpr double to_bits = 1.4426950408889634074;  // 1/ln 2
        j["rate_bits"] = rep.rate * to_bits;
        j["baselines"]["c_sum_bits"] = baselines.c_sum * to_bits;
        j["baselines"]["c_mac_bits"] = baselines.c_mac * to_bits;
        j["baselines"]["c_forced_bits"] = baselines.c_forced * to_bits;
    }
    return j.dump(2);
}

void write_ergodic_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool bits) {
    const double scale = bits ? 1.4426950408889634074 : 1.0;
    os << "snr_db,c_sum,c_pa,c_mac,c_forced,se_sum,se_pa,se_mac,se_forced,"
          "infeasible_frac,nonconverged\n";
    for (const auto& r : rows) {
        os << fmt12(r.snr_db) << ',' << fmt12(r.c_sum * scale) << ','
           << fmt12(r.c_pa * scale) << ',' << fmt12(r.c_mac * scale) << ','
           << fmt12(r.c_forced * scale) << ',' << fmt12(r.se_sum * scale) << ','
           << fmt12(r.se_pa * scale) << ',' << fmt12(r.se_mac * scale) << ','
           << fmt12(r.se_forced * scale) << ',' << fmt12(r.infeasible_fraction)
           << ',' << r.nonconverged << '\n';
    }
}

void write_split_csv(std::ostream& os, const std::vector<SplitRow>& rows, bool bits) {
    const double scale = bits ? 1.4426950408889634074 : 1.0;
    os << "p1,c_sum,c_pa,c_mac,c_forced\n";
    size_t meet = 0;
    double meet_dist = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        os << fmt12(r.p1) << ',' << fmt12(r.c_sum * scale) << ','
           << fmt12(r.c_pa * scale) << ',' << fmt12(r.c_mac * scale) << ','
           << fmt12(r.c_forced * scale) << '\n';
        const double dist = std::max({std::abs(r.c_sum - r.c_pa),
                                      std::abs(r.c_sum - r.c_forced),
                                      std::abs(r.c_pa - r.c_forced)});
        if (dist < meet_dist) {
            meet_dist = dist;
            meet = i;
        }
    }
    if (!rows.empty()) {
        os << "# meeting point: p1=" << fmt12(rows[meet].p1)
           << " max_curve_distance=" << fmt12(meet_dist * scale) << '\n';
    }
}

}  // namespace pacap::io
