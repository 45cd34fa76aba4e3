#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dmrate/config.hpp"

namespace dmrate {

struct ResultRow {
    double L_km = 0.0;  // NaN when the grid is given as transmittances
    double eta_t = 0.0;
    double xi = 0.0;
    double eta_d = 0.0;  // arm 1 for asymmetric detectors
    double nu_el = 0.0;
    double alpha = 0.0;
    double delta_a = 0.0;
    Mode mode = Mode::trusted;
    double primal = 0.0;
    double lower_bound = 0.0;
    double delta_ec = 0.0;
    double p_pass = 0.0;
    double rate = 0.0;
    int iterations = 0;
    double residual = 0.0;
    double wall_time_s = 0.0;
    // Solver status, or infeasible / numerical_failure / error when the point could not be solved.
    std::string status;
    // "grid" for solved points, "best_alpha" for the per-(mode, channel, delta_a) argmax over alpha.
    std::string kind = "grid";

    bool converged() const { return status == "converged" || status == "zero_rate"; }
    bool operator==(const ResultRow&) const = default;
};

struct ScanOptions {
    int jobs = 0;          // 0: one worker per hardware thread
    bool timings = false;  // record wall_time_s; off keeps output byte-identical between runs
    std::function<void(const ResultRow&, std::size_t done, std::size_t total)> progress;
    // Full solver output per grid index, for callers that inspect the optimal state. Not called on
    // points that threw.
    std::function<void(std::size_t index, const KeyRateResult&)> on_solved;
};

// Rows in grid order (mode, channel point, delta_a, alpha), each alpha block followed by its
// best-alpha row when enabled. Per-point failures are recorded in the status column.
std::vector<ResultRow> run_scan(const ScanConfig& cfg, const ScanOptions& opts = {});

bool all_converged(const std::vector<ResultRow>& rows);

extern const char* const kCsvHeader;
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(std::istream& in);
void write_pretty(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace dmrate
