#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dmrate/detector.hpp"
#include "dmrate/keyrate.hpp"

namespace dmrate {

// Grid definition for a batch of key-rate evaluations. See configs/README.md for the file format.
struct ScanConfig {
    // Exactly one of the two channel grids is nonempty.
    std::vector<double> distances_km;
    std::vector<double> eta_t;
    double xi = 0.01;

    DetectorModel detector = DetectorModel::symmetric(0.719, 0.01);

    std::vector<double> alphas = default_alpha_grid();
    std::vector<double> deltas{0.0};
    double beta = 0.95;

    int cutoff = 12;
    double gap_tol = 1e-6;
    int max_iters = 300;
    std::vector<Mode> modes{Mode::trusted};

    std::string output;  // empty: standard output
    std::string format = "csv";
    bool best_alpha = true;

    // 0.5 to 0.9 in steps of 0.05.
    static std::vector<double> default_alpha_grid();
    // Throws ConfigError.
    void validate() const;
    std::size_t grid_size() const;
};

// Inclusive arithmetic progression, values rounded to 12 significant digits.
std::vector<double> inclusive_range(double start, double stop, double step);

ScanConfig parse_config(std::string_view text);
ScanConfig load_config(const std::string& path);

}  // namespace dmrate
