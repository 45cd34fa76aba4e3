#include "dmrate/scan.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "dmrate/channel.hpp"
#include "dmrate/errors.hpp"

namespace dmrate {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

struct GridPoint {
    Mode mode;
    std::size_t channel;
    double delta_a;
    double alpha;
};

std::vector<GridPoint> grid_points(const ScanConfig& cfg) {
    std::vector<GridPoint> pts;
    const std::size_t nch = cfg.distances_km.size() + cfg.eta_t.size();
    for (Mode m : cfg.modes)
        for (std::size_t c = 0; c < nch; ++c)
            for (double d : cfg.deltas)
                for (double a : cfg.alphas) pts.push_back({m, c, d, a});
    return pts;
}

// Channel-independent operators for one (detector, delta_a, N, mode). Untrusted mode attributes the
// detector noise to the channel, so its observables come from an ideal detector.
struct Operators {
    ObservableSet obs;
    PostprocessingMaps maps;
};

class OperatorCache {
public:
    const Operators& get(const DetectorModel& det, double delta_a, int N, Mode mode) {
        const DetectorModel eff = mode == Mode::trusted ? det : DetectorModel::ideal();
        const auto key = std::make_tuple(eff.eta1, eff.eta2, eff.nu1, eff.nu2, delta_a, N);
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            auto obs = observable_set(eff, delta_a, N);
            auto maps = make_postprocessing_maps(obs.regions);
            it = cache_.emplace(key, Operators{std::move(obs), std::move(maps)}).first;
        }
        return it->second;
    }

private:
    std::map<std::tuple<double, double, double, double, double, int>, Operators> cache_;
};

ResultRow solve_point(const ScanConfig& cfg, const GridPoint& gp, OperatorCache& cache, bool timings,
                      const std::function<void(const KeyRateResult&)>& sink) {
    const auto t0 = std::chrono::steady_clock::now();
    const bool by_distance = !cfg.distances_km.empty();
    const ChannelModel ch = by_distance ? ChannelModel::from_distance(cfg.distances_km[gp.channel], cfg.xi)
                                        : ChannelModel::from_transmittance(cfg.eta_t[gp.channel], cfg.xi);
    ResultRow row;
    row.L_km = by_distance ? cfg.distances_km[gp.channel] : kNaN;
    row.eta_t = ch.eta_t;
    row.xi = cfg.xi;
    row.eta_d = cfg.detector.eta1;
    row.nu_el = cfg.detector.nu1;
    row.alpha = gp.alpha;
    row.delta_a = gp.delta_a;
    row.mode = gp.mode;
    try {
        const ProtocolParams pp{gp.alpha, gp.delta_a, cfg.beta, cfg.cutoff};
        const auto& ops = cache.get(cfg.detector, gp.delta_a, cfg.cutoff, gp.mode);
        const auto cs = build_constraints(simulate_statistics(ch, cfg.detector, pp), ops.obs, pp, gp.mode);
        const auto ec = ec_cost(discretization_distribution(ch, cfg.detector, pp), cfg.beta);
        SolverOptions so;
        so.gap_tol = cfg.gap_tol;
        so.max_iters = cfg.max_iters;
        const auto r = key_rate(cs, ops.maps, ec, so);
        row.primal = r.primal_value;
        row.lower_bound = r.lower_bound;
        row.delta_ec = r.delta_ec;
        row.p_pass = r.p_pass;
        row.rate = r.rate;
        row.iterations = r.iterations;
        row.residual = r.constraint_residual;
        row.status = to_string(r.status);
        if (sink) sink(r);
    } catch (const InfeasibleConstraints&) {
        row.status = "infeasible";
    } catch (const NumericalFailure&) {
        row.status = "numerical_failure";
    } catch (const std::exception&) {
        row.status = "error";
    }
    if (row.status != "converged" && row.status != "zero_rate" && row.status != "max_iterations" &&
        row.status != "stalled") {
        row.primal = row.lower_bound = row.delta_ec = row.p_pass = row.residual = kNaN;
        row.rate = 0.0;
    }
    if (timings) row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double parse_number(const std::string& s) {
    if (s == "nan") return kNaN;
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
}

}  // namespace

std::vector<ResultRow> run_scan(const ScanConfig& cfg, const ScanOptions& opts) {
    cfg.validate();
    const auto pts = grid_points(cfg);
    std::vector<ResultRow> solved(pts.size());

    unsigned jobs = opts.jobs > 0 ? unsigned(opts.jobs) : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, unsigned(pts.size()));
    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex report;
    auto worker = [&] {
        OperatorCache cache;
        for (std::size_t i; (i = next.fetch_add(1)) < pts.size();) {
            std::function<void(const KeyRateResult&)> sink;
            if (opts.on_solved)
                sink = [&](const KeyRateResult& r) {
                    std::lock_guard lock(report);
                    opts.on_solved(i, r);
                };
            solved[i] = solve_point(cfg, pts[i], cache, opts.timings, sink);
            if (opts.progress) {
                std::lock_guard lock(report);
                opts.progress(solved[i], ++done, pts.size());
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    std::vector<ResultRow> rows;
    const std::size_t block = cfg.alphas.size();
    for (std::size_t b = 0; b < solved.size(); b += block) {
        const ResultRow* best = nullptr;
        for (std::size_t i = b; i < b + block; ++i) {
            rows.push_back(solved[i]);
            if (!best || solved[i].rate > best->rate) best = &solved[i];
        }
        if (cfg.best_alpha) {
            rows.push_back(*best);
            rows.back().kind = "best_alpha";
        }
    }
    return rows;
}

bool all_converged(const std::vector<ResultRow>& rows) {
    for (const auto& r : rows)
        if (!r.converged()) return false;
    return true;
}

const char* const kCsvHeader =
    "L_km,eta_t,xi,eta_d,nu_el,alpha,delta_a,mode,primal,lower_bound,delta_EC,p_pass,rate,iterations,residual,"
    "wall_time_s,status,kind";

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        for (double v : {r.L_km, r.eta_t, r.xi, r.eta_d, r.nu_el, r.alpha, r.delta_a}) out << format_number(v) << ',';
        out << to_string(r.mode) << ',';
        for (double v : {r.primal, r.lower_bound, r.delta_ec, r.p_pass, r.rate}) out << format_number(v) << ',';
        out << r.iterations << ',' << format_number(r.residual) << ',' << format_number(r.wall_time_s) << ','
            << r.status << ',' << r.kind << '\n';
    }
}

std::vector<ResultRow> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("parse_csv: missing or unexpected header");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 18) throw std::invalid_argument("parse_csv: expected 18 fields, got " + std::to_string(f.size()));
        ResultRow r;
        double* head[] = {&r.L_km, &r.eta_t, &r.xi, &r.eta_d, &r.nu_el, &r.alpha, &r.delta_a};
        for (int i = 0; i < 7; ++i) *head[i] = parse_number(f[i]);
        r.mode = mode_from_string(f[7]);
        double* mid[] = {&r.primal, &r.lower_bound, &r.delta_ec, &r.p_pass, &r.rate};
        for (int i = 0; i < 5; ++i) *mid[i] = parse_number(f[8 + i]);
        r.iterations = std::stoi(f[13]);
        r.residual = parse_number(f[14]);
        r.wall_time_s = parse_number(f[15]);
        r.status = f[16];
        r.kind = f[17];
        rows.push_back(r);
    }
    return rows;
}

void write_pretty(std::ostream& out, const std::vector<ResultRow>& rows) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-10s %8s %8s %6s %7s %7s %10s %5s  %-15s %s\n", "mode", "L_km", "eta_t", "alpha",
                  "delta_a", "p_pass", "rate", "iter", "status", "kind");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-10s %8.2f %8.5f %6.3f %7.3f %7.4f %10.4f %5d  %-15s %s\n", to_string(r.mode),
                      r.L_km, r.eta_t, r.alpha, r.delta_a, r.p_pass, r.rate, r.iterations, r.status.c_str(),
                      r.kind.c_str());
        out << buf;
    }
    out << "rate in bits per pulse\n";
}

}  // namespace dmrate
