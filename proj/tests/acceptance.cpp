// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits nonzero on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dmrate/channel.hpp"
#include "dmrate/checks.hpp"
#include "dmrate/keyrate.hpp"
#include "dmrate/scan.hpp"

using namespace dmrate;

namespace {

struct Outcome {
    int id;
    std::string name;
    bool passed;
    std::string detail;
};

std::vector<Outcome> outcomes;

void report(int id, std::string name, bool passed, std::string detail) {
    std::printf("%s  criterion %d: %s  [%s]\n", passed ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    outcomes.push_back({id, std::move(name), passed, std::move(detail)});
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const char* kFig3 = R"(
[channel]
distances_km = [0, 5, 10, 15, 20, 25, 50, 100]
xi = 0.01
[detector]
eta_d = 0.719
nu_el = 0.01
[protocol]
alpha = range(0.5, 0.9, 0.05)
beta = 0.95
[solver]
cutoff = 12
mode = [trusted, untrusted]
)";

const char* kFig7 = R"(
[channel]
distances_km = [50]
xi = 0.01
[detector]
eta_d = 0.552
nu_el = 0.015
[protocol]
alpha = range(0.5, 0.9, 0.05)
delta_a = range(0, 1, 0.05)
beta = 0.95
[solver]
cutoff = 12
mode = trusted
)";

// Every solver result seen by the run, for the soundness criterion.
struct Solved {
    std::string where;
    KeyRateResult r;
};
std::vector<Solved> all_solved;

std::vector<ResultRow> scan(const char* text, const std::string& tag) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = parse_config(text);
    ScanOptions opts;
    opts.on_solved = [&](std::size_t i, const KeyRateResult& r) {
        all_solved.push_back({tag + " point " + std::to_string(i), r});
    };
    auto rows = run_scan(cfg, opts);
    std::fprintf(stderr, "%s scan: %zu points in %.0f s\n", tag.c_str(), cfg.grid_size(), seconds_since(t0));
    return rows;
}

const ResultRow* find_best(const std::vector<ResultRow>& rows, Mode mode, double L, double delta = 0.0) {
    for (const auto& r : rows)
        if (r.kind == "best_alpha" && r.mode == mode && r.L_km == L && r.delta_a == delta) return &r;
    return nullptr;
}

KeyRateResult solve_fig3(double L, double alpha, int N) {
    const auto det = DetectorModel::symmetric(0.719, 0.01);
    const auto ch = ChannelModel::from_distance(L, 0.01);
    const ProtocolParams pp{alpha, 0.0, 0.95, N};
    const auto obs = observable_set(det, 0.0, N);
    const auto cs = build_constraints(simulate_statistics(ch, det, pp), obs, pp, Mode::trusted);
    const auto ec = ec_cost(discretization_distribution(ch, det, pp), pp.beta);
    return key_rate(cs, make_postprocessing_maps(obs.regions), ec);
}

void criterion1() {
    const double x = effective_excess_noise(ChannelModel::from_distance(20.0, 0.01), DetectorModel::symmetric(0.719, 0.01));
    report(1, "effective excess noise at 20 km", std::abs(x - 0.045) <= 1e-3, fmt("xi_eff = %.6f, target 0.045 +- 0.001", x));
}

void criteria2and4(const std::vector<ResultRow>& rows) {
    bool collapse = false;
    double collapse_at = -1.0;
    for (double L : {0.0, 5.0, 10.0, 15.0, 20.0, 25.0}) {
        const auto* b = find_best(rows, Mode::untrusted, L);
        bool block_ok = b != nullptr;
        for (const auto& r : rows)
            if (r.kind == "grid" && r.mode == Mode::untrusted && r.L_km == L) block_ok = block_ok && r.converged();
        if (block_ok && b->rate == 0.0) {
            collapse = true;
            collapse_at = L;
            break;
        }
    }
    const auto* far = find_best(rows, Mode::trusted, 100.0);
    const bool survive = far && far->converged() && far->rate > 0.0;
    std::string detail = collapse ? fmt("untrusted rate 0 from L = %g km", collapse_at) : "untrusted rate positive up to 25 km";
    detail += far ? fmt("; trusted 100 km rate %.4e (alpha %.2f, %s)", far->rate, far->alpha, far->status.c_str())
                  : "; trusted 100 km row missing";
    report(2, "untrusted collapse vs trusted survival", collapse && survive, detail);

    bool ok = true;
    std::string d;
    for (double L : {20.0, 50.0}) {
        const auto* b = find_best(rows, Mode::trusted, L);
        const bool in = b && b->converged() && b->alpha >= 0.65 - 1e-12 && b->alpha <= 0.85 + 1e-12;
        ok = ok && in;
        d += b ? fmt("%sL = %g km: best alpha %.2f, rate %.4e", d.empty() ? "" : "; ", L, b->alpha, b->rate) : "row missing";
    }
    report(4, "optimal amplitude in [0.65, 0.85]", ok, d);
}

void criterion3(const std::vector<ResultRow>& rows) {
    std::vector<const ResultRow*> curve;
    bool all_ok = true;
    for (const auto& r : rows) {
        if (r.kind == "best_alpha") curve.push_back(&r);
        else all_ok = all_ok && r.converged();
    }
    if (curve.empty()) return report(3, "postselection optimum", false, "no rows");
    const auto* best = *std::max_element(curve.begin(), curve.end(),
                                         [](const ResultRow* a, const ResultRow* b) { return a->rate < b->rate; });
    const double r0 = curve.front()->rate;
    const double gain = r0 > 0.0 ? best->rate / r0 - 1.0 : 0.0;
    const bool ok = all_ok && best->delta_a >= 0.5 - 1e-12 && best->delta_a <= 0.7 + 1e-12 && gain >= 0.03 &&
                    gain <= 0.10 && best->p_pass >= 0.65 && best->p_pass <= 0.85;
    std::string detail = fmt("argmax delta_a = %.2f (alpha %.2f), gain %.2f%% over delta_a = 0, p_pass %.3f", best->delta_a,
                             best->alpha, 100.0 * gain, best->p_pass);
    if (!all_ok) detail += "; some points did not converge";
    report(3, "postselection optimum at 50 km", ok, detail);
    std::fprintf(stderr, "  delta_a  alpha  rate          p_pass\n");
    for (const auto* r : curve) std::fprintf(stderr, "  %.2f     %.2f   %.6e  %.4f\n", r->delta_a, r->alpha, r->rate, r->p_pass);
}

void criterion5() {
    const auto checks = oracle_checks(50, 2024);
    std::string d;
    for (const auto& c : checks) d += fmt("%s%s %.1e", d.empty() ? "" : "; ", c.name.c_str(), c.value);
    report(5, "oracle equivalence", all_passed(checks), d);
}

void criterion6() {
    double worst = 0.0;
    for (int N : {6, 12, 20}) {
        const auto ops = quadrature_operators(N);
        const Matrix I = Matrix::Identity(N + 1, N + 1);
        for (const auto& det : {DetectorModel::ideal(), DetectorModel::symmetric(1.0 - 1e-13, 1e-13)}) {
            const auto m = moment_observables(det, N);
            for (const auto& [a, b] : {std::pair{m.fq.matrix(), Matrix(ops.q.matrix())},
                                       std::pair{m.fp.matrix(), Matrix(ops.p.matrix())},
                                       std::pair{m.sq.matrix(), Matrix(ops.n.matrix() + ops.d.matrix() / 2.0 + I)},
                                       std::pair{m.sp.matrix(), Matrix(ops.n.matrix() - ops.d.matrix() / 2.0 + I)}})
                worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
        }
    }
    report(6, "ideal-detector limits of the moment observables", worst <= 1e-10, fmt("max entry error %.2e, tol 1e-10", worst));
}

void criterion7() {
    int converged = 0, bad = 0;
    double worst_gap = -1e300, worst_res = 0.0, worst_eig = 1e300;
    std::string first_bad;
    for (const auto& s : all_solved) {
        if (!s.r.converged()) continue;
        ++converged;
        worst_gap = std::max(worst_gap, s.r.lower_bound - s.r.primal_value);
        worst_res = std::max(worst_res, s.r.constraint_residual);
        worst_eig = std::min(worst_eig, s.r.min_eigenvalue);
        const bool ok = s.r.lower_bound <= s.r.primal_value + 1e-8 && s.r.constraint_residual <= 1e-7 &&
                        s.r.min_eigenvalue >= -1e-9;
        if (!ok && bad++ == 0) first_bad = s.where;
    }

    // Finite differences of the objective along feasible directions at 20 km, N = 12.
    const auto det = DetectorModel::symmetric(0.719, 0.01);
    const ProtocolParams pp{0.75, 0.0, 0.95, 12};
    const auto obs = observable_set(det, 0.0, pp.cutoff);
    const auto cs = build_constraints(simulate_statistics(ChannelModel::from_distance(20.0, 0.01), det, pp), obs, pp,
                                      Mode::trusted);
    const auto maps = make_postprocessing_maps(obs.regions);
    const auto sys = cs.system();
    const auto gram = sys.gram().ldlt();
    const Matrix center = feasible_point(cs);
    const double cmin = linalg::min_eigenvalue(center);
    std::mt19937_64 rng(77);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.1, 0.5);
    auto random_null = [&] {
        Matrix h(cs.dim(), cs.dim());
        for (int i = 0; i < h.rows(); ++i)
            for (int j = 0; j < h.cols(); ++j) h(i, j) = cplx(nd(rng), nd(rng));
        h = (h + h.adjoint()).eval() / 2.0;
        h -= sys.adjoint(gram.solve(sys.apply(h)));
        return Matrix(h / h.norm());
    };
    double worst_fd = 0.0;
    int fd_ok = 0;
    for (int t = 0; t < 10; ++t) {
        const Matrix h = random_null();
        const double spread = Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues().cwiseAbs().maxCoeff();
        const Matrix rho = linalg::hermitian_part(center + ud(rng) * cmin / spread * h);
        const Matrix dir = random_null();
        const double step = 1e-3 * linalg::min_eigenvalue(rho);
        const double fd = (objective(FockOperator::hermitian(rho + step * dir), maps) -
                           objective(FockOperator::hermitian(rho - step * dir), maps)) /
                          (2 * step);
        const double an = (gradient(FockOperator::hermitian(rho), maps).matrix() * dir).trace().real();
        const double rel = std::abs(fd - an) / std::abs(an);
        worst_fd = std::max(worst_fd, rel);
        if (rel <= 1e-4 && cs.max_residual(rho) <= 1e-10 && linalg::min_eigenvalue(rho) > 0) ++fd_ok;
    }

    std::string d = fmt("%d converged solves, max(lb - primal) %.2e, max residual %.2e, min eigenvalue %.2e; "
                        "gradient FD %d/10, worst relative %.2e",
                        converged, worst_gap, worst_res, worst_eig, fd_ok, worst_fd);
    if (bad) d += fmt("; %d violations, first at %s", bad, first_bad.c_str());
    report(7, "solver soundness", converged > 0 && bad == 0 && fd_ok == 10, d);
}

void criterion8(double alpha) {
    const auto r12 = solve_fig3(20.0, alpha, 12), r14 = solve_fig3(20.0, alpha, 14);
    all_solved.push_back({"cutoff 12 at 20 km", r12});
    all_solved.push_back({"cutoff 14 at 20 km", r14});
    const double diff = std::abs(r12.rate - r14.rate);
    report(8, "cutoff stability at 20 km", r12.converged() && r14.converged() && diff < 1e-4,
           fmt("alpha %.2f: R(12) = %.8e, R(14) = %.8e, |diff| = %.2e", alpha, r12.rate, r14.rate, diff));
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion1();
    criterion5();
    criterion6();

    const auto fig3 = scan(kFig3, "fig3");
    criteria2and4(fig3);
    const auto* b20 = find_best(fig3, Mode::trusted, 20.0);
    criterion8(b20 ? b20->alpha : 0.75);

    criterion3(scan(kFig7, "fig7"));
    criterion7();

    std::sort(outcomes.begin(), outcomes.end(), [](const Outcome& a, const Outcome& b) { return a.id < b.id; });
    int failed = 0;
    std::printf("\nsummary (%.0f s):\n", seconds_since(t0));
    for (const auto& o : outcomes) {
        std::printf("%s  criterion %d: %s\n", o.passed ? "PASS" : "FAIL", o.id, o.name.c_str());
        failed += !o.passed;
    }
    std::printf("%d of %zu criteria passed\n", int(outcomes.size()) - failed, outcomes.size());
    return failed ? 1 : 0;
}
