#include "dmrate/keyrate.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

#include "dmrate/errors.hpp"

namespace dmrate {

namespace {
const double kLn2 = std::log(2.0);
}

const char* to_string(Mode m) { return m == Mode::trusted ? "trusted" : "untrusted"; }

Mode mode_from_string(const std::string& s) {
    if (s == "trusted") return Mode::trusted;
    if (s == "untrusted") return Mode::untrusted;
    throw std::invalid_argument("unknown mode '" + s + "' (expected trusted or untrusted)");
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::zero_rate: return "zero_rate";
        case SolveStatus::max_iterations: return "max_iterations";
        case SolveStatus::stalled: return "stalled";
    }
    return "unknown";
}

Eigen::Matrix4cd signal_gram(const ProtocolParams& pp) {
    Eigen::Matrix4cd g;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            g(i, j) = std::sqrt(ProtocolParams::priors[i] * ProtocolParams::priors[j]) *
                      coherent_overlap(pp.signal(i), pp.signal(j));
    return g;
}

SeparableSystem ConstraintSet::system() const {
    std::vector<SeparableObservable> obs;
    obs.reserve(constraints.size());
    for (const auto& c : constraints) obs.push_back(c.op);
    return SeparableSystem(4, mode_dim(), std::move(obs));
}

Eigen::VectorXd ConstraintSet::values() const {
    Eigen::VectorXd b(constraints.size());
    for (std::size_t i = 0; i < constraints.size(); ++i) b[i] = constraints[i].value;
    return b;
}

double ConstraintSet::max_residual(const Matrix& rho) const {
    const auto sys = system();
    double worst = (sys.apply(rho) - values()).cwiseAbs().maxCoeff();
    worst = std::max(worst, std::abs(rho.trace().real() - trace.value));
    return worst;
}

ConstraintSet ConstraintSet::without_moments(const std::vector<int>& drop) const {
    ConstraintSet out = *this;
    out.constraints.clear();
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        bool skip = false;
        for (int d : drop) skip = skip || (i < 16 && static_cast<int>(i) == d);
        if (!skip) out.constraints.push_back(constraints[i]);
    }
    return out;
}

ConstraintSet build_constraints(const SimulatedStatistics& stats, const ObservableSet& obs, const ProtocolParams& pp,
                                Mode mode) {
    pp.validate();
    const int d = pp.cutoff + 1;
    for (int k = 0; k < 4; ++k)
        if (obs.moments[k].dim() != d || obs.regions.R[k].dim() != d)
            throw std::invalid_argument("build_constraints: observable dimension does not match the cutoff");

    ConstraintSet cs;
    cs.cutoff = pp.cutoff;
    cs.mode = mode;
    cs.rho_a = signal_gram(pp);

    static const char* trusted_names[] = {"FQ", "FP", "SQ", "SP"};
    static const char* ideal_names[] = {"q", "p", "n", "d"};
    std::array<Matrix, 4> ops;
    MomentTable values;
    if (mode == Mode::trusted) {
        for (int k = 0; k < 4; ++k) ops[k] = obs.moments[k].matrix();
        values = stats.moments;
    } else {
        const auto q = quadrature_operators(pp.cutoff);
        ops = {q.q.matrix(), q.p.matrix(), q.n.matrix(), q.d.matrix()};
        values = untrusted_expectations(stats);
    }
    for (int x = 0; x < 4; ++x)
        for (int k = 0; k < 4; ++k) {
            SeparableObservable o{{{x, x, 1.0}}, ops[k]};
            const char* name = mode == Mode::trusted ? trusted_names[k] : ideal_names[k];
            cs.constraints.push_back({o, ProtocolParams::priors[x] * values[x][k], "x" + std::to_string(x) + ":" + name});
        }
    const cplx I(0.0, 1.0);
    for (int i = 0; i < 4; ++i)
        cs.constraints.push_back({{{{i, i, 1.0}}, Matrix()}, cs.rho_a(i, i).real(), "rhoA:" + std::to_string(i) + std::to_string(i)});
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const std::string tag = std::to_string(i) + std::to_string(j);
            cs.constraints.push_back({{{{i, j, 1.0}, {j, i, 1.0}}, Matrix()}, 2.0 * cs.rho_a(i, j).real(), "rhoA:re" + tag});
            cs.constraints.push_back({{{{i, j, I}, {j, i, -I}}, Matrix()}, 2.0 * cs.rho_a(i, j).imag(), "rhoA:im" + tag});
        }
    cs.trace = {{{{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}, {3, 3, 1.0}}, Matrix()}, 1.0, "trace"};
    return cs;
}

PostprocessingMaps make_postprocessing_maps(const RegionOperators& regions) {
    PostprocessingMaps maps;
    maps.cutoff = regions.R[0].cutoff();
    const int d = maps.mode_dim();
    maps.pass = Matrix::Zero(d, d);
    for (int z = 0; z < 4; ++z) {
        maps.sqrt_r[z] = linalg::sqrt_psd(regions.R[z].matrix());
        maps.pass += regions.R[z].matrix();
    }
    maps.pass = linalg::hermitian_part(maps.pass);
    maps.sqrt_pass = linalg::sqrt_psd(maps.pass);
    return maps;
}

Matrix PostprocessingMaps::kraus() const {
    const int d = mode_dim();
    Matrix K = Matrix::Zero(16 * d, 4 * d);
    for (int z = 0; z < 4; ++z)
        for (int a = 0; a < 4; ++a) K.block((z * 4 + a) * d, a * d, d, d) = sqrt_r[z];
    return K;
}

namespace {

void require_psd(const Matrix& rho, const char* who) {
    linalg::require_hermitian(rho, 1e-10, who);
    if (linalg::min_eigenvalue(rho) < -1e-8) throw std::invalid_argument(std::string(who) + ": state is not PSD");
}

void require_dims(const Matrix& rho, const PostprocessingMaps& maps, const char* who) {
    if (rho.rows() != maps.dim() || rho.cols() != maps.dim())
        throw std::invalid_argument(std::string(who) + ": state dimension does not match the key map");
}

// (1_A (x) S) rho (1_A (x) S) for Hermitian S on B.
Matrix congruence(const Matrix& rho, const Matrix& S, int d) {
    const int r = static_cast<int>(rho.rows()) / d;
    Matrix out(rho.rows(), rho.cols());
    Matrix tmp(d, d);
    for (int a = 0; a < r; ++a)
        for (int b = a; b < r; ++b) {
            tmp.noalias() = rho.block(a * d, b * d, d, d) * S;
            out.block(a * d, b * d, d, d).noalias() = S * tmp;
            if (b != a) out.block(b * d, a * d, d, d) = out.block(a * d, b * d, d, d).adjoint();
        }
    return out;
}

// Tr(X log X) with the clamp; optionally the clamped log itself.
double xlogx(const Matrix& X, Matrix* log_out) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(X, log_out ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    if (!(top > 0.0)) throw std::invalid_argument("objective: argument has no positive eigenvalue");
    const double floor = kLogClamp * top;
    Eigen::VectorXd lg(ev.size());
    double v = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        lg[i] = std::log(std::max(ev[i], floor));
        v += ev[i] * lg[i];
    }
    if (log_out) *log_out = es.eigenvectors() * lg.asDiagonal() * es.eigenvectors().adjoint();
    return v;
}

Matrix perturb(const Matrix& rho, double eps) {
    Matrix out = (1.0 - eps) * rho;
    out.diagonal().array() += eps / double(rho.rows());
    return linalg::hermitian_part(out);
}

// Objective in bits through the reduced form
//   Tr X log X - sum_z Tr Y_z log Y_z,  X = sqrt(P) rho sqrt(P),  Y_z = sqrt(R_z) rho sqrt(R_z),
// which follows because K rho K^dag and sqrt(P) rho sqrt(P) share their nonzero spectrum.
double evaluate(const Matrix& rho_in, const PostprocessingMaps& maps, double eps, Matrix* grad) {
    const int d = maps.mode_dim();
    const Matrix rho = perturb(rho_in, eps);
    Matrix logx, logy;
    double value = xlogx(congruence(rho, maps.sqrt_pass, d), grad ? &logx : nullptr);
    if (grad) *grad = congruence(logx, maps.sqrt_pass, d);
    for (int z = 0; z < 4; ++z) {
        value -= xlogx(congruence(rho, maps.sqrt_r[z], d), grad ? &logy : nullptr);
        if (grad) *grad -= congruence(logy, maps.sqrt_r[z], d);
    }
    if (grad) *grad = linalg::hermitian_part(*grad) * ((1.0 - eps) / kLn2);
    return value / kLn2;
}

}  // namespace

FockOperator apply_G(const FockOperator& rho, const PostprocessingMaps& maps) {
    require_dims(rho.matrix(), maps, "apply_G");
    require_psd(rho.matrix(), "apply_G");
    const Matrix K = maps.kraus();
    return FockOperator::hermitian(K * rho.matrix() * K.adjoint());
}

FockOperator apply_Z(const FockOperator& sigma) {
    if (sigma.dim() % 4 != 0) throw std::invalid_argument("apply_Z: dimension is not a multiple of the register size");
    const int b = sigma.dim() / 4;
    Matrix out = Matrix::Zero(sigma.dim(), sigma.dim());
    for (int z = 0; z < 4; ++z) out.block(z * b, z * b, b, b) = sigma.matrix().block(z * b, z * b, b, b);
    return FockOperator(out, sigma.is_hermitian());
}

double relative_entropy(const Matrix& a, const Matrix& b, double clamp_rel) {
    return (a * (linalg::log_clamped(a, clamp_rel) - linalg::log_clamped(b, clamp_rel))).trace().real();
}

double objective(const FockOperator& rho, const PostprocessingMaps& maps, double eps) {
    require_dims(rho.matrix(), maps, "objective");
    require_psd(rho.matrix(), "objective");
    return evaluate(rho.matrix(), maps, eps, nullptr);
}

double objective_direct(const FockOperator& rho, const PostprocessingMaps& maps, double eps) {
    require_dims(rho.matrix(), maps, "objective_direct");
    const auto g = apply_G(FockOperator::hermitian(perturb(rho.matrix(), eps)), maps);
    return relative_entropy(g.matrix(), apply_Z(g).matrix()) / kLn2;
}

FockOperator gradient(const FockOperator& rho, const PostprocessingMaps& maps, double eps) {
    require_dims(rho.matrix(), maps, "gradient");
    Matrix g;
    evaluate(rho.matrix(), maps, eps, &g);
    return FockOperator::hermitian(g);
}

Matrix feasible_point(const ConstraintSet& cs, const SdpOptions& opts) {
    const auto sys = cs.system();
    const Eigen::VectorXd b = cs.values();
    const auto res = solve_sdp(sys, Matrix::Identity(cs.dim(), cs.dim()), b, opts);
    const Matrix rho = sys.project_affine(res.X, b);
    const double resid = cs.max_residual(rho);
    if (!(resid <= 1e-9) || linalg::min_eigenvalue(rho) < -1e-9)
        throw InfeasibleConstraints("no positive semidefinite state satisfies the constraints", resid);
    return rho;
}

namespace {

double inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b.conjugate()).sum().real(); }

// Divided differences of the clamped log on the spectrum ev.
Eigen::MatrixXd log_divided_differences(const Eigen::VectorXd& ev, double floor) {
    const Eigen::Index n = ev.size();
    Eigen::MatrixXd L(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double a = ev[i], b = ev[j];
            if (std::abs(a - b) <= 1e-10 * std::max(std::abs(a), std::abs(b)))
                L(i, j) = 0.5 * (a + b) > floor ? 2.0 / (a + b) : 0.0;
            else
                L(i, j) = (std::log(std::max(a, floor)) - std::log(std::max(b, floor))) / (a - b);
        }
    return L;
}

// Hessian of the objective at a fixed state, applied matrix-free.
class ObjectiveHessian {
public:
    ObjectiveHessian(const Matrix& rho, const PostprocessingMaps& maps, double eps)
        : d_(maps.mode_dim()), scale_((1.0 - eps) * (1.0 - eps) / kLn2) {
        const Matrix r = perturb(rho, eps);
        add(r, maps.sqrt_pass, 1.0);
        for (int z = 0; z < 4; ++z) add(r, maps.sqrt_r[z], -1.0);
    }

    Matrix operator()(const Matrix& delta) const {
        Matrix out = Matrix::Zero(delta.rows(), delta.cols());
        for (const auto& t : terms_) {
            Matrix h = t.U.adjoint() * congruence(delta, *t.S, d_) * t.U;
            h = h.cwiseProduct(t.L.cast<cplx>());
            out += t.sign * congruence(t.U * h * t.U.adjoint(), *t.S, d_);
        }
        return scale_ * out;
    }

private:
    struct Term {
        Matrix U;
        Eigen::MatrixXd L;
        const Matrix* S;
        double sign;
    };
    void add(const Matrix& r, const Matrix& S, double sign) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(congruence(r, S, d_));
        const double floor = kLogClamp * es.eigenvalues().maxCoeff();
        terms_.push_back({es.eigenvectors(), log_divided_differences(es.eigenvalues(), floor), &S, sign});
    }
    int d_;
    double scale_;
    std::vector<Term> terms_;
};

struct InteriorResult {
    Matrix rho;
    double f = 0.0;
    int newton = 0;
};

// Log-barrier path following on f(rho) - mu log det rho subject to A(rho) = b. Newton directions come
// from projected preconditioned conjugate gradients; the preconditioner is the Hessian of
// Tr rho log rho plus the barrier term, both diagonal in the eigenbasis of rho.
InteriorResult interior_refine(const SeparableSystem& sys, const PostprocessingMaps& maps,
                               Matrix rho, double eps, double gap_tol, double mu0, int cg_cap) {
    const int n = static_cast<int>(rho.rows());
    const int m = sys.size();
    const double c = (1.0 - eps) * (1.0 - eps) / kLn2;
    InteriorResult out;
    auto logdet = [](const Matrix& r) -> std::optional<double> {
        Eigen::LLT<Matrix> llt(r);
        if (llt.info() != Eigen::Success) return std::nullopt;
        return 2.0 * llt.matrixLLT().diagonal().real().array().log().sum();
    };
    const double mu_final = 0.2 * gap_tol / n;
    double mu = std::max(mu0, mu_final);
    const Eigen::LDLT<Eigen::MatrixXd> gram(sys.gram());
    for (;;) {
        for (int it = 0; it < 60; ++it) {
            Matrix grad;
            const double f = evaluate(rho, maps, eps, &grad);
            Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
            const Eigen::VectorXd r = es.eigenvalues();
            const Matrix& V = es.eigenvectors();
            const Matrix rinv = V * r.cwiseInverse().asDiagonal() * V.adjoint();
            const Matrix g = grad - mu * rinv;
            const double phi = f - mu * r.array().log().sum();

            const Eigen::MatrixXd Lr = log_divided_differences(((1.0 - eps) * r.array() + eps / n).matrix(), 0.0);
            Eigen::MatrixXd W(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) W(i, j) = 1.0 / (c * Lr(i, j) + mu / (r[i] * r[j]));
            auto minv = [&](const Matrix& x) -> Matrix {
                Matrix h = V.adjoint() * x * V;
                return V * h.cwiseProduct(W.cast<cplx>()) * V.adjoint();
            };
            Eigen::MatrixXd S(m, m);
            std::vector<Matrix> mia(m);
            for (int j = 0; j < m; ++j) {
                mia[j] = minv(sys.adjoint(Eigen::VectorXd::Unit(m, j)));
                S.col(j) = sys.apply(mia[j]);
            }
            const Eigen::LDLT<Eigen::MatrixXd> Sf(0.5 * (S + S.transpose()));
            auto project = [&](const Matrix& x) -> Matrix {
                Matrix z = minv(x);
                const Eigen::VectorXd lam = Sf.solve(sys.apply(z));
                for (int j = 0; j < m; ++j) z -= lam[j] * mia[j];
                return z;
            };
            const ObjectiveHessian H(rho, maps, eps);
            auto K = [&](const Matrix& x) -> Matrix { return H(x) + mu * (rinv * x * rinv); };

            Matrix delta = Matrix::Zero(n, n), res = g;
            Matrix z = project(res), dir = -z;
            double rz = inner(res, z);
            const double rz0 = rz;
            int cg = 0;
            for (; cg < cg_cap && rz > 1e-14 * rz0; ++cg) {
                const Matrix kd = K(dir);
                const double dkd = inner(dir, kd);
                if (!(dkd > 0)) break;
                const double a = rz / dkd;
                delta += a * dir;
                res += a * kd;
                z = project(res);
                const double rzn = inner(res, z);
                dir = -z + (rzn / rz) * dir;
                rz = rzn;
            }
            delta = linalg::hermitian_part(delta);
            delta -= sys.adjoint(gram.solve(sys.apply(delta)));
            const double slope = inner(g, delta);
            ++out.newton;
            if (!(slope < 0) || -slope < 0.05 * mu) break;

            const Matrix isq = V * r.cwiseSqrt().cwiseInverse().asDiagonal() * V.adjoint();
            const double emin = linalg::min_eigenvalue(linalg::hermitian_part(isq * delta * isq));
            double t = emin < 0 ? std::min(1.0, -0.95 / emin) : 1.0;
            bool stepped = false;
            for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
                const Matrix cand = linalg::hermitian_part(rho + t * delta);
                const auto ld = logdet(cand);
                if (!ld) continue;
                if (evaluate(cand, maps, eps, nullptr) - mu * *ld <= phi + 0.1 * t * slope) {
                    rho = cand;
                    stepped = true;
                    break;
                }
            }
            if (!stepped) break;
        }
        if (mu <= mu_final) break;
        mu = std::max(mu_final, 0.1 * mu);
    }
    out.f = evaluate(rho, maps, eps, nullptr);
    out.rho = rho;
    return out;
}

}  // namespace

namespace {

// Affine projection can leave eigenvalues of order the solver tolerance below zero, and the objective
// is only convex on the cone. Mixing with a positive definite feasible point restores both
// feasibility and positivity; clipping is the fallback when no such point exists.
Matrix into_cone(const Matrix& m, const Matrix& center, double center_min) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin >= 0.0) return m;
    if (center_min > 0.0) {
        const double theta = -lmin / (center_min - lmin);
        return (1.0 - theta) * m + theta * center;
    }
    return linalg::hermitian_part(es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                                  es.eigenvectors().adjoint());
}

// Minimizes phi on [0, tmax] by golden section, then backtracks towards 0 if no point beat phi(0).
template <class Phi>
std::pair<double, double> line_search(Phi&& phi, double f0, double tmax, int points) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = tmax;
    double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
    double fc = phi(c), fd = phi(d);
    double best_t = fc < fd ? c : d, best_f = std::min(fc, fd);
    for (int e = 2; e < points; ++e) {
        if (fc < fd) {
            hi = d, d = c, fd = fc;
            c = hi - g * (hi - lo);
            fc = phi(c);
            if (fc < best_f) best_f = fc, best_t = c;
        } else {
            lo = c, c = d, fc = fd;
            d = lo + g * (hi - lo);
            fd = phi(d);
            if (fd < best_f) best_f = fd, best_t = d;
        }
    }
    for (double t = std::min(c, d) / 4; best_f >= f0 && t > 1e-14 * tmax; t /= 4) {
        const double ft = phi(t);
        if (ft < best_f) best_f = ft, best_t = t;
    }
    return {best_t, best_f};
}

}  // namespace

KeyRateResult solve(const ConstraintSet& cs, const PostprocessingMaps& maps, const SolverOptions& opts) {
    if (cs.dim() != maps.dim()) throw std::invalid_argument("solve: constraint and key-map dimensions differ");
    const auto sys = cs.system();
    const Eigen::VectorXd b = cs.values();
    auto f = [&](const Matrix& r) { return evaluate(r, maps, opts.perturbation, nullptr); };

    KeyRateResult out;
    // rho is kept as a convex combination of feasible atoms so that pairwise steps can move weight
    // between them without another SDP solve.
    const Matrix raw_center = feasible_point(cs, opts.sdp);
    const double center_min = linalg::min_eigenvalue(raw_center);
    const Matrix center = into_cone(raw_center, raw_center, 0.0);
    std::vector<Matrix> atoms{center};
    std::vector<double> w{1.0};
    Matrix rho = atoms[0];
    double best_lb = -std::numeric_limits<double>::infinity();
    out.status = SolveStatus::max_iterations;
    int k = 0, last_interior = -1;
    bool retry_interior = false;
    Matrix grad;
    double fk = evaluate(rho, maps, opts.perturbation, &grad);
    for (; k < opts.max_iters; ++k) {
        const auto sdp = solve_sdp(sys, grad, b, opts.sdp);
        // Weak duality on {sigma >= 0, A(sigma) = b, Tr sigma = 1}:
        //   Tr(sigma grad) >= b.y + lambda_min(grad - A^*(y)).
        const double lam = linalg::min_eigenvalue(linalg::hermitian_part(grad - sys.adjoint(sdp.y)));
        const double lb = fk - (rho * grad).trace().real() + b.dot(sdp.y) + lam;
        if (std::isfinite(lb)) best_lb = std::max(best_lb, lb);
        if (fk - best_lb < opts.gap_tol) {
            out.status = SolveStatus::converged;
            break;
        }
        if (opts.zero_rate_threshold && fk < *opts.zero_rate_threshold) {
            out.status = SolveStatus::zero_rate;
            break;
        }

        const bool scheduled = opts.interior_start >= 0 && k >= opts.interior_start &&
                               (k - opts.interior_start) % opts.interior_period == 0;
        if (scheduled || retry_interior) {
            retry_interior = false;
            last_interior = k;
            // Second-order refinement from a strictly positive definite mixture with the centre.
            double theta = 1e-3;
            Matrix start = (1.0 - theta) * rho + theta * center;
            while (linalg::min_eigenvalue(start) <= 0 && theta < 0.5) {
                theta *= 10;
                start = (1.0 - theta) * rho + theta * center;
            }
            const auto ir = interior_refine(sys, maps, start, opts.perturbation, opts.gap_tol,
                                            (fk - best_lb) / double(rho.rows()), opts.cg_max_iters);
            if (ir.f < fk) {
                rho = ir.rho;
                fk = evaluate(rho, maps, opts.perturbation, &grad);
                atoms.assign(1, rho);
                w.assign(1, 1.0);
                continue;
            }
        }
        atoms.push_back(into_cone(sys.project_affine(sdp.X, b), center, center_min));
        w.push_back(0.0);
        bool moved = false;
        for (int inner = 0; inner <= opts.corrective_steps; ++inner) {
            // inner == 0 is the plain Frank-Wolfe step towards the new atom; later steps are
            // pairwise: shift weight from the worst active atom to the best stored one.
            std::size_t to = atoms.size() - 1, from = atoms.size();
            if (inner > 0) {
                double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                for (std::size_t i = 0; i < atoms.size(); ++i) {
                    const double s = (atoms[i] * grad).trace().real();
                    if (s < lo) lo = s, to = i;
                    if (w[i] > 0 && s > hi) hi = s, from = i;
                }
                if (from == atoms.size() || from == to || hi - lo < 1e-14) break;
            }
            const Matrix dir = from == atoms.size() ? Matrix(atoms[to] - rho) : Matrix(atoms[to] - atoms[from]);
            const double tmax = from == atoms.size() ? 1.0 : w[from];
            if (!(tmax > 0)) break;
            const auto [t, ft] =
                line_search([&](double s) { return f(rho + s * dir); }, fk, tmax, opts.line_search_points);
            if (!(ft < fk)) {
                if (inner == 0) continue;
                break;
            }
            if (from == atoms.size()) {
                for (auto& wi : w) wi *= 1.0 - t;
                w[to] += t;
            } else {
                w[from] = t >= tmax ? 0.0 : w[from] - t;
                w[to] += t;
            }
            rho = linalg::hermitian_part(rho + t * dir);
            fk = evaluate(rho, maps, opts.perturbation, &grad);
            moved = true;
        }
        // Drop atoms whose weight has vanished.
        std::size_t keep = 0;
        for (std::size_t i = 0; i < atoms.size(); ++i)
            if (w[i] > 0) {
                if (keep != i) atoms[keep] = std::move(atoms[i]), w[keep] = w[i];
                ++keep;
            }
        atoms.resize(keep);
        w.resize(keep);
        if (!moved) {
            // First-order steps are exhausted; one barrier refinement before giving up.
            if (opts.interior_start >= 0 && last_interior != k) {
                retry_interior = true;
                continue;
            }
            out.status = SolveStatus::stalled;
            ++k;
            break;
        }
    }
    out.iterations = k;
    out.rho = rho;
    out.primal_value = f(rho);
    out.lower_bound = best_lb;
    out.constraint_residual = cs.max_residual(rho);
    out.min_eigenvalue = linalg::min_eigenvalue(rho);
    out.trace = rho.trace().real();
    out.certified = std::isfinite(best_lb) && best_lb <= out.primal_value + 1e-8 && out.status != SolveStatus::stalled;
    return out;
}

KeyRateResult key_rate(const ConstraintSet& cs, const PostprocessingMaps& maps, const EcCost& ec, SolverOptions opts) {
    if (opts.stop_at_zero_rate && !opts.zero_rate_threshold) opts.zero_rate_threshold = ec.p_pass * ec.delta_ec;
    KeyRateResult r = solve(cs, maps, opts);
    r.delta_ec = ec.delta_ec;
    r.p_pass = ec.p_pass;
    r.rate = std::isfinite(r.lower_bound) ? std::max(0.0, r.lower_bound - ec.p_pass * ec.delta_ec) : 0.0;
    return r;
}

}  // namespace dmrate
