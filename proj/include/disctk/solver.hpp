#pragma once

// Gauss-Newton solver for the nonlinear Riemann-Hilbert problem on the
// truncated constrained coefficient domain, and the local family chart.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "disctk/linearization.hpp"

namespace disctk {

struct SolveConfig {
    int N = 24;
    int max_iter = 30;
    double target = 1e-10;
    double min_decrease = 1e-4;   // Armijo-style acceptance factor
    int max_backtracks = 8;
    int max_stalled = 5;          // damped steps without decrease => divergence
    bool pinned = false;
};

struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolveRecord {
    int iterations = 0;
    double final_residual = 0.0;
    std::vector<double> history;  // max residual per iteration
};

namespace detail {

/// point_jacobian column block (z, w, zt, wt) for a domain slot ordered
/// (w, z, z~, w~).
inline int jacobian_var(const DomainLayout& lay, int slot) {
    if (slot < lay.d) return lay.n + slot;                       // w
    if (slot < lay.d + lay.n) return slot - lay.d;               // z
    if (slot < lay.d + 2 * lay.n) return lay.n + lay.d + (slot - lay.d - lay.n);
    return 2 * lay.n + lay.d + (slot - lay.d - 2 * lay.n);       // w~
}

/// Embeds a lift into the layout's real coefficient vector; cores longer
/// than the truncation are rejected.
inline Eigen::VectorXd lift_to_coeffs(const DomainLayout& lay, const Lift& L) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(lay.real_dim());
    int pos = 0;
    auto push = [&](const ConstrainedDisc& c, int order) {
        if (c.order() != order && !c.is_zero())
            throw std::invalid_argument("lift_to_coeffs: vanish-order mismatch");
        if (c.core_degree() >= lay.coeffs_per_slot())
            throw std::invalid_argument("lift_to_coeffs: core exceeds truncation N");
        for (int j = 0; j < lay.coeffs_per_slot(); ++j, pos += 2) {
            cplx a = j <= c.core_degree() ? c.core()[j] : cplx(0.0);
            x(pos) = a.real();
            x(pos + 1) = a.imag();
        }
    };
    for (int l = 0; l < lay.d; ++l) push(L.g[l], 1);
    for (int i = 0; i < lay.n; ++i) push(L.h[i], 1);
    for (int i = 0; i < lay.n; ++i) push(L.ht[i], lay.D1 - 1);
    for (int l = 0; l < lay.d; ++l) push(L.gt[l], 0);
    return x;
}

}  // namespace detail

/// Stacked residuals of the 2n+2d lifted equations at every grid point.
inline Eigen::VectorXd residual(const LiftedDefiningSystem& sys, const Lift& L,
                                const BoundaryGrid& grid) {
    const int R = 2 * sys.model().n() + 2 * sys.model().d();
    Eigen::VectorXd out(R * grid.size());
    for (int t = 0; t < grid.size(); ++t)
        out.segment(R * t, R) = sys.residuals(grid.point(t), L.eval(grid.point(t)));
    return out;
}

namespace detail {

struct CollocationProblem {
    const LiftedDefiningSystem* sys;
    DomainLayout lay;
    std::vector<cplx> nodes;
    // Optional affine constraint rows C x = rhs appended to the system.
    Eigen::MatrixXd C;
    Eigen::VectorXd rhs;

    int residual_rows() const {
        return (2 * lay.n + 2 * lay.d) * static_cast<int>(nodes.size()) +
               static_cast<int>(C.rows());
    }

    Eigen::VectorXd eval(const Eigen::VectorXd& x) const {
        Lift L = lay.to_lift(x);
        const int R = 2 * lay.n + 2 * lay.d;
        Eigen::VectorXd out(residual_rows());
        for (size_t t = 0; t < nodes.size(); ++t)
            out.segment(R * static_cast<int>(t), R) =
                sys->residuals(nodes[t], L.eval(nodes[t]));
        if (C.rows() > 0) out.tail(C.rows()) = C * x - rhs;
        return out;
    }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
        Lift L = lay.to_lift(x);
        const int R = 2 * lay.n + 2 * lay.d;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(residual_rows(), lay.real_dim());
        for (size_t t = 0; t < nodes.size(); ++t) {
            cplx zeta = nodes[t];
            Eigen::MatrixXd Jp = sys->point_jacobian(zeta, L.eval(zeta));
            int col = 0;
            for (int slot = 0; slot < lay.slots(); ++slot) {
                int v = jacobian_var(lay, slot);
                for (int j = 0; j < lay.coeffs_per_slot(); ++j, col += 2) {
                    cplx b = lay.basis(slot, j, zeta);
                    // d(component)/d(Re a_j) = b, d/d(Im a_j) = i b.
                    J.block(R * static_cast<int>(t), col, R, 1) =
                        b.real() * Jp.col(2 * v) + b.imag() * Jp.col(2 * v + 1);
                    J.block(R * static_cast<int>(t), col + 1, R, 1) =
                        -b.imag() * Jp.col(2 * v) + b.real() * Jp.col(2 * v + 1);
                }
            }
        }
        if (C.rows() > 0) J.bottomRows(C.rows()) = C;
        return J;
    }
};

inline Eigen::VectorXd gauss_newton(const CollocationProblem& prob, Eigen::VectorXd x,
                                    const SolveConfig& cfg, SolveRecord* rec) {
    auto maxres = [](const Eigen::VectorXd& r) { return r.cwiseAbs().maxCoeff(); };
    Eigen::VectorXd r = prob.eval(x);
    double cur = maxres(r);
    if (rec) rec->history.push_back(cur);
    int stalled = 0;
    for (int it = 0; it < cfg.max_iter && cur > cfg.target; ++it) {
        Eigen::MatrixXd J = prob.jacobian(x);
        // Least-squares step with a Tikhonov floor on the normal equations.
        Eigen::MatrixXd H = J.transpose() * J;
        H.diagonal().array() += 1e-12 * std::max(1.0, H.diagonal().maxCoeff());
        Eigen::VectorXd step = H.ldlt().solve(-J.transpose() * r);

        double t = 1.0;
        bool accepted = false;
        for (int bt = 0; bt <= cfg.max_backtracks; ++bt, t *= 0.5) {
            Eigen::VectorXd xn = x + t * step;
            Eigen::VectorXd rn = prob.eval(xn);
            double nxt = maxres(rn);
            if (nxt <= cur * (1.0 - cfg.min_decrease * t) || nxt <= cfg.target) {
                x = xn;
                r = rn;
                cur = nxt;
                accepted = true;
                break;
            }
        }
        if (rec) {
            ++rec->iterations;
            rec->history.push_back(cur);
        }
        stalled = accepted ? 0 : stalled + 1;
        if (stalled >= cfg.max_stalled)
            throw SolveError("solve: diverged, no residual decrease across " +
                             std::to_string(cfg.max_stalled) +
                             " damped steps (residual " + std::to_string(cur) + ")");
    }
    if (cur > cfg.target)
        throw SolveError("solve: residual " + std::to_string(cur) +
                         " above target after " + std::to_string(cfg.max_iter) +
                         " iterations");
    if (rec) rec->final_residual = cur;
    return x;
}

inline CollocationProblem make_problem(const LiftedDefiningSystem& sys,
                                       const SolveConfig& cfg) {
    const Model& m = sys.model();
    if (cfg.target < 1e-12) throw std::invalid_argument("SolveConfig: target < 1e-12");
    if (cfg.N < 2 * (m.Dd() + m.k0()))
        throw std::invalid_argument("SolveConfig: N < 2 (D_d + k0)");
    CollocationProblem prob;
    prob.sys = &sys;
    prob.lay = DomainLayout{m.n(), m.d(), m.D1(), cfg.N};
    int S = 4 * (cfg.N + m.Dd() + m.k0());
    for (int t = 0; t < S; ++t) {
        double ang = 2.0 * std::numbers::pi * t / S;
        prob.nodes.emplace_back(std::cos(ang), std::sin(ang));
    }
    return prob;
}

/// Top-coefficient saturation: the truncation is trusted only when the
/// highest kept coefficients are negligible against the lift size.
inline void check_saturation(const DomainLayout& lay, const Eigen::VectorXd& x) {
    double top = 0.0, all = 0.0;
    for (int slot = 0; slot < lay.slots(); ++slot) {
        int base = 2 * slot * lay.coeffs_per_slot();
        for (int j = 0; j < lay.coeffs_per_slot(); ++j) {
            double mag = std::hypot(x(base + 2 * j), x(base + 2 * j + 1));
            all = std::max(all, mag);
            if (j == lay.coeffs_per_slot() - 1) top = std::max(top, mag);
        }
    }
    if (all > 0.0 && top > 1e-8 * all)
        throw SolveError("solve: truncation saturated, top coefficient " +
                         std::to_string(top / all) + " of norm; increase N");
}

}  // namespace detail

/// Gauss-Newton continuation from `start`; the result keeps the exact vanish
/// orders by construction of the unknowns.
inline Lift solve(const LiftedDefiningSystem& sys, const Lift& start,
                  const SolveConfig& cfg = SolveConfig{}, SolveRecord* rec = nullptr) {
    detail::CollocationProblem prob = detail::make_problem(sys, cfg);
    if (cfg.pinned) {
        // Pin g~_l(1) to its start value: sum_j Re/Im a_j fixed.
        const Model& m = sys.model();
        prob.C = Eigen::MatrixXd::Zero(2 * m.d(), prob.lay.real_dim());
        prob.rhs = Eigen::VectorXd::Zero(2 * m.d());
        for (int l = 0; l < m.d(); ++l) {
            int slot = m.d() + 2 * m.n() + l;
            int col0 = 2 * slot * prob.lay.coeffs_per_slot();
            for (int j = 0; j < prob.lay.coeffs_per_slot(); ++j) {
                prob.C(2 * l, col0 + 2 * j) = 1.0;
                prob.C(2 * l + 1, col0 + 2 * j + 1) = 1.0;
            }
            cplx v = start.gt[l].eval(1.0);
            prob.rhs(2 * l) = v.real();
            prob.rhs(2 * l + 1) = v.imag();
        }
    }
    Eigen::VectorXd x = detail::lift_to_coeffs(prob.lay, start);
    x = detail::gauss_newton(prob, x, cfg, rec);
    detail::check_saturation(prob.lay, x);
    return prob.lay.to_lift(x);
}

struct DiscFamily {
    Lift base;
    int m = 0;
    std::vector<Eigen::VectorXd> kernel_coeffs;  // layout coordinates of the basis
    std::function<Lift(const Eigen::VectorXd&)> chart;
    std::vector<Eigen::VectorXd> sampled_params;
    std::vector<Lift> sampled_lifts;
    std::vector<double> sampled_residuals;
};

/// Chart of the solution family near `base`: the tangent coordinates along
/// the kernel basis are pinned by affine constraints, the normal directions
/// are solved.  Axis directions of radius `radius` are sampled eagerly.
inline DiscFamily family_chart(const LiftedDefiningSystem& sys, const Lift& base,
                               const std::vector<Lift>& kernel_basis,
                               const SolveConfig& cfg = SolveConfig{},
                               double radius = 0.01) {
    detail::CollocationProblem prob = detail::make_problem(sys, cfg);
    const detail::DomainLayout lay = prob.lay;
    DiscFamily fam;
    fam.base = base;
    fam.m = static_cast<int>(kernel_basis.size());
    Eigen::VectorXd x0 = detail::lift_to_coeffs(lay, base);
    for (const Lift& k : kernel_basis)
        fam.kernel_coeffs.push_back(detail::lift_to_coeffs(lay, k));

    // Optional g~(1) pinning, anchored at the base lift's values.
    Eigen::MatrixXd Cp(0, lay.real_dim());
    Eigen::VectorXd rhs_p(0);
    if (cfg.pinned) {
        Cp = Eigen::MatrixXd::Zero(2 * lay.d, lay.real_dim());
        rhs_p = Eigen::VectorXd::Zero(2 * lay.d);
        for (int l = 0; l < lay.d; ++l) {
            int slot = lay.d + 2 * lay.n + l;
            int col0 = 2 * slot * lay.coeffs_per_slot();
            for (int j = 0; j < lay.coeffs_per_slot(); ++j) {
                Cp(2 * l, col0 + 2 * j) = 1.0;
                Cp(2 * l + 1, col0 + 2 * j + 1) = 1.0;
            }
            cplx v = base.gt[l].eval(1.0);
            rhs_p(2 * l) = v.real();
            rhs_p(2 * l + 1) = v.imag();
        }
    }

    auto solve_at = [prob, lay, cfg, x0, Cp, rhs_p, kc = fam.kernel_coeffs,
                     m = fam.m](const Eigen::VectorXd& t) mutable -> Lift {
        if (t.size() != m) throw std::invalid_argument("family_chart: bad parameter size");
        prob.C = Eigen::MatrixXd::Zero(m + Cp.rows(), lay.real_dim());
        prob.rhs = Eigen::VectorXd::Zero(m + Cp.rows());
        Eigen::VectorXd target = x0;
        for (int i = 0; i < m; ++i) target += t(i) * kc[i];
        for (int j = 0; j < m; ++j) {
            prob.C.row(j) = kc[j].transpose();
            prob.rhs(j) = kc[j].dot(target);
        }
        if (Cp.rows() > 0) {
            prob.C.bottomRows(Cp.rows()) = Cp;
            prob.rhs.tail(Cp.rows()) = rhs_p;
        }
        Eigen::VectorXd x = detail::gauss_newton(prob, target, cfg, nullptr);
        detail::check_saturation(lay, x);
        return lay.to_lift(x);
    };
    fam.chart = solve_at;

    // Axis samples +/- radius plus the origin.
    const int R = 2 * lay.n + 2 * lay.d;
    BoundaryGrid grid = BoundaryGrid(1024);
    auto record = [&](const Eigen::VectorXd& t) {
        Lift L = fam.chart(t);
        fam.sampled_params.push_back(t);
        fam.sampled_lifts.push_back(L);
        fam.sampled_residuals.push_back(residual(*prob.sys, L, grid).cwiseAbs().maxCoeff());
    };
    record(Eigen::VectorXd::Zero(fam.m));
    for (int i = 0; i < fam.m; ++i)
        for (double s : {radius, -radius}) {
            Eigen::VectorXd t = Eigen::VectorXd::Zero(fam.m);
            t(i) = s;
            record(t);
        }

    // Injectivity evidence: sampled lifts are pairwise distinct.
    for (size_t a = 0; a < fam.sampled_lifts.size(); ++a)
        for (size_t b = a + 1; b < fam.sampled_lifts.size(); ++b) {
            double dist = (detail::lift_to_coeffs(lay, fam.sampled_lifts[a]) -
                           detail::lift_to_coeffs(lay, fam.sampled_lifts[b]))
                              .cwiseAbs()
                              .maxCoeff();
            if (dist < 1e-12)
                throw SolveError("family_chart: family collapse, samples " +
                                 std::to_string(a) + " and " + std::to_string(b) +
                                 " coincide");
        }
    return fam;
}

/// Numerical rank of the differential of t -> f_t(0) in C^{n+d} at t = 0,
/// by central differences along the chart axes.
inline int evaluation_rank(const DiscFamily& fam, double h = 1e-4) {
    if (fam.m == 0) return 0;
    const int n = static_cast<int>(fam.base.h.size());
    const int d = static_cast<int>(fam.base.g.size());
    Eigen::MatrixXd D(2 * (n + d), fam.m);
    for (int i = 0; i < fam.m; ++i) {
        Eigen::VectorXd t = Eigen::VectorXd::Zero(fam.m);
        t(i) = h;
        LiftPoint plus = fam.chart(t).eval(0.0);
        t(i) = -h;
        LiftPoint minus = fam.chart(t).eval(0.0);
        for (int j = 0; j < n; ++j) {
            cplx dv = (plus.z[j] - minus.z[j]) / (2.0 * h);
            D(2 * j, i) = dv.real();
            D(2 * j + 1, i) = dv.imag();
        }
        for (int l = 0; l < d; ++l) {
            cplx dv = (plus.w[l] - minus.w[l]) / (2.0 * h);
            D(2 * n + 2 * l, i) = dv.real();
            D(2 * n + 2 * l + 1, i) = dv.imag();
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
    const auto& s = svd.singularValues();
    if (s(0) == 0.0) return 0;
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > 1e-6 * s(0)) ++rank;
    return rank;
}

}  // namespace disctk
