#pragma once

// Constrained analytic discs, the explicit initial k0-stationary lift and
// the stationarity verifier.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "disctk/admissibility.hpp"
#include "disctk/model.hpp"

namespace disctk {

/// Disc zeta -> (1-zeta)^m * sum_j a_j zeta^j, stored via the cofactor
/// coefficients a_j.
class ConstrainedDisc {
public:
    ConstrainedDisc() : order_(0) {}
    ConstrainedDisc(int vanish_order, std::vector<cplx> core)
        : order_(vanish_order), core_(std::move(core)) {
        if (vanish_order < 0) throw std::invalid_argument("ConstrainedDisc: negative order");
        trim();
    }

    /// Refactors a polynomial Laurent series as (1-zeta)^m * core; the input
    /// must be a polynomial divisible by (1-zeta)^m up to tol.
    static ConstrainedDisc from_laurent(const LaurentPoly& f, int vanish_order,
                                        double tol = 1e-12) {
        if (!f.is_zero() && f.lo() < 0)
            throw std::invalid_argument("ConstrainedDisc: negative Laurent exponents");
        double rem = 0.0;
        LaurentPoly core = f.divide_one_minus_zeta(vanish_order, &rem);
        if (rem > tol)
            throw std::invalid_argument(
                "ConstrainedDisc: not divisible by (1-zeta)^m, rel. remainder " +
                std::to_string(rem));
        std::vector<cplx> a(core.is_zero() ? 0 : core.hi() + 1, cplx(0.0));
        for (const auto& [m, v] : core.coeffs()) a[m] = v;
        return ConstrainedDisc(vanish_order, std::move(a));
    }

    int order() const { return order_; }
    const std::vector<cplx>& core() const { return core_; }
    int core_degree() const { return static_cast<int>(core_.size()) - 1; }
    bool is_zero() const { return core_.empty(); }
    bool is_constant() const {
        if (core_.empty()) return true;
        if (order_ > 0) return false;  // (1-zeta)^m with nonzero core is nonconstant
        return core_.size() == 1;
    }

    cplx eval(cplx zeta) const {
        cplx core_val = 0.0;
        for (size_t j = core_.size(); j-- > 0;) core_val = core_val * zeta + core_[j];
        cplx pre = 1.0;
        for (int s = 0; s < order_; ++s) pre *= (1.0 - zeta);
        return pre * core_val;
    }

    LaurentPoly to_laurent() const {
        LaurentPoly p;
        for (size_t j = 0; j < core_.size(); ++j) p.add(static_cast<int>(j), core_[j]);
        return p.times_one_minus_zeta(order_);
    }

    double coeff_norm() const {
        double mx = 0.0;
        for (cplx a : core_) mx = std::max(mx, std::abs(a));
        return mx;
    }

    /// Derivatives at zeta = 1 computed exactly from the coefficients:
    /// d^q/dzeta^q [(1-zeta)^m p(zeta)] at 1 via the Leibniz rule.
    cplx derivative_at_one(int q) const {
        // (1-zeta)^m has nonzero derivatives only at order m: (-1)^m m!.
        if (q < order_) return 0.0;
        // binom(q, m) * (d^m (1-z)^m)(1) * p^{(q-m)}(1)
        double binom = 1.0;
        for (int i = 1; i <= order_; ++i) binom = binom * (q - order_ + i) / i;
        double fact = 1.0;
        for (int i = 2; i <= order_; ++i) fact *= i;
        double sign = (order_ % 2 == 0) ? 1.0 : -1.0;
        // p^{(r)}(1) with r = q - m
        int r = q - order_;
        cplx pr = 0.0;
        for (int j = r; j <= core_degree(); ++j) {
            double c = 1.0;
            for (int i = 0; i < r; ++i) c *= (j - i);
            pr += c * core_[j];
        }
        return binom * sign * fact * pr;
    }

private:
    void trim() {
        while (!core_.empty() && core_.back() == 0.0) core_.pop_back();
    }

    int order_;
    std::vector<cplx> core_;
};

/// Full lift (h, g, h~, g~) with the vanish orders of the constrained space:
/// 1 for h and g, D1-1 for h~, 0 for g~.
struct Lift {
    std::vector<ConstrainedDisc> h, g, ht, gt;

    LiftPoint eval(cplx zeta) const {
        LiftPoint p;
        for (const auto& c : h) p.z.push_back(c.eval(zeta));
        for (const auto& c : g) p.w.push_back(c.eval(zeta));
        for (const auto& c : ht) p.zt.push_back(c.eval(zeta));
        for (const auto& c : gt) p.wt.push_back(c.eval(zeta));
        return p;
    }

    double coeff_norm() const {
        double mx = 0.0;
        for (const auto* grp : {&h, &g, &ht, &gt})
            for (const auto& c : *grp) mx = std::max(mx, c.coeff_norm());
        return mx;
    }

    bool base_disc_constant() const {
        for (const auto* grp : {&h, &g})
            for (const auto& c : *grp)
                if (!c.is_constant()) return false;
        return true;
    }
};

/// The explicit initial lift: h0 = (1-zeta)V, g0 the analytic completion of
/// P((1-zeta)V, .), h~0 = -zeta^{k0} sum_l c_l P_{l,z} (the z-part of
/// zeta^{k0} sum c_l drho_l, with drho_z = -P_z), g~0 = (c/2) zeta^{k0}.
/// Works for any pair with V != 0 and c != 0; admissibility is not required.
inline Lift initial_lift(const Model& m, const CandidatePair& p) {
    check_pair(m, p);
    bool c_nonzero = false;
    for (double c : p.c)
        if (c != 0.0) c_nonzero = true;
    if (!c_nonzero)
        throw std::invalid_argument(
            "initial_lift: c = 0 violates the conormal nonvanishing condition");

    const int n = m.n(), d = m.d(), k0 = m.k0(), D1 = m.D1();
    Lift L;
    for (int j = 0; j < n; ++j) L.h.push_back(ConstrainedDisc(1, {p.V[j]}));
    for (int l = 0; l < d; ++l) {
        if (m.component_is_zero(l)) {
            L.g.push_back(ConstrainedDisc(1, {}));
            continue;
        }
        LaurentPoly u = m.component(l).poly().restrict_to_ray(p.V);
        LaurentPoly g = conjugate_function(u);
        L.g.push_back(ConstrainedDisc::from_laurent(g, 1));
    }
    for (int j = 0; j < n; ++j) {
        LaurentPoly t;
        for (int l = 0; l < d; ++l) {
            if (m.component_is_zero(l) || p.c[l] == 0.0) continue;
            t = t + m.component(l).dz(j).restrict_to_ray(p.V).scaled(-p.c[l]);
        }
        t = t.shifted(k0);
        t.prune(1e-15);
        if (!t.is_zero() && t.lo() < 0)
            throw std::runtime_error("initial_lift: h~ has negative exponents");
        try {
            L.ht.push_back(ConstrainedDisc::from_laurent(t, D1 - 1));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(
                std::string("initial_lift: h~ fails (1-zeta)^(D1-1) divisibility: ") +
                e.what());
        }
    }
    for (int l = 0; l < d; ++l) {
        std::vector<cplx> core(k0 + 1, cplx(0.0));
        core[k0] = 0.5 * p.c[l];
        L.gt.push_back(ConstrainedDisc(0, std::move(core)));
    }
    return L;
}

struct StationarityCheck {
    double max_violation = 0.0;
    double worst_angle = 0.0;  // location zeta* = e^{i theta} of the max
    bool pass = false;
};

struct StationarityReport {
    StationarityCheck attachment;    // manifold equations on the circle
    StationarityCheck conormal;      // full lifted residuals
    StationarityCheck holomorphy;    // negative energy of zeta^k0 sum c_l dr_l(f)
    StationarityCheck nonvanishing;  // min |sum c_l dr_l(0)| over the circle
    bool nonconstant = true;
    double tol = 0.0;
    bool pass = false;
};

inline StationarityReport verify_stationary(const LiftedDefiningSystem& sys, const Lift& L,
                                            int k0,
                                            const BoundaryGrid& grid = BoundaryGrid(4096)) {
    const Model& m = sys.model();
    const int n = m.n(), d = m.d();
    StationarityReport rep;
    rep.tol = 1e-9 * (1.0 + L.coeff_norm());
    rep.nonconstant = !L.base_disc_constant();

    const int N = grid.size();
    std::vector<std::vector<cplx>> hol_samples(n + d, std::vector<cplx>(N));
    double min_conormal_dir = 1e300;

    for (int s = 0; s < N; ++s) {
        cplx zeta = grid.point(s);
        LiftPoint pt = L.eval(zeta);

        for (int l = 0; l < d; ++l) {
            double v = std::abs(sys.defining_function(l, pt.z, pt.w));
            if (v > rep.attachment.max_violation) {
                rep.attachment.max_violation = v;
                rep.attachment.worst_angle = grid.angle(s);
            }
        }

        Eigen::VectorXd R = sys.residuals(zeta, pt);
        double v = R.cwiseAbs().maxCoeff();
        if (v > rep.conormal.max_violation) {
            rep.conormal.max_violation = v;
            rep.conormal.worst_angle = grid.angle(s);
        }

        // zeta^k0 sum_l c_l dr_l at f(zeta) and at 0, via W-elimination.
        std::vector<double> y = LiftedDefiningSystem::imw(pt.w);
        Eigen::RowVectorXcd c = sys.eliminate_c(zeta, pt, y);
        cplx zk = LaurentPoly::ipow(zeta, k0);
        for (int j = 0; j < n; ++j) {
            cplx acc = 0.0;
            for (int l = 0; l < d; ++l) acc += c(l) * sys.dz_defining(l, j, pt.z, y);
            hol_samples[j][s] = zk * acc;
        }
        Eigen::MatrixXcd W = sys.w_matrix(pt.z, y);
        Eigen::RowVectorXcd wpart = c * W;
        for (int l = 0; l < d; ++l) hol_samples[n + l][s] = zk * wpart(l);

        // conormal direction at the origin
        std::vector<cplx> z0(n, 0.0);
        std::vector<double> y0(d, 0.0);
        Eigen::MatrixXcd W0 = sys.w_matrix(z0, y0);
        double norm0 = 0.0;
        Eigen::RowVectorXcd at0 = c * W0;
        for (int j = 0; j < n; ++j) {
            cplx acc = 0.0;
            for (int l = 0; l < d; ++l) acc += c(l) * sys.dz_defining(l, j, z0, y0);
            norm0 += std::norm(acc);
        }
        for (int l = 0; l < d; ++l) norm0 += std::norm(at0(l));
        min_conormal_dir = std::min(min_conormal_dir, std::sqrt(norm0));
    }

    for (int comp = 0; comp < n + d; ++comp) {
        double e = negative_energy(hol_samples[comp]);
        if (e > rep.holomorphy.max_violation) rep.holomorphy.max_violation = e;
    }

    rep.nonvanishing.max_violation = min_conormal_dir;  // a minimum, not a violation
    rep.attachment.pass = rep.attachment.max_violation <= rep.tol;
    rep.conormal.pass = rep.conormal.max_violation <= rep.tol;
    rep.holomorphy.pass = rep.holomorphy.max_violation <= rep.tol;
    rep.nonvanishing.pass = min_conormal_dir > 1e-8;
    rep.pass = rep.nonconstant && rep.attachment.pass && rep.conormal.pass &&
               rep.holomorphy.pass && rep.nonvanishing.pass;
    return rep;
}

}  // namespace disctk
