#pragma once

// Submanifold data: polynomial models, allowable rigid perturbations and the
// 2n+2d lifted defining functions of the conormal fibration.

#include <complex>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "disctk/polyring.hpp"

namespace disctk {

/// Sparse polynomial in (z, zbar, y) with y = Im w real.  Hosts the
/// perturbation terms theta_l and the combined defining polynomial
/// -P_l + theta_l of each component.
class MixedPoly {
public:
    struct Key {
        MultiIndex I, J, S;  // z-, zbar-, y-exponents
        auto operator<=>(const Key&) const = default;
    };

    MixedPoly() : n_(0), d_(0) {}
    MixedPoly(int n, int d) : n_(n), d_(d) {}

    int n() const { return n_; }
    int d() const { return d_; }
    bool is_zero() const { return terms_.empty(); }
    const std::map<Key, cplx>& terms() const { return terms_; }

    void add_term(const MultiIndex& I, const MultiIndex& J, const MultiIndex& S, cplx c) {
        if (I.size() != n_ || J.size() != n_ || S.size() != d_)
            throw std::invalid_argument("MixedPoly: exponent length mismatch");
        if (c == 0.0) return;
        Key k{I, J, S};
        auto it = terms_.find(k);
        if (it == terms_.end())
            terms_.emplace(k, c);
        else {
            it->second += c;
            if (it->second == 0.0) terms_.erase(it);
        }
    }

    MixedPoly& operator+=(const MixedPoly& o) {
        if (terms_.empty() && n_ == 0 && d_ == 0) { n_ = o.n_; d_ = o.d_; }
        for (const auto& [k, c] : o.terms_) add_term(k.I, k.J, k.S, c);
        return *this;
    }

    cplx eval(const std::vector<cplx>& z, const std::vector<double>& y) const {
        std::vector<cplx> zb(z.size());
        for (size_t i = 0; i < z.size(); ++i) zb[i] = std::conj(z[i]);
        cplx acc = 0.0;
        for (const auto& [k, c] : terms_) {
            cplx t = c * pow_vec(z, k.I) * pow_vec(zb, k.J);
            for (int s = 0; s < k.S.size(); ++s)
                for (int p = 0; p < k.S[s]; ++p) t *= y[s];
            acc += t;
        }
        return acc;
    }

    MixedPoly dz(int i) const { return deriv(0, i); }
    MixedPoly dzbar(int i) const { return deriv(1, i); }
    MixedPoly dy(int s) const { return deriv(2, s); }

    MixedPoly scaled(cplx s) const {
        MixedPoly r(n_, d_);
        if (s == 0.0) return r;
        for (const auto& [k, c] : terms_) r.terms_.emplace(k, s * c);
        return r;
    }

    /// conj of the function: swaps z/zbar exponents, conjugates coefficients.
    MixedPoly conjugated() const {
        MixedPoly r(n_, d_);
        for (const auto& [k, c] : terms_)
            r.terms_.emplace(Key{k.J, k.I, k.S}, std::conj(c));
        return r;
    }

    /// True iff the polynomial equals its own conjugate (real-valued).
    bool is_real(double tol = 1e-12) const {
        double scale = 1.0;
        for (const auto& [k, c] : terms_) scale = std::max(scale, std::abs(c));
        for (const auto& [k, c] : terms_) {
            auto it = terms_.find(Key{k.J, k.I, k.S});
            cplx mirror = it == terms_.end() ? cplx(0.0) : it->second;
            if (std::abs(mirror - std::conj(c)) > tol * scale) return false;
        }
        return true;
    }

private:
    MixedPoly deriv(int which, int idx) const {
        MixedPoly r(n_, d_);
        for (const auto& [k, c] : terms_) {
            Key nk = k;
            MultiIndex* m = which == 0 ? &nk.I : which == 1 ? &nk.J : &nk.S;
            if ((*m)[idx] == 0) continue;
            double mult = (*m)[idx];
            m->e[idx] -= 1;
            r.add_term(nk.I, nk.J, nk.S, c * mult);
        }
        return r;
    }

    int n_, d_;
    std::map<Key, cplx> terms_;
};

inline MixedPoly mixed_from_bigraded(const BigradedPoly& p, int d) {
    MixedPoly r(p.n(), d);
    MultiIndex S0 = MultiIndex::zero(d);
    for (const auto& [k, c] : p.terms()) r.add_term(k.first, k.second, S0, c);
    return r;
}

struct ValidationReport {
    bool valid = false;
    int D1 = 0, Dd = 0, k0 = 0;
    std::vector<int> component_k;       // -1 for ZERO components
    std::vector<int> component_D;       // -1 for ZERO components
    std::vector<std::string> errors;
};

/// The tuple (n, d, P_1..P_d).  ZERO components are excluded from the max
/// defining k0; a model with all components ZERO is invalid.
class Model {
public:
    Model(int n, int d, std::vector<std::optional<HermitianPoly>> components)
        : n_(n), d_(d), comps_(std::move(components)) {
        if (static_cast<int>(comps_.size()) != d_)
            throw std::invalid_argument("Model: component count != d");
        auto rep = validate();
        if (!rep.valid) {
            std::ostringstream os;
            os << "Model: invalid:";
            for (const auto& e : rep.errors) os << " " << e << ";";
            throw std::invalid_argument(os.str());
        }
        D1_ = rep.D1;
        Dd_ = rep.Dd;
        k0_ = rep.k0;
    }

    ValidationReport validate() const {
        ValidationReport rep;
        int D1 = 0, Dd = 0, k0 = 0, nonzero = 0;
        for (int l = 0; l < d_; ++l) {
            const auto& c = comps_[l];
            if (!c.has_value() || c->is_zero()) {
                rep.component_k.push_back(-1);
                rep.component_D.push_back(-1);
                continue;
            }
            if (c->n() != n_) rep.errors.push_back("component " + std::to_string(l + 1) +
                                                   ": ambient dimension mismatch");
            ++nonzero;
            rep.component_k.push_back(c->weight());
            rep.component_D.push_back(c->degree());
            D1 = (nonzero == 1) ? c->degree() : std::min(D1, c->degree());
            Dd = std::max(Dd, c->degree());
            k0 = std::max(k0, c->weight());
        }
        if (nonzero == 0) rep.errors.push_back("all components ZERO");
        if (nonzero > 0 && D1 < 2) rep.errors.push_back("D1 < 2");
        rep.D1 = D1;
        rep.Dd = Dd;
        rep.k0 = k0;
        rep.valid = rep.errors.empty();
        return rep;
    }

    int n() const { return n_; }
    int d() const { return d_; }
    int D1() const { return D1_; }
    int Dd() const { return Dd_; }
    int k0() const { return k0_; }
    bool component_is_zero(int l) const { return !comps_[l].has_value() || comps_[l]->is_zero(); }
    const HermitianPoly& component(int l) const {
        if (component_is_zero(l)) throw std::invalid_argument("Model: component is ZERO");
        return *comps_[l];
    }

private:
    int n_, d_;
    int D1_ = 0, Dd_ = 0, k0_ = 0;
    std::vector<std::optional<HermitianPoly>> comps_;
};

/// One allowable perturbation term: z^I zbar^J (Im w)^S * coeff(z, Im w),
/// with coeff a polynomial with monomials z^A (Im w)^T.  The conjugate is
/// always added alongside, keeping theta_l real.
struct PerturbationTerm {
    MultiIndex I, J, S;
    std::vector<std::tuple<MultiIndex, MultiIndex, cplx>> coeff;  // (A, T, beta)
};

class Perturbation {
public:
    Perturbation(const Model& m, std::vector<std::vector<PerturbationTerm>> per_component,
                 double scale)
        : n_(m.n()), d_(m.d()), scale_(scale), terms_(std::move(per_component)) {
        if (static_cast<int>(terms_.size()) != d_)
            throw std::invalid_argument("Perturbation: component count != d");
        for (int l = 0; l < d_; ++l) {
            if (terms_[l].empty()) continue;
            if (m.component_is_zero(l))
                throw std::invalid_argument(
                    "Perturbation: nonzero theta on a ZERO model component");
            const int D = m.component(l).degree();
            for (const auto& t : terms_[l]) validate_term(t, D, l);
        }
    }

    static Perturbation zero(const Model& m) {
        return Perturbation(m, std::vector<std::vector<PerturbationTerm>>(m.d()), 0.0);
    }

    bool is_zero() const {
        if (scale_ == 0.0) return true;
        for (const auto& ts : terms_)
            if (!ts.empty()) return false;
        return true;
    }

    double scale() const { return scale_; }
    const std::vector<std::vector<PerturbationTerm>>& terms() const { return terms_; }

    /// theta_l as a real-valued MixedPoly (declared terms plus conjugates).
    MixedPoly expand(int l) const {
        MixedPoly out(n_, d_);
        for (const auto& t : terms_[l]) {
            for (const auto& [A, T, beta] : t.coeff) {
                MultiIndex I = add(t.I, A);
                MultiIndex S = add(t.S, T);
                out.add_term(I, t.J, S, scale_ * beta);
                out.add_term(t.J, I, S, scale_ * std::conj(beta));
            }
        }
        return out;
    }

private:
    static MultiIndex add(const MultiIndex& a, const MultiIndex& b) {
        MultiIndex r = a;
        for (int i = 0; i < r.size(); ++i) r.e[i] += b[i];
        return r;
    }

    void validate_term(const PerturbationTerm& t, int D, int l) const {
        if (t.I.size() != n_ || t.J.size() != n_ || t.S.size() != d_)
            throw std::invalid_argument("Perturbation: exponent length mismatch");
        const int s = t.S.order();
        const int ij = t.I.order() + t.J.order();
        std::string where = "theta_" + std::to_string(l + 1);
        if (s == 0) {
            if (ij != D + 1)
                throw std::invalid_argument(where + ": |I|+|J| must equal D+1 when S = 0");
            for (const auto& [A, T, beta] : t.coeff)
                if (T.order() != 0)
                    throw std::invalid_argument(where +
                                                ": coefficient may depend on z only when S = 0");
        } else {
            if (s > D) throw std::invalid_argument(where + ": |S| must be <= D");
            if (ij != D - s)
                throw std::invalid_argument(where + ": |I|+|J| must equal D-|S|");
        }
        for (const auto& [A, T, beta] : t.coeff) {
            if (A.size() != n_ || T.size() != d_)
                throw std::invalid_argument(where + ": coefficient exponent length mismatch");
            if (A.order() + T.order() > 6)
                throw std::invalid_argument(where + ": coefficient degree exceeds 6");
        }
    }

    int n_, d_;
    double scale_;
    std::vector<std::vector<PerturbationTerm>> terms_;
};

struct EliminationError : std::runtime_error {
    double condition;
    EliminationError(const std::string& msg, double cond)
        : std::runtime_error(msg), condition(cond) {}
};

/// Point on the fibration, grouped as the lift components.
struct LiftPoint {
    std::vector<cplx> z, w, zt, wt;
};

/// The 2n+2d real defining functions r~ of N^{k0}M(zeta).  For the
/// unperturbed model they are the explicit display equations; for perturbed
/// manifolds the W-elimination form, which reduces to the model system at
/// theta = 0.
class LiftedDefiningSystem {
public:
    explicit LiftedDefiningSystem(Model m)
        : LiftedDefiningSystem(std::move(m), std::nullopt) {}

    LiftedDefiningSystem(Model m, std::optional<Perturbation> theta)
        : model_(std::move(m)), theta_(std::move(theta)) {
        const int n = model_.n(), d = model_.d();
        perturbed_ = theta_.has_value() && !theta_->is_zero();
        // r_poly_l = -P_l + theta_l as a MixedPoly; derivative tables
        // precomputed once.
        for (int l = 0; l < d; ++l) {
            MixedPoly rp(n, d);
            if (!model_.component_is_zero(l))
                rp += mixed_from_bigraded(model_.component(l).poly(), d).scaled(-1.0);
            if (theta_.has_value()) rp += theta_->expand(l);
            r_poly_.push_back(rp);
        }
        rz_.assign(d, {});
        rz_z_.assign(d, {});
        rz_zb_.assign(d, {});
        rz_y_.assign(d, {});
        ry_.assign(d, {});
        ry_z_.assign(d, {});
        ry_zb_.assign(d, {});
        ry_y_.assign(d, {});
        for (int l = 0; l < d; ++l) {
            for (int j = 0; j < n; ++j) {
                rz_[l].push_back(r_poly_[l].dz(j));
                for (int i = 0; i < n; ++i) {
                    rz_z_[l].push_back(rz_[l][j].dz(i));
                    rz_zb_[l].push_back(rz_[l][j].dzbar(i));
                }
                for (int s = 0; s < d; ++s) rz_y_[l].push_back(rz_[l][j].dy(s));
            }
            for (int s = 0; s < d; ++s) {
                ry_[l].push_back(r_poly_[l].dy(s));
                for (int i = 0; i < model_.n(); ++i) {
                    ry_z_[l].push_back(ry_[l][s].dz(i));
                    ry_zb_[l].push_back(ry_[l][s].dzbar(i));
                }
                for (int t = 0; t < d; ++t) ry_y_[l].push_back(ry_[l][s].dy(t));
            }
        }
    }

    const Model& model() const { return model_; }
    bool perturbed() const { return perturbed_; }
    int dim() const { return 2 * model_.n() + 2 * model_.d(); }

    /// r_l(z, w) = Re w_l - P_l + theta_l.
    double defining_function(int l, const std::vector<cplx>& z,
                             const std::vector<cplx>& w) const {
        std::vector<double> y = imw(w);
        return w[l].real() + r_poly_[l].eval(z, y).real();
    }

    Eigen::VectorXd residuals(cplx zeta, const LiftPoint& p) const {
        return perturbed_ ? residuals_general(zeta, p) : residuals_model(zeta, p);
    }

    /// The explicit model system from the conormal-fibration display.
    Eigen::VectorXd residuals_model(cplx zeta, const LiftPoint& p) const {
        const int n = model_.n(), d = model_.d();
        const int k0 = model_.k0();
        Eigen::VectorXd R(dim());
        for (int l = 0; l < d; ++l)
            R(l) = p.w[l].real() - (model_.component_is_zero(l)
                                        ? 0.0
                                        : model_.component(l).eval(p.z).real());
        for (int j = 0; j < n; ++j) {
            cplx u = p.zt[j];
            for (int l = 0; l < d; ++l)
                if (!model_.component_is_zero(l))
                    u += 2.0 * p.wt[l] * model_.component(l).dz(j).eval(p.z);
            R(d + 2 * j) = 2.0 * u.real();
            R(d + 2 * j + 1) = -2.0 * u.imag();
        }
        cplx zk = LaurentPoly::ipow(zeta, k0);
        for (int l = 0; l < d; ++l) {
            cplx a = p.wt[l] / zk;
            R(d + 2 * n + l) = -2.0 * a.imag();
        }
        return R;
    }

    /// W-elimination system: (a) r_l = 0, (b) Re/Im of
    /// zt_j - zeta^{k0} sum_l c_l dz_j r_l, (c) Im c_l = 0, with
    /// c = zeta^{-k0} wt^T W^{-1} and W_{ls} = d_{w_s} r_l.
    Eigen::VectorXd residuals_general(cplx zeta, const LiftPoint& p) const {
        const int n = model_.n(), d = model_.d();
        std::vector<double> y = imw(p.w);
        Eigen::VectorXd R(dim());
        for (int l = 0; l < d; ++l)
            R(l) = p.w[l].real() + r_poly_[l].eval(p.z, y).real();

        Eigen::RowVectorXcd c = eliminate_c(zeta, p, y);
        cplx zk = LaurentPoly::ipow(zeta, model_.k0());
        for (int j = 0; j < n; ++j) {
            cplx v = p.zt[j];
            for (int l = 0; l < d; ++l) v -= zk * c(l) * rz_[l][j].eval(p.z, y);
            R(d + 2 * j) = 2.0 * v.real();
            R(d + 2 * j + 1) = -2.0 * v.imag();
        }
        for (int l = 0; l < d; ++l) R(d + 2 * n + l) = -c(l).imag();
        return R;
    }

    /// The real coefficient functions c_l(zeta) recovered from the lift by
    /// W-elimination (exact multiples of wt for the model).
    Eigen::RowVectorXcd eliminate_c(cplx zeta, const LiftPoint& p,
                                    const std::vector<double>& y) const {
        const int d = model_.d();
        Eigen::MatrixXcd W = w_matrix(p.z, y);
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(W);
        double cond = W.norm() * (lu.isInvertible() ? lu.inverse().norm() : 1e300);
        if (!lu.isInvertible() || cond > 1e12)
            throw EliminationError("w-elimination matrix singular or ill-conditioned", cond);
        Eigen::RowVectorXcd wt(d);
        for (int l = 0; l < d; ++l) wt(l) = p.wt[l];
        Eigen::RowVectorXcd c = wt * lu.inverse();
        return c / LaurentPoly::ipow(zeta, model_.k0());
    }

    Eigen::RowVectorXcd eliminate_c(cplx zeta, const LiftPoint& p) const {
        return eliminate_c(zeta, p, imw(p.w));
    }

    /// W_{ls} = d_{w_s} r_l = delta/2 + theta_{l, y_s} / (2i).
    Eigen::MatrixXcd w_matrix(const std::vector<cplx>& z, const std::vector<double>& y) const {
        const int d = model_.d();
        Eigen::MatrixXcd W = 0.5 * Eigen::MatrixXcd::Identity(d, d);
        const cplx half_over_i(0.0, -0.5);
        for (int l = 0; l < d; ++l)
            for (int s = 0; s < d; ++s)
                if (!ry_[l][s].is_zero()) W(l, s) += half_over_i * ry_[l][s].eval(z, y);
        return W;
    }

    /// d r_l / d z_j at a point (Wirtinger, holding zbar and Im w).
    cplx dz_defining(int l, int j, const std::vector<cplx>& z,
                     const std::vector<double>& y) const {
        return rz_[l][j].eval(z, y);
    }

    /// Jacobian of the residual vector with respect to the 2(2n+2d) real
    /// coordinates (Re z_1, Im z_1, ..., Re w~_d, Im w~_d), analytically.
    Eigen::MatrixXd point_jacobian(cplx zeta, const LiftPoint& p) const {
        const int n = model_.n(), d = model_.d();
        const int nv = 2 * n + 2 * d;  // complex variables
        std::vector<double> y = imw(p.w);

        // Wirtinger partials dR/dx for each residual row and each complex
        // variable x in the order (z, w, zt, wt); conjugate partials follow
        // from R real: dR/dxbar = conj(dR/dx).
        Eigen::MatrixXcd Wp = Eigen::MatrixXcd::Zero(dim(), nv);

        Eigen::MatrixXcd W = w_matrix(p.z, y);
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(W);
        if (!lu.isInvertible())
            throw EliminationError("w-elimination matrix singular", 1e300);
        Eigen::MatrixXcd Winv = lu.inverse();
        Eigen::RowVectorXcd wt(d);
        for (int l = 0; l < d; ++l) wt(l) = p.wt[l];
        cplx zk = LaurentPoly::ipow(zeta, model_.k0());
        Eigen::RowVectorXcd c = (wt * Winv) / zk;

        const cplx inv2i(0.0, -0.5);  // 1/(2i)

        // g_{lj} = dz_j r_l and its first partials at the point.
        Eigen::MatrixXcd g(d, n), g_z(d, n * n), g_zb(d, n * n), g_y(d, n * d);
        for (int l = 0; l < d; ++l)
            for (int j = 0; j < n; ++j) {
                g(l, j) = rz_[l][j].eval(p.z, y);
                for (int i = 0; i < n; ++i) {
                    g_z(l, j * n + i) = rz_z_[l][j * n + i].eval(p.z, y);
                    g_zb(l, j * n + i) = rz_zb_[l][j * n + i].eval(p.z, y);
                }
                for (int s = 0; s < d; ++s) g_y(l, j * d + s) = rz_y_[l][j * d + s].eval(p.z, y);
            }

        // dW/dz_i, dW/dzbar_i, dW/dy_t as d x d matrices.
        auto dW_dz = [&](int i) {
            Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(d, d);
            for (int l = 0; l < d; ++l)
                for (int s = 0; s < d; ++s)
                    M(l, s) = inv2i * ry_z_[l][s * n + i].eval(p.z, y);
            return M;
        };
        auto dW_dzb = [&](int i) {
            Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(d, d);
            for (int l = 0; l < d; ++l)
                for (int s = 0; s < d; ++s)
                    M(l, s) = inv2i * ry_zb_[l][s * n + i].eval(p.z, y);
            return M;
        };
        auto dW_dy = [&](int t) {
            Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(d, d);
            for (int l = 0; l < d; ++l)
                for (int s = 0; s < d; ++s)
                    M(l, s) = inv2i * ry_y_[l][s * d + t].eval(p.z, y);
            return M;
        };

        // Partials of the row vector c with respect to each complex variable
        // and its conjugate.  c depends on (z, zbar, y, wt).
        std::vector<Eigen::RowVectorXcd> c_z(n), c_zb(n), c_w(d), c_wb(d), c_wt(d);
        const bool flat = !perturbed_;  // W constant, c = 2 zeta^{-k0} wt
        for (int i = 0; i < n; ++i) {
            if (flat) {
                c_z[i] = Eigen::RowVectorXcd::Zero(d);
                c_zb[i] = Eigen::RowVectorXcd::Zero(d);
            } else {
                c_z[i] = -(c * dW_dz(i)) * Winv;
                c_zb[i] = -(c * dW_dzb(i)) * Winv;
            }
        }
        for (int s = 0; s < d; ++s) {
            if (flat) {
                c_w[s] = Eigen::RowVectorXcd::Zero(d);
                c_wb[s] = Eigen::RowVectorXcd::Zero(d);
            } else {
                Eigen::MatrixXcd dWy = dW_dy(s);
                c_w[s] = -(c * (inv2i * dWy)) * Winv;
                c_wb[s] = -(c * (-inv2i * dWy)) * Winv;
            }
            c_wt[s] = Winv.row(s) / zk;
        }

        // Row block (a): r_l.
        for (int l = 0; l < d; ++l) {
            for (int i = 0; i < n; ++i) Wp(l, i) = g(l, i);
            for (int s = 0; s < d; ++s)
                Wp(l, n + s) = 0.5 * (l == s ? 1.0 : 0.0) +
                               inv2i * (ry_[l][s].is_zero() ? cplx(0.0)
                                                            : ry_[l][s].eval(p.z, y));
        }

        // Row blocks (b) and (c) need holomorphic and antiholomorphic
        // partials of v_j = zt_j - zeta^{k0} sum_l c_l g_{lj} separately,
        // since v is not real.
        Eigen::MatrixXcd v_x = Eigen::MatrixXcd::Zero(n, nv);   // dv/dx
        Eigen::MatrixXcd v_xb = Eigen::MatrixXcd::Zero(n, nv);  // dv/dxbar
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                cplx az = 0.0, azb = 0.0;
                for (int l = 0; l < d; ++l) {
                    az += c_z[i](l) * g(l, j) + c(l) * g_z(l, j * n + i);
                    azb += c_zb[i](l) * g(l, j) + c(l) * g_zb(l, j * n + i);
                }
                v_x(j, i) = -zk * az;
                v_xb(j, i) = -zk * azb;
            }
            for (int s = 0; s < d; ++s) {
                cplx aw = 0.0, awb = 0.0;
                for (int l = 0; l < d; ++l) {
                    aw += c_w[s](l) * g(l, j) + c(l) * inv2i * g_y(l, j * d + s);
                    awb += c_wb[s](l) * g(l, j) - c(l) * inv2i * g_y(l, j * d + s);
                }
                v_x(j, n + s) = -zk * aw;
                v_xb(j, n + s) = -zk * awb;
                cplx awt = 0.0;
                for (int l = 0; l < d; ++l) awt += c_wt[s](l) * g(l, j);
                v_x(j, n + d + n + s) = -zk * awt;
            }
            v_x(j, n + d + j) = 1.0;  // d v_j / d zt_j
        }

        Eigen::MatrixXd J(dim(), 2 * nv);
        auto put_real_row = [&](int row, const Eigen::RowVectorXcd& dRdx) {
            for (int v = 0; v < nv; ++v) {
                J(row, 2 * v) = 2.0 * dRdx(v).real();
                J(row, 2 * v + 1) = -2.0 * dRdx(v).imag();
            }
        };

        for (int l = 0; l < d; ++l) put_real_row(l, Wp.row(l));
        for (int j = 0; j < n; ++j) {
            Eigen::RowVectorXcd re_row(nv), im_row(nv);
            for (int v = 0; v < nv; ++v) {
                // R = v + vbar: dR/dx = dv/dx + conj(dv/dxbar)
                re_row(v) = v_x(j, v) + std::conj(v_xb(j, v));
                // R = i(v - vbar): dR/dx = i dv/dx - i conj(dv/dxbar)
                im_row(v) = cplx(0.0, 1.0) * (v_x(j, v) - std::conj(v_xb(j, v)));
            }
            put_real_row(d + 2 * j, re_row);
            put_real_row(d + 2 * j + 1, im_row);
        }
        for (int l = 0; l < d; ++l) {
            Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(nv);
            // R = -Im c_l = (i/2)(c_l - conj c_l): dR/dx = (i/2)(dc_l/dx -
            // conj(dc_l/dxbar)); c is holomorphic in wt.
            const cplx ihalf(0.0, 0.5);
            for (int i = 0; i < n; ++i)
                row(i) = ihalf * (c_z[i](l) - std::conj(c_zb[i](l)));
            for (int s = 0; s < d; ++s) {
                row(n + s) = ihalf * (c_w[s](l) - std::conj(c_wb[s](l)));
                row(n + d + n + s) = ihalf * c_wt[s](l);
            }
            put_real_row(d + 2 * model_.n() + l, row);
        }
        return J;
    }

    static std::vector<double> imw(const std::vector<cplx>& w) {
        std::vector<double> y(w.size());
        for (size_t i = 0; i < w.size(); ++i) y[i] = w[i].imag();
        return y;
    }

private:
    Model model_;
    std::optional<Perturbation> theta_;
    bool perturbed_ = false;
    std::vector<MixedPoly> r_poly_;
    // Derivative tables, indexed [l][j] / [l][j*n+i] / [l][j*d+s] etc.
    std::vector<std::vector<MixedPoly>> rz_, rz_z_, rz_zb_, rz_y_;
    std::vector<std::vector<MixedPoly>> ry_, ry_z_, ry_zb_, ry_y_;
};

}  // namespace disctk
