#pragma once

// Sparse arithmetic for real-valued bigraded polynomials P(z, zbar) on C^n
// and their Wirtinger derivatives.

#include <algorithm>
#include <complex>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "disctk/circlefun.hpp"

namespace disctk {

using cplx = std::complex<double>;

/// Exponent vector (i_1,...,i_n); |I| is the sum of the entries.
struct MultiIndex {
    std::vector<int> e;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries) : e(std::move(entries)) {
        for (int v : e)
            if (v < 0) throw std::invalid_argument("MultiIndex: negative exponent");
    }
    static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }
    static MultiIndex unit(int n, int i) {
        std::vector<int> v(n, 0);
        v.at(i) = 1;
        return MultiIndex(v);
    }

    int order() const { return std::accumulate(e.begin(), e.end(), 0); }
    int size() const { return static_cast<int>(e.size()); }
    int operator[](int i) const { return e[i]; }

    auto operator<=>(const MultiIndex&) const = default;
};

inline cplx pow_vec(const std::vector<cplx>& z, const MultiIndex& I) {
    cplx r = 1.0;
    for (int i = 0; i < I.size(); ++i)
        for (int p = 0; p < I[i]; ++p) r *= z[i];
    return r;
}

/// General sparse polynomial in (z, zbar): map (I, J) -> coefficient.
/// Not necessarily Hermitian-symmetric; Wirtinger derivatives of a
/// HermitianPoly live here.
class BigradedPoly {
public:
    using TermMap = std::map<std::pair<MultiIndex, MultiIndex>, cplx>;

    BigradedPoly() : n_(0) {}
    explicit BigradedPoly(int n) : n_(n) {}

    int n() const { return n_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const MultiIndex& I, const MultiIndex& J, cplx coeff) {
        if (I.size() != n_ || J.size() != n_)
            throw std::invalid_argument("BigradedPoly: multi-index length mismatch");
        if (coeff == 0.0) return;
        auto key = std::make_pair(I, J);
        auto it = terms_.find(key);
        if (it == terms_.end()) {
            terms_.emplace(key, coeff);
        } else {
            it->second += coeff;
            if (it->second == 0.0) terms_.erase(it);
        }
    }

    BigradedPoly& operator+=(const BigradedPoly& o) {
        if (n_ == 0 && terms_.empty()) n_ = o.n_;
        for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
        return *this;
    }

    BigradedPoly scaled(cplx s) const {
        BigradedPoly r(n_);
        if (s == 0.0) return r;
        for (const auto& [k, c] : terms_) r.terms_.emplace(k, s * c);
        return r;
    }

    cplx eval(const std::vector<cplx>& z) const {
        if (static_cast<int>(z.size()) != n_ && !terms_.empty())
            throw std::invalid_argument("BigradedPoly::eval: dimension mismatch");
        std::vector<cplx> zb(z.size());
        for (size_t i = 0; i < z.size(); ++i) zb[i] = std::conj(z[i]);
        cplx acc = 0.0;
        for (const auto& [k, c] : terms_)
            acc += c * pow_vec(z, k.first) * pow_vec(zb, k.second);
        return acc;
    }

    /// d/dz_i (formal, exponents decremented).
    BigradedPoly dz(int i) const {
        BigradedPoly r(n_);
        for (const auto& [k, c] : terms_) {
            if (k.first[i] == 0) continue;
            MultiIndex I = k.first;
            I.e[i] -= 1;
            r.add_term(I, k.second, c * static_cast<double>(k.first[i]));
        }
        return r;
    }

    /// d/dzbar_i.
    BigradedPoly dzbar(int i) const {
        BigradedPoly r(n_);
        for (const auto& [k, c] : terms_) {
            if (k.second[i] == 0) continue;
            MultiIndex J = k.second;
            J.e[i] -= 1;
            r.add_term(k.first, J, c * static_cast<double>(k.second[i]));
        }
        return r;
    }

    /// conj(p)(z, zbar) as a bigraded polynomial: swaps (I, J), conjugates
    /// coefficients.  Equals p itself when p is real-valued.
    BigradedPoly conjugated() const {
        BigradedPoly r(n_);
        for (const auto& [k, c] : terms_)
            r.terms_.emplace(std::make_pair(k.second, k.first), std::conj(c));
        return r;
    }

    /// Laurent expansion on the unit circle of q((1-z)V, (1-1/z)Vbar),
    /// using zbar = 1/zeta there.  Exact binomial coefficient arithmetic.
    LaurentPoly restrict_to_ray(const std::vector<cplx>& V) const {
        if (static_cast<int>(V.size()) != n_ && !terms_.empty())
            throw std::invalid_argument("restrict_to_ray: dimension mismatch");
        bool nonzero = false;
        for (cplx v : V)
            if (v != 0.0) nonzero = true;
        if (!nonzero) throw std::invalid_argument("restrict_to_ray: V must be nonzero");

        std::vector<cplx> Vb(V.size());
        for (size_t i = 0; i < V.size(); ++i) Vb[i] = std::conj(V[i]);

        LaurentPoly out;
        for (const auto& [k, c] : terms_) {
            const int a = k.first.order();   // power of (1 - zeta)
            const int b = k.second.order();  // power of (1 - 1/zeta)
            cplx scale = c * pow_vec(V, k.first) * pow_vec(Vb, k.second);
            if (scale == 0.0) continue;
            // (1-zeta)^a (1-1/zeta)^b = sum_{p,q} C(a,p)C(b,q)(-1)^{p+q} zeta^{p-q}
            for (int p = 0; p <= a; ++p) {
                for (int q = 0; q <= b; ++q) {
                    double bin = binomial(a, p) * binomial(b, q);
                    double sgn = ((p + q) % 2 == 0) ? 1.0 : -1.0;
                    out.add(p - q, scale * sgn * bin);
                }
            }
        }
        out.prune();
        return out;
    }

private:
    static double binomial(int n, int k) {
        double r = 1.0;
        for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return r;
    }

    int n_;
    TermMap terms_;
};

/// One model component P_l(z, zbar): homogeneous of degree D, Hermitian
/// coefficient symmetry, exponent band D - k <= |I| <= k.  A distinguished
/// ZERO value (no terms) is allowed.
class HermitianPoly {
public:
    /// ZERO component in ambient dimension n.
    static HermitianPoly zero(int n) { return HermitianPoly(n); }

    /// Build from a term list.  Each supplied term (I, J, a) contributes
    /// a z^I zbar^J + conj(a) z^J zbar^I unless mirror_terms is false, in
    /// which case the list is taken verbatim and validated for symmetry.
    HermitianPoly(int n, int D,
                  const std::vector<std::tuple<MultiIndex, MultiIndex, cplx>>& term_list,
                  bool mirror_terms = true, int k_override = -1)
        : n_(n), D_(D), poly_(n) {
        if (n < 1 || D < 2) throw std::invalid_argument("HermitianPoly: need n >= 1, D >= 2");
        for (const auto& [I, J, a] : term_list) {
            if (I.size() != n || J.size() != n)
                throw std::invalid_argument("HermitianPoly: multi-index length mismatch");
            if (I.order() + J.order() != D)
                throw std::invalid_argument("HermitianPoly: term violates homogeneity |I|+|J| = D");
            if (mirror_terms) {
                if (I == J) {
                    if (std::abs(a.imag()) > 1e-15 * (1.0 + std::abs(a)))
                        throw std::invalid_argument("HermitianPoly: diagonal term must be real");
                    poly_.add_term(I, J, cplx(a.real(), 0.0));
                } else {
                    poly_.add_term(I, J, a);
                    poly_.add_term(J, I, std::conj(a));
                }
            } else {
                poly_.add_term(I, J, a);
            }
        }
        if (!mirror_terms) {
            for (const auto& [key, c] : poly_.terms()) {
                auto it = poly_.terms().find(std::make_pair(key.second, key.first));
                if (it == poly_.terms().end() ||
                    std::abs(it->second - std::conj(c)) > 1e-12 * (1.0 + std::abs(c)))
                    throw std::invalid_argument(
                        "HermitianPoly: term list is not Hermitian-symmetric");
            }
        }
        if (poly_.is_zero()) throw std::invalid_argument(
            "HermitianPoly: empty term list; use HermitianPoly::zero");

        // The exponent band D-k <= |I| <= k forces k >= max(|I|,|J|) over the
        // stored terms; the |J| = k witness requirement then pins k exactly
        // (the mirrored term of any |I| = k term supplies the witness).
        int kmin = 0;
        for (const auto& [key, c] : poly_.terms())
            kmin = std::max({kmin, key.first.order(), key.second.order()});
        if (k_override >= 0) {
            if (k_override != kmin)
                throw std::invalid_argument(
                    "HermitianPoly: k override has no |J| = k witness term");
        }
        k_ = kmin;
        if (k_ > D_ - 1)
            throw std::invalid_argument(
                "HermitianPoly: pluriharmonic term present (k would exceed D - 1)");
        // D/2 <= k holds automatically since max(|I|,|J|) >= D/2.
    }

    bool is_zero() const { return zero_; }
    int n() const { return n_; }
    int degree() const { return D_; }
    int weight() const { return k_; }
    const BigradedPoly& poly() const { return poly_; }

    cplx eval(const std::vector<cplx>& z) const {
        if (zero_) return 0.0;
        return poly_.eval(z);
    }

    BigradedPoly dz(int i) const { return poly_.dz(i); }
    BigradedPoly dzbar(int i) const { return poly_.dzbar(i); }
    BigradedPoly dz_dzbar(int i, int j) const { return poly_.dz(i).dzbar(j); }
    BigradedPoly dzbar_dzbar(int i, int j) const { return poly_.dzbar(i).dzbar(j); }

private:
    explicit HermitianPoly(int n) : n_(n), D_(0), k_(0), zero_(true), poly_(n) {}

    int n_;
    int D_;
    int k_;
    bool zero_ = false;
    BigradedPoly poly_;
};

}  // namespace disctk
