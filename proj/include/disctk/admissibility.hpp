#pragma once

// The boundary symbol Q(zeta) and its companion S(zeta), the admissibility
// verdict, the index/dimension invariants and randomized pair search.

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "disctk/model.hpp"

namespace disctk {

/// Real weights c and direction V, stored unnormalized.
struct CandidatePair {
    std::vector<double> c;
    std::vector<cplx> V;
};

inline void check_pair(const Model& m, const CandidatePair& p) {
    if (static_cast<int>(p.c.size()) != m.d())
        throw std::invalid_argument("CandidatePair: c length != d");
    if (static_cast<int>(p.V.size()) != m.n())
        throw std::invalid_argument("CandidatePair: V length != n");
    bool nz = false;
    for (cplx v : p.V)
        if (v != 0.0) nz = true;
    if (!nz) throw std::invalid_argument("CandidatePair: V must be nonzero");
}

struct QSPair {
    LaurentMatrix Q, S;
};

/// Q_{i jbar} and S_{ibar jbar} from the second Wirtinger derivatives of the
/// components along z = (1-zeta)V, with the (1-zetabar)^{D1-2} factor
/// extracted by exact coefficient arithmetic.
inline QSPair build_QS(const Model& m, const CandidatePair& p) {
    check_pair(m, p);
    const int n = m.n(), d = m.d();
    const int k0 = m.k0(), pfac = m.D1() - 2;
    const double sgn = (pfac % 2 == 0) ? 1.0 : -1.0;
    QSPair out{LaurentMatrix(n, n), LaurentMatrix(n, n)};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            LaurentPoly tq, ts;
            for (int l = 0; l < d; ++l) {
                if (m.component_is_zero(l) || p.c[l] == 0.0) continue;
                tq = tq + m.component(l).dz_dzbar(i, j).restrict_to_ray(p.V).scaled(p.c[l]);
                ts = ts + m.component(l).dzbar_dzbar(i, j).restrict_to_ray(p.V).scaled(p.c[l]);
            }
            // 1/(1-zetabar)^p = (-1)^p zeta^p / (1-zeta)^p on the circle.
            double rem = 0.0;
            LaurentPoly Q =
                tq.shifted(k0 + pfac).scaled(sgn).divide_one_minus_zeta(pfac, &rem);
            if (rem > 1e-12)
                throw std::runtime_error(
                    "build_QS: (1-zetabar)^(D1-2) division left a remainder (model "
                    "invariant violation), rel. remainder " + std::to_string(rem));
            LaurentPoly S =
                ts.shifted(-k0 + pfac).scaled(sgn).divide_one_minus_zeta(pfac, &rem);
            if (rem > 1e-12)
                throw std::runtime_error("build_QS: S division left a remainder");
            Q.prune(1e-14);
            S.prune(1e-14);
            if (!Q.is_zero() && (Q.lo() < m.D1() - 1 || Q.hi() > 2 * k0 + 1))
                throw std::runtime_error(
                    "build_QS: Q entry violates divisibility/degree bounds");
            if (!S.is_zero() && S.hi() > 0)
                throw std::runtime_error("build_QS: S entry has positive exponents");
            out.Q.at(i, j) = Q;
            out.S.at(i, j) = S;
        }
    }
    return out;
}

struct AdmissibilityReport {
    LaurentMatrix Q, S;
    LaurentPoly detQ;
    bool verdict = false;
    bool identically_singular = false;
    double min_modulus = 0.0;
    double nearest_root_dist = 0.0;
};

inline AdmissibilityReport check_admissible(const Model& m, const CandidatePair& p,
                                            const BoundaryGrid& grid = BoundaryGrid(4096)) {
    AdmissibilityReport rep;
    QSPair qs = build_QS(m, p);
    rep.Q = qs.Q;
    rep.S = qs.S;
    rep.detQ = qs.Q.det();
    rep.detQ.prune(1e-14);
    double entry_scale = 0.0;
    for (int i = 0; i < m.n(); ++i)
        for (int j = 0; j < m.n(); ++j)
            entry_scale = std::max(entry_scale, qs.Q.at(i, j).coeff_norm());
    double det_scale = std::pow(std::max(entry_scale, 1e-300), m.n());
    if (rep.detQ.is_zero() || rep.detQ.coeff_norm() < 1e-13 * det_scale) {
        rep.identically_singular = true;
        return rep;
    }
    CircleDistance cd = circle_distance(rep.detQ, grid);
    rep.min_modulus = cd.min_modulus;
    rep.nearest_root_dist = cd.nearest_root_dist;
    rep.verdict = invertible_on_circle(cd, max_modulus_on_circle(rep.detQ, grid));
    return rep;
}

struct IndexReport {
    int wind_detQ = 0;
    int ind = 0;      // ind(-conj(Q^{-1}) Q) = 2 * wind(det Q)
    int maslov = 0;   // ind + 2 d k0
    int m = 0;        // ind + d(2 k0 + 1) - 2 n (D1 - 2)
    int pinned = 0;   // m - d
};

/// Argument-principle winding of det(-conj(Q)^{-1} Q) over the sample grid;
/// cross-check for the root-counting route.
inline int winding_reduced_det(const LaurentMatrix& Q, const BoundaryGrid& grid) {
    double total = 0.0;
    auto value = [&](cplx zeta) {
        Eigen::MatrixXcd M = Q.eval(zeta);
        Eigen::MatrixXcd A = -M.conjugate().inverse() * M;
        return A.determinant();
    };
    cplx prev = value(grid.point(0));
    for (int j = 1; j <= grid.size(); ++j) {
        cplx cur = value(grid.point(j % grid.size()));
        total += std::arg(cur / prev);
        prev = cur;
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

inline IndexReport index_report(const Model& m, const CandidatePair& p,
                                const BoundaryGrid& grid = BoundaryGrid(4096)) {
    AdmissibilityReport adm = check_admissible(m, p, grid);
    if (!adm.verdict)
        throw std::invalid_argument("index_report: pair is not admissible");
    IndexReport rep;
    rep.wind_detQ = winding_number(adm.detQ, grid);
    rep.ind = 2 * rep.wind_detQ;
    int cross = winding_reduced_det(adm.Q, grid);
    if (cross != rep.ind)
        throw std::runtime_error("index_report: argument-principle cross-check disagrees (" +
                                 std::to_string(cross) + " vs " + std::to_string(rep.ind) + ")");
    rep.maslov = rep.ind + 2 * m.d() * m.k0();
    rep.m = rep.ind + m.d() * (2 * m.k0() + 1) - 2 * m.n() * (m.D1() - 2);
    rep.pinned = rep.m - m.d();
    return rep;
}

struct ScoredPair {
    CandidatePair pair;
    double score = 0.0;   // nearest-root distance of det Q to the circle
    bool admissible = false;
};

/// Deterministic randomized search: c on the unit sphere of R^d, V on the
/// unit sphere of C^n, ranked by the nearest-root distance of det Q.
inline std::vector<ScoredPair> search_pairs(const Model& m, int budget, std::uint64_t seed,
                                            bool polish = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    BoundaryGrid grid(1024);

    auto score_of = [&](const CandidatePair& p) {
        AdmissibilityReport rep = check_admissible(m, p, grid);
        if (rep.identically_singular) return std::make_pair(0.0, false);
        return std::make_pair(std::min(rep.nearest_root_dist, 1.0), rep.verdict);
    };

    std::vector<ScoredPair> out;
    for (int b = 0; b < budget; ++b) {
        CandidatePair p;
        double cn = 0.0;
        for (int l = 0; l < m.d(); ++l) {
            p.c.push_back(normal(rng));
            cn += p.c.back() * p.c.back();
        }
        cn = std::sqrt(cn);
        if (cn == 0.0) continue;
        for (auto& c : p.c) c /= cn;
        double vn = 0.0;
        for (int i = 0; i < m.n(); ++i) {
            p.V.emplace_back(normal(rng), normal(rng));
            vn += std::norm(p.V.back());
        }
        vn = std::sqrt(vn);
        if (vn == 0.0) continue;
        for (auto& v : p.V) v /= vn;
        auto [s, adm] = score_of(p);
        out.push_back({p, s, adm});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ScoredPair& a, const ScoredPair& b) { return a.score > b.score; });

    if (polish && !out.empty() && out.front().score > 0.0) {
        // coordinate ascent on the best pair, shrinking steps
        ScoredPair best = out.front();
        double step = 0.25;
        for (int round = 0; round < 6; ++round, step *= 0.5) {
            bool improved = false;
            for (int l = 0; l < m.d(); ++l) {
                for (double dir : {step, -step}) {
                    CandidatePair q = best.pair;
                    q.c[l] += dir;
                    auto [s, adm] = score_of(q);
                    if (s > best.score) {
                        best = {q, s, adm};
                        improved = true;
                    }
                }
            }
            for (int i = 0; i < m.n(); ++i) {
                for (cplx dir : {cplx(step, 0), cplx(-step, 0), cplx(0, step), cplx(0, -step)}) {
                    CandidatePair q = best.pair;
                    q.V[i] += dir;
                    bool nz = false;
                    for (cplx v : q.V)
                        if (v != 0.0) nz = true;
                    if (!nz) continue;
                    auto [s, adm] = score_of(q);
                    if (s > best.score) {
                        best = {q, s, adm};
                        improved = true;
                    }
                }
            }
            if (!improved && step < 1e-3) break;
        }
        out.insert(out.begin(), best);
    }
    return out;
}

}  // namespace disctk
