#pragma once

// Shared model fixtures for the test suite.

#include <optional>
#include <vector>

#include "disctk/admissibility.hpp"
#include "disctk/model.hpp"

namespace fixtures {

using disctk::cplx;
using disctk::HermitianPoly;
using disctk::Model;
using disctk::MultiIndex;

inline MultiIndex mi(std::vector<int> e) { return MultiIndex(std::move(e)); }

/// n = 1, d = 1, P = z zbar (the sphere Re w = |z|^2).
inline Model sphere() {
    HermitianPoly p(1, 2, {{mi({1}), mi({1}), 1.0}});
    return Model(1, 1, {p});
}

/// n = 1, d = 1, P = z^2 zbar^2 + t z^3 zbar + t z zbar^3 (Re w = |z|^4 +
/// 2t Re(z^3 zbar)); admissible iff 0 < t < 2/3.
inline Model quartic(double t) {
    HermitianPoly p(1, 4,
                    {{mi({2}), mi({2}), 1.0}, {mi({3}), mi({1}), t}});
    return Model(1, 1, {p});
}

/// Quadric P_l = sum A_l[p][q] z_p zbar_q for Hermitian matrices A_l.
inline Model quadric(int n, const std::vector<std::vector<std::vector<cplx>>>& As) {
    std::vector<std::optional<HermitianPoly>> comps;
    for (const auto& A : As) {
        std::vector<std::tuple<MultiIndex, MultiIndex, cplx>> terms;
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                if (A[p][q] != 0.0)
                    terms.emplace_back(MultiIndex::unit(n, p), MultiIndex::unit(n, q),
                                       A[p][q]);
        comps.emplace_back(HermitianPoly(n, 2, terms, false));
    }
    return Model(n, static_cast<int>(As.size()), std::move(comps));
}

/// n = 2, d = 2, P_1 = |z_1|^{D1} + |z_2|^{D1}, P_2 = |z_1|^{D2} + |z_2|^{D2}
/// with even D1 < D2; Q is diagonal with equal entries.
inline Model two_norm_powers(int D1, int D2) {
    auto comp = [&](int D) {
        int a = D / 2;
        return HermitianPoly(2, D,
                             {{mi({a, 0}), mi({a, 0}), 1.0}, {mi({0, a}), mi({0, a}), 1.0}});
    };
    return Model(2, 2, {comp(D1), comp(D2)});
}

/// Decoupled model: P_1 = |z_1|^2, P_2 = |z_2|^4; never admissible since
/// Q_22 picks up a (1 - zeta)^2 factor.
inline Model decoupled() {
    HermitianPoly p1(2, 2, {{mi({1, 0}), mi({1, 0}), 1.0}});
    HermitianPoly p2(2, 4, {{mi({0, 2}), mi({0, 2}), 1.0}});
    return Model(2, 2, {p1, p2});
}

inline disctk::CandidatePair pair11() { return {{1.0}, {cplx(1.0)}}; }

}  // namespace fixtures
