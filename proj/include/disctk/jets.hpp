#pragma once

// Jets of lifts at zeta = 1, computed exactly from the constrained
// coefficients, and the jet-injectivity test on a kernel basis.

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "disctk/linearization.hpp"

namespace disctk {

/// (f(1), f'(1), ..., f^{(l0)}(1)) across all 2(n+d) lift components, in
/// the order (h, g, h~, g~).
struct JetVector {
    int order = 0;
    std::vector<cplx> values;
};

inline JetVector lift_jet(const Lift& L, int l0) {
    JetVector J;
    J.order = l0;
    for (const auto* grp : {&L.h, &L.g, &L.ht, &L.gt})
        for (const auto& c : *grp)
            for (int q = 0; q <= l0; ++q) J.values.push_back(c.derivative_at_one(q));
    return J;
}

/// l0 = max{2 k0, largest partial index}; throws when the partial indices
/// are inconclusive.
inline int jet_order(int k0, const PartialIndices& pi) {
    if (!pi.conclusive)
        throw std::runtime_error("jet_order: partial indices inconclusive (" + pi.note +
                                 ")");
    int top = pi.indices.empty() ? 0 : pi.indices.back();
    return std::max(2 * k0, top);
}

inline int jet_order(const Model& m, const CandidatePair& p) {
    auto op = assemble_G(m, p, false);
    return jet_order(m.k0(), partial_indices(op));
}

struct JetRankReport {
    int l0 = 0;
    int rank = -1;
    int expected = -1;  // m, the kernel dimension
    double gap = 0.0;
    bool conclusive = false;
    bool pass = false;
    std::string note;
};

/// Rank of the real matrix whose columns are the jets of the kernel basis.
/// PASS iff rank = m with a singular-value gap >= 1e4 across the cut.
inline JetRankReport jet_injectivity(const std::vector<Lift>& basis, int l0) {
    JetRankReport rep;
    rep.l0 = l0;
    rep.expected = static_cast<int>(basis.size());
    if (basis.empty()) {
        rep.rank = 0;
        rep.conclusive = true;
        rep.pass = true;
        return rep;
    }
    const int vals = static_cast<int>(lift_jet(basis[0], l0).values.size());
    Eigen::MatrixXd A(2 * vals, rep.expected);
    for (int c = 0; c < rep.expected; ++c) {
        JetVector J = lift_jet(basis[c], l0);
        for (int r = 0; r < vals; ++r) {
            A(2 * r, c) = J.values[r].real();
            A(2 * r + 1, c) = J.values[r].imag();
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& s = svd.singularValues();
    if (s(0) == 0.0) {
        rep.rank = 0;
        rep.conclusive = true;
        rep.pass = false;
        rep.note = "jet matrix vanishes";
        return rep;
    }
    double thresh = s(0) * 1e-8;
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > thresh) ++rank;
    rep.rank = rank;
    rep.gap = 1e300;
    if (rank > 0 && rank < s.size() && s(rank) > 0.0) rep.gap = s(rank - 1) / s(rank);
    if (rank < s.size() && rep.gap < 1e4) {
        rep.note = "singular-value gap " + std::to_string(rep.gap) + " < 1e4";
        return rep;  // inconclusive
    }
    rep.conclusive = true;
    rep.pass = rank == rep.expected;
    return rep;
}

/// The reality constraint zeta^{-k0} g~ in R on the circle forces a
/// palindromic conjugate symmetry a_{2k0-l} = conj(a_l) and degree <= 2k0.
/// Returns the largest violation across the g~ components of a lift.
inline double gtilde_symmetry_violation(const Lift& L, int k0) {
    double worst = 0.0;
    for (const auto& c : L.gt) {
        if (c.order() != 0 && !c.is_zero()) return 1e300;
        for (int j = 0; j <= std::max(c.core_degree(), 2 * k0); ++j) {
            cplx a = j <= c.core_degree() ? c.core()[j] : cplx(0.0);
            if (j > 2 * k0) {
                worst = std::max(worst, std::abs(a));
                continue;
            }
            int mirror = 2 * k0 - j;
            cplx b = mirror <= c.core_degree() ? c.core()[mirror] : cplx(0.0);
            worst = std::max(worst, std::abs(b - std::conj(a)));
        }
    }
    return worst;
}

}  // namespace disctk
