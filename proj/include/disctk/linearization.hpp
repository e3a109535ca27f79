#pragma once

// The linearized boundary operator f -> 2Re[conj(G) f] at the initial lift,
// its numerical kernel, and the partial indices of the reduced symbol via
// block-Toeplitz shift profiles.

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "disctk/discs.hpp"

namespace disctk {

/// G in the (w, z, z~, w~) column/row ordering: block upper triangular with
/// (1/2)I_d, G_2(zeta), -i zeta^{k0} I_d on the diagonal.  Rows are the
/// conjugate Wirtinger derivatives of the lifted residuals along f0.
struct LinearizedOperator {
    LaurentMatrix G;       // (2n+2d) x (2n+2d)
    LaurentMatrix Q, S;    // reduced-symbol data
    int n = 0, d = 0, k0 = 0, D1 = 2;
    int N = 24;            // truncation degree of the coefficient domain
    bool pinned = false;   // impose delta g~(1) = 0

    int dim() const { return 2 * n + 2 * d; }

    /// The 2n x 2n factor G~2 of the permuted middle block, columns
    /// interleaved (z~_1, z_1, ..., z~_n, z_n).
    LaurentMatrix gtilde2() const {
        LaurentMatrix M(2 * n, 2 * n);
        const cplx I(0.0, 1.0);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                if (i == j) {
                    M.at(2 * j, 2 * i) = LaurentPoly::constant(1.0);
                    M.at(2 * j + 1, 2 * i) = LaurentPoly::constant(-I);
                }
                M.at(2 * j, 2 * i + 1) = Q.at(j, i) + S.at(j, i);
                M.at(2 * j + 1, 2 * i + 1) = Q.at(j, i).scaled(I) - S.at(j, i).scaled(I);
            }
        }
        return M;
    }
};

namespace detail {

/// Column layout of the constrained coefficient domain at truncation N:
/// w, z carry vanish order 1; z~ order D1-1; w~ order 0.  Each slot holds
/// N + 1 complex core coefficients.
struct DomainLayout {
    int n, d, D1, N;
    int slots() const { return 2 * n + 2 * d; }
    int coeffs_per_slot() const { return N + 1; }
    int real_dim() const { return 2 * slots() * coeffs_per_slot(); }

    int vanish_order(int slot) const {
        if (slot < d) return 1;                    // w
        if (slot < d + n) return 1;                // z
        if (slot < d + 2 * n) return D1 - 1;       // z~
        return 0;                                  // w~
    }

    /// Value of the basis disc (1-zeta)^m zeta^j for a slot at zeta.
    cplx basis(int slot, int j, cplx zeta) const {
        cplx v = LaurentPoly::ipow(zeta, j);
        for (int s = 0; s < vanish_order(slot); ++s) v *= (1.0 - zeta);
        return v;
    }

    Lift to_lift(const Eigen::VectorXd& x) const {
        Lift L;
        int pos = 0;
        auto pull = [&](int slot) {
            std::vector<cplx> core(coeffs_per_slot());
            for (int j = 0; j < coeffs_per_slot(); ++j, pos += 2)
                core[j] = cplx(x(pos), x(pos + 1));
            return ConstrainedDisc(vanish_order(slot), std::move(core));
        };
        for (int l = 0; l < d; ++l) L.g.push_back(pull(l));
        for (int i = 0; i < n; ++i) L.h.push_back(pull(d + i));
        for (int i = 0; i < n; ++i) L.ht.push_back(pull(d + n + i));
        for (int l = 0; l < d; ++l) L.gt.push_back(pull(d + 2 * n + l));
        return L;
    }
};

}  // namespace detail

/// Boundary value of 2Re[conj(G) f] at zeta, with f given as a Lift.  The
/// column order of G is (w, z, z~, w~).
inline Eigen::VectorXd linearized_residual(const LinearizedOperator& op, const Lift& f,
                                           cplx zeta) {
    const int R = op.dim();
    LiftPoint p = f.eval(zeta);
    std::vector<cplx> cols;
    for (cplx v : p.w) cols.push_back(v);
    for (cplx v : p.z) cols.push_back(v);
    for (cplx v : p.zt) cols.push_back(v);
    for (cplx v : p.wt) cols.push_back(v);
    Eigen::VectorXd out(R);
    for (int r = 0; r < R; ++r) {
        cplx acc = 0.0;
        for (int c = 0; c < R; ++c) {
            if (op.G.at(r, c).is_zero()) continue;
            acc += std::conj(op.G.at(r, c).eval(zeta)) * cols[c];
        }
        out(r) = 2.0 * acc.real();
    }
    return out;
}

/// Assembles G for the unperturbed model and self-checks every entry against
/// finite differences of the lifted residuals at the initial lift.
inline LinearizedOperator assemble_G(const Model& m, const CandidatePair& p,
                                     bool fd_check = true) {
    const int n = m.n(), d = m.d(), k0 = m.k0();
    LinearizedOperator op;
    op.n = n;
    op.d = d;
    op.k0 = k0;
    op.D1 = m.D1();
    op.G = LaurentMatrix(2 * n + 2 * d, 2 * n + 2 * d);
    QSPair qs = build_QS(m, p);
    op.Q = qs.Q;
    op.S = qs.S;

    const cplx I(0.0, 1.0);
    // Row block (a): R_l = Re w_l - P_l.
    for (int l = 0; l < d; ++l) {
        op.G.at(l, l) = LaurentPoly::constant(0.5);
        if (m.component_is_zero(l)) continue;
        for (int i = 0; i < n; ++i)
            op.G.at(l, d + i) =
                m.component(l).dzbar(i).restrict_to_ray(p.V).scaled(-1.0);
    }
    // Middle rows: u_j = z~_j + 2 sum_l w~_l P_{l,z_j}, rows u + ubar and
    // i(u - ubar).  Along f0, w~_l = (c_l / 2) zeta^{k0}.
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            LaurentPoly a, b;  // du/dzbar_i and conj(du/dz_i)
            for (int l = 0; l < d; ++l) {
                if (m.component_is_zero(l) || p.c[l] == 0.0) continue;
                a = a + m.component(l).dz_dzbar(j, i).restrict_to_ray(p.V).scaled(p.c[l]);
                b = b + m.component(l).dzbar_dzbar(j, i).restrict_to_ray(p.V).scaled(p.c[l]);
            }
            a = a.shifted(k0);
            b = b.shifted(-k0);
            op.G.at(d + 2 * j, d + i) = a + b;
            op.G.at(d + 2 * j + 1, d + i) = a.scaled(I) - b.scaled(I);
        }
        op.G.at(d + 2 * j, d + n + j) = LaurentPoly::constant(1.0);
        op.G.at(d + 2 * j + 1, d + n + j) = LaurentPoly::constant(-I);
        for (int l = 0; l < d; ++l) {
            if (m.component_is_zero(l)) continue;
            LaurentPoly pzb = m.component(l).dzbar(j).restrict_to_ray(p.V);
            op.G.at(d + 2 * j, d + 2 * n + l) = pzb.scaled(2.0);
            op.G.at(d + 2 * j + 1, d + 2 * n + l) = pzb.scaled(-2.0 * I);
        }
    }
    // Reality rows: -2 Im(zeta^{-k0} w~_l).
    for (int l = 0; l < d; ++l)
        op.G.at(d + 2 * n + l, d + 2 * n + l) = LaurentPoly::monomial(k0, -I);

    if (fd_check) {
        LiftedDefiningSystem sys(m);
        Lift f0 = initial_lift(m, p);
        detail::DomainLayout lay{n, d, m.D1(), 2};
        std::mt19937_64 rng(20240517);
        std::normal_distribution<double> normal(0.0, 1.0);
        BoundaryGrid grid(16);
        const double eps = 1e-6;
        for (int trial = 0; trial < 32; ++trial) {
            Eigen::VectorXd x(lay.real_dim());
            for (int i = 0; i < x.size(); ++i) x(i) = normal(rng);
            Lift dir = lay.to_lift(x);
            cplx zeta = grid.point(trial % grid.size());
            Eigen::VectorXd lin = linearized_residual(op, dir, zeta);

            LiftPoint base = f0.eval(zeta), dp = dir.eval(zeta);
            auto shift = [&](double t) {
                LiftPoint q = base;
                for (int i = 0; i < n; ++i) q.z[i] += t * dp.z[i];
                for (int l = 0; l < d; ++l) q.w[l] += t * dp.w[l];
                for (int i = 0; i < n; ++i) q.zt[i] += t * dp.zt[i];
                for (int l = 0; l < d; ++l) q.wt[l] += t * dp.wt[l];
                return sys.residuals(zeta, q);
            };
            Eigen::VectorXd fd = (shift(eps) - shift(-eps)) / (2.0 * eps);
            double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
            if ((lin - fd).cwiseAbs().maxCoeff() > 1e-6 * scale)
                throw std::runtime_error(
                    "assemble_G: finite-difference check failed (trial " +
                    std::to_string(trial) + ", err " +
                    std::to_string((lin - fd).cwiseAbs().maxCoeff() / scale) + ")");
        }
    }
    return op;
}

/// Maslov index of the symbol -conj(G)^{-1} G.  The middle block of G
/// degenerates at zeta = 1 whenever D1 > 2 (the cleared (1-zetabar)^{D1-2}
/// factor), so the winding is taken on the reduced factor G~2: the w block
/// contributes 0, the reality block 2 d k0, and the middle block twice the
/// winding of det G~2.
inline int maslov_index(const LinearizedOperator& op,
                        const BoundaryGrid& grid = BoundaryGrid(4096)) {
    LaurentMatrix gt2 = op.gtilde2();
    double total = 0.0;
    cplx prev = gt2.eval(grid.point(0)).determinant();
    for (int j = 1; j <= grid.size(); ++j) {
        cplx cur = gt2.eval(grid.point(j % grid.size())).determinant();
        if (cur == 0.0 || prev == 0.0)
            throw std::runtime_error("maslov_index: det G~2 vanishes on the circle");
        total += std::arg(cur / prev);
        prev = cur;
    }
    int wind = static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
    return 2 * wind + 2 * op.d * op.k0;
}

/// Samples of -conj(G~2^{-1}) G~2 with the determinant identity
/// det G~2 = (2i)^n det Q enforced at every sample.
inline std::vector<Eigen::MatrixXcd> reduced_symbol(const LinearizedOperator& op,
                                                    const BoundaryGrid& grid) {
    LaurentMatrix gt2 = op.gtilde2();
    LaurentPoly detq = op.Q.det();
    LaurentPoly det_gt2 = gt2.det();
    if (!invertible_on_circle(circle_distance(det_gt2), max_modulus_on_circle(det_gt2)))
        throw std::runtime_error("reduced_symbol: det G~2 has a root on the circle");
    cplx two_i_n = LaurentPoly::ipow(cplx(0.0, 2.0), op.n);
    std::vector<Eigen::MatrixXcd> out;
    out.reserve(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        cplx zeta = grid.point(j);
        Eigen::MatrixXcd M = gt2.eval(zeta);
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(M);
        cplx det = lu.determinant();
        cplx want = two_i_n * detq.eval(zeta);
        if (std::abs(det - want) > 1e-10 * std::max(1.0, std::abs(want)))
            throw std::runtime_error(
                "reduced_symbol: det G~2 != (2i)^n det Q at sample " + std::to_string(j));
        double cond =
            M.norm() * (lu.isInvertible() ? lu.inverse().norm() : 1e300);
        if (!lu.isInvertible() || cond > 1e12)
            throw std::runtime_error("reduced_symbol: near-singular G~2 at sample " +
                                     std::to_string(j) + " (condition " +
                                     std::to_string(cond) + ")");
        out.push_back(-M.conjugate().inverse() * M);
    }
    return out;
}

struct PartialIndices {
    std::vector<int> indices;  // sorted ascending
    int sum = 0;
    bool conclusive = false;
    std::string note;
    std::vector<int> profile;  // k(s) over the shift window
    int window_lo = 0;
};

namespace detail {

/// Numerical nullity of a real or complex matrix: count of singular values
/// <= sigma_max * 1e-8, valid only if the spectral gap across the cut is
/// >= 1e4.  Returns -1 when the gap is absent.
inline int svd_nullity(const Eigen::MatrixXcd& A, double* gap_out = nullptr) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
    const auto& s = svd.singularValues();
    const int k = static_cast<int>(s.size());
    if (k == 0) return 0;
    double smax = s(0);
    if (smax == 0.0) return k;
    double thresh = smax * 1e-8;
    int nullity = 0;
    while (nullity < k && s(k - 1 - nullity) <= thresh) ++nullity;
    double gap = 1e300;
    if (nullity > 0 && nullity < k) {
        double kept = s(k - 1 - nullity);       // smallest kept
        double dropped = s(k - nullity);         // largest discarded
        gap = dropped > 0.0 ? kept / dropped : 1e300;
    }
    if (gap_out) *gap_out = gap;
    if (nullity > 0 && nullity < k && gap < 1e4) return -1;
    return nullity;
}

/// Fourier block coefficients Phi_m, m in [-K, K], of a sampled matrix symbol.
inline std::vector<Eigen::MatrixXcd> symbol_blocks(
    const std::vector<Eigen::MatrixXcd>& samples, int K) {
    const int N = static_cast<int>(samples.size());
    const int p = static_cast<int>(samples[0].rows());
    std::vector<Eigen::MatrixXcd> blocks(2 * K + 1, Eigen::MatrixXcd::Zero(p, p));
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            std::vector<cplx> v(N);
            for (int t = 0; t < N; ++t) v[t] = samples[t](a, b);
            auto c = fourier_coeffs(std::move(v));
            for (int m = -K; m <= K; ++m)
                blocks[m + K](a, b) = c[(m % N + N) % N];
        }
    return blocks;
}

/// Finite section T_sec[zeta^{-s} Phi]: blocks Phi_{j-k-s}, j,k = 0..sec-1.
inline Eigen::MatrixXcd toeplitz_section(const std::vector<Eigen::MatrixXcd>& blocks,
                                         int K, int s, int sec) {
    const int p = static_cast<int>(blocks[0].rows());
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(p * sec, p * sec);
    for (int j = 0; j < sec; ++j)
        for (int k = 0; k < sec; ++k) {
            int m = j - k - s;
            if (m < -K || m > K) continue;
            T.block(j * p, k * p, p, p) = blocks[m + K];
        }
    return T;
}

/// Extracts the index multiset from a shift profile k(s) = sum_j |kappa_j -
/// sign * s| using second differences.  The window [lo, hi] must contain all
/// indices strictly inside.
inline std::vector<int> indices_from_profile(const std::vector<int>& k, int lo, int sign) {
    std::vector<int> out;
    for (size_t i = 1; i + 1 < k.size(); ++i) {
        int dd = k[i - 1] - 2 * k[i] + k[i + 1];
        if (dd < 0 || dd % 2 != 0) return {};  // not a valid profile
        int mult = dd / 2;
        int s = lo + static_cast<int>(i);
        for (int c = 0; c < mult; ++c) out.push_back(sign * s);
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct ProfileResult {
    std::vector<int> profile;
    bool ok = true;
};

inline ProfileResult shift_profile(const std::vector<Eigen::MatrixXcd>& blocks, int K,
                                   int lo, int hi, int sec) {
    ProfileResult r;
    for (int s = lo; s <= hi; ++s) {
        // Pad the section by |s|: the nullity grows like sum |kappa_j - s| and
        // needs that much room before boundary clipping distorts it.
        int nl = svd_nullity(toeplitz_section(blocks, K, s, sec + std::abs(s)));
        if (nl < 0) {
            r.ok = false;
            nl = 0;
        }
        r.profile.push_back(nl);
    }
    return r;
}

/// Orientation of the shift-profile convention, fixed by recovering the
/// indices of diag(zeta^2, zeta^{-1}).  Returns +1 or -1.
inline int calibrate_orientation() {
    BoundaryGrid grid(64);
    std::vector<Eigen::MatrixXcd> samples;
    for (int j = 0; j < grid.size(); ++j) {
        Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(2, 2);
        M(0, 0) = LaurentPoly::ipow(grid.point(j), 2);
        M(1, 1) = LaurentPoly::ipow(grid.point(j), -1);
        samples.push_back(M);
    }
    auto blocks = symbol_blocks(samples, 8);
    const int lo = -4, hi = 4, sec = 12;
    ProfileResult pr = shift_profile(blocks, 8, lo, hi, sec);
    if (!pr.ok) throw std::runtime_error("partial_indices: calibration profile unstable");
    std::vector<int> want{-1, 2};
    for (int sign : {1, -1})
        if (indices_from_profile(pr.profile, lo, sign) == want) return sign;
    throw std::runtime_error("partial_indices: calibration failed to recover {2, -1}");
}

}  // namespace detail

/// Partial indices of -conj(G~2^{-1}) G~2 by the Toeplitz shift profile.
/// Returns an inconclusive report rather than a guessed integer when the
/// singular-value gaps or truncation stability are absent.
inline PartialIndices partial_indices(const LinearizedOperator& op) {
    static const int orientation = detail::calibrate_orientation();

    PartialIndices out;
    BoundaryGrid grid(256);
    std::vector<Eigen::MatrixXcd> samples = reduced_symbol(op, grid);
    // Index magnitudes are bounded by the Laurent bandwidth of G~2 (the
    // winding of det is, and a Birkhoff factor cannot exceed it here).
    int bw = op.gtilde2().bandwidth() + op.n * (2 * op.k0 + 1);
    int K = std::max(2 * bw + 4, 16);
    auto blocks = detail::symbol_blocks(samples, K);
    const int lo = -(bw + 2), hi = bw + 2;
    out.window_lo = lo;

    std::vector<int> got;
    for (int sec : {24, 28, 32}) {
        detail::ProfileResult pr = detail::shift_profile(blocks, K, lo, hi, sec);
        if (!pr.ok) {
            out.note = "singular-value gap absent at section size " + std::to_string(sec);
            return out;
        }
        std::vector<int> idx = detail::indices_from_profile(pr.profile, lo, orientation);
        if (sec == 24) {
            got = idx;
            out.profile = pr.profile;
        } else if (idx != got) {
            out.note = "profile not stable across truncations";
            return out;
        }
    }
    if (static_cast<int>(got.size()) != 2 * op.n) {
        out.note = "recovered " + std::to_string(got.size()) + " indices, expected " +
                   std::to_string(2 * op.n);
        return out;
    }
    out.indices = got;
    for (int k : got) out.sum += k;
    out.conclusive = true;
    return out;
}

struct KernelReport {
    int nullity = -1;
    bool conclusive = false;
    std::vector<Lift> basis;
    double gap = 0.0;
    std::vector<int> truncations;
    int expected_m = -1;
    bool match = false;
    std::string note;
};

namespace detail {

inline Eigen::MatrixXd kernel_matrix(const LinearizedOperator& op, const DomainLayout& lay,
                                     int samples) {
    const int R = op.dim();
    const int rows = R * samples + (op.pinned ? 2 * op.d : 0);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, lay.real_dim());
    for (int t = 0; t < samples; ++t) {
        double ang = 2.0 * std::numbers::pi * t / samples;
        cplx zeta(std::cos(ang), std::sin(ang));
        // G row entries at zeta, conjugated once.
        Eigen::MatrixXcd Gc(R, R);
        for (int r = 0; r < R; ++r)
            for (int c = 0; c < R; ++c)
                Gc(r, c) = std::conj(op.G.at(r, c).eval(zeta));
        int col = 0;
        for (int slot = 0; slot < lay.slots(); ++slot) {
            for (int j = 0; j < lay.coeffs_per_slot(); ++j, col += 2) {
                cplx b = lay.basis(slot, j, zeta);
                for (int r = 0; r < R; ++r) {
                    cplx gb = Gc(r, slot) * b;
                    A(R * t + r, col) = 2.0 * gb.real();
                    A(R * t + r, col + 1) = -2.0 * gb.imag();  // 2Re[gb * i x]
                }
            }
        }
    }
    if (op.pinned) {
        // delta g~_l(1) = 0: real and imaginary part of the coefficient sum.
        const int base = R * samples;
        for (int l = 0; l < op.d; ++l) {
            int slot = op.d + 2 * op.n + l;
            int col0 = 2 * slot * lay.coeffs_per_slot();
            for (int j = 0; j < lay.coeffs_per_slot(); ++j) {
                A(base + 2 * l, col0 + 2 * j) = 1.0;
                A(base + 2 * l + 1, col0 + 2 * j + 1) = 1.0;
            }
        }
    }
    return A;
}

}  // namespace detail

/// Nullity and basis of the truncated linearized operator on the constrained
/// coefficient domain.  Requires agreement across truncations N, N+4, N+8.
inline KernelReport kernel(const LinearizedOperator& op, int expected_m = -1) {
    KernelReport rep;
    rep.expected_m = expected_m;
    int bw = op.G.bandwidth();
    int base_nullity = -2;
    Eigen::MatrixXd V0;
    detail::DomainLayout lay0{};
    for (int N : {op.N, op.N + 4, op.N + 8}) {
        rep.truncations.push_back(N);
        detail::DomainLayout lay{op.n, op.d, op.D1, N};
        int samples = 4 * (N + bw);
        Eigen::MatrixXd A = detail::kernel_matrix(op, lay, samples);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
        const auto& s = svd.singularValues();
        const int k = static_cast<int>(s.size());
        double smax = s(0);
        double thresh = smax * 1e-8;
        int nl = 0;
        while (nl < k && s(k - 1 - nl) <= thresh) ++nl;
        double gap = 1e300;
        if (nl > 0 && nl < k) {
            double dropped = s(k - nl);
            gap = dropped > 0.0 ? s(k - 1 - nl) / dropped : 1e300;
        }
        if (nl > 0 && nl < k && gap < 1e4) {
            rep.note = "singular-value gap " + std::to_string(gap) + " < 1e4 at N = " +
                       std::to_string(N);
            return rep;
        }
        if (base_nullity == -2) {
            base_nullity = nl;
            rep.gap = gap;
            V0 = svd.matrixV();
            lay0 = lay;
        } else if (nl != base_nullity) {
            rep.note = "nullity not stable across truncations (" +
                       std::to_string(base_nullity) + " vs " + std::to_string(nl) +
                       " at N = " + std::to_string(N) + ")";
            return rep;
        }
    }
    rep.nullity = base_nullity;
    rep.conclusive = true;
    const int cols = static_cast<int>(V0.cols());
    for (int i = 0; i < base_nullity; ++i)
        rep.basis.push_back(lay0.to_lift(V0.col(cols - 1 - i)));
    rep.match = (expected_m >= 0) &&
                (rep.nullity == (op.pinned ? expected_m - op.d : expected_m));
    return rep;
}

}  // namespace disctk
