#pragma once

// Finite Laurent series and matrix-valued functions on the unit circle:
// sampling, winding numbers, nonvanishing tests, conjugate functions and
// holomorphic-extension checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace disctk {

using cplx = std::complex<double>;

/// Sparse finite Laurent series sum_m c_m zeta^m.
class LaurentPoly {
public:
    LaurentPoly() = default;
    static LaurentPoly monomial(int m, cplx c) {
        LaurentPoly p;
        p.add(m, c);
        return p;
    }
    static LaurentPoly constant(cplx c) { return monomial(0, c); }

    const std::map<int, cplx>& coeffs() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    int lo() const { return c_.empty() ? 0 : c_.begin()->first; }
    int hi() const { return c_.empty() ? 0 : c_.rbegin()->first; }

    cplx coeff(int m) const {
        auto it = c_.find(m);
        return it == c_.end() ? cplx(0.0) : it->second;
    }

    void add(int m, cplx v) {
        if (v == 0.0) return;
        c_[m] += v;
    }

    /// Drops coefficients with modulus <= tol * max modulus.
    void prune(double tol = 0.0) {
        double mx = 0.0;
        for (auto& [m, v] : c_) mx = std::max(mx, std::abs(v));
        for (auto it = c_.begin(); it != c_.end();) {
            if (std::abs(it->second) <= tol * mx || it->second == 0.0)
                it = c_.erase(it);
            else
                ++it;
        }
    }

    cplx eval(cplx zeta) const {
        cplx acc = 0.0;
        for (const auto& [m, v] : c_) acc += v * ipow(zeta, m);
        return acc;
    }

    LaurentPoly operator+(const LaurentPoly& o) const {
        LaurentPoly r = *this;
        for (const auto& [m, v] : o.c_) r.add(m, v);
        r.prune();
        return r;
    }
    LaurentPoly operator-(const LaurentPoly& o) const { return *this + o.scaled(-1.0); }
    LaurentPoly operator*(const LaurentPoly& o) const {
        LaurentPoly r;
        for (const auto& [m, v] : c_)
            for (const auto& [m2, v2] : o.c_) r.add(m + m2, v * v2);
        r.prune();
        return r;
    }
    LaurentPoly scaled(cplx s) const {
        LaurentPoly r;
        for (const auto& [m, v] : c_) r.add(m, s * v);
        return r;
    }
    LaurentPoly shifted(int s) const {
        LaurentPoly r;
        for (const auto& [m, v] : c_) r.add(m + s, v);
        return r;
    }

    /// conj-on-circle: zeta^m -> zeta^{-m} with conjugated coefficients.
    /// Equals conj(f(zeta)) on |zeta| = 1.
    LaurentPoly conj_on_circle() const {
        LaurentPoly r;
        for (const auto& [m, v] : c_) r.add(-m, std::conj(v));
        return r;
    }

    LaurentPoly derivative() const {
        LaurentPoly r;
        for (const auto& [m, v] : c_)
            if (m != 0) r.add(m - 1, v * static_cast<double>(m));
        return r;
    }

    double coeff_norm() const {
        double mx = 0.0;
        for (const auto& [m, v] : c_) mx = std::max(mx, std::abs(v));
        return mx;
    }

    /// Exact division by (1 - zeta)^p.  Returns the quotient and writes the
    /// largest remainder modulus (relative to the coefficient norm) into rem.
    LaurentPoly divide_one_minus_zeta(int p, double* rem = nullptr) const {
        LaurentPoly q = *this;
        double worst = 0.0;
        for (int step = 0; step < p; ++step) {
            if (q.is_zero()) break;
            const int a = q.lo(), b = q.hi();
            LaurentPoly out;
            cplx carry = 0.0;
            // (1-zeta) * sum q_j zeta^j has coefficient q_j - q_{j-1} at j.
            for (int j = a; j < b; ++j) {
                carry = q.coeff(j) + carry;
                out.add(j, carry);
            }
            double r = std::abs(q.coeff(b) + carry);
            double scale = std::max(q.coeff_norm(), 1e-300);
            worst = std::max(worst, r / scale);
            q = out;
        }
        if (rem) *rem = worst;
        return q;
    }

    /// Multiplication by (1 - zeta)^p.
    LaurentPoly times_one_minus_zeta(int p) const {
        LaurentPoly q = *this;
        for (int step = 0; step < p; ++step) q = q - q.shifted(1);
        return q;
    }

    static cplx ipow(cplx z, int m) {
        if (m == 0) return 1.0;
        cplx base = m > 0 ? z : 1.0 / z;
        int e = std::abs(m);
        cplx r = 1.0;
        while (e) {
            if (e & 1) r *= base;
            base *= base;
            e >>= 1;
        }
        return r;
    }

private:
    std::map<int, cplx> c_;
};

/// Dense grid of LaurentPoly entries.
class LaurentMatrix {
public:
    LaurentMatrix() : rows_(0), cols_(0) {}
    LaurentMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), e_(static_cast<size_t>(rows) * cols) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    LaurentPoly& at(int i, int j) { return e_[static_cast<size_t>(i) * cols_ + j]; }
    const LaurentPoly& at(int i, int j) const {
        return e_[static_cast<size_t>(i) * cols_ + j];
    }

    Eigen::MatrixXcd eval(cplx zeta) const {
        Eigen::MatrixXcd M(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) M(i, j) = at(i, j).eval(zeta);
        return M;
    }

    int bandwidth() const {
        int b = 0;
        for (const auto& p : e_)
            if (!p.is_zero()) b = std::max({b, std::abs(p.lo()), std::abs(p.hi())});
        return b;
    }

    /// Determinant as a LaurentPoly (cofactor expansion; fine at desk scale).
    LaurentPoly det() const {
        if (rows_ != cols_) throw std::invalid_argument("LaurentMatrix::det: not square");
        if (rows_ == 0) return LaurentPoly::constant(1.0);
        if (rows_ == 1) return at(0, 0);
        LaurentPoly acc;
        for (int j = 0; j < cols_; ++j) {
            if (at(0, j).is_zero()) continue;
            LaurentMatrix minor(rows_ - 1, cols_ - 1);
            for (int r = 1; r < rows_; ++r) {
                int cc = 0;
                for (int c = 0; c < cols_; ++c) {
                    if (c == j) continue;
                    minor.at(r - 1, cc++) = at(r, c);
                }
            }
            LaurentPoly term = at(0, j) * minor.det();
            acc = acc + (j % 2 == 0 ? term : term.scaled(-1.0));
        }
        return acc;
    }

private:
    int rows_, cols_;
    std::vector<LaurentPoly> e_;
};

/// Equispaced samples zeta_j = e^{2 pi i j / N}, N a power of two.
class BoundaryGrid {
public:
    explicit BoundaryGrid(int N = 4096) : N_(N) {
        if (N < 2 || (N & (N - 1)) != 0)
            throw std::invalid_argument("BoundaryGrid: N must be a power of two");
    }
    int size() const { return N_; }
    cplx point(int j) const {
        double t = 2.0 * std::numbers::pi * j / N_;
        return cplx(std::cos(t), std::sin(t));
    }
    double angle(int j) const { return 2.0 * std::numbers::pi * j / N_; }

    /// Smallest power-of-two grid resolving Laurent bandwidth b without
    /// aliasing, at least 4096 by default.
    static BoundaryGrid for_bandwidth(int b, int min_N = 4096) {
        int N = min_N;
        while (N <= 2 * b + 2) N *= 2;
        return BoundaryGrid(N);
    }

private:
    int N_;
};

/// In-place radix-2 FFT, forward (sign -1).  data.size() must be a power of 2.
inline void fft_inplace(std::vector<cplx>& a, bool inverse = false) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: size not a power of two");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1 : -1);
        cplx wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cplx w = 1.0;
            for (size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k], v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

/// Discrete Fourier coefficients of samples on a BoundaryGrid.
/// Index k of the result corresponds to frequency k for k < N/2 and to
/// frequency k - N for k >= N/2.
inline std::vector<cplx> fourier_coeffs(std::vector<cplx> samples) {
    fft_inplace(samples, false);
    for (auto& x : samples) x /= static_cast<double>(samples.size());
    return samples;
}

struct CircleDistance {
    double min_modulus = 0.0;         // min |f| over the sample grid
    double nearest_root_dist = 0.0;   // min over roots r of ||r| - 1|
    bool degenerate = false;          // identically zero input
    std::vector<cplx> roots;
};

/// Roots of the polynomial zeta^{-lo} f (companion-matrix eigenvalues),
/// plus zeta = 0 with multiplicity lo when lo > 0.
inline std::vector<cplx> laurent_roots(const LaurentPoly& f) {
    std::vector<cplx> roots;
    if (f.is_zero()) return roots;
    const int lo = f.lo(), hi = f.hi();
    for (int i = 0; i < lo; ++i) roots.push_back(0.0);
    const int deg = hi - lo;
    if (deg == 0) return roots;
    Eigen::VectorXcd c(deg + 1);
    for (int j = 0; j <= deg; ++j) c(j) = f.coeff(lo + j);
    // Companion matrix of the monic polynomial c_deg^{-1} * sum c_j x^j.
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(deg, deg);
    for (int j = 0; j < deg; ++j) C(j, deg - 1) = -c(j) / c(deg);
    for (int j = 1; j < deg; ++j) C(j, j - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    for (int j = 0; j < deg; ++j) roots.push_back(es.eigenvalues()(j));
    return roots;
}

inline CircleDistance circle_distance(const LaurentPoly& f,
                                      const BoundaryGrid& grid = BoundaryGrid(4096)) {
    CircleDistance out;
    if (f.is_zero()) {
        out.degenerate = true;
        return out;
    }
    out.roots = laurent_roots(f);
    out.nearest_root_dist = std::numeric_limits<double>::infinity();
    for (cplx r : out.roots)
        out.nearest_root_dist = std::min(out.nearest_root_dist, std::abs(std::abs(r) - 1.0));
    if (out.roots.empty()) out.nearest_root_dist = 1.0;  // constants: only the pole/root at 0
    out.min_modulus = std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid.size(); ++j)
        out.min_modulus = std::min(out.min_modulus, std::abs(f.eval(grid.point(j))));
    return out;
}

/// Nonvanishing test used throughout: a symbol counts as invertible on the
/// circle iff its nearest root stays clear of it and the sampled modulus
/// does not collapse.
inline bool invertible_on_circle(const CircleDistance& cd, double max_modulus) {
    if (cd.degenerate) return false;
    return cd.nearest_root_dist > 1e-8 && cd.min_modulus > 1e-10 * max_modulus;
}

inline double max_modulus_on_circle(const LaurentPoly& f,
                                    const BoundaryGrid& grid = BoundaryGrid(4096)) {
    double mx = 0.0;
    for (int j = 0; j < grid.size(); ++j) mx = std::max(mx, std::abs(f.eval(grid.point(j))));
    return mx;
}

struct WindingError : std::runtime_error {
    std::vector<cplx> roots_near_circle;
    explicit WindingError(const std::string& msg, std::vector<cplx> bad = {})
        : std::runtime_error(msg), roots_near_circle(std::move(bad)) {}
};

/// Discrete argument-principle winding: total phase increment / 2 pi over
/// the grid, rounded.  Assumes the grid resolves f.
inline int winding_by_argument(const LaurentPoly& f,
                               const BoundaryGrid& grid = BoundaryGrid(4096)) {
    double total = 0.0;
    cplx prev = f.eval(grid.point(0));
    for (int j = 1; j <= grid.size(); ++j) {
        cplx cur = f.eval(grid.point(j % grid.size()));
        total += std::arg(cur / prev);
        prev = cur;
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

/// Winding number of zeta -> f(zeta) around 0, |zeta| = 1.  Counts roots of
/// zeta^{-lo} f inside the open unit disc and adds lo; cross-checked against
/// the discrete argument principle.
inline int winding_number(const LaurentPoly& f,
                          const BoundaryGrid& grid = BoundaryGrid(4096)) {
    if (f.is_zero()) throw WindingError("winding_number: zero input");
    CircleDistance cd = circle_distance(f, grid);
    double mx = max_modulus_on_circle(f, grid);
    if (!invertible_on_circle(cd, mx)) {
        std::vector<cplx> bad;
        for (cplx r : cd.roots)
            if (std::abs(std::abs(r) - 1.0) <= 1e-8) bad.push_back(r);
        throw WindingError("winding_number: zero on the unit circle", bad);
    }
    int inside = 0;
    for (cplx r : cd.roots)
        if (std::abs(r) < 1.0) ++inside;
    int w = inside;  // roots at 0 from lo > 0 are already included
    if (f.lo() < 0) w += f.lo();  // pole of order -lo at the origin
    int w_arg = winding_by_argument(f, grid);
    if (w != w_arg)
        throw WindingError("winding_number: root count and argument principle disagree (" +
                           std::to_string(w) + " vs " + std::to_string(w_arg) + ")");
    return w;
}

struct ConjugateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The analytic completion of a real trigonometric polynomial u: the unique
/// polynomial g with Re g = u on the circle and g(1) = 0.  Rejects inputs
/// whose Fourier data is not real, and inputs with u(1) != 0 (which make the
/// normalization unsatisfiable).
inline LaurentPoly conjugate_function(const LaurentPoly& u, double tol = 1e-11) {
    double scale = std::max(u.coeff_norm(), 1.0);
    for (const auto& [m, v] : u.coeffs()) {
        cplx mirror = u.coeff(-m);
        if (std::abs(mirror - std::conj(v)) > tol * scale)
            throw ConjugateError("conjugate_function: input is not real-valued on the circle");
    }
    cplx u1 = u.eval(1.0);
    if (std::abs(u1) > 1e-9 * scale)
        throw ConjugateError("conjugate_function: normalization impossible, u(1) != 0");
    LaurentPoly g;
    double tau = 0.0;
    g.add(0, u.coeff(0));
    for (const auto& [m, v] : u.coeffs()) {
        if (m > 0) {
            g.add(m, 2.0 * v);
            tau -= 2.0 * v.imag();
        }
    }
    g.add(0, cplx(0.0, tau));
    g.prune();
    return g;
}

/// l2-norm of the strictly negative-index discrete Fourier coefficients of
/// boundary samples; small values certify approximate holomorphic
/// extendability to the disc.
inline double negative_energy(const std::vector<cplx>& samples) {
    auto c = fourier_coeffs(samples);
    const int N = static_cast<int>(c.size());
    double acc = 0.0;
    for (int k = N / 2 + 1; k < N; ++k) acc += std::norm(c[k]);
    return std::sqrt(acc);
}

}  // namespace disctk
