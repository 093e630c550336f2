#pragma once

// Laplace-space solution of the triple-porosity / triple-permeability
// fractional flow system, and the single-medium special case.
//
// Per Laplace variable u the solution is a superposition of three radial
// modes K0(alpha_i r_D) with modal vectors (A_i, B_i, C_i) spanning the null
// space of
//
//     M(x) = [ km x - m1    m2          m3        ]
//            [ m2           kf x - m4   m5        ]      x = alpha^2
//            [ m3           m5          kv x - m6 ]
//
// and weights D_i fixed by the wellbore conditions (total flux 1/u, equal
// pressure in all three media at r_D = 1).

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "fracflow/errors.hpp"
#include "fracflow/roots.hpp"
#include "fracflow/specfun.hpp"

namespace fracflow {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

/// Dimensionless model parameters. The matrix shares follow from the
/// normalization: omega_m = 1 - omega_f - omega_v, kappa_m = 1 - kappa_f - kappa_v.
template <typename Scalar = double>
struct TriplePorosityParams {
    Scalar omega_f{};
    Scalar omega_v{};
    Scalar kappa_f{};
    Scalar kappa_v{};
    Scalar lambda_mf{};
    Scalar lambda_mv{};
    Scalar lambda_fv{};
    Scalar beta_m{1};
    Scalar beta_f{1};
    Scalar beta_v{1};

    Scalar omega_m() const { return Scalar(1) - omega_f - omega_v; }
    Scalar kappa_m() const { return Scalar(1) - kappa_f - kappa_v; }
    Vector3<Scalar> kappa() const { return {kappa_m(), kappa_f, kappa_v}; }

    /// Throws std::domain_error naming the first violated constraint.
    void validate() const
    {
        auto require = [](bool ok, const std::string& what) {
            if (!ok) {
                throw std::domain_error(what);
            }
        };
        auto finite = [](Scalar v) { return std::isfinite(v); };
        require(finite(omega_f) && omega_f >= 0, "omega_f must be >= 0");
        require(finite(omega_v) && omega_v >= 0, "omega_v must be >= 0");
        require(omega_m() >= 0, "omega_f + omega_v must not exceed 1 (omega_m >= 0)");
        require(finite(kappa_f) && kappa_f > 0, "kappa_f must be > 0");
        require(finite(kappa_v) && kappa_v > 0, "kappa_v must be > 0");
        require(kappa_m() > 0, "kappa_f + kappa_v must be below 1 (kappa_m > 0)");
        require(finite(lambda_mf) && lambda_mf >= 0, "lambda_mf must be >= 0");
        require(finite(lambda_mv) && lambda_mv >= 0, "lambda_mv must be >= 0");
        require(finite(lambda_fv) && lambda_fv >= 0, "lambda_fv must be >= 0");
        require(beta_m > 0 && beta_m <= 1, "beta_m must lie in (0, 1]");
        require(beta_f > 0 && beta_f <= 1, "beta_f must lie in (0, 1]");
        require(beta_v > 0 && beta_v <= 1, "beta_v must lie in (0, 1]");
    }

    template <typename Other>
    TriplePorosityParams<Other> cast() const
    {
        return {Other(omega_f), Other(omega_v),   Other(kappa_f),   Other(kappa_v),   Other(lambda_mf),
                Other(lambda_mv), Other(lambda_fv), Other(beta_m), Other(beta_f), Other(beta_v)};
    }
};

/// Coupling terms at a given u. The storage parts u^beta * omega are kept
/// separately so determinants can be formed without cancellation.
template <typename Scalar = double>
struct MTerms {
    Scalar m1{}, m2{}, m3{}, m4{}, m5{}, m6{};
    Scalar storage_m{}, storage_f{}, storage_v{};
};

template <typename Scalar>
MTerms<Scalar> m_terms(const TriplePorosityParams<Scalar>& p, Scalar u)
{
    using std::pow;
    if (!(u > Scalar(0)) || !std::isfinite(u)) {
        throw std::domain_error("m_terms: Laplace variable u must be positive and finite");
    }
    MTerms<Scalar> m;
    m.storage_m = pow(u, p.beta_m) * p.omega_m();
    m.storage_f = pow(u, p.beta_f) * p.omega_f;
    m.storage_v = pow(u, p.beta_v) * p.omega_v;
    m.m1 = m.storage_m + p.lambda_mf + p.lambda_mv;
    m.m2 = p.lambda_mf;
    m.m3 = p.lambda_mv;
    m.m4 = m.storage_f + p.lambda_mf + p.lambda_fv;
    m.m5 = p.lambda_fv;
    m.m6 = m.storage_v + p.lambda_mv + p.lambda_fv;
    return m;
}

/// The coupling matrix evaluated at x = alpha^2.
template <typename Scalar>
Matrix3<Scalar> characteristic_matrix(const MTerms<Scalar>& m, const Vector3<Scalar>& kappa, Scalar x)
{
    Matrix3<Scalar> a;
    a << kappa(0) * x - m.m1, m.m2, m.m3,  //
        m.m2, kappa(1) * x - m.m4, m.m5,   //
        m.m3, m.m5, kappa(2) * x - m.m6;
    return a;
}

/// Entrywise magnitude of characteristic_matrix before the diagonal
/// subtraction cancels; the floating-point scale of each entry.
template <typename Scalar>
Matrix3<Scalar> characteristic_matrix_scale(const MTerms<Scalar>& m, const Vector3<Scalar>& kappa, Scalar x)
{
    using std::abs;
    Matrix3<Scalar> a;
    a << abs(kappa(0) * x) + abs(m.m1), abs(m.m2), abs(m.m3),  //
        abs(m.m2), abs(kappa(1) * x) + abs(m.m4), abs(m.m5),   //
        abs(m.m3), abs(m.m5), abs(kappa(2) * x) + abs(m.m6);
    return a;
}

/// det M(x) as a cubic in x. Coefficients are the expanded determinant,
/// evaluated through sums of nonnegative products:
///   c3 = km kf kv
///   c2 = -[km (kf m6 + kv m4) + kf kv m1]
///   c1 = km (m4 m6 - m5^2) + kf (m1 m6 - m3^2) + kv (m1 m4 - m2^2)
///   c0 = -m1 m4 m6 + m1 m5^2 + m2^2 m6 + 2 m2 m3 m5 + m3^2 m4
template <typename Scalar>
CubicCoefficients<Scalar> characteristic_coefficients(const MTerms<Scalar>& m, Scalar kappa_m, Scalar kappa_f,
                                                      Scalar kappa_v)
{
    const Scalar lmf = m.m2;
    const Scalar lmv = m.m3;
    const Scalar lfv = m.m5;
    const Scalar sm = m.storage_m;
    const Scalar sf = m.storage_f;
    const Scalar sv = m.storage_v;

    // 2x2 principal minors of the coupling part, e.g. m4 m6 - m5^2.
    const Scalar minor_fv = (sf + lmf) * (sv + lmv) + lfv * (sf + lmf + sv + lmv);
    const Scalar minor_mv = (sm + lmf) * (sv + lfv) + lmv * (sm + lmf + sv + lfv);
    const Scalar minor_mf = (sm + lmv) * (sf + lfv) + lmf * (sm + lmv + sf + lfv);

    // Full determinant by the matrix-forest expansion (all terms >= 0).
    const Scalar trees = lmf * lmv + lmf * lfv + lmv * lfv;
    const Scalar det = sm * sf * sv + sm * sf * (lmv + lfv) + sm * sv * (lmf + lfv) + sf * sv * (lmf + lmv) +
                       (sm + sf + sv) * trees;

    CubicCoefficients<Scalar> c;
    c.c3 = kappa_m * kappa_f * kappa_v;
    c.c2 = -(kappa_m * (kappa_f * m.m6 + kappa_v * m.m4) + kappa_f * kappa_v * m.m1);
    c.c1 = kappa_m * minor_fv + kappa_f * minor_mv + kappa_v * minor_mf;
    c.c0 = -det;
    return c;
}

template <typename Scalar>
struct ModalCoefficients {
    Scalar A{};
    Scalar B{};
};

namespace detail {

inline constexpr double kRankTolerance = 1e-12;
inline constexpr double kVugComponentTolerance = 1e-12;

// Null vector of a rank-2 3x3 matrix as the cross product of the two rows
// that are most independent relative to their uncancelled scale; this stays
// componentwise accurate when one row is nearly cancelled. Returns false when
// no pair of rows is independent beyond tolerance.
template <typename Scalar>
bool cross_null_vector(const Matrix3<Scalar>& a, const Matrix3<Scalar>& scale, Vector3<Scalar>& out)
{
    const std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
    Scalar best = -1;
    for (const auto& pr : pairs) {
        const Vector3<Scalar> v = a.row(pr[0]).transpose().cross(a.row(pr[1]).transpose());
        // Rounding in the cancelled diagonal perturbs the cross product by
        // ~eps (|a| |scale b| + |b| |scale a|); rank is judged against that.
        const Scalar ref = a.row(pr[0]).norm() * scale.row(pr[1]).norm() + a.row(pr[1]).norm() * scale.row(pr[0]).norm();
        const Scalar ratio = ref > Scalar(0) ? v.norm() / ref : Scalar(0);
        if (ratio > best) {
            best = ratio;
            out = v;
        }
    }
    return best > Scalar(kRankTolerance);
}

template <typename Scalar>
std::string describe_u(Scalar u)
{
    std::ostringstream s;
    s.precision(17);
    s << static_cast<double>(u);
    return s.str();
}

}  // namespace detail

/// (A_i, B_i) with the vug component normalized to C = 1, taken from the
/// null space of M(alpha_i^2).
template <typename Scalar>
ModalCoefficients<Scalar> modal_coefficients(Scalar alpha, const MTerms<Scalar>& m, const Vector3<Scalar>& kappa)
{
    const Scalar x = alpha * alpha;
    Vector3<Scalar> v;
    if (!detail::cross_null_vector(characteristic_matrix(m, kappa, x), characteristic_matrix_scale(m, kappa, x), v)) {
        throw NullSpaceError("modal_coefficients: coupling matrix has rank < 2 at alpha = " + detail::describe_u(alpha));
    }
    if (std::abs(v(2)) < Scalar(detail::kVugComponentTolerance) * v.norm()) {
        std::ostringstream s;
        s.precision(17);
        s << "modal_coefficients: null direction (" << double(v(0) / v.norm()) << ", " << double(v(1) / v.norm())
          << ", " << double(v(2) / v.norm()) << ") has no vug component; cannot normalize to C = 1";
        throw NullSpaceError(s.str());
    }
    return {v(0) / v(2), v(1) / v(2)};
}

/// The closed-form modal coefficients obtained by eliminating C from the
/// first two rows, with the denominator m2^2 - (km x - m1)(kf x - m4).
/// Undefined when m2 = 0; kept as an independent cross-check.
template <typename Scalar>
ModalCoefficients<Scalar> modal_coefficients_closed_form(Scalar alpha, const MTerms<Scalar>& m,
                                                         const Vector3<Scalar>& kappa)
{
    const Scalar x = alpha * alpha;
    const Scalar d1 = kappa(0) * x - m.m1;
    const Scalar d2 = kappa(1) * x - m.m4;
    const Scalar a = (m.m3 * d2 - m.m2 * m.m5) / (m.m2 * m.m2 - d1 * d2);
    const Scalar b = (-m.m3 - a * d1) / m.m2;
    return {a, b};
}

template <typename Scalar>
struct BoundaryVectors {
    Vector3<Scalar> P, Q, R, E;
};

/// Rows of the wellbore boundary system for modes with vectors (A_i, B_i, C_i):
///   P_i = alpha_i K1(alpha_i) (km A_i + kf B_i + kv C_i)
///   Q_i = (A_i - C_i) K0(alpha_i),  R_i = (B_i - C_i) K0(alpha_i)
/// With `scaled`, every column carries the extra factor e^{alpha_i}.
template <typename Scalar>
BoundaryVectors<Scalar> boundary_vectors(const std::array<Scalar, 3>& alpha, const Vector3<Scalar>& A,
                                         const Vector3<Scalar>& B, const Vector3<Scalar>& kappa,
                                         const Vector3<Scalar>& C = Vector3<Scalar>::Ones(), bool scaled = false)
{
    BoundaryVectors<Scalar> out;
    for (int i = 0; i < 3; ++i) {
        detail::check_bessel_argument(alpha[i], "boundary_vectors");
        const auto [k0, k1] = scaled ? detail::bessel_k01_scaled(alpha[i]) : detail::bessel_k01(alpha[i]);
        out.E(i) = kappa(0) * A(i) + kappa(1) * B(i) + kappa(2) * C(i);
        out.P(i) = alpha[i] * k1 * out.E(i);
        out.Q(i) = (A(i) - C(i)) * k0;
        out.R(i) = (B(i) - C(i)) * k0;
    }
    return out;
}

/// Solves [P; Q; R] D = (1/u, 0, 0)^T by the cross-product form
/// D = (Q x R) / (u m), m = det[P; Q; R].
template <typename Scalar>
Vector3<Scalar> solve_boundary(const Vector3<Scalar>& P, const Vector3<Scalar>& Q, const Vector3<Scalar>& R, Scalar u)
{
    using std::abs;
    if (!(u > Scalar(0))) {
        throw std::domain_error("solve_boundary: u must be positive");
    }
    const Scalar m = Q(0) * R(1) * P(2) - Q(0) * P(1) * R(2) - R(0) * Q(1) * P(2) - R(1) * P(0) * Q(2) +
                     P(1) * R(0) * Q(2) + P(0) * Q(1) * R(2);
    // Compare against the column-equilibrated scale so wildly different mode
    // normalizations do not masquerade as singularity.
    Scalar column_scale = 1;
    for (int j = 0; j < 3; ++j) {
        column_scale *= std::max({abs(P(j)), abs(Q(j)), abs(R(j))});
    }
    if (!(abs(m) > Scalar(1e-14) * column_scale) || !std::isfinite(m)) {
        throw SingularBoundaryError("solve_boundary: boundary matrix is singular (det = " +
                                    detail::describe_u(m) + ") at u = " + detail::describe_u(u));
    }
    return Q.cross(R) / (m * u);
}

/// Complete per-u solution state.
template <typename Scalar = double>
struct LaplaceAssembly {
    Scalar u{};
    Vector3<Scalar> kappa;
    MTerms<Scalar> mterms;
    CubicCoefficients<Scalar> cubic;
    AlphaRoots<Scalar> alpha;
    // Modal vectors; C_i = 1 unless the vug component vanishes (see vug_normalized).
    Vector3<Scalar> A, B, C;
    std::array<bool, 3> vug_normalized{};
    // Boundary system in scaled form: column i multiplied by e^{alpha_i}.
    Vector3<Scalar> P_scaled, Q_scaled, R_scaled, E;
    // D_scaled_i = D_i e^{-alpha_i}; D itself overflows once alpha > ~700.
    Vector3<Scalar> D_scaled, D;
    Scalar pw{};

    // Relative residuals of the structural identities.
    std::array<Scalar, 3> characteristic_residual{};
    std::array<Scalar, 3> null_space_residual{};
    Scalar boundary_residual{};
    Scalar triple_equality_residual{};

    /// Field pressures (matrix, fracture, vug) at radius r_D >= 1.
    Vector3<Scalar> field(Scalar r_D) const
    {
        Vector3<Scalar> out = Vector3<Scalar>::Zero();
        for (int i = 0; i < 3; ++i) {
            const Scalar a = alpha.alpha[static_cast<std::size_t>(i)];
            const Scalar weight = D_scaled(i) * bessel_k0_scaled(a * r_D) * std::exp(-a * (r_D - Scalar(1)));
            out(0) += A(i) * weight;
            out(1) += B(i) * weight;
            out(2) += C(i) * weight;
        }
        return out;
    }
};

inline constexpr double kTripleEqualityTolerance = 1e-9;

namespace detail {

// Null-space basis for every root. Simple roots use the cross product;
// coincident (merged) roots use the trailing right singular vectors.
template <typename Scalar>
Matrix3<Scalar> modal_vectors(const MTerms<Scalar>& m, const Vector3<Scalar>& kappa, const AlphaRoots<Scalar>& roots,
                              Scalar u)
{
    Matrix3<Scalar> modes;
    std::size_t i = 0;
    while (i < 3) {
        std::size_t j = i + 1;
        while (j < 3 && roots.alpha[j] == roots.alpha[i]) {
            ++j;
        }
        const Scalar x = roots.alpha[i] * roots.alpha[i];
        const Matrix3<Scalar> a = characteristic_matrix(m, kappa, x);
        const Matrix3<Scalar> sc = characteristic_matrix_scale(m, kappa, x);
        const auto multiplicity = static_cast<int>(j - i);
        if (multiplicity == 1) {
            Vector3<Scalar> v;
            if (!cross_null_vector(a, sc, v)) {
                throw NullSpaceError("modal vectors: coupling matrix has rank < 2 at a simple root, u = " +
                                     describe_u(u));
            }
            modes.col(static_cast<Eigen::Index>(i)) = v;
        } else {
            Eigen::JacobiSVD<Matrix3<Scalar>> svd(a, Eigen::ComputeFullV);
            const Scalar tol = Scalar(1e-6) * sc.norm();
            const auto& sv = svd.singularValues();
            if (sv(3 - multiplicity) > tol) {
                throw NullSpaceError("modal vectors: repeated root without matching null space at u = " +
                                     describe_u(u));
            }
            modes.middleCols(static_cast<Eigen::Index>(i), multiplicity) =
                svd.matrixV().rightCols(multiplicity);
        }
        i = j;
    }
    return modes;
}

// Characteristic cubic in y = x - shift, built from det(y K - (N - shift K))
// so the O(lambda) structure of a root cluster survives even when the roots
// themselves are large.
template <typename Scalar>
CubicCoefficients<Scalar> shifted_characteristic_coefficients(const MTerms<Scalar>& m, const Vector3<Scalar>& kappa,
                                                              Scalar shift)
{
    const Matrix3<Scalar> b = characteristic_matrix(m, kappa, shift);
    CubicCoefficients<Scalar> c;
    c.c3 = kappa(0) * kappa(1) * kappa(2);
    c.c2 = kappa(0) * kappa(1) * b(2, 2) + kappa(0) * kappa(2) * b(1, 1) + kappa(1) * kappa(2) * b(0, 0);
    c.c1 = kappa(0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(1, 2)) + kappa(1) * (b(0, 0) * b(2, 2) - b(0, 2) * b(0, 2)) +
           kappa(2) * (b(0, 0) * b(1, 1) - b(0, 1) * b(0, 1));
    c.c0 = b.determinant();
    return c;
}

inline constexpr double kRootClusterGap = 1e-3;

// Roots of a tight cluster are only resolved to eps^(1/k) relative by the
// plain cubic; re-solve them about the cluster centre.
template <typename Scalar>
void refine_clustered_roots(const MTerms<Scalar>& m, const Vector3<Scalar>& kappa, const CubicCoefficients<Scalar>& c,
                            AlphaRoots<Scalar>& roots)
{
    using std::abs;
    std::array<Scalar, 3> x;
    for (std::size_t i = 0; i < 3; ++i) {
        x[i] = roots.alpha[i] * roots.alpha[i];
    }
    std::size_t lo = 3, hi = 0;
    for (std::size_t i = 0; i + 1 < 3; ++i) {
        if (x[i + 1] - x[i] <= Scalar(kRootClusterGap) * x[i + 1]) {
            lo = std::min(lo, i);
            hi = i + 1;
        }
    }
    if (lo > hi) {
        return;
    }
    Scalar shift = 0;
    for (std::size_t i = lo; i <= hi; ++i) {
        shift += x[i];
    }
    shift /= Scalar(hi - lo + 1);
    const CubicRoots<Scalar> local = solve_cubic_real(shifted_characteristic_coefficients(m, kappa, shift));
    if (!local.complex.empty()) {
        return;
    }
    // The cluster members are the shifted roots closest to zero.
    std::vector<Scalar> y = local.real;
    std::sort(y.begin(), y.end(), [](Scalar a, Scalar b) { return abs(a) < abs(b); });
    std::vector<Scalar> refined(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(hi - lo + 1));
    for (auto& v : refined) {
        v += shift;
    }
    std::sort(refined.begin(), refined.end());
    for (std::size_t i = lo; i <= hi; ++i) {
        const Scalar xi = refined[i - lo];
        if (!(xi > Scalar(0))) {
            return;
        }
        x[i] = xi;
    }
    std::sort(x.begin(), x.end());
    for (std::size_t i = 0; i < 3; ++i) {
        roots.alpha[i] = std::sqrt(x[i]);
        roots.residual[i] = c(x[i]);
    }
}

// A double root only comes out of the cubic to ~sqrt(eps), so the two copies
// can sit further apart than the merge gap. Merge an adjacent pair when the
// coupling matrix at their mean genuinely has a two-dimensional null space.
inline constexpr double kNearDoubleRootGap = 1e-6;
inline constexpr double kDoubleNullTolerance = 1e-10;

template <typename Scalar>
void merge_near_double_roots(const MTerms<Scalar>& m, const Vector3<Scalar>& kappa, const CubicCoefficients<Scalar>& c,
                             AlphaRoots<Scalar>& roots)
{
    using std::abs;
    for (std::size_t i = 0; i + 1 < 3; ++i) {
        const Scalar xi = roots.alpha[i] * roots.alpha[i];
        const Scalar xj = roots.alpha[i + 1] * roots.alpha[i + 1];
        if (xi == xj || abs(xj - xi) > Scalar(kNearDoubleRootGap) * xj) {
            continue;
        }
        const Scalar mean = (xi + xj) / Scalar(2);
        Eigen::JacobiSVD<Matrix3<Scalar>> svd(characteristic_matrix(m, kappa, mean));
        if (svd.singularValues()(1) <= Scalar(kDoubleNullTolerance) * characteristic_matrix_scale(m, kappa, mean).norm()) {
            const Scalar a = std::sqrt(mean);
            roots.alpha[i] = roots.alpha[i + 1] = a;
            roots.residual[i] = roots.residual[i + 1] = c(a * a);
        }
    }
}

}  // namespace detail

/// Builds the full Laplace-space solution at u. Throws on root, null-space
/// or boundary failures; residual fields are filled but not enforced here.
template <typename Scalar>
LaplaceAssembly<Scalar> assemble(const TriplePorosityParams<Scalar>& p, Scalar u)
{
    using std::abs;
    p.validate();
    LaplaceAssembly<Scalar> s;
    s.u = u;
    s.kappa = p.kappa();
    s.mterms = m_terms(p, u);
    s.cubic = characteristic_coefficients(s.mterms, s.kappa(0), s.kappa(1), s.kappa(2));
    s.alpha = alpha_roots(s.cubic, u);
    detail::refine_clustered_roots(s.mterms, s.kappa, s.cubic, s.alpha);
    detail::merge_near_double_roots(s.mterms, s.kappa, s.cubic, s.alpha);
    for (std::size_t i = 0; i < 3; ++i) {
        const Scalar x = s.alpha.alpha[i] * s.alpha.alpha[i];
        s.characteristic_residual[i] = abs(s.alpha.residual[i]) / s.cubic.term_scale(x);
    }

    Matrix3<Scalar> modes = detail::modal_vectors(s.mterms, s.kappa, s.alpha, u);
    for (int i = 0; i < 3; ++i) {
        auto v = modes.col(i);
        const Scalar n = v.norm();
        if (abs(v(2)) >= Scalar(detail::kVugComponentTolerance) * n) {
            v /= v(2);
            s.vug_normalized[static_cast<std::size_t>(i)] = true;
        } else {
            Eigen::Index k;
            v.cwiseAbs().maxCoeff(&k);
            v /= (v(k) < 0 ? -n : n);
        }
        const Scalar x = s.alpha.alpha[static_cast<std::size_t>(i)] * s.alpha.alpha[static_cast<std::size_t>(i)];
        const Vector3<Scalar> res = characteristic_matrix(s.mterms, s.kappa, x) * v;
        const Vector3<Scalar> ref = characteristic_matrix_scale(s.mterms, s.kappa, x) * v.cwiseAbs();
        Scalar worst = 0;
        for (int k = 0; k < 3; ++k) {
            if (ref(k) > Scalar(0)) {
                worst = std::max(worst, abs(res(k)) / ref(k));
            }
        }
        s.null_space_residual[static_cast<std::size_t>(i)] = worst;
    }
    s.A = modes.row(0).transpose();
    s.B = modes.row(1).transpose();
    s.C = modes.row(2).transpose();

    const auto bv = boundary_vectors(s.alpha.alpha, s.A, s.B, s.kappa, s.C, true);
    s.P_scaled = bv.P;
    s.Q_scaled = bv.Q;
    s.R_scaled = bv.R;
    s.E = bv.E;
    s.D_scaled = solve_boundary(bv.P, bv.Q, bv.R, u);
    for (int i = 0; i < 3; ++i) {
        s.D(i) = s.D_scaled(i) * std::exp(s.alpha.alpha[static_cast<std::size_t>(i)]);
    }

    auto rel = [](Scalar value, Scalar target, const Vector3<Scalar>& row, const Vector3<Scalar>& d) {
        const Scalar ref = std::max(row.cwiseProduct(d).cwiseAbs().sum(), abs(target));
        return ref > Scalar(0) ? abs(value - target) / ref : Scalar(0);
    };
    s.boundary_residual = std::max({rel(s.P_scaled.dot(s.D_scaled), Scalar(1) / u, s.P_scaled, s.D_scaled),
                                    rel(s.Q_scaled.dot(s.D_scaled), Scalar(0), s.Q_scaled, s.D_scaled),
                                    rel(s.R_scaled.dot(s.D_scaled), Scalar(0), s.R_scaled, s.D_scaled)});

    Vector3<Scalar> k0s;
    for (int i = 0; i < 3; ++i) {
        k0s(i) = bessel_k0_scaled(s.alpha.alpha[static_cast<std::size_t>(i)]);
    }
    const Vector3<Scalar> w = s.D_scaled.cwiseProduct(k0s);
    s.pw = s.C.dot(w);
    const Scalar pm = s.A.dot(w);
    const Scalar pf = s.B.dot(w);
    s.triple_equality_residual = std::max(abs(pm - s.pw), abs(pf - s.pw)) / abs(s.pw);
    return s;
}

/// Laplace-space wellbore pressure. Verifies that the three media agree at
/// the wellbore before returning.
template <typename Scalar>
Scalar wellbore_pressure_laplace(const TriplePorosityParams<Scalar>& p, Scalar u)
{
    const LaplaceAssembly<Scalar> s = assemble(p, u);
    if (!(s.triple_equality_residual <= Scalar(kTripleEqualityTolerance))) {
        throw ConsistencyError("wellbore_pressure_laplace: media pressures disagree at the wellbore (relative gap " +
                               detail::describe_u(s.triple_equality_residual) + ") at u = " + detail::describe_u(u));
    }
    return s.pw;
}

/// Field pressures (matrix, fracture, vug) at r_D in Laplace space.
template <typename Scalar>
Vector3<Scalar> field_pressure_laplace(const TriplePorosityParams<Scalar>& p, Scalar u, Scalar r_D)
{
    if (!(r_D >= Scalar(1))) {
        throw std::domain_error("field_pressure_laplace: r_D must be >= 1");
    }
    return assemble(p, u).field(r_D);
}

/// Single-medium fractional solution (1/u) K0(r_D s) / (s K1(s)), s = sqrt(u^order).
template <typename Scalar>
Scalar single_medium_pressure_laplace(Scalar order, Scalar u, Scalar r_D = Scalar(1))
{
    if (!(order > Scalar(0) && order <= Scalar(1))) {
        throw std::domain_error("single_medium_pressure_laplace: order must lie in (0, 1]");
    }
    if (!(u > Scalar(0)) || !std::isfinite(u)) {
        throw std::domain_error("single_medium_pressure_laplace: u must be positive and finite");
    }
    if (!(r_D >= Scalar(1)) || !std::isfinite(r_D)) {
        throw std::domain_error("single_medium_pressure_laplace: r_D must be >= 1");
    }
    const Scalar s = std::sqrt(std::pow(u, order));
    const Scalar ratio =
        bessel_k0_scaled(r_D * s) * std::exp(-s * (r_D - Scalar(1))) / (s * bessel_k1_scaled(s));
    return ratio / u;
}

// ---------------------------------------------------------------------------
// Dimensional quantities

template <typename Scalar = double>
struct PhysicalParams {
    Scalar phi_m{}, phi_f{}, phi_v{};  // porosity
    Scalar c_m{}, c_f{}, c_v{};        // compressibility, 1/Pa
    Scalar k_m{}, k_f{}, k_v{};        // permeability, m^2
    Scalar mu{};                       // viscosity, Pa s
    Scalar a_mf{}, a_mv{}, a_fv{};     // transfer coefficients, 1/(Pa s)
    Scalar r_w{};                      // well radius, m
    Scalar h{};                        // thickness, m
    Scalar Q0{};                       // rate, m^3/s
    Scalar B0{};                       // formation volume factor
    Scalar p_i{};                      // initial pressure, Pa

    void validate() const
    {
        auto positive = [](Scalar v, const char* name) {
            if (!(v > Scalar(0)) || !std::isfinite(v)) {
                throw std::domain_error(std::string(name) + " must be > 0");
            }
        };
        auto nonneg = [](Scalar v, const char* name) {
            if (!(v >= Scalar(0)) || !std::isfinite(v)) {
                throw std::domain_error(std::string(name) + " must be >= 0");
            }
        };
        positive(phi_m, "phi_m");
        positive(phi_f, "phi_f");
        positive(phi_v, "phi_v");
        positive(c_m, "c_m");
        positive(c_f, "c_f");
        positive(c_v, "c_v");
        positive(k_m, "k_m");
        positive(k_f, "k_f");
        positive(k_v, "k_v");
        positive(mu, "mu");
        nonneg(a_mf, "a_mf");
        nonneg(a_mv, "a_mv");
        nonneg(a_fv, "a_fv");
        positive(r_w, "r_w");
        positive(h, "h");
        positive(Q0, "Q0");
        positive(B0, "B0");
        positive(p_i, "p_i");
    }
};

/// t_D = time_scale * t,  p_D = pressure_scale * (p_i - p).
template <typename Scalar = double>
struct DimensionlessScales {
    Scalar time_scale{};
    Scalar pressure_scale{};
};

template <typename Scalar = double>
struct DimensionlessGroups {
    Scalar omega_f{}, omega_v{}, omega_m{};
    Scalar kappa_f{}, kappa_v{}, kappa_m{};
    Scalar lambda_mf{}, lambda_mv{}, lambda_fv{};
    DimensionlessScales<Scalar> scales;

    TriplePorosityParams<Scalar> with_orders(Scalar beta_m, Scalar beta_f, Scalar beta_v) const
    {
        return {omega_f, omega_v, kappa_f, kappa_v, lambda_mf, lambda_mv, lambda_fv, beta_m, beta_f, beta_v};
    }
};

template <typename Scalar>
DimensionlessGroups<Scalar> to_dimensionless(const PhysicalParams<Scalar>& phys)
{
    phys.validate();
    const Scalar storage = phys.phi_m * phys.c_m + phys.phi_f * phys.c_f + phys.phi_v * phys.c_v;
    const Scalar ksum = phys.k_m + phys.k_f + phys.k_v;
    if (!(storage > Scalar(0)) || !(ksum > Scalar(0))) {
        throw std::domain_error("to_dimensionless: total storage and total permeability must be > 0");
    }
    DimensionlessGroups<Scalar> g;
    g.omega_f = phys.phi_f * phys.c_f / storage;
    g.omega_v = phys.phi_v * phys.c_v / storage;
    g.omega_m = phys.phi_m * phys.c_m / storage;
    g.kappa_f = phys.k_f / ksum;
    g.kappa_v = phys.k_v / ksum;
    g.kappa_m = phys.k_m / ksum;
    const Scalar transfer = phys.mu * phys.r_w * phys.r_w / ksum;
    g.lambda_mf = phys.a_mf * transfer;
    g.lambda_mv = phys.a_mv * transfer;
    g.lambda_fv = phys.a_fv * transfer;
    g.scales.time_scale = ksum / (phys.mu * phys.r_w * phys.r_w * storage);
    g.scales.pressure_scale =
        Scalar(2) * std::numbers::pi_v<Scalar> * phys.h * ksum / (phys.Q0 * phys.B0 * phys.mu);
    return g;
}

/// Dimensional pressure (Pa) from a dimensionless pressure deficit.
template <typename Scalar>
Scalar from_dimensionless(Scalar p_D, const DimensionlessScales<Scalar>& scales, const PhysicalParams<Scalar>& phys)
{
    return phys.p_i - p_D / scales.pressure_scale;
}

/// Inverse of from_dimensionless.
template <typename Scalar>
Scalar pressure_to_dimensionless(Scalar p, const DimensionlessScales<Scalar>& scales,
                                 const PhysicalParams<Scalar>& phys)
{
    return scales.pressure_scale * (phys.p_i - p);
}

}  // namespace fracflow
