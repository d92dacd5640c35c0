#pragma once

// Zernike basis on the unit disk: single-index ordering, radial polynomials,
// orthonormalized evaluation, basis matrices, and in-plane rotation of
// coefficient vectors. Everything here is a pure function; heavier machinery
// lives in the mesh/decomposition modules.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "zernet/errors.hpp"
#include "zernet/util.hpp"

namespace zernet {

// Factorials are tabulated in double precision; above this order the table
// entries would no longer be exact and radial coefficients degrade silently.
inline constexpr int kMaxRadialOrder = 20;

// Basis function identity. j is the 1-based single index enumerating valid
// (n, m) pairs with n ascending and, within each n, m ascending:
//   j=1 -> (0,0), j=2 -> (1,-1), j=3 -> (1,1), j=4 -> (2,-2), ...
// Valid pairs satisfy n >= 0, |m| <= n, n - |m| even. Negative m selects the
// sine branch, nonnegative m the cosine branch.
struct ZernikeIndex {
    int n = 0;
    int m = 0;
    int j = 1;
};

namespace detail {
inline void check_order_pair(int n, int m) {
    if (n < 0) throw DomainError("radial order must be nonnegative, got n=" + std::to_string(n));
    if (std::abs(m) > n)
        throw DomainError("angular frequency |m| must not exceed n, got n=" + std::to_string(n) +
                          " m=" + std::to_string(m));
    if ((n - std::abs(m)) % 2 != 0)
        throw DomainError("n - |m| must be even, got n=" + std::to_string(n) +
                          " m=" + std::to_string(m));
}

inline const std::array<double, kMaxRadialOrder + 1>& factorial_table() {
    static const std::array<double, kMaxRadialOrder + 1> table = [] {
        std::array<double, kMaxRadialOrder + 1> t{};
        t[0] = 1.0;
        for (int i = 1; i <= kMaxRadialOrder; ++i) t[i] = t[i - 1] * static_cast<double>(i);
        return t;
    }();
    return table;
}
}  // namespace detail

inline int linear_index(int n, int m) {
    detail::check_order_pair(n, m);
    return n * (n + 1) / 2 + (m + n) / 2 + 1;
}

inline ZernikeIndex index_from_linear(int j) {
    if (j < 1) throw DomainError("single index is 1-based, got j=" + std::to_string(j));
    int n = static_cast<int>((std::sqrt(8.0 * j - 7.0) - 1.0) / 2.0);
    while (n * (n + 1) / 2 >= j) --n;
    while ((n + 1) * (n + 2) / 2 < j) ++n;
    const int m = 2 * (j - 1 - n * (n + 1) / 2) - n;
    return ZernikeIndex{n, m, j};
}

// First k indices form whole radial orders exactly when k is triangular;
// only then does every m != 0 entry have its sign partner present.
inline bool covers_whole_orders(int k) {
    if (k < 1) return false;
    const ZernikeIndex last = index_from_linear(k);
    return last.m == last.n;
}

// Radial polynomial R_n^m (m nonnegative) evaluated on [0, 1]. Zero when
// n - m is odd. Coefficients use the tabulated factorials, so n is capped at
// kMaxRadialOrder.
template <typename Scalar>
Scalar radial_poly(int n, int m, Scalar r) {
    if (m < 0) throw DomainError("radial_poly expects nonnegative m, got " + std::to_string(m));
    if (n > kMaxRadialOrder)
        throw DomainError("radial order capped at " + std::to_string(kMaxRadialOrder) +
                          ", got n=" + std::to_string(n));
    if (n < 0) throw DomainError("radial order must be nonnegative, got n=" + std::to_string(n));
    if (m > n)
        throw DomainError("angular frequency m must not exceed n, got n=" + std::to_string(n) +
                          " m=" + std::to_string(m));
    if (!(r >= Scalar(0) && r <= Scalar(1)))
        throw DomainError("radius outside the unit disk: r=" + std::to_string(static_cast<double>(r)));
    if ((n - m) % 2 != 0) return Scalar(0);

    const auto& fact = detail::factorial_table();
    const int half_sum = (n + m) / 2;
    const int half_diff = (n - m) / 2;
    // Sum over k of (-1)^k (n-k)! / (k! (half_sum-k)! (half_diff-k)!) r^(n-2k),
    // evaluated as r^m times a polynomial in r^2 via Horner.
    Scalar acc(0);
    const Scalar r2 = r * r;
    for (int k = 0; k <= half_diff; ++k) {
        const double c = ((k % 2 == 0) ? 1.0 : -1.0) * fact[n - k] /
                         (fact[k] * fact[half_sum - k] * fact[half_diff - k]);
        acc = acc * r2 + Scalar(c);
    }
    Scalar rm(1);
    for (int i = 0; i < m; ++i) rm *= r;
    return acc * rm;
}

// Raw (unnormalized) basis function: cosine branch for m >= 0, sine branch
// for m < 0.
template <typename Scalar>
Scalar zernike(int n, int m, Scalar r, Scalar theta) {
    detail::check_order_pair(n, m);
    const int ma = std::abs(m);
    const Scalar radial = radial_poly(n, ma, r);
    if (m >= 0) return radial * std::cos(Scalar(ma) * theta);
    return radial * std::sin(Scalar(ma) * theta);
}

// Factor scaling Z_n^m so its squared integral over the unit disk is one.
inline double normalization_factor(int n, int m) {
    detail::check_order_pair(n, m);
    const double two_minus_delta = (m == 0) ? 1.0 : 2.0;
    return std::sqrt(two_minus_delta * (n + 1) / kPi);
}

template <typename Scalar>
Scalar normalized_zernike(int n, int m, Scalar r, Scalar theta) {
    return Scalar(normalization_factor(n, m)) * zernike(n, m, r, theta);
}

template <typename Scalar>
Scalar normalized_zernike(int j, Scalar r, Scalar theta) {
    const ZernikeIndex idx = index_from_linear(j);
    return normalized_zernike<Scalar>(idx.n, idx.m, r, theta);
}

// One sample inside the unit disk with an attached d-channel value. theta is
// stored wrapped into [0, 2*pi).
struct DiskSample {
    double r = 0.0;
    double theta = 0.0;
    Eigen::VectorXd value;
};

inline DiskSample make_disk_sample(double r, double theta, Eigen::VectorXd value = {}) {
    if (!std::isfinite(r) || !std::isfinite(theta))
        throw DomainError("disk sample coordinates must be finite");
    if (r < 0.0 || r > 1.0)
        throw DomainError("disk sample radius outside [0, 1]: r=" + std::to_string(r));
    if (!value.allFinite()) throw DomainError("disk sample value must be finite");
    return DiskSample{r, wrap_angle(theta), std::move(value)};
}

// Rows are samples, columns the first k orthonormal basis functions.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> basis_matrix(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& r,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& theta, int k) {
    if (k < 1) throw DomainError("basis size must be positive, got k=" + std::to_string(k));
    if (r.size() != theta.size())
        throw ShapeError("radius and angle vectors differ in length: " + std::to_string(r.size()) +
                         " vs " + std::to_string(theta.size()));
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> B(r.size(), k);
    for (int j = 1; j <= k; ++j) {
        const ZernikeIndex idx = index_from_linear(j);
        const Scalar norm = Scalar(normalization_factor(idx.n, idx.m));
        for (Eigen::Index s = 0; s < r.size(); ++s)
            B(s, j - 1) = norm * zernike<Scalar>(idx.n, idx.m, r[s], theta[s]);
    }
    return B;
}

inline Eigen::MatrixXd basis_matrix(const std::vector<DiskSample>& samples, int k) {
    Eigen::VectorXd r(samples.size()), theta(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        r[static_cast<Eigen::Index>(i)] = samples[i].r;
        theta[static_cast<Eigen::Index>(i)] = samples[i].theta;
    }
    return basis_matrix<double>(r, theta, k);
}

namespace detail {
inline void check_rotatable(int k) {
    if (k < 1) throw DomainError("coefficient vector must be nonempty");
    if (!covers_whole_orders(k))
        throw DomainError("coefficient vector of length " + std::to_string(k) +
                          " truncates a (n, +-m) pair; rotation needs whole radial orders");
}
}  // namespace detail

// Coefficients of f(r, theta + phi) given those of f. Per (n, m > 0) pair,
//   [a'_{n,m}; a'_{n,-m}] = [[cos m*phi, sin m*phi], [-sin m*phi, cos m*phi]]
//                           * [a_{n,m}; a_{n,-m}];
// m = 0 entries are untouched. Requires k to cover whole radial orders.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rotate_coefficients(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& alpha, Scalar phi) {
    const int k = static_cast<int>(alpha.size());
    detail::check_rotatable(k);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = alpha;
    for (int j = 1; j <= k; ++j) {
        const ZernikeIndex idx = index_from_linear(j);
        if (idx.m <= 0) continue;
        const int j_cos = j;
        const int j_sin = linear_index(idx.n, -idx.m);
        const Scalar c = std::cos(Scalar(idx.m) * phi);
        const Scalar s = std::sin(Scalar(idx.m) * phi);
        const Scalar a_cos = alpha[j_cos - 1];
        const Scalar a_sin = alpha[j_sin - 1];
        out[j_cos - 1] = c * a_cos + s * a_sin;
        out[j_sin - 1] = -s * a_cos + c * a_sin;
    }
    return out;
}

// Dense k x k matrix R with R * alpha == rotate_coefficients(alpha, phi).
// Block diagonal: identity on m = 0 slots, 2x2 rotations on (n, +-m) pairs.
inline Eigen::MatrixXd rotation_matrix(int k, double phi) {
    detail::check_rotatable(k);
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(k, k);
    for (int j = 1; j <= k; ++j) {
        const ZernikeIndex idx = index_from_linear(j);
        if (idx.m <= 0) continue;
        const int j_cos = j - 1;
        const int j_sin = linear_index(idx.n, -idx.m) - 1;
        const double c = std::cos(idx.m * phi);
        const double s = std::sin(idx.m * phi);
        R(j_cos, j_cos) = c;
        R(j_cos, j_sin) = s;
        R(j_sin, j_cos) = -s;
        R(j_sin, j_sin) = c;
    }
    return R;
}

}  // namespace zernet
