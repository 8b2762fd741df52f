#pragma once

// Fixed-size dense linear algebra for the 3x3 model matrices and the 9x9
// Kronecker sums. Row-major storage, value semantics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>

namespace nmd {

template <std::size_t N>
using Vec = std::array<double, N>;

using Vec3 = Vec<3>;

template <std::size_t N>
struct Mat {
    std::array<double, N * N> data{};

    static constexpr std::size_t size() { return N; }

    double& operator()(std::size_t i, std::size_t j) { return data[i * N + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * N + j]; }

    static Mat zero() { return Mat{}; }

    static Mat identity() {
        Mat m{};
        for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    static Mat diagonal(const Vec<N>& d) {
        Mat m{};
        for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
        return m;
    }

    // Row-major initializer, e.g. Mat3::from({1, 0, 0, 2, 3, 0, 4, 5, 6}).
    static Mat from(std::initializer_list<double> values) {
        Mat m{};
        std::size_t k = 0;
        for (double v : values) {
            if (k >= N * N) break;
            m.data[k++] = v;
        }
        return m;
    }

    Mat transpose() const {
        Mat t{};
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Vec<N> diag() const {
        Vec<N> d{};
        for (std::size_t i = 0; i < N; ++i) d[i] = (*this)(i, i);
        return d;
    }

    bool operator==(const Mat&) const = default;
};

using Mat3 = Mat<3>;
using Mat9 = Mat<9>;

template <std::size_t N>
Mat<N> operator+(const Mat<N>& a, const Mat<N>& b) {
    Mat<N> r{};
    for (std::size_t k = 0; k < N * N; ++k) r.data[k] = a.data[k] + b.data[k];
    return r;
}

template <std::size_t N>
Mat<N> operator-(const Mat<N>& a, const Mat<N>& b) {
    Mat<N> r{};
    for (std::size_t k = 0; k < N * N; ++k) r.data[k] = a.data[k] - b.data[k];
    return r;
}

template <std::size_t N>
Mat<N> operator*(double s, const Mat<N>& a) {
    Mat<N> r{};
    for (std::size_t k = 0; k < N * N; ++k) r.data[k] = s * a.data[k];
    return r;
}

template <std::size_t N>
Mat<N> operator*(const Mat<N>& a, const Mat<N>& b) {
    Mat<N> r{};
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < N; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < N; ++j) r(i, j) += aik * b(k, j);
        }
    return r;
}

template <std::size_t N>
Vec<N> operator*(const Mat<N>& a, const Vec<N>& x) {
    Vec<N> r{};
    for (std::size_t i = 0; i < N; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < N; ++j) s += a(i, j) * x[j];
        r[i] = s;
    }
    return r;
}

template <std::size_t N>
Vec<N> operator+(const Vec<N>& a, const Vec<N>& b) {
    Vec<N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
    return r;
}

template <std::size_t N>
Vec<N> operator-(const Vec<N>& a, const Vec<N>& b) {
    Vec<N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
    return r;
}

template <std::size_t N>
Vec<N> operator*(double s, const Vec<N>& a) {
    Vec<N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
    return r;
}

// Maximum absolute column sum.
template <std::size_t N>
double norm1(const Mat<N>& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) s += std::abs(a(i, j));
        if (s > best) best = s;
    }
    return best;
}

template <std::size_t N>
double max_abs_diff(const Mat<N>& a, const Mat<N>& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < N * N; ++k) m = std::max(m, std::abs(a.data[k] - b.data[k]));
    return m;
}

template <std::size_t N>
bool is_lower_triangular(const Mat<N>& a) {
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j)
            if (a(i, j) != 0.0) return false;
    return true;
}

// Kronecker product A (x) B for 3x3 factors.
Mat9 kron(const Mat3& a, const Mat3& b);

// K (+) K = K (x) I + I (x) K.
Mat9 kronecker_sum(const Mat3& k);

// Column-stacking vec operator and its inverse.
Vec<9> vec(const Mat3& m);
Mat3 unvec(const Vec<9>& v);

// Gaussian elimination with partial pivoting. Throws SingularMatrixError.
template <std::size_t N>
Vec<N> solve(Mat<N> a, Vec<N> b);

// Forward substitution for lower-triangular systems. Throws
// SingularMatrixError on a zero diagonal.
template <std::size_t N>
Vec<N> solve_lower(const Mat<N>& l, const Vec<N>& b);

template <std::size_t N>
Mat<N> inverse(const Mat<N>& a);

// Matrix exponential by scaling and squaring of a truncated Taylor series.
// Only products and sums are formed, so the zero pattern of a triangular
// argument is reproduced exactly.
template <std::size_t N>
Mat<N> expm(const Mat<N>& a);

// Principal square root of a lower-triangular matrix with positive diagonal.
Mat3 sqrtm_lower(const Mat3& t);

// Principal logarithm of a lower-triangular matrix with positive diagonal,
// by inverse scaling and squaring. Throws DomainError on a nonpositive
// diagonal or a non-triangular argument.
Mat3 logm_lower(const Mat3& t);

}  // namespace nmd
