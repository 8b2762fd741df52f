#include "nmd/linalg.hpp"

#include <cmath>
#include <utility>

#include "nmd/error.hpp"

namespace nmd {

Mat9 kron(const Mat3& a, const Mat3& b) {
    Mat9 r{};
    for (std::size_t ia = 0; ia < 3; ++ia)
        for (std::size_t ja = 0; ja < 3; ++ja)
            for (std::size_t ib = 0; ib < 3; ++ib)
                for (std::size_t jb = 0; jb < 3; ++jb)
                    r(ia * 3 + ib, ja * 3 + jb) = a(ia, ja) * b(ib, jb);
    return r;
}

Mat9 kronecker_sum(const Mat3& k) {
    const Mat3 eye = Mat3::identity();
    return kron(k, eye) + kron(eye, k);
}

Vec<9> vec(const Mat3& m) {
    Vec<9> v{};
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 3; ++i) v[i + 3 * j] = m(i, j);
    return v;
}

Mat3 unvec(const Vec<9>& v) {
    Mat3 m{};
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 3; ++i) m(i, j) = v[i + 3 * j];
    return m;
}

template <std::size_t N>
Vec<N> solve(Mat<N> a, Vec<N> b) {
    double scale = 0.0;
    for (double x : a.data) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) throw SingularMatrixError("solve: zero matrix");
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < N; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) <= 1e-14 * scale)
            throw SingularMatrixError("solve: matrix is numerically singular");
        if (piv != col) {
            for (std::size_t j = 0; j < N; ++j) std::swap(a(col, j), a(piv, j));
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < N; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (std::size_t j = col; j < N; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    Vec<N> x{};
    for (std::size_t i = N; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < N; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

template <std::size_t N>
Vec<N> solve_lower(const Mat<N>& l, const Vec<N>& b) {
    Vec<N> x{};
    for (std::size_t i = 0; i < N; ++i) {
        if (l(i, i) == 0.0) throw SingularMatrixError("solve_lower: zero diagonal entry");
        double s = b[i];
        for (std::size_t j = 0; j < i; ++j) s -= l(i, j) * x[j];
        x[i] = s / l(i, i);
    }
    return x;
}

template <std::size_t N>
Mat<N> inverse(const Mat<N>& a) {
    Mat<N> inv{};
    for (std::size_t j = 0; j < N; ++j) {
        Vec<N> e{};
        e[j] = 1.0;
        const Vec<N> col = solve(a, e);
        for (std::size_t i = 0; i < N; ++i) inv(i, j) = col[i];
    }
    return inv;
}

template <std::size_t N>
Mat<N> expm(const Mat<N>& a) {
    const double nrm = norm1(a);
    int squarings = 0;
    if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    const Mat<N> scaled = std::ldexp(1.0, -squarings) * a;

    Mat<N> result = Mat<N>::identity();
    Mat<N> term = Mat<N>::identity();
    for (int k = 1; k <= 30; ++k) {
        term = (1.0 / k) * (term * scaled);
        result = result + term;
        if (norm1(term) <= 1e-18 * norm1(result)) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

namespace {

void require_lower_positive(const Mat3& t, const char* what) {
    if (!is_lower_triangular(t))
        throw DomainError(std::string(what) + ": argument is not lower triangular");
    for (std::size_t i = 0; i < 3; ++i)
        if (!(t(i, i) > 0.0))
            throw DomainError(std::string(what) + ": diagonal entries must be positive");
}

// Inverse of a lower-triangular matrix; the strict upper part stays zero.
Mat3 inverse_lower(const Mat3& l) {
    Mat3 inv{};
    for (std::size_t j = 0; j < 3; ++j) {
        inv(j, j) = 1.0 / l(j, j);
        for (std::size_t i = j + 1; i < 3; ++i) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k) s += l(i, k) * inv(k, j);
            inv(i, j) = -s / l(i, i);
        }
    }
    return inv;
}

}  // namespace

Mat3 sqrtm_lower(const Mat3& t) {
    require_lower_positive(t, "sqrtm_lower");
    Mat3 r{};
    for (std::size_t i = 0; i < 3; ++i) r(i, i) = std::sqrt(t(i, i));
    for (std::size_t d = 1; d < 3; ++d) {
        for (std::size_t j = 0; j + d < 3; ++j) {
            const std::size_t i = j + d;
            double s = t(i, j);
            for (std::size_t k = j + 1; k < i; ++k) s -= r(i, k) * r(k, j);
            r(i, j) = s / (r(i, i) + r(j, j));
        }
    }
    return r;
}

Mat3 logm_lower(const Mat3& t) {
    require_lower_positive(t, "logm_lower");
    const Mat3 eye = Mat3::identity();
    Mat3 x = t;
    int roots = 0;
    while (norm1(x - eye) > 0.25 && roots < 64) {
        x = sqrtm_lower(x);
        ++roots;
    }
    // log X = 2 atanh(Z), Z = (X - I)(X + I)^{-1}
    const Mat3 z = (x - eye) * inverse_lower(x + eye);
    const Mat3 z2 = z * z;
    Mat3 power = z;
    Mat3 series = z;
    for (int k = 1; k < 40; ++k) {
        power = power * z2;
        const Mat3 term = (1.0 / (2 * k + 1)) * power;
        series = series + term;
        if (norm1(term) <= 1e-18 * norm1(series)) break;
    }
    return std::ldexp(2.0, roots) * series;
}

template Vec<3> solve<3>(Mat<3>, Vec<3>);
template Vec<4> solve<4>(Mat<4>, Vec<4>);
template Vec<9> solve<9>(Mat<9>, Vec<9>);
template Vec<3> solve_lower<3>(const Mat<3>&, const Vec<3>&);
template Vec<9> solve_lower<9>(const Mat<9>&, const Vec<9>&);
template Mat<3> inverse<3>(const Mat<3>&);
template Mat<4> inverse<4>(const Mat<4>&);
template Mat<3> expm<3>(const Mat<3>&);
template Mat<9> expm<9>(const Mat<9>&);

}  // namespace nmd
