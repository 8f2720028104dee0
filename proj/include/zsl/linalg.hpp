#pragma once

// Dense real-matrix kernels: SVD, pseudoinverse-based least squares,
// score normalization. Everything here is a pure function over value types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace zsl {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values)
        : rows(r), cols(c), data(std::move(values)) {
        if (data.size() != rows * cols)
            throw std::invalid_argument("Matrix: value count does not match rows*cols");
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool empty() const { return rows == 0 || cols == 0; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n, 0.0);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

inline Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
            t(j, i) = m(i, j);
    return t;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw std::invalid_argument("matmul: inner dimensions differ (" +
                                    std::to_string(a.cols) + " vs " + std::to_string(b.rows) + ")");
    Matrix c(a.rows, b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = &b.data[k * b.cols];
            double* crow = &c.data[i * c.cols];
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

inline double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data) s += v * v;
    return std::sqrt(s);
}

struct SvdResult {
    Matrix u;                  // rows x k, orthonormal columns
    std::vector<double> sigma; // k values, non-negative, descending
    Matrix vt;                 // k x cols, orthonormal rows
};

namespace detail {

// One-sided Jacobi on a tall matrix (rows >= cols). Rotates column pairs of a
// working copy until all pairs are numerically orthogonal; column norms are
// the singular values and the accumulated rotations give V.
inline SvdResult svd_tall(const Matrix& m) {
    const std::size_t rows = m.rows, cols = m.cols;
    Matrix a = m;
    Matrix v = Matrix::identity(cols);

    const double tol = 1e-15;
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < cols; ++p) {
            for (std::size_t q = p + 1; q < cols; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double ap = a(i, p), aq = a(i, q);
                    alpha += ap * ap;
                    beta += aq * aq;
                    gamma += ap * aq;
                }
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double ap = a(i, p), aq = a(i, q);
                    a(i, p) = c * ap - s * aq;
                    a(i, q) = s * ap + c * aq;
                }
                for (std::size_t i = 0; i < cols; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> norms(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += a(i, j) * a(i, j);
        norms[j] = std::sqrt(s);
    }
    std::vector<std::size_t> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

    SvdResult r;
    r.sigma.resize(cols);
    r.u = Matrix(rows, cols);
    r.vt = Matrix(cols, cols);
    for (std::size_t j = 0; j < cols; ++j) {
        const std::size_t src = order[j];
        r.sigma[j] = norms[src];
        if (norms[src] > 0.0) {
            const double inv = 1.0 / norms[src];
            for (std::size_t i = 0; i < rows; ++i) r.u(i, j) = a(i, src) * inv;
        }
        for (std::size_t i = 0; i < cols; ++i) r.vt(j, i) = v(i, src);
    }

    // Columns with an exactly-zero singular value carry no direction; complete
    // them to an orthonormal basis so the orthogonality contract still holds.
    for (std::size_t j = 0; j < cols; ++j) {
        if (r.sigma[j] > 0.0) continue;
        for (std::size_t cand = 0; cand < rows; ++cand) {
            std::vector<double> w(rows, 0.0);
            w[cand] = 1.0;
            for (std::size_t k = 0; k < cols; ++k) {
                if (k == j || (r.sigma[k] == 0.0 && k > j)) continue;
                double dot = r.u(cand, k);
                for (std::size_t i = 0; i < rows; ++i) w[i] -= dot * r.u(i, k);
            }
            double nrm = 0.0;
            for (double x : w) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm > 0.5) {
                for (std::size_t i = 0; i < rows; ++i) r.u(i, j) = w[i] / nrm;
                break;
            }
        }
    }
    return r;
}

} // namespace detail

// Thin SVD: m = u * diag(sigma) * vt with k = min(rows, cols).
inline SvdResult svd(const Matrix& m) {
    if (m.empty()) throw std::invalid_argument("svd: empty matrix");
    if (!m.all_finite()) throw std::invalid_argument("svd: non-finite input");
    if (m.rows >= m.cols) return detail::svd_tall(m);
    SvdResult t = detail::svd_tall(transpose(m));
    SvdResult r;
    r.sigma = std::move(t.sigma);
    r.u = transpose(t.vt);
    r.vt = transpose(t.u);
    return r;
}

// Moore-Penrose pseudoinverse; singular values below rel_tol * sigma_max are
// treated as zero.
inline Matrix pseudoinverse(const Matrix& m, double rel_tol = 1e-12) {
    SvdResult d = svd(m);
    const double smax = d.sigma.empty() ? 0.0 : d.sigma.front();
    const double cutoff = rel_tol * smax;
    // pinv = v * diag(1/sigma) * ut
    Matrix vs(m.cols, d.sigma.size(), 0.0);
    for (std::size_t j = 0; j < d.sigma.size(); ++j) {
        const double inv = (d.sigma[j] > cutoff && d.sigma[j] > 0.0) ? 1.0 / d.sigma[j] : 0.0;
        for (std::size_t i = 0; i < m.cols; ++i) vs(i, j) = d.vt(j, i) * inv;
    }
    return matmul(vs, transpose(d.u));
}

// Least-squares right factor: returns v minimizing ||v*s - w||_F, i.e.
// v = w * pinv(s). w is d x z, s is a x z, result is d x a.
inline Matrix solve_right_factor(const Matrix& w, const Matrix& s, double rel_tol = 1e-12) {
    if (s.rows == 0 || s.cols == 0)
        throw std::invalid_argument("solve_right_factor: empty signature matrix");
    if (w.cols != s.cols)
        throw std::invalid_argument("solve_right_factor: column count mismatch (" +
                                    std::to_string(w.cols) + " vs " + std::to_string(s.cols) + ")");
    return matmul(w, pseudoinverse(s, rel_tol));
}

// Max-shifted softmax; sums to 1 and preserves score order.
inline std::vector<double> softmax(const std::vector<double>& scores) {
    if (scores.empty()) throw std::invalid_argument("softmax: empty input");
    for (double v : scores)
        if (!std::isfinite(v)) throw std::invalid_argument("softmax: non-finite score");
    const double m = *std::max_element(scores.begin(), scores.end());
    std::vector<double> w(scores.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        w[i] = std::exp(scores[i] - m);
        sum += w[i];
    }
    for (double& x : w) x /= sum;
    return w;
}

} // namespace zsl
