#include "thermoflex/linalg.hpp"

#include <cmath>
#include <cstdlib>

namespace thermoflex {

std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
    std::vector<double> y(static_cast<std::size_t>(m.rows()), 0.0);
    for (int i = 0; i < m.rows(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < m.cols(); ++j) acc += m(i, j) * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = acc;
    }
    return y;
}

double lu_determinant(Matrix a) {
    const int n = a.rows();
    if (n == 0) return 1.0;
    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::fabs(a(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::fabs(a(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) return 0.0;
        if (piv != k) {
            for (int j = 0; j < n; ++j) {
                const double tmp = a(k, j);
                a(k, j) = a(piv, j);
                a(piv, j) = tmp;
            }
            det = -det;
        }
        det *= a(k, k);
        const double inv = 1.0 / a(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double f = a(i, k) * inv;
            if (f == 0.0) continue;
            a(i, k) = 0.0;
            for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return det;
}

namespace {

// Extract the i-by-i upper-left block.
Matrix leading_block(const Matrix& a, int i) {
    Matrix b(i, i);
    for (int r = 0; r < i; ++r)
        for (int c = 0; c < i; ++c) b(r, c) = a(r, c);
    return b;
}

}  // namespace

std::vector<double> leading_minors(const Matrix& a) {
    const int n = a.rows();
    std::vector<double> minors(static_cast<std::size_t>(n), 0.0);

    // Non-pivoted elimination yields every leading minor as a running pivot
    // product; fall back to a per-block pivoted determinant if a pivot
    // degenerates.
    Matrix w = a;
    double running = 1.0;
    bool ok = true;
    for (int k = 0; k < n; ++k) {
        const double pivot = w(k, k);
        if (ok && std::fabs(pivot) > 1e-300) {
            running *= pivot;
            minors[static_cast<std::size_t>(k)] = running;
            const double inv = 1.0 / pivot;
            for (int i = k + 1; i < n; ++i) {
                const double f = w(i, k) * inv;
                if (f == 0.0) continue;
                for (int j = k; j < n; ++j) w(i, j) -= f * w(k, j);
            }
        } else {
            ok = false;
        }
        if (!ok) minors[static_cast<std::size_t>(k)] = lu_determinant(leading_block(a, k + 1));
    }
    return minors;
}

double max_symmetric_eigenvalue(const Matrix& m, int max_iters, double tol) {
    const int n = m.rows();
    Matrix s(n, n);
    double shift = 0.0;
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            s(i, j) = 0.5 * (m(i, j) + m(j, i));
            row_sum += std::fabs(s(i, j));
        }
        if (row_sum > shift) shift = row_sum;
    }
    shift += 1.0;
    // Power iteration on S + shift*I (positive definite dominant mode).
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = 1.0 / (1.0 + i);
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        std::vector<double> w(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            double acc = shift * v[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) acc += s(i, j) * v[static_cast<std::size_t>(j)];
            w[static_cast<std::size_t>(i)] = acc;
        }
        double norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return -shift;
        for (double& x : w) x /= norm;
        double rayleigh = 0.0;
        for (int i = 0; i < n; ++i) {
            double acc = shift * w[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) acc += s(i, j) * w[static_cast<std::size_t>(j)];
            rayleigh += acc * w[static_cast<std::size_t>(i)];
        }
        const double next = rayleigh - shift;
        v = w;
        if (it > 4 && std::fabs(next - lambda) < tol * (1.0 + std::fabs(next))) {
            return next;
        }
        lambda = next;
    }
    return lambda;
}

}  // namespace thermoflex
