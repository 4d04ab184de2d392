#pragma once

#include <vector>

namespace thermoflex {

// Minimal dense row-major matrix. Model dimensions stay small (2N <= 200),
// so no external linear algebra dependency is needed.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

std::vector<double> matvec(const Matrix& m, const std::vector<double>& x);

// Determinant via LU with partial pivoting (copy is modified internally).
double lu_determinant(Matrix a);

// Leading principal minors det(A_1), ..., det(A_n). Each minor is computed
// stably; cost is fine for the dimensions used here.
std::vector<double> leading_minors(const Matrix& a);

// Largest eigenvalue of the symmetric part (M + M^T)/2, via shifted power
// iteration. Deterministic start vector.
double max_symmetric_eigenvalue(const Matrix& m, int max_iters = 2000, double tol = 1e-13);

}  // namespace thermoflex
