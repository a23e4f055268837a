#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace bnlab {

using Vec = std::vector<double>;

// Dense row-major matrix, sized for the small systems in this project
// (Gram solves, Hessians; n rarely above ~30).
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Vec multiply(const Vec& x) const;
    Mat transposed() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);
Vec scaled(const Vec& a, double c);
Vec vec_sub(const Vec& a, const Vec& b);
Vec vec_add(const Vec& a, const Vec& b);

// Solves A x = b by LU with partial pivoting.  Throws numerical_error on a
// (near-)singular pivot.
Vec lu_solve(Mat a, Vec b);

Mat invert(const Mat& a);

// 1-norm condition number via explicit inverse; fine at these sizes.
double condition_number(const Mat& a);

// Jacobi eigendecomposition of a symmetric matrix.  Eigenvalues ascending;
// eigenvectors (if requested) as columns of `vectors`.
struct SymEig {
    Vec values;
    Mat vectors;
};
SymEig sym_eig(Mat a, bool want_vectors = true);

// Random orthogonal matrix (Haar-ish via Gram-Schmidt on Gaussians); used by
// the rotational-invariance property tests.
Mat random_orthogonal(std::size_t n, unsigned long long seed);

} // namespace bnlab
