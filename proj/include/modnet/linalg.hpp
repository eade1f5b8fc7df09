#pragma once

#include <modnet/types.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace modnet::linalg {

// Eigenpairs of a symmetric matrix, columns ordered by descending |value|.
template <typename Scalar>
struct EigenSystemT {
    VectorX<Scalar> values;
    MatrixX<Scalar> vectors;
};
using EigenSystem = EigenSystemT<double>;

// Column-major stacking of all entries.
template <typename Derived>
VectorX<typename Derived::Scalar> vec(const Eigen::MatrixBase<Derived>& M)
{
    using Scalar = typename Derived::Scalar;
    VectorX<Scalar> v(M.rows() * M.cols());
    for (Eigen::Index j = 0, r = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            v[r++] = M(i, j);
    return v;
}

// Column-major lower triangle including the diagonal:
// (1,1),(2,1),...,(n,1),(2,2),...,(n,n).
template <typename Derived>
VectorX<typename Derived::Scalar> vech(const Eigen::MatrixBase<Derived>& M)
{
    using Scalar = typename Derived::Scalar;
    if (M.rows() != M.cols())
        throw std::invalid_argument("vech: matrix must be square");
    const Eigen::Index n = M.rows();
    VectorX<Scalar> v(n * (n + 1) / 2);
    for (Eigen::Index j = 0, r = 0; j < n; ++j)
        for (Eigen::Index i = j; i < n; ++i)
            v[r++] = M(i, j);
    return v;
}

template <typename Scalar>
MatrixX<Scalar> unvech(const VectorX<Scalar>& v, Eigen::Index n)
{
    if (v.size() != n * (n + 1) / 2)
        throw std::invalid_argument("unvech: vector length " + std::to_string(v.size()) +
                                    " does not match order " + std::to_string(n));
    MatrixX<Scalar> M(n, n);
    for (Eigen::Index j = 0, r = 0; j < n; ++j)
        for (Eigen::Index i = j; i < n; ++i, ++r)
            M(i, j) = M(j, i) = v[r];
    return M;
}

// L_n with L_n * vec(M) = vech(M) for symmetric M.
inline Matrix elimination_matrix(Eigen::Index n)
{
    if (n < 1)
        throw std::invalid_argument("elimination_matrix: order must be positive");
    Matrix L = Matrix::Zero(n * (n + 1) / 2, n * n);
    for (Eigen::Index j = 0, r = 0; j < n; ++j)
        for (Eigen::Index i = j; i < n; ++i, ++r)
            L(r, j * n + i) = 1.0;
    return L;
}

// D_n with D_n * vech(M) = vec(M) for symmetric M; L_n * D_n = I.
inline Matrix duplication_matrix(Eigen::Index n)
{
    if (n < 1)
        throw std::invalid_argument("duplication_matrix: order must be positive");
    Matrix D = Matrix::Zero(n * n, n * (n + 1) / 2);
    for (Eigen::Index j = 0, r = 0; j < n; ++j)
        for (Eigen::Index i = j; i < n; ++i, ++r) {
            D(j * n + i, r) = 1.0;
            D(i * n + j, r) = 1.0;
        }
    return D;
}

template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& A,
                                        const Eigen::MatrixBase<DerivedB>& B)
{
    using Scalar = typename DerivedA::Scalar;
    MatrixX<Scalar> K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> hadamard(const Eigen::MatrixBase<DerivedA>& A,
                                            const Eigen::MatrixBase<DerivedB>& B)
{
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw std::invalid_argument("hadamard: shapes differ");
    return A.cwiseProduct(B);
}

namespace detail {

// Orders by descending |value|; ties by signed value descending, then index.
inline std::vector<Eigen::Index> abs_order(const Vector& values)
{
    std::vector<Eigen::Index> idx(values.size());
    std::iota(idx.begin(), idx.end(), Eigen::Index(0));
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double aa = std::abs(values[a]), ab = std::abs(values[b]);
        if (aa != ab) return aa > ab;
        if (values[a] != values[b]) return values[a] > values[b];
        return a < b;
    });
    return idx;
}

// Fixes each eigenvector's sign so the largest-|entry| coordinate is positive.
inline void canonicalize_signs(Matrix& vectors)
{
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        Eigen::Index imax = 0;
        vectors.col(j).cwiseAbs().maxCoeff(&imax);
        if (vectors(imax, j) < 0) vectors.col(j) = -vectors.col(j);
    }
}

}  // namespace detail

// Full dense eigendecomposition of a symmetric matrix.
inline EigenSystem sym_eig(const Matrix& M)
{
    if (M.rows() != M.cols())
        throw std::invalid_argument("sym_eig: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(M);
    if (solver.info() != Eigen::Success)
        throw numerical_error("sym_eig: solver failed to converge for order " +
                              std::to_string(M.rows()));
    const auto order = detail::abs_order(solver.eigenvalues());
    EigenSystem out;
    out.values.resize(M.rows());
    out.vectors.resize(M.rows(), M.rows());
    for (Eigen::Index j = 0; j < M.rows(); ++j) {
        out.values[j] = solver.eigenvalues()[order[j]];
        out.vectors.col(j) = solver.eigenvectors().col(order[j]);
    }
    detail::canonicalize_signs(out.vectors);
    return out;
}

// Sum of the first d eigenpair outer products.
inline Matrix low_rank_truncate(const EigenSystem& E, Eigen::Index d)
{
    if (d < 1 || d > E.values.size())
        throw std::invalid_argument("low_rank_truncate: rank " + std::to_string(d) +
                                    " out of range for order " + std::to_string(E.values.size()));
    const auto U = E.vectors.leftCols(d);
    return U * E.values.head(d).asDiagonal() * U.transpose();
}

}  // namespace modnet::linalg
