#include <modnet/asymptotics.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace modnet::asymptotics {

namespace {

constexpr double kRankEps = 1e-10;

void check_model(const Matrix& B, const Vector& pi)
{
    const Eigen::Index K = B.rows();
    if (B.cols() != K) throw std::invalid_argument("B must be square");
    if (pi.size() != K) throw std::invalid_argument("pi length does not match the order of B");
    for (Eigen::Index i = 0; i < K; ++i)
        for (Eigen::Index j = 0; j < K; ++j) {
            if (std::abs(B(i, j) - B(j, i)) > 1e-12)
                throw std::invalid_argument("B must be symmetric");
            if (!(B(i, j) > 0.0 && B(i, j) < 1.0))
                throw std::domain_error("B entry (" + std::to_string(i + 1) + ","
                                        + std::to_string(j + 1) + ") outside (0,1)");
        }
    double total = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
        if (!(pi(k) > 0.0 && (K == 1 ? pi(k) <= 1.0 : pi(k) < 1.0)))
            throw std::domain_error("pi entry " + std::to_string(k + 1) + " outside (0,1)");
        total += pi(k);
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::domain_error("pi does not sum to one");
}

Matrix mmatrix(const Matrix& B, const Vector& pi, Regime regime)
{
    Vector m;
    if (regime == Regime::dense)
        m = B.cwiseProduct(Matrix::Ones(B.rows(), B.cols()) - B) * pi;
    else
        m = B * pi;
    return m.asDiagonal();
}

}  // namespace

Matrix SpectralStructure::ipq() const
{
    const int dim = d();
    Matrix I = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) I(i, i) = (i < signature.first) ? 1.0 : -1.0;
    return I;
}

Vector pitilde(const Vector& pi)
{
    const Eigen::Index K = pi.size();
    Matrix sq = Matrix::Zero(K, K);
    for (Eigen::Index k = 0; k < K; ++k) sq(k, k) = pi(k) * pi(k);
    return linalg::vech(sq);
}

SpectralStructure nu_factorization(const Matrix& B, const Vector& pi)
{
    check_model(B, pi);
    const Eigen::Index K = B.rows();
    const linalg::EigenSystem eig = linalg::sym_eig(B);
    const double top = std::abs(eig.values(0));
    if (top <= 0.0) throw std::domain_error("B is numerically zero");

    int d = 0;
    while (d < K && std::abs(eig.values(d)) > kRankEps * top) ++d;

    SpectralStructure out;
    out.values = eig.values.head(d);
    out.V = eig.vectors.leftCols(d);
    int p = 0;
    for (int i = 0; i < d; ++i)
        if (out.values(i) > 0.0) ++p;
    out.signature = {p, d - p};
    // Reorder so positive eigenvalues come first, as I_{p,q} expects.
    std::vector<int> idx;
    for (int i = 0; i < d; ++i)
        if (out.values(i) > 0.0) idx.push_back(i);
    for (int i = 0; i < d; ++i)
        if (out.values(i) < 0.0) idx.push_back(i);
    Vector vals(d);
    Matrix V(K, d);
    for (int i = 0; i < d; ++i) {
        vals(i) = out.values(idx[i]);
        V.col(i) = out.V.col(idx[i]);
    }
    out.values = vals;
    out.V = V;
    out.nu = out.V * out.values.cwiseAbs().cwiseSqrt().asDiagonal();
    out.Delta = out.nu.transpose() * pi.asDiagonal() * out.nu;
    const Matrix G = out.V.transpose() * pi.asDiagonal() * out.V;
    const Matrix VtPi = out.V.transpose() * pi.asDiagonal();
    out.ProjPerp = Matrix::Identity(K, K) - out.V * G.ldlt().solve(VtPi);
    return out;
}

Matrix dmatrix(const Matrix& B, const Vector& pi, Regime regime)
{
    check_model(B, pi);
    const Eigen::Index K = B.rows();
    Matrix D = Matrix::Zero(K * (K + 1) / 2, K * (K + 1) / 2);
    Eigen::Index pos = 0;
    for (Eigen::Index l = 0; l < K; ++l)
        for (Eigen::Index k = l; k < K; ++k) {
            const double dup = (k == l) ? 2.0 : 1.0;
            const double denom = (regime == Regime::dense)
                                     ? B(k, l) * (1.0 - B(k, l)) * dup
                                     : B(k, l) * dup;
            D(pos, pos) = pi(k) * pi(l) / denom;
            ++pos;
        }
    return D;
}

Matrix theta(const Matrix& B, const Vector& pi, Regime regime)
{
    const SpectralStructure S = nu_factorization(B, pi);
    const Matrix M = mmatrix(B, pi, regime);
    const Matrix Ipq = S.ipq();
    Eigen::LDLT<Matrix> delta(S.Delta);
    if (delta.info() != Eigen::Success)
        throw numerical_error("Delta factorization failed");
    const Matrix DinvNu = delta.solve(S.nu.transpose());       // Delta^{-1} nu'
    const Matrix C = DinvNu.transpose() * Ipq * DinvNu;        // nu Delta^{-1} I_{p,q} Delta^{-1} nu'
    const Matrix W = S.nu * DinvNu;                                   // nu Delta^{-1} nu'
    const Matrix Dpi = pi.asDiagonal();
    Matrix T = M * C + C * M - W * Dpi * M * C - C * M * Dpi * W;
    return 0.5 * (T + T.transpose());
}

Matrix gamma_tilde(const Matrix& B, const Vector& pi, Regime regime)
{
    const SpectralStructure S = nu_factorization(B, pi);
    const Eigen::Index K = B.rows();
    const Matrix L = linalg::elimination_matrix(K);
    const Matrix Dup = linalg::duplication_matrix(K);
    const Matrix D = dmatrix(B, pi, regime);
    const Matrix Dinv = D.diagonal().cwiseInverse().asDiagonal();
    const Matrix kernel = Matrix::Identity(K * K, K * K) - linalg::kron(S.ProjPerp, S.ProjPerp);
    const Matrix half = L * kernel * Dup;
    return half * Dinv * half.transpose();
}

Matrix gamma(const Matrix& B, const Vector& pi, Regime regime)
{
    const SpectralStructure S = nu_factorization(B, pi);
    const Eigen::Index K = B.rows();
    const Matrix L = linalg::elimination_matrix(K);
    const Matrix Dup = linalg::duplication_matrix(K);
    const Matrix D = dmatrix(B, pi, regime);
    const Matrix Dinv = D.diagonal().cwiseInverse().asDiagonal();
    const Matrix kernel = linalg::kron(S.ProjPerp, S.ProjPerp);
    const Matrix half = L * kernel * Dup;
    return half * Dinv * half.transpose();
}

AsymptoticMoments moments(Stat stat, const Matrix& B, const Vector& pi, Regime regime)
{
    check_model(B, pi);
    const Vector pt = pitilde(pi);
    AsymptoticMoments out;
    out.variant = stat;
    out.regime = regime;
    switch (stat) {
        case Stat::L: {
            const Matrix D = dmatrix(B, pi, regime);
            out.bias = 0.0;
            out.variance = pt.dot(D.diagonal().cwiseInverse().cwiseProduct(pt));
            break;
        }
        case Stat::S: {
            out.bias = pt.dot(linalg::vech(theta(B, pi, regime)));
            out.variance = pt.dot(gamma_tilde(B, pi, regime) * pt);
            break;
        }
        case Stat::R: {
            const SpectralStructure S = nu_factorization(B, pi);
            if (S.d() >= B.rows())
                throw theorem_error("residual statistic requires strictly rank-deficient B");
            out.bias = -pt.dot(linalg::vech(theta(B, pi, regime)));
            out.variance = pt.dot(gamma(B, pi, regime) * pt);
            break;
        }
    }
    return out;
}

std::vector<SurfaceRow> parameter_surface(SurfaceFamily family, const Vector& first_axis,
                                          const Vector& second_axis, Regime regime,
                                          const Vector& pi, double rho)
{
    if (family == SurfaceFamily::two_block_pq && pi.size() != 2)
        throw std::invalid_argument("two-block family needs a fixed pi of length 2");
    std::vector<SurfaceRow> rows;
    rows.reserve(static_cast<std::size_t>(first_axis.size() * second_axis.size()));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index a = 0; a < first_axis.size(); ++a)
        for (Eigen::Index b = 0; b < second_axis.size(); ++b) {
            SurfaceRow row;
            row.x = first_axis(a);
            row.y = second_axis(b);
            Vector factor(2), prob(2);
            if (family == SurfaceFamily::two_block_pq) {
                factor << row.x, row.y;
                prob = pi;
            } else {
                factor << row.x, row.x * row.x;
                prob << row.y, 1.0 - row.y;
            }
            const Matrix B = factor * factor.transpose();
            bool ok = prob.minCoeff() > 0.0 && prob.maxCoeff() < 1.0;
            for (Eigen::Index i = 0; ok && i < 2; ++i)
                for (Eigen::Index j = 0; ok && j < 2; ++j)
                    ok = rho * B(i, j) > 0.0 && rho * B(i, j) < 1.0;
            if (!ok) {
                row.valid = false;
                row.note = "rho*B outside (0,1), point skipped";
                row.bias = row.var_L = row.var_S = row.var_R = nan;
                rows.push_back(row);
                continue;
            }
            const AsymptoticMoments mL = moments(Stat::L, B, prob, regime);
            const AsymptoticMoments mS = moments(Stat::S, B, prob, regime);
            row.var_L = mL.variance;
            row.var_S = mS.variance;
            row.bias = mS.bias;
            try {
                row.var_R = moments(Stat::R, B, prob, regime).variance;
            } catch (const theorem_error&) {
                row.var_R = nan;
                row.note = "residual variance undefined at full rank";
            }
            rows.push_back(row);
        }
    return rows;
}

}  // namespace modnet::asymptotics
