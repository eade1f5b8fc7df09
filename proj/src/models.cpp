#include <modnet/models.hpp>
#include <modnet/rng.hpp>

#include <cmath>
#include <string>

namespace modnet::models {

SbmParams::SbmParams(Matrix B_in, Vector pi_in, double rho_in)
    : B(std::move(B_in)), pi(std::move(pi_in)), rho(rho_in)
{
    if (B.rows() != B.cols() || B.rows() < 1)
        throw std::invalid_argument("SbmParams: B must be square and non-empty");
    if (pi.size() != B.rows())
        throw std::invalid_argument("SbmParams: pi length must match the order of B");
    for (Eigen::Index j = 0; j < B.cols(); ++j)
        for (Eigen::Index i = j; i < B.rows(); ++i)
            B(j, i) = B(i, j);
    if (rho <= 0.0 || rho > 1.0)
        throw std::domain_error("SbmParams: rho must lie in (0, 1]");
    for (Eigen::Index i = 0; i < B.rows(); ++i)
        for (Eigen::Index j = 0; j < B.cols(); ++j) {
            const double p = B(i, j);
            if (!(p > 0.0 && p < 1.0))
                throw std::domain_error("SbmParams: B(" + std::to_string(i + 1) + "," +
                                        std::to_string(j + 1) + ") outside (0,1)");
            if (!(rho * p > 0.0 && rho * p < 1.0))
                throw std::domain_error("SbmParams: rho*B outside (0,1)");
        }
    double sum = 0.0;
    for (Eigen::Index k = 0; k < pi.size(); ++k) {
        if (!(pi[k] > 0.0 && pi[k] < 1.0) && pi.size() > 1)
            throw std::domain_error("SbmParams: pi entries must lie in (0,1)");
        sum += pi[k];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::domain_error("SbmParams: pi must sum to 1");
}

IntVector Membership::counts() const
{
    IntVector c = IntVector::Zero(num_classes);
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        c[labels[i] - 1] += 1;
    return c;
}

Membership sample_memberships(const Vector& pi, int n, std::uint64_t seed)
{
    Rng rng(seed);
    Membership tau;
    tau.num_classes = static_cast<int>(pi.size());
    tau.labels.resize(n);
    for (int i = 0; i < n; ++i)
        tau.labels[i] = rng.categorical(pi) + 1;
    return tau;
}

Graph sample_sbm(const SbmParams& params, const Membership& tau, std::uint64_t seed)
{
    const int n = static_cast<int>(tau.labels.size());
    const int K = params.num_blocks();
    for (int i = 0; i < n; ++i)
        if (tau.labels[i] < 1 || tau.labels[i] > K)
            throw std::invalid_argument("sample_sbm: label out of range at node " +
                                        std::to_string(i + 1));
    Rng rng(seed);
    Graph g;
    g.adjacency.resize(n, n);
    // Upper triangle including the diagonal is sampled; the rest is mirrored.
    for (int j = 0; j < n; ++j) {
        const int bj = tau.labels[j] - 1;
        for (int i = 0; i <= j; ++i) {
            const double p = params.rho * params.B(tau.labels[i] - 1, bj);
            g.adjacency(i, j) = rng.bernoulli(p) ? 1.0 : 0.0;
        }
    }
    g.adjacency.triangularView<Eigen::StrictlyLower>() =
        g.adjacency.transpose().triangularView<Eigen::StrictlyLower>();
    return g;
}

Matrix expected_matrix(const SbmParams& params, const Membership& tau)
{
    const int n = static_cast<int>(tau.labels.size());
    const int K = params.num_blocks();
    for (int i = 0; i < n; ++i)
        if (tau.labels[i] < 1 || tau.labels[i] > K)
            throw std::invalid_argument("expected_matrix: label out of range at node " +
                                        std::to_string(i + 1));
    Matrix P(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            P(i, j) = params.rho * params.B(tau.labels[i] - 1, tau.labels[j] - 1);
    return P;
}

Graph sample_grdpg(const LatentPositions& positions, std::uint64_t seed)
{
    const Eigen::Index n = positions.X.rows();
    const Eigen::Index d = positions.X.cols();
    if (positions.p + positions.q != d)
        throw std::invalid_argument("sample_grdpg: signature does not match column count");
    Vector ipq(d);
    for (Eigen::Index c = 0; c < d; ++c)
        ipq[c] = c < positions.p ? 1.0 : -1.0;

    Rng rng(seed);
    Graph g;
    g.adjacency.resize(n, n);
    Matrix XI = positions.X * ipq.asDiagonal();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i <= j; ++i) {
            double p = XI.row(i).dot(positions.X.row(j));
            if (p < -1e-12 || p > 1.0 + 1e-12)
                throw std::domain_error("sample_grdpg: probability outside [0,1] at (" +
                                        std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
            p = std::min(1.0, std::max(0.0, p));
            g.adjacency(i, j) = rng.bernoulli(p) ? 1.0 : 0.0;
        }
    g.adjacency.triangularView<Eigen::StrictlyLower>() =
        g.adjacency.transpose().triangularView<Eigen::StrictlyLower>();
    return g;
}

std::pair<LatentPositions, Membership> hardy_weinberg_positions(const BetaMixture& mix,
                                                                int n, std::uint64_t seed)
{
    if (!(mix.weight > 0.0 && mix.weight < 1.0))
        throw std::domain_error("hardy_weinberg_positions: mixture weight outside (0,1)");
    if (mix.a1 <= 0.0 || mix.b1 <= 0.0 || mix.a2 <= 0.0 || mix.b2 <= 0.0)
        throw std::domain_error("hardy_weinberg_positions: Beta parameters must be positive");
    Rng rng(seed);
    LatentPositions pos;
    pos.X.resize(n, 3);
    pos.p = 3;
    pos.q = 0;
    Membership oracle;
    oracle.num_classes = 2;
    oracle.labels.resize(n);
    for (int i = 0; i < n; ++i) {
        const bool first = rng.bernoulli(mix.weight);
        const double t = first ? rng.beta(mix.a1, mix.b1) : rng.beta(mix.a2, mix.b2);
        oracle.labels[i] = first ? 1 : 2;
        pos.X(i, 0) = t * t;
        pos.X(i, 1) = 2.0 * t * (1.0 - t);
        pos.X(i, 2) = (1.0 - t) * (1.0 - t);
    }
    return {std::move(pos), std::move(oracle)};
}

}  // namespace modnet::models
