#include <modnet/embedding.hpp>
#include <modnet/rng.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace modnet::embedding {

namespace {

Matrix orthonormalize(const Matrix& Y)
{
    Eigen::HouseholderQR<Matrix> qr(Y);
    return qr.householderQ() * Matrix::Identity(Y.rows(), Y.cols());
}

}  // namespace

linalg::EigenSystem dominant_eigs(const Matrix& A, int howmany, const DominantOptions& opts)
{
    const Eigen::Index n = A.rows();
    if (A.cols() != n)
        throw std::invalid_argument("dominant_eigs: matrix must be square");
    if (howmany < 1 || howmany > n)
        throw std::invalid_argument("dominant_eigs: requested count out of range");

    int m = std::min<Eigen::Index>(n, howmany + std::max(0, opts.extra));
    if (opts.warm_start != nullptr)
        m = std::min<Eigen::Index>(n, std::max(m, opts.warm_start->num_classes + 2));
    const int strict = opts.strict < 0 ? howmany : std::min(opts.strict, howmany);

    Matrix X(n, m);
    int col = 0;
    if (opts.warm_start != nullptr) {
        // Block indicator columns span most of the signal subspace already.
        const auto& tau = *opts.warm_start;
        const int K = std::min<int>(tau.num_classes, m);
        X.leftCols(K).setZero();
        for (Eigen::Index i = 0; i < tau.labels.size() && i < n; ++i) {
            const int k = tau.labels[i] - 1;
            if (k < K) X(i, k) = 1.0;
        }
        col = K;
    }
    Rng rng(opts.seed);
    for (; col < m; ++col)
        for (Eigen::Index i = 0; i < n; ++i)
            X(i, col) = rng.normal();
    X = orthonormalize(X);

    Vector theta(m), prev_theta = Vector::Zero(m);
    Matrix Z, AZ;
    bool converged = false;
    for (int it = 0; it < opts.max_iterations && !converged; ++it) {
        Matrix Y = A * X;
        Matrix T = X.transpose() * Y;
        T = 0.5 * (T + T.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> small(T);
        if (small.info() != Eigen::Success)
            throw numerical_error("dominant_eigs: Rayleigh-Ritz solve failed for order " +
                                  std::to_string(n));
        const auto order = linalg::detail::abs_order(small.eigenvalues());
        Matrix W(m, m);
        for (int j = 0; j < m; ++j) {
            theta[j] = small.eigenvalues()[order[j]];
            W.col(j) = small.eigenvectors().col(order[j]);
        }
        Z = X * W;
        AZ = Y * W;

        const double scale = std::max(std::abs(theta[0]), 1e-300);
        bool ok = true;
        for (int j = 0; j < strict && ok; ++j)
            ok = (AZ.col(j) - theta[j] * Z.col(j)).norm() <= opts.tol * scale;
        if (strict == 0) {
            // Best-effort mode: stop once the Ritz values stop moving.
            double drift = 0.0;
            for (int j = 0; j < m; ++j)
                drift = std::max(drift, std::abs(theta[j] - prev_theta[j]));
            ok = it > 0 && drift <= 1e-8 * scale;
        }
        converged = ok;
        prev_theta = theta;
        if (!converged) X = orthonormalize(Y);
    }
    if (!converged && strict > 0)
        throw numerical_error("dominant_eigs: no convergence within " +
                              std::to_string(opts.max_iterations) + " iterations for order " +
                              std::to_string(n));

    linalg::EigenSystem out;
    out.values = theta.head(howmany);
    out.vectors = Z.leftCols(howmany);
    linalg::detail::canonicalize_signs(out.vectors);
    return out;
}

Embedding spectral_embed(const models::Graph& graph, int d)
{
    const Eigen::Index n = graph.adjacency.rows();
    if (d < 1 || d > n)
        throw std::invalid_argument("spectral_embed: rank " + std::to_string(d) +
                                    " out of range for order " + std::to_string(n));
    linalg::EigenSystem top;
    bool have_top = false;
    if (n > 256 && d + 8 < n / 4) {
        try {
            top = dominant_eigs(graph.adjacency, d);
            have_top = true;
        } catch (const numerical_error&) {
            // Iteration stalls when the trailing eigenvalue sits inside the bulk.
        }
    }
    if (!have_top) {
        const auto full = linalg::sym_eig(graph.adjacency);
        top.values = full.values.head(d);
        top.vectors = full.vectors.leftCols(d);
    }
    Embedding emb;
    emb.source_rank = d;
    emb.coords = top.vectors * top.values.cwiseAbs().cwiseSqrt().asDiagonal();
    return emb;
}

int estimate_rank(const Vector& values, int d_max)
{
    if (d_max < 1 || d_max >= values.size())
        throw std::invalid_argument("estimate_rank: d_max must satisfy 1 <= d_max < count");
    int best = 1;
    double best_ratio = -1.0;
    for (int i = 0; i < d_max; ++i) {
        const double denom = std::abs(values[i + 1]);
        if (denom == 0.0) return i + 1;
        const double ratio = std::abs(values[i]) / denom;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = i + 1;
        }
    }
    return best;
}

namespace {

double squared_distance(const Matrix& rows, Eigen::Index i, const Matrix& centers, int k)
{
    return (rows.row(i) - centers.row(k)).squaredNorm();
}

Matrix seed_centers(const Matrix& rows, int K, Rng& rng)
{
    const Eigen::Index n = rows.rows();
    Matrix centers(K, rows.cols());
    centers.row(0) = rows.row(static_cast<Eigen::Index>(rng.below(n)));
    Vector d2(n);
    for (int k = 1; k < K; ++k) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (int c = 0; c < k; ++c)
                best = std::min(best, squared_distance(rows, i, centers, c));
            d2[i] = best;
            total += best;
        }
        Eigen::Index pick = 0;
        if (total > 0.0) {
            // Distance-weighted draw.
            const double target = rng.uniform() * total;
            double cum = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                cum += d2[i];
                if (target < cum) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.below(n));
        }
        centers.row(k) = rows.row(pick);
    }
    return centers;
}

struct LloydRun {
    IntVector labels;
    Matrix centers;
    double objective;
};

LloydRun lloyd(const Matrix& rows, int K, Rng& rng)
{
    const Eigen::Index n = rows.rows();
    Matrix centers = seed_centers(rows, K, rng);
    IntVector labels = IntVector::Zero(n);
    double prev = std::numeric_limits<double>::max();
    double objective = prev;
    for (int it = 0; it < 300; ++it) {
        objective = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double bestd = squared_distance(rows, i, centers, 0);
            for (int k = 1; k < K; ++k) {
                const double d = squared_distance(rows, i, centers, k);
                if (d < bestd) {
                    bestd = d;
                    best = k;
                }
            }
            labels[i] = best;
            objective += bestd;
        }
        Matrix sums = Matrix::Zero(K, rows.cols());
        IntVector counts = IntVector::Zero(K);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(labels[i]) += rows.row(i);
            counts[labels[i]] += 1;
        }
        for (int k = 0; k < K; ++k) {
            if (counts[k] > 0) {
                centers.row(k) = sums.row(k) / counts[k];
            } else {
                // Re-seed an emptied cluster at the farthest point.
                Eigen::Index far = 0;
                double fard = -1.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double d = squared_distance(rows, i, centers, labels[i]);
                    if (d > fard) {
                        fard = d;
                        far = i;
                    }
                }
                centers.row(k) = rows.row(far);
            }
        }
        if (prev - objective <= 1e-10 * std::max(1.0, prev) && it > 0) break;
        prev = objective;
    }
    return {std::move(labels), std::move(centers), objective};
}

}  // namespace

ClusterResult kmeans(const Matrix& rows, int K, int restarts, std::uint64_t seed)
{
    const Eigen::Index n = rows.rows();
    if (K < 1 || K > n)
        throw std::invalid_argument("kmeans: cluster count out of range");
    if (restarts < 1)
        throw std::invalid_argument("kmeans: restarts must be positive");
    LloydRun best;
    best.objective = std::numeric_limits<double>::max();
    for (int r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        LloydRun run = lloyd(rows, K, rng);
        if (run.objective < best.objective) best = std::move(run);
    }
    ClusterResult out;
    out.labels.num_classes = K;
    out.labels.labels = best.labels.array() + 1;
    out.centers = std::move(best.centers);
    out.objective = best.objective;
    return out;
}

ClusterResult gmm_em(const Matrix& rows, int K, std::uint64_t seed)
{
    const Eigen::Index n = rows.rows();
    const Eigen::Index d = rows.cols();
    if (K < 1 || K > n)
        throw std::invalid_argument("gmm_em: cluster count out of range");
    constexpr double kVarFloor = 1e-6;

    const ClusterResult init = kmeans(rows, K, 20, derive_seed(seed, 0));
    Matrix means = init.centers;
    Matrix vars = Matrix::Constant(K, d, kVarFloor);
    Vector weights = Vector::Constant(K, 1.0 / K);
    {
        IntVector counts = IntVector::Zero(K);
        for (Eigen::Index i = 0; i < n; ++i)
            counts[init.labels.labels[i] - 1] += 1;
        for (int k = 0; k < K; ++k) {
            if (counts[k] > 0) weights[k] = static_cast<double>(counts[k]) / n;
            for (Eigen::Index i = 0; i < n; ++i)
                if (init.labels.labels[i] - 1 == k)
                    vars.row(k) += (rows.row(i) - means.row(k)).array().square().matrix() /
                                   std::max(1, counts[k]);
        }
    }

    Matrix resp(n, K);
    double loglik = -std::numeric_limits<double>::max();
    for (int it = 0; it < 200; ++it) {
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            Vector logp(K);
            for (int k = 0; k < K; ++k) {
                double lp = std::log(std::max(weights[k], 1e-300));
                for (Eigen::Index c = 0; c < d; ++c) {
                    const double var = vars(k, c);
                    const double diff = rows(i, c) - means(k, c);
                    lp += -0.5 * std::log(2.0 * M_PI * var) - 0.5 * diff * diff / var;
                }
                logp[k] = lp;
            }
            const double mx = logp.maxCoeff();
            const double lse = mx + std::log((logp.array() - mx).exp().sum());
            resp.row(i) = (logp.array() - lse).exp();
            ll += lse;
        }
        for (int k = 0; k < K; ++k) {
            const double nk = resp.col(k).sum();
            weights[k] = std::max(nk / n, 1e-12);
            if (nk > 0.0) {
                means.row(k) = (resp.col(k).transpose() * rows) / nk;
                for (Eigen::Index c = 0; c < d; ++c) {
                    double s = 0.0;
                    for (Eigen::Index i = 0; i < n; ++i) {
                        const double diff = rows(i, c) - means(k, c);
                        s += resp(i, k) * diff * diff;
                    }
                    vars(k, c) = std::max(s / nk, kVarFloor);
                }
            }
        }
        if (std::abs(ll - loglik) <= 1e-8 * std::max(1.0, std::abs(ll))) {
            loglik = ll;
            break;
        }
        loglik = ll;
    }

    ClusterResult out;
    out.labels.num_classes = K;
    out.labels.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index k = 0;
        resp.row(i).maxCoeff(&k);
        out.labels.labels[i] = static_cast<int>(k) + 1;
    }
    out.centers = std::move(means);
    out.objective = loglik;
    return out;
}

LabelAlignment align_labels(const models::Membership& est, const models::Membership& ref)
{
    if (est.labels.size() != ref.labels.size())
        throw std::invalid_argument("align_labels: label vectors differ in length");
    const int K = std::max(est.num_classes, ref.num_classes);
    Matrix C = Matrix::Zero(K, K);
    for (Eigen::Index i = 0; i < est.labels.size(); ++i)
        C(est.labels[i] - 1, ref.labels[i] - 1) += 1.0;

    std::vector<int> perm(K);
    double best = -1.0;
    if (K <= 8) {
        std::vector<int> p(K);
        std::iota(p.begin(), p.end(), 0);
        do {
            double score = 0.0;
            for (int e = 0; e < K; ++e) score += C(e, p[e]);
            if (score > best) {
                best = score;
                perm = p;
            }
        } while (std::next_permutation(p.begin(), p.end()));
    } else {
        std::vector<bool> row_used(K, false), col_used(K, false);
        best = 0.0;
        for (int step = 0; step < K; ++step) {
            int be = -1, br = -1;
            double bv = -1.0;
            for (int e = 0; e < K; ++e) {
                if (row_used[e]) continue;
                for (int r = 0; r < K; ++r) {
                    if (col_used[r]) continue;
                    if (C(e, r) > bv) {
                        bv = C(e, r);
                        be = e;
                        br = r;
                    }
                }
            }
            perm[be] = br;
            row_used[be] = true;
            col_used[br] = true;
            best += bv;
        }
    }
    LabelAlignment out;
    out.perm.resize(K);
    for (int e = 0; e < K; ++e) out.perm[e] = perm[e] + 1;
    out.agreement = static_cast<int>(best);
    return out;
}

models::Membership apply_alignment(const models::Membership& est, const LabelAlignment& alignment)
{
    models::Membership out;
    out.num_classes = static_cast<int>(alignment.perm.size());
    out.labels.resize(est.labels.size());
    for (Eigen::Index i = 0; i < est.labels.size(); ++i)
        out.labels[i] = alignment.perm[est.labels[i] - 1];
    return out;
}

double adjusted_rand_index(const models::Membership& a, const models::Membership& b)
{
    const Eigen::Index n = a.labels.size();
    if (b.labels.size() != n)
        throw std::invalid_argument("adjusted_rand_index: label vectors differ in length");
    if (n < 2)
        throw std::domain_error("adjusted_rand_index: need at least two items");
    const int Ka = a.num_classes, Kb = b.num_classes;
    Matrix C = Matrix::Zero(Ka, Kb);
    for (Eigen::Index i = 0; i < n; ++i)
        C(a.labels[i] - 1, b.labels[i] - 1) += 1.0;
    auto choose2 = [](double x) { return 0.5 * x * (x - 1.0); };
    double sum_cells = 0.0;
    for (int i = 0; i < Ka; ++i)
        for (int j = 0; j < Kb; ++j) sum_cells += choose2(C(i, j));
    double sum_a = 0.0, sum_b = 0.0;
    for (int i = 0; i < Ka; ++i) sum_a += choose2(C.row(i).sum());
    for (int j = 0; j < Kb; ++j) sum_b += choose2(C.col(j).sum());
    const double total = choose2(static_cast<double>(n));
    const double expected = sum_a * sum_b / total;
    const double maximum = 0.5 * (sum_a + sum_b);
    if (maximum == expected) return sum_cells == expected ? 1.0 : 0.0;
    return (sum_cells - expected) / (maximum - expected);
}

}  // namespace modnet::embedding
