#include <modnet/modularity.hpp>
#include <modnet/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace modnet::modularity {

namespace {

void check_labels(const models::Membership& tau, Eigen::Index n)
{
    if (tau.labels.size() != n)
        throw std::invalid_argument("membership length " + std::to_string(tau.labels.size())
                                    + " does not match matrix order " + std::to_string(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const int lab = tau.labels(i);
        if (lab < 1 || lab > tau.num_classes)
            throw std::invalid_argument("label " + std::to_string(lab) + " at node "
                                        + std::to_string(i + 1) + " outside 1.."
                                        + std::to_string(tau.num_classes));
    }
}

double scale_by_density(double raw, double rho, Eigen::Index n)
{
    return raw / (std::sqrt(rho) * static_cast<double>(n));
}

// Indicator block sums of a low-rank matrix U diag(values) U': entry (k,l) is
// s_k' Ahat s_l.
Matrix truncated_block_sums(const linalg::EigenSystem& top, const models::Membership& tau)
{
    const Eigen::Index n = top.vectors.rows();
    const Eigen::Index d = top.vectors.cols();
    const int K = tau.num_classes;
    Matrix G = Matrix::Zero(d, K);
    for (Eigen::Index i = 0; i < n; ++i) G.col(tau.labels(i) - 1) += top.vectors.row(i).transpose();
    return G.transpose() * top.values.head(d).asDiagonal() * G;
}

linalg::EigenSystem top_slice(const Matrix& A, int d)
{
    const Eigen::Index n = A.rows();
    if (d < 1 || d > n)
        throw std::invalid_argument("rank " + std::to_string(d) + " outside 1.."
                                    + std::to_string(n));
    if (n <= 256 || d + 8 >= n / 4) {
        linalg::EigenSystem full = linalg::sym_eig(A);
        return {full.values.head(d), full.vectors.leftCols(d)};
    }
    return embedding::dominant_eigs(A, d);
}

Matrix expected_block_sums(const models::SbmParams& params, const IntVector& counts)
{
    const Vector cnt = counts.cast<double>();
    return params.rho * (cnt * cnt.transpose()).cwiseProduct(params.B);
}

void check_params_match(const models::SbmParams& params, const models::Membership& tau)
{
    if (params.num_blocks() != tau.num_classes)
        throw std::invalid_argument("parameter matrix has " + std::to_string(params.num_blocks())
                                    + " blocks but membership has "
                                    + std::to_string(tau.num_classes) + " classes");
}

}  // namespace

Matrix block_sums(const Matrix& A, const models::Membership& tau, int K)
{
    const Eigen::Index n = A.rows();
    check_labels(tau, n);
    if (K < tau.num_classes)
        throw std::invalid_argument("block count smaller than the membership's class count");
    Matrix S = Matrix::Zero(K, K);
    for (Eigen::Index j = 0; j < n; ++j) {
        const int l = tau.labels(j) - 1;
        for (Eigen::Index i = 0; i < j; ++i) {
            const double a = A(i, j);
            const int k = tau.labels(i) - 1;
            S(k, l) += a;
            S(l, k) += a;
        }
        S(l, l) += A(j, j);
    }
    return S;
}

ModularityValue generic_modularity(const Matrix& A, const Matrix& Pnull,
                                   const models::Membership& tau)
{
    const Eigen::Index n = A.rows();
    if (Pnull.rows() != n || Pnull.cols() != A.cols())
        throw std::invalid_argument("null matrix shape does not match the adjacency matrix");
    check_labels(tau, n);
    double raw = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            if (tau.labels(i) == tau.labels(j)) raw += A(i, j) - Pnull(i, j);
    ModularityValue out;
    out.raw = raw;
    out.scaled = raw;
    out.variant = Variant::generic;
    out.partition_size = tau.num_classes;
    out.n = static_cast<int>(n);
    return out;
}

ModularityValue q_newman_girvan(const Matrix& A, const models::Membership& tau)
{
    const Eigen::Index n = A.rows();
    check_labels(tau, n);
    const Vector degrees = A.rowwise().sum();
    const double two_m = degrees.sum();
    if (two_m <= 0.0) throw std::domain_error("graph has no edge mass");
    const Matrix S = block_sums(A, tau, tau.num_classes);
    Vector block_degrees = Vector::Zero(tau.num_classes);
    for (Eigen::Index i = 0; i < n; ++i) block_degrees(tau.labels(i) - 1) += degrees(i);
    const double raw = S.trace() - block_degrees.squaredNorm() / two_m;
    ModularityValue out;
    out.raw = raw;
    out.scaled = raw / two_m;
    out.variant = Variant::newman_girvan;
    out.partition_size = tau.num_classes;
    out.n = static_cast<int>(n);
    return out;
}

ModularityValue q_likelihood(const models::Graph& graph, const models::SbmParams& params,
                             const models::Membership& tau)
{
    check_params_match(params, tau);
    const Matrix S = block_sums(graph.adjacency, tau, tau.num_classes);
    const Matrix E = expected_block_sums(params, tau.counts());
    ModularityValue out;
    out.raw = (S - E).trace();
    out.rho = params.rho;
    out.n = graph.n();
    out.scaled = scale_by_density(out.raw, out.rho, out.n);
    out.variant = Variant::likelihood;
    out.partition_size = tau.num_classes;
    return out;
}

ModularityValue q_spectral(const models::Graph& graph, int d, const models::SbmParams& params,
                           const models::Membership& tau)
{
    check_labels(tau, graph.adjacency.rows());
    return q_spectral(top_slice(graph.adjacency, d), params, tau, graph.n());
}

ModularityValue q_spectral(const linalg::EigenSystem& top, const models::SbmParams& params,
                           const models::Membership& tau, int n)
{
    check_params_match(params, tau);
    check_labels(tau, top.vectors.rows());
    const Matrix Shat = truncated_block_sums(top, tau);
    const Matrix E = expected_block_sums(params, tau.counts());
    ModularityValue out;
    out.raw = (Shat - E).trace();
    out.rho = params.rho;
    out.n = n;
    out.scaled = scale_by_density(out.raw, out.rho, out.n);
    out.variant = Variant::spectral;
    out.partition_size = tau.num_classes;
    return out;
}

ModularityValue q_residual(const models::Graph& graph, int d, const models::Membership& tau,
                           double rho)
{
    check_labels(tau, graph.adjacency.rows());
    return q_residual(graph, top_slice(graph.adjacency, d), tau, rho);
}

ModularityValue q_residual(const models::Graph& graph, const linalg::EigenSystem& top,
                           const models::Membership& tau, double rho)
{
    check_labels(tau, graph.adjacency.rows());
    const Matrix S = block_sums(graph.adjacency, tau, tau.num_classes);
    const Matrix Shat = truncated_block_sums(top, tau);
    ModularityValue out;
    out.raw = (S - Shat).trace();
    out.rho = rho;
    out.n = graph.n();
    out.scaled = scale_by_density(out.raw, out.rho, out.n);
    out.variant = Variant::residual;
    out.partition_size = tau.num_classes;
    return out;
}

namespace {

BlockEstimate finish_estimate(const Matrix& S, const IntVector& counts, double rho,
                              Variant variant)
{
    const int K = static_cast<int>(counts.size());
    for (int k = 0; k < K; ++k)
        if (counts(k) == 0) throw std::domain_error("block " + std::to_string(k + 1) + " is empty");
    BlockEstimate out;
    out.Bhat = Matrix(K, K);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l)
            out.Bhat(k, l) =
                S(k, l) / (rho * static_cast<double>(counts(k)) * static_cast<double>(counts(l)));
    out.counts = counts;
    out.variant = variant;
    return out;
}

}  // namespace

BlockEstimate block_estimator_likelihood(const models::Graph& graph,
                                         const models::Membership& tau, double rho)
{
    const Matrix S = block_sums(graph.adjacency, tau, tau.num_classes);
    return finish_estimate(S, tau.counts(), rho, Variant::likelihood);
}

BlockEstimate block_estimator_spectral(const models::Graph& graph, const models::Membership& tau,
                                       int d, double rho)
{
    check_labels(tau, graph.adjacency.rows());
    return block_estimator_spectral(top_slice(graph.adjacency, d), tau, rho);
}

BlockEstimate block_estimator_spectral(const linalg::EigenSystem& top,
                                       const models::Membership& tau, double rho)
{
    check_labels(tau, top.vectors.rows());
    const Matrix Shat = truncated_block_sums(top, tau);
    return finish_estimate(Shat, tau.counts(), rho, Variant::spectral);
}

namespace {

// Symmetric weighted graph in ordered-pair mass form: loops[i] = S_ii once,
// neighbors hold S_ij for j != i, strength[i] = sum_j S_ij, total = sum_ij S_ij.
struct WeightedGraph {
    std::vector<std::vector<std::pair<int, double>>> neighbors;
    std::vector<double> loops;
    std::vector<double> strength;
    double total = 0.0;

    int size() const { return static_cast<int>(loops.size()); }
};

WeightedGraph from_adjacency(const Matrix& A)
{
    const int n = static_cast<int>(A.rows());
    WeightedGraph g;
    g.neighbors.resize(n);
    g.loops.assign(n, 0.0);
    g.strength.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        g.loops[i] = A(i, i);
        double s = A(i, i);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = A(i, j);
            if (w != 0.0) {
                g.neighbors[i].emplace_back(j, w);
                s += w;
            }
        }
        g.strength[i] = s;
        g.total += s;
    }
    return g;
}

// One sweep-until-stable local-move phase; returns whether any node changed
// community.
bool local_phase(const WeightedGraph& g, std::vector<int>& comm, Rng& rng)
{
    const int n = g.size();
    std::vector<double> tot(n, 0.0);
    for (int i = 0; i < n; ++i) tot[comm[i]] += g.strength[i];
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<double> mass_to(n, 0.0);
    std::vector<int> touched;
    bool any = false;
    bool moved = true;
    while (moved) {
        moved = false;
        for (int u : order) {
            const int a = comm[u];
            tot[a] -= g.strength[u];
            touched.clear();
            touched.push_back(a);
            for (const auto& [v, w] : g.neighbors[u]) {
                const int c = comm[v];
                if (mass_to[c] == 0.0 && c != a) touched.push_back(c);
                mass_to[c] += w;
            }
            std::sort(touched.begin(), touched.end());
            touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
            int best = a;
            double best_gain = mass_to[a] - tot[a] * g.strength[u] / g.total;
            for (int c : touched) {
                if (c == a) continue;
                const double gain = mass_to[c] - tot[c] * g.strength[u] / g.total;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best = c;
                }
            }
            for (int c : touched) mass_to[c] = 0.0;
            comm[u] = best;
            tot[best] += g.strength[u];
            if (best != a) {
                moved = true;
                any = true;
            }
        }
    }
    return any;
}

// Communities renumbered by first appearance in node order; returns the count.
int renumber(std::vector<int>& comm)
{
    std::vector<int> remap(comm.size(), -1);
    int next = 0;
    for (int& c : comm) {
        if (remap[c] < 0) remap[c] = next++;
        c = remap[c];
    }
    return next;
}

double phase_quality(const WeightedGraph& g, const std::vector<int>& comm, int ncomm)
{
    std::vector<double> in(ncomm, 0.0), tot(ncomm, 0.0);
    for (int i = 0; i < g.size(); ++i) {
        in[comm[i]] += g.loops[i];
        tot[comm[i]] += g.strength[i];
        for (const auto& [j, w] : g.neighbors[i])
            if (comm[j] == comm[i]) in[comm[i]] += w;
    }
    double q = 0.0;
    for (int c = 0; c < ncomm; ++c)
        q += in[c] / g.total - (tot[c] / g.total) * (tot[c] / g.total);
    return q;
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<int>& comm, int ncomm)
{
    WeightedGraph coarse;
    coarse.neighbors.resize(ncomm);
    coarse.loops.assign(ncomm, 0.0);
    coarse.strength.assign(ncomm, 0.0);
    std::vector<double> row(ncomm, 0.0);
    std::vector<std::vector<std::pair<int, double>>> bucket(ncomm);
    for (int i = 0; i < g.size(); ++i) {
        const int c = comm[i];
        coarse.loops[c] += g.loops[i];
        for (const auto& [j, w] : g.neighbors[i]) {
            if (comm[j] == c)
                coarse.loops[c] += w;  // both directions of an internal pair land here in turn
            else
                bucket[c].emplace_back(comm[j], w);
        }
    }
    for (int c = 0; c < ncomm; ++c) {
        std::vector<int> seen;
        for (const auto& [d, w] : bucket[c]) {
            if (row[d] == 0.0) seen.push_back(d);
            row[d] += w;
        }
        std::sort(seen.begin(), seen.end());
        double s = coarse.loops[c];
        for (int d : seen) {
            coarse.neighbors[c].emplace_back(d, row[d]);
            s += row[d];
            row[d] = 0.0;
        }
        coarse.strength[c] = s;
        coarse.total += s;
    }
    return coarse;
}

}  // namespace

std::pair<models::Membership, double> louvain(const models::Graph& graph, std::uint64_t seed,
                                              std::vector<double>* pass_q)
{
    const int n = graph.n();
    WeightedGraph g = from_adjacency(graph.adjacency);
    if (g.total <= 0.0) throw std::domain_error("graph has no edge mass");
    if (pass_q != nullptr) pass_q->clear();

    Rng rng(seed);
    std::vector<int> node_comm(n);
    std::iota(node_comm.begin(), node_comm.end(), 0);  // original node -> current coarse node
    for (int level = 0;; ++level) {
        std::vector<int> comm(g.size());
        std::iota(comm.begin(), comm.end(), 0);
        const bool changed = local_phase(g, comm, rng);
        const int ncomm = renumber(comm);
        if (pass_q != nullptr) pass_q->push_back(phase_quality(g, comm, ncomm));
        for (int& c : node_comm) c = comm[c];
        if (!changed || ncomm == g.size()) break;
        g = aggregate(g, comm, ncomm);
    }

    // Relabel communities by their smallest original node, 1-based.
    std::vector<int> first(n, -1);
    int next = 0;
    models::Membership out;
    out.labels = IntVector(n);
    for (int i = 0; i < n; ++i) {
        if (first[node_comm[i]] < 0) first[node_comm[i]] = ++next;
        out.labels(i) = first[node_comm[i]];
    }
    out.num_classes = next;
    return {out, q_newman_girvan(graph.adjacency, out).scaled};
}

}  // namespace modnet::modularity
