#pragma once

#include <modnet/linalg.hpp>
#include <modnet/models.hpp>
#include <modnet/types.hpp>

#include <cstdint>
#include <vector>

namespace modnet::embedding {

// Rows are node coordinates U |lambda|^{1/2} for the top-d (by |lambda|) eigenpairs.
struct Embedding {
    Matrix coords;
    int source_rank = 0;
};

struct ClusterResult {
    models::Membership labels;
    Matrix centers;
    double objective = 0.0;  // within-cluster sum of squares, or log-likelihood for gmm_em
};

struct LabelAlignment {
    std::vector<int> perm;  // perm[e-1] is the relabeled value for estimated label e
    int agreement = 0;
};

// Controls for the blocked subspace iteration behind dominant_eigs.
struct DominantOptions {
    int extra = 4;             // buffer columns beyond the requested count
    double tol = 1e-10;        // residual tolerance, relative to the largest |Ritz value|
    int max_iterations = 300;
    int strict = -1;           // leading pairs whose residual must pass; -1 means all requested
    std::uint64_t seed = 0x6d6e65743031ULL;       // stream for random start columns
    const models::Membership* warm_start = nullptr;  // block indicators seed the subspace
};

// Top `howmany` eigenpairs by |lambda| via subspace iteration with
// Rayleigh-Ritz extraction. Deterministic for fixed inputs and options.
// Throws numerical_error when the strict leading pairs fail to converge.
linalg::EigenSystem dominant_eigs(const Matrix& A, int howmany,
                                  const DominantOptions& opts = {});

Embedding spectral_embed(const models::Graph& graph, int d);

// Largest-consecutive-ratio rule on |values| sorted descending:
// argmax_{1<=i<=d_max} |v_i|/|v_{i+1}|, ties to the smallest i; a zero
// |v_{i+1}| before d_max returns the index preceding the zero.
int estimate_rank(const Vector& values, int d_max);

ClusterResult kmeans(const Matrix& rows, int K, int restarts, std::uint64_t seed);

ClusterResult gmm_em(const Matrix& rows, int K, std::uint64_t seed);

// Permutation of estimated labels maximizing agreement with the reference;
// exhaustive for up to 8 labels, greedy on the confusion matrix above that.
LabelAlignment align_labels(const models::Membership& est, const models::Membership& ref);

models::Membership apply_alignment(const models::Membership& est, const LabelAlignment& alignment);

double adjusted_rand_index(const models::Membership& a, const models::Membership& b);

}  // namespace modnet::embedding
