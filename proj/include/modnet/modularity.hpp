#pragma once

#include <modnet/embedding.hpp>
#include <modnet/linalg.hpp>
#include <modnet/models.hpp>
#include <modnet/types.hpp>

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace modnet::modularity {

enum class Variant { generic, newman_girvan, likelihood, spectral, residual };

struct ModularityValue {
    double raw = 0.0;
    // raw / (sqrt(rho) * n) for the likelihood/spectral/residual variants,
    // raw / (2m) for Newman-Girvan, equal to raw for the generic form.
    double scaled = 0.0;
    Variant variant = Variant::generic;
    int partition_size = 0;
    double rho = std::numeric_limits<double>::quiet_NaN();
    int n = 0;
};

struct BlockEstimate {
    Matrix Bhat;
    IntVector counts;
    Variant variant = Variant::likelihood;
};

// s_k' A s_l for every block pair, diagonal of A included.
Matrix block_sums(const Matrix& A, const models::Membership& tau, int K);

// Double sum over ordered pairs (i,j), i = j included, restricted to
// same-label pairs.
ModularityValue generic_modularity(const Matrix& A, const Matrix& Pnull,
                                   const models::Membership& tau);

// Null network k_i k_j / (2m); `scaled` holds the normalized value raw / (2m).
ModularityValue q_newman_girvan(const Matrix& A, const models::Membership& tau);

ModularityValue q_likelihood(const models::Graph& graph, const models::SbmParams& params,
                             const models::Membership& tau);

ModularityValue q_spectral(const models::Graph& graph, int d, const models::SbmParams& params,
                           const models::Membership& tau);

// Same statistic computed from an already-available top-d eigenpair slice.
ModularityValue q_spectral(const linalg::EigenSystem& top, const models::SbmParams& params,
                           const models::Membership& tau, int n);

ModularityValue q_residual(const models::Graph& graph, int d, const models::Membership& tau,
                           double rho = 1.0);

ModularityValue q_residual(const models::Graph& graph, const linalg::EigenSystem& top,
                           const models::Membership& tau, double rho = 1.0);

BlockEstimate block_estimator_likelihood(const models::Graph& graph,
                                         const models::Membership& tau, double rho);

BlockEstimate block_estimator_spectral(const models::Graph& graph, const models::Membership& tau,
                                       int d, double rho);

BlockEstimate block_estimator_spectral(const linalg::EigenSystem& top,
                                       const models::Membership& tau, double rho);

// Two-phase heuristic maximizing normalized Newman-Girvan modularity; node
// visit order is shuffled from the seed. Optionally records the normalized Q
// reached after each aggregation pass.
std::pair<models::Membership, double> louvain(const models::Graph& graph, std::uint64_t seed,
                                              std::vector<double>* pass_q = nullptr);

}  // namespace modnet::modularity
