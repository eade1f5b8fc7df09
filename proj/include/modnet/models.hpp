#pragma once

#include <modnet/types.hpp>

#include <cstdint>
#include <utility>

namespace modnet::models {

// Block connectivity, community prior and sparsity factor. The lower triangle
// of B is authoritative; the constructor mirrors it and validates ranges.
struct SbmParams {
    Matrix B;
    Vector pi;
    double rho = 1.0;

    SbmParams(Matrix B_in, Vector pi_in, double rho_in = 1.0);
    int num_blocks() const { return static_cast<int>(B.rows()); }
};

// Community labels, values in 1..K.
struct Membership {
    IntVector labels;
    int num_classes = 0;

    IntVector counts() const;
};

// Binary symmetric adjacency; the diagonal may carry loops.
struct Graph {
    Matrix adjacency;

    int n() const { return static_cast<int>(adjacency.rows()); }
};

// Rows are latent positions; edge probabilities are rows' indefinite inner
// products under signature (p, q), p + q = columns.
struct LatentPositions {
    Matrix X;
    int p = 0;
    int q = 0;
};

// Two-component Beta mixture for the Hardy-Weinberg latent curve.
struct BetaMixture {
    double weight;  // component-1 probability
    double a1, b1;
    double a2, b2;
};

Membership sample_memberships(const Vector& pi, int n, std::uint64_t seed);

Graph sample_sbm(const SbmParams& params, const Membership& tau, std::uint64_t seed);

// P_ij = rho * B_{tau_i tau_j}, diagonal included.
Matrix expected_matrix(const SbmParams& params, const Membership& tau);

Graph sample_grdpg(const LatentPositions& positions, std::uint64_t seed);

// Latent rows [t^2, 2t(1-t), (1-t)^2] with t from the Beta mixture; the
// returned membership records which mixture component generated each t.
std::pair<LatentPositions, Membership> hardy_weinberg_positions(const BetaMixture& mix,
                                                                int n, std::uint64_t seed);

}  // namespace modnet::models
