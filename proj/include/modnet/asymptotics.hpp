#pragma once

#include <modnet/linalg.hpp>
#include <modnet/types.hpp>

#include <string>
#include <utility>
#include <vector>

namespace modnet::asymptotics {

enum class Regime { dense, sparse };

enum class Stat { L, S, R };

struct SpectralStructure {
    Matrix nu;                     // K x d, nu = V |Sigma|^{1/2}
    std::pair<int, int> signature;  // (p, q) counts of positive / negative kept eigenvalues
    Matrix Delta;                  // d x d, nu' diag(pi) nu
    Matrix ProjPerp;               // K x K oblique projector annihilating V
    Matrix V;                      // K x d kept eigenvectors of B
    Vector values;                 // kept eigenvalues, |.|-descending

    int d() const { return static_cast<int>(nu.cols()); }
    Matrix ipq() const;  // diag(+1 p times, -1 q times)
};

struct AsymptoticMoments {
    double bias = 0.0;  // coefficient of rho^{-1/2} in the limiting mean
    double variance = 0.0;
    Stat variant = Stat::L;
    Regime regime = Regime::dense;
};

enum class SurfaceFamily {
    two_block_pq,   // B = [p;q][p q], membership probabilities supplied and fixed
    rank_one_p_pi,  // B = [p;p^2][p p^2], second axis is pi_1
};

struct SurfaceRow {
    double x = 0.0;
    double y = 0.0;
    double bias = 0.0;
    double var_L = 0.0;
    double var_S = 0.0;
    double var_R = 0.0;
    bool valid = true;
    std::string note;  // reason when the grid point is skipped
};

// vech of diag(pi_1^2, ..., pi_K^2).
Vector pitilde(const Vector& pi);

SpectralStructure nu_factorization(const Matrix& B, const Vector& pi);

// Diagonal weight matrix of order K(K+1)/2 indexed vech-style.
Matrix dmatrix(const Matrix& B, const Vector& pi, Regime regime);

Matrix theta(const Matrix& B, const Vector& pi, Regime regime);

Matrix gamma_tilde(const Matrix& B, const Vector& pi, Regime regime);

Matrix gamma(const Matrix& B, const Vector& pi, Regime regime);

AsymptoticMoments moments(Stat stat, const Matrix& B, const Vector& pi, Regime regime);

// Grid evaluation for contour plots; rho only screens the entries of rho*B.
std::vector<SurfaceRow> parameter_surface(SurfaceFamily family, const Vector& first_axis,
                                          const Vector& second_axis, Regime regime,
                                          const Vector& pi = Vector(), double rho = 1.0);

}  // namespace modnet::asymptotics
