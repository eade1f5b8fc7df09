#pragma once

#include <modnet/asymptotics.hpp>
#include <modnet/inference.hpp>
#include <modnet/models.hpp>
#include <modnet/types.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace modnet::montecarlo {

// Sparsity rule kept symbolic so each n gets its exact factor.
struct RhoRule {
    bool quarter_root = false;  // rho = n^{-1/4}
    double value = 1.0;

    double at(int n) const;
};

enum class DRule { true_rank, estimated };
enum class TauRule { oracle, spectral };

struct ExperimentConfig {
    Matrix B;
    Vector pi;
    RhoRule rho;
    asymptotics::Regime regime = asymptotics::Regime::dense;
    std::vector<int> n_values;
    int replicates = 1000;
    bool want_L = true;
    bool want_S = true;
    bool want_R = false;
    DRule d_rule = DRule::true_rank;
    int d_override = 0;  // 0 means the numerical rank of B
    TauRule tau_rule = TauRule::oracle;
    bool spectral_ari = false;
    bool louvain_diag = false;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct ReplicateRecord {
    int n = 0;
    int replicate = 0;
    double rho = 1.0;
    double q_L, q_S, q_R;  // scaled statistics, NaN when not requested
    int d_hat = 0;
    double spectral_ari;  // NaN when not computed
    int louvain_K = 0;
    double louvain_ari;

    ReplicateRecord();
};

struct SummaryRow {
    int n = 0;
    asymptotics::Stat variant = asymptotics::Stat::L;
    int count = 0;
    double emp_bias = 0.0;
    double emp_var = 0.0;
    double theory_bias = 0.0;
    double theory_var = 0.0;
    double ks_distance = 0.0;
};

struct SummaryTable {
    std::vector<SummaryRow> rows;
};

struct PowerRates {
    double rate_L = 0.0;
    double rate_S = 0.0;
};

struct SweepTable {
    std::string family;
    std::string axis1;
    std::string axis2;
    asymptotics::Regime regime = asymptotics::Regime::dense;
    std::vector<asymptotics::SurfaceRow> rows;
};

struct GrdpgRow {
    std::string clusterer;
    int replicates = 0;
    double ari_mean = 0.0;
    double ari_median = 0.0;
    double q_mean = 0.0;
    double q_median = 0.0;
};

std::vector<ReplicateRecord> run_experiment(const ExperimentConfig& cfg);

// Theory entries are matched to records by variant tag; missing variants get
// NaN theory columns and no KS distance.
SummaryTable summarize(const std::vector<ReplicateRecord>& records,
                       const std::vector<asymptotics::AsymptoticMoments>& theory);

PowerRates empirical_power(const inference::PowerSpec& spec, asymptotics::Regime regime,
                           int replicates, std::uint64_t seed, bool plug_in = false,
                           int threads = 1);

SweepTable contour_sweep(asymptotics::SurfaceFamily family, const Vector& axis1,
                         const Vector& axis2, asymptotics::Regime regime,
                         const Vector& pi = Vector(), double rho = 1.0);

std::vector<GrdpgRow> grdpg_study(const models::BetaMixture& mix, int n, int replicates,
                                  std::uint64_t seed, int threads = 1);

}  // namespace modnet::montecarlo
