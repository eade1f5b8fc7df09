#pragma once

#include <modnet/models.hpp>
#include <modnet/montecarlo.hpp>
#include <modnet/types.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace modnet::dataio {

enum class MatrixFormat { dense_csv, edge_list };
enum class DiagonalPolicy { kept, zeroed };

struct WeightedMatrix {
    Matrix W;
    DiagonalPolicy diagonal = DiagonalPolicy::kept;

    int n() const { return static_cast<int>(W.rows()); }
};

// dense-csv: n rows of n comma-separated reals. edge-list: a single integer
// header line n, then "i j w" lines with 1-based endpoints.
WeightedMatrix load_matrix(const std::string& path, MatrixFormat format);

// dense-csv at 12 significant digits; load/save/load roundtrips are lossless.
void save_matrix(const WeightedMatrix& mat, const std::string& path);

// One integer label per line, values 1..K.
models::Membership load_labels(const std::string& path);

void save_labels(const models::Membership& labels, const std::string& path);

models::Graph threshold_binarize(const WeightedMatrix& mat, double t);

// pct-th percentile (nearest rank, pct in [0,100]) of |W_ij| over i < j.
double percentile_threshold(const WeightedMatrix& mat, double pct);

WeightedMatrix fisher_transform(const WeightedMatrix& mat);

// Union-symmetrized k-nearest-neighbor graph; ties broken by lower index.
models::Graph knn_graph(const WeightedMatrix& mat, int k);

struct RunConfig {
    Matrix B;
    Vector pi;
    montecarlo::RhoRule rho;
    asymptotics::Regime regime = asymptotics::Regime::dense;
    std::vector<int> n_values;
    int replicates = 1000;
    bool want_L = true;
    bool want_S = true;
    bool want_R = false;
    montecarlo::DRule d_rule = montecarlo::DRule::true_rank;
    int d_override = 0;
    montecarlo::TauRule tau_rule = montecarlo::TauRule::oracle;
    bool spectral_ari = false;
    bool louvain_diag = false;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out_summary;
    std::string out_records;
};

// Strict-schema JSON document; unknown keys and type mismatches are rejected.
RunConfig load_run_config(const std::string& path);

montecarlo::ExperimentConfig to_experiment_config(const RunConfig& cfg);

void write_summary_csv(const montecarlo::SummaryTable& table, const std::string& path);

void write_records_json(const std::vector<montecarlo::ReplicateRecord>& records,
                        const std::string& path);

void write_sweep_csv(const montecarlo::SweepTable& table, const std::string& path);

void write_grdpg_csv(const std::vector<montecarlo::GrdpgRow>& rows, const std::string& path);

struct ConnectivityRow {
    std::string type;
    int K_hat = 0;
    int d_hat = 0;
    double bias = 0.0;
    double var_L = 0.0;
    double var_S = 0.0;
    double var_R = 0.0;  // NaN when the residual theory does not apply
    bool var_R_defined = false;
};

// Block-projection study on one binary network: estimate (B, pi) from the
// labels, then evaluate asymptotic bias/variance at each requested truncation
// rank; d equal to the block count marks the residual column undefined.
std::vector<ConnectivityRow> connectivity_table(const models::Graph& graph,
                                                const models::Membership& labels,
                                                const std::vector<int>& d_values, double rho,
                                                const std::string& type_label);

void write_connectivity_csv(const std::vector<ConnectivityRow>& rows, const std::string& path);

struct ParcellationFixture {
    WeightedMatrix correlations;  // 263 nodes, diagonal 1
    models::Membership systems;   // 14 planted blocks
    models::Membership groups;    // 3 dominant super-blocks
};

// Synthetic correlation matrix shaped like a 263-node functional parcellation:
// 14 systems with fixed sizes nested in 3 dominant groups.
ParcellationFixture synthetic_parcellation(std::uint64_t seed);

}  // namespace modnet::dataio
