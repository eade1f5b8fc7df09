#include <modnet/embedding.hpp>
#include <modnet/modularity.hpp>
#include <modnet/montecarlo.hpp>
#include <modnet/rng.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace modnet::montecarlo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void parallel_for(int total, int threads, const std::function<void(int)>& body)
{
    threads = std::min(std::max(threads, 1), total > 0 ? total : 1);
    if (threads <= 1) {
        for (int i = 0; i < total; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex mu;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= total) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

double median_of(std::vector<double> v)
{
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

linalg::EigenSystem top_slice(const Matrix& A, int d, const models::Membership* warm,
                              std::uint64_t seed)
{
    const Eigen::Index n = A.rows();
    if (n > 256 && d + 8 < n / 4) {
        embedding::DominantOptions opts;
        opts.seed = seed;
        opts.warm_start = warm;
        try {
            return embedding::dominant_eigs(A, d, opts);
        } catch (const numerical_error&) {
            // The trailing requested eigenvalue can sit inside the bulk, where
            // the iteration has no gap to work with; the slice definition only
            // needs the top d by |value|, so fall through to the dense solver.
        }
    }
    linalg::EigenSystem full = linalg::sym_eig(A);
    return {full.values.head(d), full.vectors.leftCols(d)};
}

// Best-effort Ritz spectrum for rank selection: no residual gate, drift
// stopping only.
Vector probe_spectrum(const Matrix& A, int howmany, std::uint64_t seed)
{
    const Eigen::Index n = A.rows();
    if (n <= 256 || howmany + 8 >= n / 4) {
        linalg::EigenSystem full = linalg::sym_eig(A);
        return full.values.head(howmany);
    }
    embedding::DominantOptions opts;
    opts.seed = seed;
    opts.strict = 0;
    return embedding::dominant_eigs(A, howmany, opts).values;
}

Matrix coords_from(const linalg::EigenSystem& slice)
{
    return slice.vectors * slice.values.cwiseAbs().cwiseSqrt().asDiagonal();
}

void validate(const ExperimentConfig& cfg)
{
    if (cfg.replicates < 1) throw std::invalid_argument("replicates must be at least 1");
    if (cfg.n_values.empty()) throw std::invalid_argument("no network orders configured");
    const int K = static_cast<int>(cfg.pi.size());
    for (int n : cfg.n_values)
        if (n < 5 * K)
            throw std::invalid_argument("network order " + std::to_string(n)
                                        + " below 5 nodes per block");
    if (cfg.d_override < 0) throw std::invalid_argument("d override must be nonnegative");
}

}  // namespace

double RhoRule::at(int n) const
{
    return quarter_root ? std::pow(static_cast<double>(n), -0.25) : value;
}

ReplicateRecord::ReplicateRecord()
    : q_L(kNaN), q_S(kNaN), q_R(kNaN), spectral_ari(kNaN), louvain_ari(kNaN)
{
}

std::vector<ReplicateRecord> run_experiment(const ExperimentConfig& cfg)
{
    validate(cfg);
    const int K = static_cast<int>(cfg.pi.size());
    const int d_true = cfg.d_override > 0
                           ? cfg.d_override
                           : asymptotics::nu_factorization(cfg.B, cfg.pi).d();
    const bool need_slice = cfg.want_S || cfg.want_R || cfg.spectral_ari
                            || cfg.tau_rule == TauRule::spectral;

    std::vector<ReplicateRecord> records(cfg.n_values.size()
                                         * static_cast<std::size_t>(cfg.replicates));
    std::size_t base = 0;
    for (const int n : cfg.n_values) {
        const double rho = cfg.rho.at(n);
        models::SbmParams params{cfg.B, cfg.pi, rho};
        const std::uint64_t n_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(n));
        parallel_for(cfg.replicates, cfg.threads, [&, base, n, rho](int r) {
            const std::uint64_t rseed = derive_seed(n_seed, static_cast<std::uint64_t>(r));
            ReplicateRecord rec;
            rec.n = n;
            rec.replicate = r;
            rec.rho = rho;

            const models::Membership truth =
                models::sample_memberships(cfg.pi, n, derive_seed(rseed, 101));
            const models::Graph graph = models::sample_sbm(params, truth, derive_seed(rseed, 102));

            int d_use = d_true;
            if (cfg.d_rule == DRule::estimated) {
                const int probe = std::min(n - 1, std::max(8, 2 * K));
                const Vector ritz = probe_spectrum(graph.adjacency, probe, derive_seed(rseed, 103));
                d_use = embedding::estimate_rank(ritz, probe - 1);
            }
            rec.d_hat = d_use;

            linalg::EigenSystem slice;
            if (need_slice)
                slice = top_slice(graph.adjacency, d_use,
                                  cfg.tau_rule == TauRule::oracle ? &truth : nullptr,
                                  derive_seed(rseed, 104));

            models::Membership tau = truth;
            if (cfg.tau_rule == TauRule::spectral || cfg.spectral_ari) {
                // Clustering always embeds at K; d_use only truncates the statistic.
                const linalg::EigenSystem* cluster_slice = &slice;
                linalg::EigenSystem kslice;
                if (d_use != K) {
                    kslice = top_slice(graph.adjacency, K,
                                       cfg.tau_rule == TauRule::oracle ? &truth : nullptr,
                                       derive_seed(rseed, 104));
                    cluster_slice = &kslice;
                }
                const Matrix coords = coords_from(*cluster_slice);
                const embedding::ClusterResult cl =
                    embedding::kmeans(coords, K, 10, derive_seed(rseed, 105));
                const embedding::LabelAlignment al = embedding::align_labels(cl.labels, truth);
                const models::Membership aligned = embedding::apply_alignment(cl.labels, al);
                rec.spectral_ari = embedding::adjusted_rand_index(cl.labels, truth);
                if (cfg.tau_rule == TauRule::spectral) tau = aligned;
            }

            if (cfg.want_L) rec.q_L = modularity::q_likelihood(graph, params, tau).scaled;
            if (cfg.want_S) rec.q_S = modularity::q_spectral(slice, params, tau, n).scaled;
            if (cfg.want_R) rec.q_R = modularity::q_residual(graph, slice, tau, rho).scaled;

            if (cfg.louvain_diag) {
                const models::Membership lv =
                    modularity::louvain(graph, derive_seed(rseed, 106)).first;
                rec.louvain_K = lv.num_classes;
                rec.louvain_ari = embedding::adjusted_rand_index(lv, truth);
            }
            records[base + static_cast<std::size_t>(r)] = rec;
        });
        base += static_cast<std::size_t>(cfg.replicates);
    }
    return records;
}

SummaryTable summarize(const std::vector<ReplicateRecord>& records,
                       const std::vector<asymptotics::AsymptoticMoments>& theory)
{
    if (records.empty()) throw std::invalid_argument("no records to summarize");
    std::vector<int> ns;
    for (const ReplicateRecord& r : records)
        if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);

    const auto theory_for = [&](asymptotics::Stat s) -> const asymptotics::AsymptoticMoments* {
        for (const auto& m : theory)
            if (m.variant == s) return &m;
        return nullptr;
    };
    const auto value_of = [](const ReplicateRecord& r, asymptotics::Stat s) {
        switch (s) {
            case asymptotics::Stat::L: return r.q_L;
            case asymptotics::Stat::S: return r.q_S;
            default: return r.q_R;
        }
    };

    SummaryTable table;
    for (const int n : ns)
        for (const asymptotics::Stat s :
             {asymptotics::Stat::L, asymptotics::Stat::S, asymptotics::Stat::R}) {
            std::vector<double> vals;
            double rho = 1.0;
            for (const ReplicateRecord& r : records) {
                if (r.n != n) continue;
                const double v = value_of(r, s);
                if (std::isfinite(v)) {
                    vals.push_back(v);
                    rho = r.rho;
                }
            }
            if (vals.empty()) continue;
            SummaryRow row;
            row.n = n;
            row.variant = s;
            row.count = static_cast<int>(vals.size());
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            var /= std::max<double>(1.0, static_cast<double>(vals.size() - 1));
            row.emp_bias = mean;
            row.emp_var = var;
            const asymptotics::AsymptoticMoments* m = theory_for(s);
            if (m != nullptr) {
                row.theory_bias = m->bias / std::sqrt(rho);
                row.theory_var = m->variance;
                Vector z(static_cast<Eigen::Index>(vals.size()));
                const double sd = std::sqrt(m->variance);
                for (std::size_t i = 0; i < vals.size(); ++i)
                    z(static_cast<Eigen::Index>(i)) = (vals[i] - row.theory_bias) / sd;
                row.ks_distance = inference::ks_normal(z, 0.0, 1.0).statistic;
            } else {
                row.theory_bias = kNaN;
                row.theory_var = kNaN;
                row.ks_distance = kNaN;
            }
            table.rows.push_back(row);
        }
    return table;
}

PowerRates empirical_power(const inference::PowerSpec& spec, asymptotics::Regime regime,
                           int replicates, std::uint64_t seed, bool plug_in, int threads)
{
    if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
    const int K = static_cast<int>(spec.pi.size());
    const models::SbmParams alt{spec.B1, spec.pi, spec.rho};
    const models::SbmParams null_params{spec.B0, spec.pi, spec.rho};
    const int d0 = asymptotics::nu_factorization(spec.B0, spec.pi).d();
    const double z = inference::normal_quantile(1.0 - spec.alpha / 2.0);
    const asymptotics::AsymptoticMoments mS0 =
        asymptotics::moments(asymptotics::Stat::S, spec.B0, spec.pi, regime);
    const asymptotics::AsymptoticMoments mL0 =
        asymptotics::moments(asymptotics::Stat::L, spec.B0, spec.pi, regime);

    std::vector<int> reject_L(static_cast<std::size_t>(replicates), 0);
    std::vector<int> reject_S(static_cast<std::size_t>(replicates), 0);
    parallel_for(replicates, threads, [&](int r) {
        const std::uint64_t rseed = derive_seed(seed, static_cast<std::uint64_t>(r));
        const models::Membership tau =
            models::sample_memberships(spec.pi, spec.n, derive_seed(rseed, 101));
        const models::Graph graph = models::sample_sbm(alt, tau, derive_seed(rseed, 102));
        const linalg::EigenSystem slice =
            top_slice(graph.adjacency, d0, &tau, derive_seed(rseed, 104));

        double varL = mL0.variance;
        double varS = mS0.variance;
        if (plug_in) {
            Matrix Bhat = modularity::block_estimator_likelihood(graph, tau, spec.rho).Bhat;
            for (Eigen::Index i = 0; i < Bhat.size(); ++i)
                Bhat(i) = std::clamp(Bhat(i), 1e-6, 1.0 - 1e-6);
            Bhat = 0.5 * (Bhat + Bhat.transpose());
            varL = asymptotics::moments(asymptotics::Stat::L, Bhat, spec.pi, regime).variance;
            varS = asymptotics::moments(asymptotics::Stat::S, Bhat, spec.pi, regime).variance;
        }
        const double qL = modularity::q_likelihood(graph, null_params, tau).scaled;
        const double qS = modularity::q_spectral(slice, null_params, tau, spec.n).scaled;
        const double tL = qL / std::sqrt(varL);
        const double tS = (qS - mS0.bias / std::sqrt(spec.rho)) / std::sqrt(varS);
        reject_L[static_cast<std::size_t>(r)] = std::abs(tL) > z ? 1 : 0;
        reject_S[static_cast<std::size_t>(r)] = std::abs(tS) > z ? 1 : 0;
    });

    PowerRates rates;
    for (int r = 0; r < replicates; ++r) {
        rates.rate_L += reject_L[static_cast<std::size_t>(r)];
        rates.rate_S += reject_S[static_cast<std::size_t>(r)];
    }
    rates.rate_L /= static_cast<double>(replicates);
    rates.rate_S /= static_cast<double>(replicates);
    return rates;
}

SweepTable contour_sweep(asymptotics::SurfaceFamily family, const Vector& axis1,
                         const Vector& axis2, asymptotics::Regime regime, const Vector& pi,
                         double rho)
{
    SweepTable table;
    table.family = family == asymptotics::SurfaceFamily::two_block_pq ? "two-block" : "rank-one";
    table.axis1 = "p";
    table.axis2 = family == asymptotics::SurfaceFamily::two_block_pq ? "q" : "pi1";
    table.regime = regime;
    table.rows = asymptotics::parameter_surface(family, axis1, axis2, regime, pi, rho);
    return table;
}

std::vector<GrdpgRow> grdpg_study(const models::BetaMixture& mix, int n, int replicates,
                                  std::uint64_t seed, int threads)
{
    if (replicates < 1) return {};
    constexpr int kEmbedDim = 3;
    constexpr int kClusters = 2;
    struct Cell {
        double ari[3];
        double q[3];
    };
    std::vector<Cell> cells(static_cast<std::size_t>(replicates));
    parallel_for(replicates, threads, [&](int r) {
        const std::uint64_t rseed = derive_seed(seed, static_cast<std::uint64_t>(r));
        const auto [positions, truth] =
            models::hardy_weinberg_positions(mix, n, derive_seed(rseed, 101));
        const models::Graph graph = models::sample_grdpg(positions, derive_seed(rseed, 102));
        const embedding::Embedding ase = embedding::spectral_embed(graph, kEmbedDim);

        models::Membership parts[3];
        parts[0] = embedding::kmeans(positions.X, kClusters, 10, derive_seed(rseed, 103)).labels;
        parts[1] = embedding::kmeans(ase.coords, kClusters, 10, derive_seed(rseed, 104)).labels;
        parts[2] = modularity::louvain(graph, derive_seed(rseed, 105)).first;

        Cell cell;
        for (int c = 0; c < 3; ++c) {
            cell.ari[c] = embedding::adjusted_rand_index(parts[c], truth);
            cell.q[c] = modularity::q_newman_girvan(graph.adjacency, parts[c]).scaled;
        }
        cells[static_cast<std::size_t>(r)] = cell;
    });

    const char* names[3] = {"kmeans-true-positions", "kmeans-embedding", "louvain"};
    std::vector<GrdpgRow> rows;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> ari, q;
        for (const Cell& cell : cells) {
            ari.push_back(cell.ari[c]);
            q.push_back(cell.q[c]);
        }
        GrdpgRow row;
        row.clusterer = names[c];
        row.replicates = replicates;
        double am = 0.0, qm = 0.0;
        for (std::size_t i = 0; i < ari.size(); ++i) {
            am += ari[i];
            qm += q[i];
        }
        row.ari_mean = am / static_cast<double>(replicates);
        row.q_mean = qm / static_cast<double>(replicates);
        row.ari_median = median_of(ari);
        row.q_median = median_of(q);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace modnet::montecarlo
