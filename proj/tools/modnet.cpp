#include <modnet/dataio.hpp>
#include <modnet/embedding.hpp>
#include <modnet/modularity.hpp>
#include <modnet/montecarlo.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace modnet;

int resolve_threads(int cli_threads)
{
    if (cli_threads > 0) return cli_threads;
    if (const char* env = std::getenv("MODNET_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

Vector linspace(double lo, double hi, int steps)
{
    Vector v(steps);
    for (int i = 0; i < steps; ++i)
        v(i) = steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
    return v;
}

std::vector<int> parse_int_list(const std::string& text)
{
    std::vector<int> out;
    std::string tok;
    std::istringstream ss(text);
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw std::invalid_argument("empty integer list '" + text + "'");
    return out;
}

dataio::MatrixFormat parse_format(const std::string& fmt)
{
    if (fmt == "dense-csv") return dataio::MatrixFormat::dense_csv;
    if (fmt == "edge-list") return dataio::MatrixFormat::edge_list;
    throw std::invalid_argument("format must be dense-csv or edge-list");
}

const char* variant_name(asymptotics::Stat s)
{
    switch (s) {
        case asymptotics::Stat::L: return "L";
        case asymptotics::Stat::S: return "S";
        default: return "R";
    }
}

struct GlobalArgs {
    std::uint64_t seed = 1;
    bool seed_given = false;
    int threads = 0;
    std::string out;
    std::string config;
};

int run_simulate(const GlobalArgs& g)
{
    if (g.config.empty()) throw std::invalid_argument("simulate needs --config <file.json>");
    dataio::RunConfig cfg = dataio::load_run_config(g.config);
    if (g.seed_given) cfg.seed = g.seed;
    if (g.threads > 0) cfg.threads = g.threads;
    cfg.threads = resolve_threads(cfg.threads);
    if (!g.out.empty()) cfg.out_summary = g.out;
    if (cfg.out_summary.empty()) throw std::invalid_argument("no summary output path configured");

    const montecarlo::ExperimentConfig ecfg = dataio::to_experiment_config(cfg);
    const std::vector<montecarlo::ReplicateRecord> records = montecarlo::run_experiment(ecfg);

    std::vector<asymptotics::AsymptoticMoments> theory;
    for (const asymptotics::Stat s :
         {asymptotics::Stat::L, asymptotics::Stat::S, asymptotics::Stat::R}) {
        const bool wanted = (s == asymptotics::Stat::L && cfg.want_L)
                            || (s == asymptotics::Stat::S && cfg.want_S)
                            || (s == asymptotics::Stat::R && cfg.want_R);
        if (!wanted) continue;
        try {
            theory.push_back(asymptotics::moments(s, cfg.B, cfg.pi, cfg.regime));
        } catch (const theorem_error&) {
            // Residual theory undefined at full rank; its columns stay NA.
        }
    }
    const montecarlo::SummaryTable table = montecarlo::summarize(records, theory);
    dataio::write_summary_csv(table, cfg.out_summary);
    if (!cfg.out_records.empty()) dataio::write_records_json(records, cfg.out_records);

    std::printf("n variant count emp_bias emp_var theory_bias theory_var ks\n");
    for (const montecarlo::SummaryRow& row : table.rows)
        std::printf("%d %s %d % .5f %.5f % .5f %.5f %.4f\n", row.n, variant_name(row.variant),
                    row.count, row.emp_bias, row.emp_var, row.theory_bias, row.theory_var,
                    row.ks_distance);
    std::printf("summary written to %s\n", cfg.out_summary.c_str());
    return 0;
}

int run_power(const GlobalArgs& g, double eps, int n, double rho, double alpha, int replicates,
              bool plug_in, const std::string& regime_name)
{
    const asymptotics::Regime regime =
        regime_name == "sparse" ? asymptotics::Regime::sparse : asymptotics::Regime::dense;
    Vector v(2);
    v << 0.75, 0.25;
    Vector u = v;
    u(0) += eps;
    inference::PowerSpec spec;
    spec.B0 = v * v.transpose();
    spec.B1 = u * u.transpose();
    spec.pi = Vector(2);
    spec.pi << 0.25, 0.75;
    spec.rho = rho;
    spec.n = n;
    spec.alpha = alpha;

    const double aL = inference::analytic_power_L(spec, regime);
    const double aS = inference::analytic_power_S(spec, regime);
    const montecarlo::PowerRates rates = montecarlo::empirical_power(
        spec, regime, replicates, g.seed, plug_in, resolve_threads(g.threads));
    std::printf("eps=%g n=%d alpha=%g replicates=%d%s\n", eps, n, alpha, replicates,
                plug_in ? " (plug-in variances)" : "");
    std::printf("T_L analytic %.4f empirical %.4f\n", aL, rates.rate_L);
    std::printf("T_S analytic %.4f empirical %.4f\n", aS, rates.rate_S);
    if (!g.out.empty()) {
        std::ofstream out(g.out);
        if (!out) throw parse_error("cannot open " + g.out + " for writing");
        out << "eps,n,alpha,replicates,analytic_L,empirical_L,analytic_S,empirical_S\n";
        char buf[160];
        std::snprintf(buf, sizeof buf, "%g,%d,%g,%d,%.6f,%.6f,%.6f,%.6f\n", eps, n, alpha,
                      replicates, aL, rates.rate_L, aS, rates.rate_S);
        out << buf;
    }
    return 0;
}

int run_sweep(const GlobalArgs& g, const std::string& family, double lo, double hi, int steps,
              double pi1, const std::string& regime_name)
{
    if (g.out.empty()) throw std::invalid_argument("sweep needs --out <file.csv>");
    const asymptotics::Regime regime =
        regime_name == "sparse" ? asymptotics::Regime::sparse : asymptotics::Regime::dense;
    const Vector axis = linspace(lo, hi, steps);
    montecarlo::SweepTable table;
    if (family == "two-block") {
        Vector pi(2);
        pi << pi1, 1.0 - pi1;
        table = montecarlo::contour_sweep(asymptotics::SurfaceFamily::two_block_pq, axis, axis,
                                          regime, pi);
    } else if (family == "rank-one") {
        table = montecarlo::contour_sweep(asymptotics::SurfaceFamily::rank_one_p_pi, axis, axis,
                                          regime);
    } else {
        throw std::invalid_argument("family must be two-block or rank-one");
    }
    dataio::write_sweep_csv(table, g.out);
    std::printf("%zu rows written to %s\n", table.rows.size(), g.out.c_str());
    return 0;
}

int run_embed(const GlobalArgs& g, const std::string& in, const std::string& fmt, int d, int K,
              bool use_gmm, const std::string& labels_path)
{
    const dataio::WeightedMatrix W = dataio::load_matrix(in, parse_format(fmt));
    const models::Graph graph{W.W};
    if (d == 0) {
        const linalg::EigenSystem full = linalg::sym_eig(graph.adjacency);
        const int d_max = std::min<int>(30, graph.n() - 1);
        d = embedding::estimate_rank(full.values, d_max);
        std::printf("estimated rank %d\n", d);
    }
    const embedding::Embedding emb = embedding::spectral_embed(graph, d);
    const embedding::ClusterResult cl = use_gmm
                                            ? embedding::gmm_em(emb.coords, K, g.seed)
                                            : embedding::kmeans(emb.coords, K, 20, g.seed);
    std::printf("clustered %d nodes into %d groups (objective %.6g)\n", graph.n(), K,
                cl.objective);
    if (!labels_path.empty()) {
        const models::Membership truth = dataio::load_labels(labels_path);
        std::printf("ARI vs %s: %.4f\n", labels_path.c_str(),
                    embedding::adjusted_rand_index(cl.labels, truth));
    }
    if (!g.out.empty()) {
        std::ofstream out(g.out);
        if (!out) throw parse_error("cannot open " + g.out + " for writing");
        out << "node,cluster\n";
        for (int i = 0; i < graph.n(); ++i)
            out << (i + 1) << ',' << cl.labels.labels(i) << '\n';
    }
    return 0;
}

int run_modularity(const GlobalArgs& g, const std::string& in, const std::string& fmt,
                   const std::string& labels_path, double rho, int d,
                   const std::string& variants, bool do_louvain, bool table,
                   const std::string& d_list, const std::string& type_label)
{
    const dataio::WeightedMatrix W = dataio::load_matrix(in, parse_format(fmt));
    const models::Graph graph{W.W};

    models::Membership labels;
    const bool have_labels = !labels_path.empty();
    if (have_labels) {
        labels = dataio::load_labels(labels_path);
        if (labels.labels.size() != graph.n())
            throw std::invalid_argument("label count does not match the matrix order");
    }

    if (table) {
        if (!have_labels) throw std::invalid_argument("--table needs --labels");
        if (g.out.empty()) throw std::invalid_argument("--table needs --out");
        std::vector<int> ds;
        if (d_list.empty())
            ds = {labels.num_classes};
        else
            ds = parse_int_list(d_list);
        const auto rows = dataio::connectivity_table(graph, labels, ds, rho, type_label);
        dataio::write_connectivity_csv(rows, g.out);
        std::printf("type K_hat d_hat bias var_L var_S var_R\n");
        for (const auto& row : rows)
            std::printf("%s %d %d %.4f %.4f %.4f %s\n", row.type.c_str(), row.K_hat, row.d_hat,
                        row.bias, row.var_L, row.var_S,
                        row.var_R_defined ? std::to_string(row.var_R).c_str() : "NA");
        return 0;
    }

    bool want_L = false, want_S = false, want_R = false, want_NG = false;
    {
        std::string tok;
        std::istringstream ss(variants);
        while (std::getline(ss, tok, ',')) {
            if (tok == "L")
                want_L = true;
            else if (tok == "S")
                want_S = true;
            else if (tok == "R")
                want_R = true;
            else if (tok == "NG")
                want_NG = true;
            else if (!tok.empty())
                throw std::invalid_argument("unknown variant '" + tok + "'");
        }
    }

    if ((want_L || want_S || want_R) && !have_labels)
        throw std::invalid_argument("variants L/S/R need --labels");

    if (have_labels && (want_L || want_S || want_R)) {
        Matrix Bhat = modularity::block_estimator_likelihood(graph, labels, rho).Bhat;
        for (Eigen::Index i = 0; i < Bhat.size(); ++i)
            Bhat(i) = std::clamp(Bhat(i), 1e-6, 1.0 - 1e-6);
        Bhat = (0.5 * (Bhat + Bhat.transpose())).eval();
        const Vector pi_hat =
            labels.counts().cast<double>() / static_cast<double>(graph.n());
        const models::SbmParams params{Bhat, pi_hat, rho};
        const int d_use = d > 0 ? d : labels.num_classes;
        if (want_L) {
            const auto q = modularity::q_likelihood(graph, params, labels);
            std::printf("Q_L raw %.6g scaled %.6g\n", q.raw, q.scaled);
        }
        if (want_S) {
            const auto q = modularity::q_spectral(graph, d_use, params, labels);
            std::printf("Q_S raw %.6g scaled %.6g (d=%d)\n", q.raw, q.scaled, d_use);
        }
        if (want_R) {
            const auto q = modularity::q_residual(graph, d_use, labels, rho);
            std::printf("Q_R raw %.6g scaled %.6g (d=%d)\n", q.raw, q.scaled, d_use);
        }
    }
    if (want_NG) {
        if (!have_labels) throw std::invalid_argument("variant NG needs --labels or --louvain");
        const auto q = modularity::q_newman_girvan(graph.adjacency, labels);
        std::printf("Q_NG raw %.6g normalized %.6g\n", q.raw, q.scaled);
    }
    if (do_louvain) {
        const auto [parts, q] = modularity::louvain(graph, g.seed);
        std::printf("louvain K_hat %d normalized Q %.6g\n", parts.num_classes, q);
        if (have_labels)
            std::printf("louvain ARI vs labels %.4f\n",
                        embedding::adjusted_rand_index(parts, labels));
    }
    return 0;
}

int run_preprocess(const GlobalArgs& g, const std::string& in, const std::string& fmt,
                   const std::string& mode, double t, double percentile, int k)
{
    if (g.out.empty()) throw std::invalid_argument("preprocess needs --out <file.csv>");
    const dataio::WeightedMatrix W = dataio::load_matrix(in, parse_format(fmt));
    if (mode == "threshold") {
        double cut = t;
        if (percentile >= 0.0) {
            cut = dataio::percentile_threshold(W, percentile);
            std::printf("percentile %.6g gives threshold %.6g\n", percentile, cut);
        }
        const models::Graph A = dataio::threshold_binarize(W, cut);
        dataio::save_matrix({A.adjacency, dataio::DiagonalPolicy::zeroed}, g.out);
        std::printf("binary network (threshold %.6g) written to %s\n", cut, g.out.c_str());
    } else if (mode == "fisher") {
        dataio::save_matrix(dataio::fisher_transform(W), g.out);
        std::printf("fisher-transformed matrix written to %s\n", g.out.c_str());
    } else if (mode == "knn") {
        const models::Graph A = dataio::knn_graph(W, k);
        dataio::save_matrix({A.adjacency, dataio::DiagonalPolicy::zeroed}, g.out);
        const Vector degrees = A.adjacency.rowwise().sum();
        std::printf("knn network (k=%d) written to %s; degrees in [%d, %d]\n", k, g.out.c_str(),
                    static_cast<int>(degrees.minCoeff()), static_cast<int>(degrees.maxCoeff()));
    } else {
        throw std::invalid_argument("mode must be threshold, fisher or knn");
    }
    return 0;
}

int run_grdpg(const GlobalArgs& g, const std::string& mix_name, int n, int replicates)
{
    models::BetaMixture mix{};
    if (mix_name == "mild")
        mix = {0.6, 1.2, 5.5, 8.0, 1.2};
    else if (mix_name == "moderate")
        mix = {0.6, 3.0, 8.0, 8.0, 3.0};
    else
        throw std::invalid_argument("mix must be mild or moderate");
    const auto rows =
        montecarlo::grdpg_study(mix, n, replicates, g.seed, resolve_threads(g.threads));
    std::printf("clusterer replicates ari_mean ari_median q_mean q_median\n");
    for (const auto& row : rows)
        std::printf("%s %d %.4f %.4f %.4f %.4f\n", row.clusterer.c_str(), row.replicates,
                    row.ari_mean, row.ari_median, row.q_mean, row.q_median);
    if (!g.out.empty()) dataio::write_grdpg_csv(rows, g.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"SBM modularity statistics toolkit"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--seed", g.seed, "master random seed")->default_val(1);
    app.add_option("--threads", g.threads,
                   "worker threads (0: MODNET_THREADS environment variable, then 1)");
    app.add_option("--out", g.out, "output file path");
    app.add_option("--config", g.config, "JSON run configuration");

    CLI::App* simulate = app.add_subcommand("simulate", "run a Monte Carlo experiment");
    simulate->fallthrough();

    double eps = 0.02, rho = 1.0, alpha = 0.05;
    int n = 100, replicates = 1000;
    bool plug_in = false;
    std::string regime_name = "dense";
    CLI::App* power = app.add_subcommand("power", "analytic and empirical test power");
    power->fallthrough();
    power->add_option("--eps", eps, "diagonal perturbation of the alternative")->required();
    power->add_option("--n", n, "network order")->required();
    power->add_option("--rho", rho, "sparsity factor");
    power->add_option("--alpha", alpha, "test level");
    power->add_option("--replicates", replicates, "Monte Carlo replicates");
    power->add_flag("--plug-in", plug_in, "evaluate variances at the estimated connectivity");
    power->add_option("--regime", regime_name, "dense or sparse");

    std::string family = "rank-one";
    double lo = 0.10, hi = 0.90, pi1 = 0.5;
    int steps = 41;
    CLI::App* sweep = app.add_subcommand("sweep", "bias/variance surface over a parameter grid");
    sweep->fallthrough();
    sweep->add_option("--family", family, "two-block or rank-one");
    sweep->add_option("--min", lo, "grid lower end");
    sweep->add_option("--max", hi, "grid upper end");
    sweep->add_option("--steps", steps, "grid steps per axis");
    sweep->add_option("--pi1", pi1, "first block probability (two-block family)");
    sweep->add_option("--regime", regime_name, "dense or sparse");

    std::string in_path, fmt = "dense-csv", labels_path;
    int d = 0, K = 2;
    bool use_gmm = false;
    CLI::App* embed = app.add_subcommand("embed", "spectral embedding plus clustering");
    embed->fallthrough();
    embed->add_option("--in", in_path, "input matrix file")->required();
    embed->add_option("--format", fmt, "dense-csv or edge-list");
    embed->add_option("--d", d, "embedding dimension (0: estimate by eigenvalue ratios)");
    embed->add_option("--K", K, "number of clusters");
    embed->add_flag("--gmm", use_gmm, "Gaussian mixture instead of k-means");
    embed->add_option("--labels", labels_path, "reference labels for ARI");

    std::string variants = "NG", d_list, type_label = "network";
    bool do_louvain = false, table = false;
    CLI::App* modularity_cmd = app.add_subcommand("modularity", "modularity statistics on a file");
    modularity_cmd->fallthrough();
    modularity_cmd->add_option("--in", in_path, "input matrix file")->required();
    modularity_cmd->add_option("--format", fmt, "dense-csv or edge-list");
    modularity_cmd->add_option("--labels", labels_path, "membership file (1-based labels)");
    modularity_cmd->add_option("--rho", rho, "sparsity factor");
    modularity_cmd->add_option("--d", d, "truncation rank for Q_S/Q_R (0: block count)");
    modularity_cmd->add_option("--variants", variants, "comma list from L,S,R,NG");
    modularity_cmd->add_flag("--louvain", do_louvain, "run seeded Louvain maximization");
    modularity_cmd->add_flag("--table", table, "emit the block-projection bias/variance table");
    modularity_cmd->add_option("--d-list", d_list, "comma list of truncation ranks for --table");
    modularity_cmd->add_option("--type", type_label, "type column for --table rows");

    std::string mode = "threshold";
    double t = 0.3, percentile = -1.0;
    int k = 50;
    CLI::App* preprocess = app.add_subcommand("preprocess", "weighted network preprocessing");
    preprocess->fallthrough();
    preprocess->add_option("--in", in_path, "input matrix file")->required();
    preprocess->add_option("--format", fmt, "dense-csv or edge-list");
    preprocess->add_option("--mode", mode, "threshold, fisher or knn");
    preprocess->add_option("--t", t, "absolute threshold");
    preprocess->add_option("--percentile", percentile, "derive the threshold from a percentile");
    preprocess->add_option("--k", k, "neighbors for knn mode");

    std::string mix_name = "mild";
    int gn = 400, greps = 50;
    CLI::App* grdpg = app.add_subcommand("grdpg", "latent-curve clustering study");
    grdpg->fallthrough();
    grdpg->add_option("--mix", mix_name, "mild or moderate");
    grdpg->add_option("--n", gn, "network order");
    grdpg->add_option("--replicates", greps, "replicates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    g.seed_given = app.count("--seed") > 0;

    try {
        if (simulate->parsed()) return run_simulate(g);
        if (power->parsed())
            return run_power(g, eps, n, rho, alpha, replicates, plug_in, regime_name);
        if (sweep->parsed()) return run_sweep(g, family, lo, hi, steps, pi1, regime_name);
        if (embed->parsed()) return run_embed(g, in_path, fmt, d, K, use_gmm, labels_path);
        if (modularity_cmd->parsed())
            return run_modularity(g, in_path, fmt, labels_path, rho, d, variants, do_louvain,
                                  table, d_list, type_label);
        if (preprocess->parsed()) return run_preprocess(g, in_path, fmt, mode, t, percentile, k);
        if (grdpg->parsed()) return run_grdpg(g, mix_name, gn, greps);
        std::fprintf(stderr, "no subcommand selected\n");
        return 1;
    } catch (const numerical_error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const parse_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
