#include <modnet/dataio.hpp>
#include <modnet/modularity.hpp>
#include <modnet/rng.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace modnet::dataio {

namespace {

using nlohmann::json;

std::string fmt12(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt_or_na(double v) { return std::isfinite(v) ? fmt12(v) : "NA"; }

std::string timestamp_line()
{
    const std::time_t now = std::time(nullptr);
    char buf[40];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return std::string("# generated ") + buf;
}

std::vector<std::pair<int, std::string>> read_data_lines(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path);
    std::vector<std::pair<int, std::string>> lines;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::size_t begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        if (line[begin] == '#') continue;
        std::size_t end = line.find_last_not_of(" \t\r");
        lines.emplace_back(number, line.substr(begin, end - begin + 1));
    }
    return lines;
}

double parse_real(const std::string& token, const std::string& path, int line)
{
    const char* s = token.c_str();
    char* endp = nullptr;
    const double v = std::strtod(s, &endp);
    if (endp == s || *endp != '\0')
        throw parse_error(path + ":" + std::to_string(line) + ": non-numeric token '" + token
                          + "'");
    return v;
}

long parse_integer(const std::string& token, const std::string& path, int line)
{
    const char* s = token.c_str();
    char* endp = nullptr;
    const long v = std::strtol(s, &endp, 10);
    if (endp == s || *endp != '\0')
        throw parse_error(path + ":" + std::to_string(line) + ": non-integer token '" + token
                          + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const std::size_t b = field.find_first_not_of(" \t");
        if (b == std::string::npos) {
            out.push_back("");
            continue;
        }
        const std::size_t e = field.find_last_not_of(" \t");
        out.push_back(field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::vector<std::string> split_ws(const std::string& line)
{
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

WeightedMatrix load_dense_csv(const std::string& path)
{
    const auto lines = read_data_lines(path);
    const int n = static_cast<int>(lines.size());
    if (n == 0) throw parse_error(path + ": empty matrix file");
    Matrix W(n, n);
    for (int i = 0; i < n; ++i) {
        const auto& [number, text] = lines[static_cast<std::size_t>(i)];
        const std::vector<std::string> fields = split_csv(text);
        if (static_cast<int>(fields.size()) != n)
            throw parse_error(path + ":" + std::to_string(number) + ": expected " + std::to_string(n)
                              + " fields, found " + std::to_string(fields.size()));
        for (int j = 0; j < n; ++j)
            W(i, j) = parse_real(fields[static_cast<std::size_t>(j)], path, number);
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(W(i, j) - W(j, i)) > 1e-9)
                throw parse_error(path + ": asymmetric at (" + std::to_string(i + 1) + ","
                                  + std::to_string(j + 1) + ")");
    return {W, DiagonalPolicy::kept};
}

WeightedMatrix load_edge_list(const std::string& path)
{
    const auto lines = read_data_lines(path);
    if (lines.empty()) throw parse_error(path + ": empty edge-list file");
    const auto& [hline, htext] = lines[0];
    const std::vector<std::string> head = split_ws(htext);
    if (head.size() != 1)
        throw parse_error(path + ":" + std::to_string(hline) + ": header must be a single order n");
    const long n = parse_integer(head[0], path, hline);
    if (n < 1) throw parse_error(path + ":" + std::to_string(hline) + ": order must be positive");
    Matrix W = Matrix::Zero(n, n);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto& [number, text] = lines[r];
        const std::vector<std::string> fields = split_ws(text);
        if (fields.size() != 3)
            throw parse_error(path + ":" + std::to_string(number)
                              + ": expected 'i j w', found " + std::to_string(fields.size())
                              + " tokens");
        const long i = parse_integer(fields[0], path, number);
        const long j = parse_integer(fields[1], path, number);
        const double w = parse_real(fields[2], path, number);
        if (i < 1 || i > n || j < 1 || j > n)
            throw parse_error(path + ":" + std::to_string(number) + ": endpoint outside 1.."
                              + std::to_string(n));
        W(i - 1, j - 1) = w;
        W(j - 1, i - 1) = w;
    }
    return {W, DiagonalPolicy::kept};
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open " + path + " for writing");
    return out;
}

double clamp_prob(double v) { return std::clamp(v, 1e-6, 1.0 - 1e-6); }

}  // namespace

WeightedMatrix load_matrix(const std::string& path, MatrixFormat format)
{
    return format == MatrixFormat::dense_csv ? load_dense_csv(path) : load_edge_list(path);
}

void save_matrix(const WeightedMatrix& mat, const std::string& path)
{
    std::ofstream out = open_out(path);
    const int n = mat.n();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j > 0) out << ',';
            out << fmt12(mat.W(i, j));
        }
        out << '\n';
    }
}

models::Membership load_labels(const std::string& path)
{
    const auto lines = read_data_lines(path);
    if (lines.empty()) throw parse_error(path + ": empty label file");
    models::Membership out;
    out.labels = IntVector(static_cast<Eigen::Index>(lines.size()));
    int maxlab = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& [number, text] = lines[i];
        const long lab = parse_integer(text, path, number);
        if (lab < 1)
            throw parse_error(path + ":" + std::to_string(number) + ": labels must be >= 1");
        out.labels(static_cast<Eigen::Index>(i)) = static_cast<int>(lab);
        maxlab = std::max(maxlab, static_cast<int>(lab));
    }
    out.num_classes = maxlab;
    return out;
}

void save_labels(const models::Membership& labels, const std::string& path)
{
    std::ofstream out = open_out(path);
    for (Eigen::Index i = 0; i < labels.labels.size(); ++i) out << labels.labels(i) << '\n';
}

models::Graph threshold_binarize(const WeightedMatrix& mat, double t)
{
    if (t < 0.0) throw std::domain_error("threshold must be nonnegative");
    const int n = mat.n();
    Matrix A = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && std::abs(mat.W(i, j)) >= t) A(i, j) = 1.0;
    return {A};
}

double percentile_threshold(const WeightedMatrix& mat, double pct)
{
    if (!(pct >= 0.0 && pct <= 100.0)) throw std::domain_error("percentile outside [0,100]");
    const int n = mat.n();
    if (n < 2) throw std::domain_error("matrix order must be at least 2");
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) vals.push_back(std::abs(mat.W(i, j)));
    std::sort(vals.begin(), vals.end());
    const auto m = static_cast<double>(vals.size());
    const auto rank = static_cast<std::size_t>(
        std::max(1.0, std::ceil(pct / 100.0 * m)));
    return vals[std::min(rank, vals.size()) - 1];
}

WeightedMatrix fisher_transform(const WeightedMatrix& mat)
{
    const int n = mat.n();
    Matrix Z = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double w = mat.W(i, j);
            if (!(std::abs(w) < 1.0))
                throw std::domain_error("entry (" + std::to_string(i + 1) + ","
                                        + std::to_string(j + 1) + ") outside (-1,1)");
            Z(i, j) = std::atanh(w);
        }
    return {Z, DiagonalPolicy::zeroed};
}

models::Graph knn_graph(const WeightedMatrix& mat, int k)
{
    const int n = mat.n();
    if (k < 1 || k >= n) throw std::domain_error("neighbor count outside 1..n-1");
    Matrix A = Matrix::Zero(n, n);
    std::vector<int> order(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n; ++i) {
        order.clear();
        for (int j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (mat.W(i, a) != mat.W(i, b)) return mat.W(i, a) > mat.W(i, b);
            return a < b;
        });
        for (int r = 0; r < k; ++r) {
            const int j = order[static_cast<std::size_t>(r)];
            A(i, j) = 1.0;
            A(j, i) = 1.0;
        }
    }
    return {A};
}

RunConfig load_run_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw parse_error(path + ": " + e.what());
    }
    if (!doc.is_object()) throw parse_error(path + ": config must be a JSON object");

    static const std::set<std::string> allowed = {
        "B",    "pi",           "rho",     "regime",      "n",       "replicates",
        "variants", "seed",     "d_rule",  "d",           "tau",     "spectral_ari",
        "louvain",  "threads",  "out_summary", "out_records"};
    for (const auto& item : doc.items())
        if (allowed.find(item.key()) == allowed.end())
            throw parse_error(path + ": unknown config key '" + item.key() + "'");
    for (const char* key : {"B", "pi", "n", "replicates"})
        if (!doc.contains(key))
            throw parse_error(path + ": missing required key '" + std::string(key) + "'");

    RunConfig cfg;
    try {
        const auto& jb = doc.at("B");
        if (!jb.is_array() || jb.empty()) throw parse_error("'B' must be a nonempty array of rows");
        const auto K = static_cast<Eigen::Index>(jb.size());
        cfg.B = Matrix(K, K);
        for (Eigen::Index i = 0; i < K; ++i) {
            const auto& row = jb.at(static_cast<std::size_t>(i));
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != K)
                throw parse_error("'B' must be square");
            for (Eigen::Index j = 0; j < K; ++j)
                cfg.B(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
        }
        const auto& jpi = doc.at("pi");
        if (!jpi.is_array() || static_cast<Eigen::Index>(jpi.size()) != K)
            throw parse_error("'pi' length must match the order of 'B'");
        cfg.pi = Vector(K);
        for (Eigen::Index i = 0; i < K; ++i)
            cfg.pi(i) = jpi.at(static_cast<std::size_t>(i)).get<double>();

        if (doc.contains("rho")) {
            const auto& jr = doc.at("rho");
            if (jr.is_string()) {
                if (jr.get<std::string>() != "n^{-1/4}")
                    throw parse_error("'rho' string form must be \"n^{-1/4}\"");
                cfg.rho.quarter_root = true;
            } else {
                cfg.rho.value = jr.get<double>();
                if (!(cfg.rho.value > 0.0 && cfg.rho.value <= 1.0))
                    throw parse_error("'rho' must lie in (0,1]");
            }
        }
        if (doc.contains("regime")) {
            const std::string r = doc.at("regime").get<std::string>();
            if (r == "dense")
                cfg.regime = asymptotics::Regime::dense;
            else if (r == "sparse")
                cfg.regime = asymptotics::Regime::sparse;
            else
                throw parse_error("'regime' must be \"dense\" or \"sparse\"");
        }
        const auto& jn = doc.at("n");
        if (!jn.is_array() || jn.empty()) throw parse_error("'n' must be a nonempty array");
        for (const auto& v : jn) {
            const int n = v.get<int>();
            if (n < 1) throw parse_error("'n' entries must be positive");
            cfg.n_values.push_back(n);
        }
        cfg.replicates = doc.at("replicates").get<int>();
        if (cfg.replicates < 1) throw parse_error("'replicates' must be at least 1");
        if (doc.contains("variants")) {
            cfg.want_L = cfg.want_S = cfg.want_R = false;
            for (const auto& v : doc.at("variants")) {
                const std::string s = v.get<std::string>();
                if (s == "L")
                    cfg.want_L = true;
                else if (s == "S")
                    cfg.want_S = true;
                else if (s == "R")
                    cfg.want_R = true;
                else
                    throw parse_error("'variants' entries must be \"L\", \"S\" or \"R\"");
            }
        }
        if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("d_rule")) {
            const std::string s = doc.at("d_rule").get<std::string>();
            if (s == "true_rank")
                cfg.d_rule = montecarlo::DRule::true_rank;
            else if (s == "estimated")
                cfg.d_rule = montecarlo::DRule::estimated;
            else
                throw parse_error("'d_rule' must be \"true_rank\" or \"estimated\"");
        }
        if (doc.contains("d")) {
            cfg.d_override = doc.at("d").get<int>();
            if (cfg.d_override < 1) throw parse_error("'d' must be at least 1");
        }
        if (doc.contains("tau")) {
            const std::string s = doc.at("tau").get<std::string>();
            if (s == "oracle")
                cfg.tau_rule = montecarlo::TauRule::oracle;
            else if (s == "spectral")
                cfg.tau_rule = montecarlo::TauRule::spectral;
            else
                throw parse_error("'tau' must be \"oracle\" or \"spectral\"");
        }
        if (doc.contains("spectral_ari")) cfg.spectral_ari = doc.at("spectral_ari").get<bool>();
        if (doc.contains("louvain")) cfg.louvain_diag = doc.at("louvain").get<bool>();
        if (doc.contains("threads")) cfg.threads = doc.at("threads").get<int>();
        if (doc.contains("out_summary")) cfg.out_summary = doc.at("out_summary").get<std::string>();
        if (doc.contains("out_records")) cfg.out_records = doc.at("out_records").get<std::string>();
    } catch (const json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
    return cfg;
}

montecarlo::ExperimentConfig to_experiment_config(const RunConfig& cfg)
{
    montecarlo::ExperimentConfig out;
    out.B = cfg.B;
    out.pi = cfg.pi;
    out.rho = cfg.rho;
    out.regime = cfg.regime;
    out.n_values = cfg.n_values;
    out.replicates = cfg.replicates;
    out.want_L = cfg.want_L;
    out.want_S = cfg.want_S;
    out.want_R = cfg.want_R;
    out.d_rule = cfg.d_rule;
    out.d_override = cfg.d_override;
    out.tau_rule = cfg.tau_rule;
    out.spectral_ari = cfg.spectral_ari;
    out.louvain_diag = cfg.louvain_diag;
    out.seed = cfg.seed;
    out.threads = cfg.threads;
    return out;
}

void write_summary_csv(const montecarlo::SummaryTable& table, const std::string& path)
{
    std::ofstream out = open_out(path);
    out << timestamp_line() << '\n';
    out << "n,variant,count,emp_bias,emp_var,theory_bias,theory_var,ks_distance\n";
    for (const montecarlo::SummaryRow& row : table.rows) {
        const char* v = row.variant == asymptotics::Stat::L   ? "L"
                        : row.variant == asymptotics::Stat::S ? "S"
                                                              : "R";
        out << row.n << ',' << v << ',' << row.count << ',' << fmt12(row.emp_bias) << ','
            << fmt12(row.emp_var) << ',' << fmt_or_na(row.theory_bias) << ','
            << fmt_or_na(row.theory_var) << ',' << fmt_or_na(row.ks_distance) << '\n';
    }
}

void write_records_json(const std::vector<montecarlo::ReplicateRecord>& records,
                        const std::string& path)
{
    json arr = json::array();
    const auto put = [](json& obj, const char* key, double v) {
        if (std::isfinite(v))
            obj[key] = v;
        else
            obj[key] = nullptr;
    };
    for (const montecarlo::ReplicateRecord& r : records) {
        json obj;
        obj["n"] = r.n;
        obj["replicate"] = r.replicate;
        obj["rho"] = r.rho;
        put(obj, "q_L", r.q_L);
        put(obj, "q_S", r.q_S);
        put(obj, "q_R", r.q_R);
        obj["d_hat"] = r.d_hat;
        put(obj, "spectral_ari", r.spectral_ari);
        obj["louvain_K"] = r.louvain_K;
        put(obj, "louvain_ari", r.louvain_ari);
        arr.push_back(std::move(obj));
    }
    std::ofstream out = open_out(path);
    out << arr.dump(2) << '\n';
}

void write_sweep_csv(const montecarlo::SweepTable& table, const std::string& path)
{
    std::ofstream out = open_out(path);
    out << timestamp_line() << '\n';
    out << "family,param1,param2,bias,varL,varS,varR\n";
    for (const asymptotics::SurfaceRow& row : table.rows) {
        out << table.family << ',' << fmt12(row.x) << ',' << fmt12(row.y) << ','
            << fmt_or_na(row.bias) << ',' << fmt_or_na(row.var_L) << ',' << fmt_or_na(row.var_S)
            << ',' << fmt_or_na(row.var_R) << '\n';
        if (!row.valid)
            out << "# skipped " << table.axis1 << '=' << fmt12(row.x) << ' ' << table.axis2 << '='
                << fmt12(row.y) << ": " << row.note << '\n';
    }
}

void write_grdpg_csv(const std::vector<montecarlo::GrdpgRow>& rows, const std::string& path)
{
    std::ofstream out = open_out(path);
    out << timestamp_line() << '\n';
    out << "clusterer,replicates,ari_mean,ari_median,q_mean,q_median\n";
    for (const montecarlo::GrdpgRow& row : rows)
        out << row.clusterer << ',' << row.replicates << ',' << fmt12(row.ari_mean) << ','
            << fmt12(row.ari_median) << ',' << fmt12(row.q_mean) << ',' << fmt12(row.q_median)
            << '\n';
}

std::vector<ConnectivityRow> connectivity_table(const models::Graph& graph,
                                                const models::Membership& labels,
                                                const std::vector<int>& d_values, double rho,
                                                const std::string& type_label)
{
    const int K = labels.num_classes;
    const int n = graph.n();
    Matrix Bhat = modularity::block_estimator_likelihood(graph, labels, rho).Bhat;
    for (Eigen::Index i = 0; i < Bhat.size(); ++i) Bhat(i) = clamp_prob(Bhat(i));
    Bhat = (0.5 * (Bhat + Bhat.transpose())).eval();
    const Vector pi_hat = labels.counts().cast<double>() / static_cast<double>(n);

    std::vector<ConnectivityRow> rows;
    for (const int d : d_values) {
        if (d < 1 || d > K)
            throw std::domain_error("truncation rank " + std::to_string(d) + " outside 1.."
                                    + std::to_string(K));
        Matrix Bd = Bhat;
        if (d < K) {
            Bd = linalg::low_rank_truncate(linalg::sym_eig(Bhat), d);
            for (Eigen::Index i = 0; i < Bd.size(); ++i) Bd(i) = clamp_prob(Bd(i));
            Bd = (0.5 * (Bd + Bd.transpose())).eval();
        }
        ConnectivityRow row;
        row.type = type_label;
        row.K_hat = K;
        row.d_hat = d;
        const asymptotics::AsymptoticMoments mL =
            asymptotics::moments(asymptotics::Stat::L, Bd, pi_hat, asymptotics::Regime::dense);
        const asymptotics::AsymptoticMoments mS =
            asymptotics::moments(asymptotics::Stat::S, Bd, pi_hat, asymptotics::Regime::dense);
        row.bias = mS.bias;
        row.var_L = mL.variance;
        row.var_S = mS.variance;
        try {
            row.var_R = asymptotics::moments(asymptotics::Stat::R, Bd, pi_hat,
                                             asymptotics::Regime::dense)
                            .variance;
            row.var_R_defined = true;
        } catch (const theorem_error&) {
            row.var_R = std::numeric_limits<double>::quiet_NaN();
            row.var_R_defined = false;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_connectivity_csv(const std::vector<ConnectivityRow>& rows, const std::string& path)
{
    std::ofstream out = open_out(path);
    out << timestamp_line() << '\n';
    out << "type,K_hat,d_hat,bias,var_L,var_S,var_R\n";
    for (const ConnectivityRow& row : rows)
        out << row.type << ',' << row.K_hat << ',' << row.d_hat << ',' << fmt12(row.bias) << ','
            << fmt12(row.var_L) << ',' << fmt12(row.var_S) << ','
            << (row.var_R_defined ? fmt12(row.var_R) : std::string("NA")) << '\n';
}

ParcellationFixture synthetic_parcellation(std::uint64_t seed)
{
    static const int kSizes[14] = {30, 5, 14, 13, 58, 5, 31, 25, 18, 13, 9, 11, 4, 27};
    static const int kGroupOf[14] = {1, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3, 3};
    constexpr int kNodes = 263;
    constexpr double kWithinSystem = 0.42;
    constexpr double kWithinGroup = 0.36;
    constexpr double kCrossGroup = 0.10;
    constexpr double kNoiseSd = 0.10;

    ParcellationFixture fx;
    fx.systems.labels = IntVector(kNodes);
    fx.groups.labels = IntVector(kNodes);
    int node = 0;
    for (int s = 0; s < 14; ++s)
        for (int c = 0; c < kSizes[s]; ++c, ++node) {
            fx.systems.labels(node) = s + 1;
            fx.groups.labels(node) = kGroupOf[s];
        }
    fx.systems.num_classes = 14;
    fx.groups.num_classes = 3;

    Rng rng(seed);
    Matrix W = Matrix::Zero(kNodes, kNodes);
    for (int i = 0; i < kNodes; ++i) {
        W(i, i) = 1.0;
        for (int j = i + 1; j < kNodes; ++j) {
            double base = kCrossGroup;
            if (fx.systems.labels(i) == fx.systems.labels(j))
                base = kWithinSystem;
            else if (fx.groups.labels(i) == fx.groups.labels(j))
                base = kWithinGroup;
            const double w = std::clamp(base + kNoiseSd * rng.normal(), -0.97, 0.97);
            W(i, j) = w;
            W(j, i) = w;
        }
    }
    fx.correlations = {W, DiagonalPolicy::kept};
    return fx;
}

}  // namespace modnet::dataio
