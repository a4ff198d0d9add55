#include "eskew/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include "eskew/em.hpp"
#include "eskew/errors.hpp"
#include "eskew/linalg.hpp"
#include "eskew/rng.hpp"
#include "eskew/tpm.hpp"

namespace eskew {

namespace {

using nlohmann::json;

// Shortest representation that parses back to the same double; locale-free.
std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell, const std::string& context) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (first != last && *first == '+') ++first;  // from_chars rejects '+'
    double v = 0.0;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || first == last) {
        throw std::invalid_argument(context + ": cannot parse number '" +
                                    cell + "'");
    }
    return v;
}

std::string trim(const std::string& s) {
    const auto is_space = [](unsigned char c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n';
    };
    std::size_t lo = 0;
    std::size_t hi = s.size();
    while (lo < hi && is_space(static_cast<unsigned char>(s[lo]))) ++lo;
    while (hi > lo && is_space(static_cast<unsigned char>(s[hi - 1]))) --hi;
    return s.substr(lo, hi - lo);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string lower(std::string s) {
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
}

// Parameter labels in reporting order: both location vectors, dispersion
// diagonal, dispersion upper off-diagonal (row-major), then delta.
std::vector<std::string> param_names(int d) {
    std::vector<std::string> names;
    for (int j = 1; j <= d; ++j) names.push_back("xi1_" + std::to_string(j));
    for (int j = 1; j <= d; ++j) names.push_back("xi2_" + std::to_string(j));
    for (int j = 1; j <= d; ++j) {
        names.push_back("sigma_" + std::to_string(j) + std::to_string(j));
    }
    for (int j = 1; j <= d; ++j) {
        for (int k = j + 1; k <= d; ++k) {
            names.push_back("sigma_" + std::to_string(j) + std::to_string(k));
        }
    }
    for (int j = 1; j <= d; ++j) names.push_back("delta_" + std::to_string(j));
    return names;
}

// Flattens (xi1, xi2, dispersion, delta) in the reporting order above.
Eigen::VectorXd pack_params(const Eigen::VectorXd& xi1,
                            const Eigen::VectorXd& xi2,
                            const Eigen::MatrixXd& dispersion,
                            const Eigen::VectorXd& delta) {
    const int d = static_cast<int>(xi1.size());
    Eigen::VectorXd out(2 * d + d * (d + 1) / 2 + d);
    int i = 0;
    for (int j = 0; j < d; ++j) out(i++) = xi1(j);
    for (int j = 0; j < d; ++j) out(i++) = xi2(j);
    for (int j = 0; j < d; ++j) out(i++) = dispersion(j, j);
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) out(i++) = dispersion(j, k);
    }
    for (int j = 0; j < d; ++j) out(i++) = delta(j);
    return out;
}

struct RepOutcome {
    Eigen::VectorXd estimate;
    std::int64_t counts[2][2] = {{0, 0}, {0, 0}};
    std::uint64_t seed_used = 0;
};

RepOutcome run_replication(const SimConfig& cfg, const EsnParams& law1,
                           const EsnParams& law2, std::uint64_t seed) {
    RngStream rng(seed);
    const Eigen::MatrixXd y1 = sample(law1, rng, cfg.train_n);
    const Eigen::MatrixXd y2 = sample(law2, rng, cfg.train_n);
    const FitResult res = fit(TrainingData(y1, y2), cfg.tau);
    const Theta& th = res.theta;

    RepOutcome out;
    out.seed_used = seed;
    out.estimate =
        pack_params(th.xi1, th.xi2,
                    th.Sigma + th.delta * th.delta.transpose(), th.delta);

    auto fitted = theta_to_groups(th);
    const GroupPair gp(std::move(fitted.first), std::move(fitted.second),
                       {0.5, 0.5});

    const Eigen::MatrixXd t1 = sample(law1, rng, cfg.test_n);
    const Eigen::MatrixXd t2 = sample(law2, rng, cfg.test_n);

    const bool linear = cfg.rule_kind == RuleKind::esn_linear ||
                        cfg.rule_kind == RuleKind::cn_linear;
    if (linear) {
        LinearRule rule = cfg.rule_kind == RuleKind::esn_linear
                              ? psi_esn_linear(gp)
                              : psi_cn_linear(gp);
        rule.gamma = optimize_gamma(rule, gp);
        for (int i = 0; i < t1.rows(); ++i) {
            ++out.counts[classify_linear(rule, t1.row(i)) - 1][0];
        }
        for (int i = 0; i < t2.rows(); ++i) {
            ++out.counts[classify_linear(rule, t2.row(i)) - 1][1];
        }
    } else {
        for (int i = 0; i < t1.rows(); ++i) {
            ++out.counts[classify_exact(gp, t1.row(i), cfg.rule_kind) - 1][0];
        }
        for (int i = 0; i < t2.rows(); ++i) {
            ++out.counts[classify_exact(gp, t2.row(i), cfg.rule_kind) - 1][1];
        }
    }
    return out;
}

// Deterministic failure recovery: a failing replication is rerun on seeds
// derived from its own base substream, so retries never perturb any other
// replication and do not depend on scheduling.
RepOutcome run_with_retries(const SimConfig& cfg, const EsnParams& law1,
                            const EsnParams& law2, std::uint64_t base_seed,
                            int index) {
    constexpr int kMaxRetries = 3;
    std::uint64_t seed = base_seed;
    for (int attempt = 0;; ++attempt) {
        try {
            return run_replication(cfg, law1, law2, seed);
        } catch (const std::exception& e) {
            if (attempt >= kMaxRetries) {
                throw std::runtime_error(
                    "replication " + std::to_string(index) + " failed after " +
                    std::to_string(attempt + 1) + " attempts (last seed " +
                    std::to_string(seed) + "): " + e.what());
            }
            seed = substream_seed(base_seed, static_cast<std::uint64_t>(attempt) + 1);
        }
    }
}

bool is_known_misprinted_sigma(const Eigen::MatrixXd& m) {
    if (m.rows() != 2 || m.cols() != 2) return false;
    const auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-12;
    };
    return close(m(0, 0), 2.5) && close(m(0, 1), 1.5) &&
           close(m(1, 0), 1.5) && close(m(1, 1), 0.8);
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& key) {
    if (!j.contains(key)) {
        throw std::invalid_argument("missing required field '" + key + "'");
    }
    const json& a = j.at(key);
    if (!a.is_array() || a.empty()) {
        throw std::invalid_argument("field '" + key + "' must be a non-empty array of numbers");
    }
    Eigen::VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number()) {
            throw std::invalid_argument("field '" + key + "' must contain only numbers");
        }
        v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    }
    return v;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& key) {
    if (!j.contains(key)) {
        throw std::invalid_argument("missing required field '" + key + "'");
    }
    const json& a = j.at(key);
    if (!a.is_array() || a.empty() || !a[0].is_array()) {
        throw std::invalid_argument("field '" + key + "' must be an array of equal-length rows");
    }
    const std::size_t cols = a[0].size();
    Eigen::MatrixXd m(a.size(), cols);
    for (std::size_t r = 0; r < a.size(); ++r) {
        if (!a[r].is_array() || a[r].size() != cols) {
            throw std::invalid_argument("field '" + key + "' rows must have equal length");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!a[r][c].is_number()) {
                throw std::invalid_argument("field '" + key + "' must contain only numbers");
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                a[r][c].get<double>();
        }
    }
    return m;
}

double number_from_json(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw std::invalid_argument("missing or non-numeric field '" + key + "'");
    }
    return j.at(key).get<double>();
}

int int_from_json(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_number_integer()) {
        throw std::invalid_argument("missing or non-integer field '" + key + "'");
    }
    return j.at(key).get<int>();
}

SimConfig config_from_json(const json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("config: top level must be a JSON object");
    }
    static const std::vector<std::string> kKnown = {
        "xi1",    "xi2",    "Sigma",        "eta",  "tau",
        "train_n", "test_n", "replications", "seed", "rule"};
    for (const auto& item : j.items()) {
        if (std::find(kKnown.begin(), kKnown.end(), item.key()) ==
            kKnown.end()) {
            throw std::invalid_argument("config: unknown field '" +
                                        item.key() + "'");
        }
    }

    SimConfig cfg;
    cfg.xi1 = vector_from_json(j, "xi1");
    cfg.xi2 = vector_from_json(j, "xi2");
    cfg.Sigma = matrix_from_json(j, "Sigma");
    cfg.eta = vector_from_json(j, "eta");
    cfg.tau = number_from_json(j, "tau");
    cfg.train_n = int_from_json(j, "train_n");
    cfg.replications = int_from_json(j, "replications");
    // The CLI always supersedes this with --seed; a stored seed documents a
    // particular reproduction.
    if (!j.contains("seed")) {
        cfg.seed = 0;
    } else if (j.at("seed").is_number_unsigned()) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
    } else if (j.at("seed").is_number_integer() &&
               j.at("seed").get<std::int64_t>() >= 0) {
        cfg.seed = static_cast<std::uint64_t>(j.at("seed").get<std::int64_t>());
    } else {
        throw std::invalid_argument("config: 'seed' must be a non-negative integer");
    }
    cfg.test_n = j.contains("test_n") ? int_from_json(j, "test_n") : 500;
    cfg.rule_kind = j.contains("rule")
                        ? rule_kind_from_string(
                              j.at("rule").is_string()
                                  ? j.at("rule").get<std::string>()
                                  : throw std::invalid_argument(
                                        "config: 'rule' must be a string"))
                        : RuleKind::esn_linear;

    try {
        (void)chol_lower(cfg.Sigma);
    } catch (const NotPositiveDefiniteError&) {
        std::string msg = "config: Sigma is not positive definite";
        if (is_known_misprinted_sigma(cfg.Sigma)) {
            msg +=
                "; [[2.5,1.5],[1.5,0.8]] is a known misprinted dispersion "
                "(determinant -0.25) — the corrected matrix "
                "[[2.5,0.8],[0.8,1.5]] keeps the same entries with sigma_12 "
                "and sigma_22 transposed (decision record: "
                "sigma-pd-correction)";
        }
        throw std::invalid_argument(msg);
    }
    cfg.validate();
    return cfg;
}

json config_to_json(const SimConfig& cfg) {
    json j;
    j["xi1"] = std::vector<double>(cfg.xi1.data(), cfg.xi1.data() + cfg.xi1.size());
    j["xi2"] = std::vector<double>(cfg.xi2.data(), cfg.xi2.data() + cfg.xi2.size());
    json rows = json::array();
    for (Eigen::Index r = 0; r < cfg.Sigma.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < cfg.Sigma.cols(); ++c) {
            row.push_back(cfg.Sigma(r, c));
        }
        rows.push_back(row);
    }
    j["Sigma"] = rows;
    j["eta"] = std::vector<double>(cfg.eta.data(), cfg.eta.data() + cfg.eta.size());
    j["tau"] = cfg.tau;
    j["train_n"] = cfg.train_n;
    j["test_n"] = cfg.test_n;
    j["replications"] = cfg.replications;
    j["seed"] = cfg.seed;
    j["rule"] = rule_kind_to_string(cfg.rule_kind);
    return j;
}

}  // namespace

void SimConfig::validate() const {
    const int d = dim();
    if (d < 1) throw std::invalid_argument("SimConfig: xi1 must be non-empty");
    if (xi2.size() != d) {
        throw std::invalid_argument("SimConfig: xi2 dimension mismatch");
    }
    if (eta.size() != d) {
        throw std::invalid_argument("SimConfig: eta dimension mismatch");
    }
    if (Sigma.rows() != d || Sigma.cols() != d) {
        throw std::invalid_argument("SimConfig: Sigma must be d x d");
    }
    if (!xi1.allFinite() || !xi2.allFinite() || !eta.allFinite() ||
        !Sigma.allFinite() || !std::isfinite(tau)) {
        throw std::invalid_argument("SimConfig: parameters must be finite");
    }
    (void)chol_lower(Sigma);  // throws NotPositiveDefiniteError when not PD
    if (replications < 1) {
        throw std::invalid_argument("SimConfig: replications must be >= 1");
    }
    if (train_n < d + 2) {
        throw std::invalid_argument("SimConfig: train_n must be >= d + 2");
    }
    if (test_n < 1) throw std::invalid_argument("SimConfig: test_n must be >= 1");
    if (workers < 1) throw std::invalid_argument("SimConfig: workers must be >= 1");
}

void ConfusionMatrix::add(int allocated, int original, std::int64_t n) {
    if (allocated < 1 || allocated > 2 || original < 1 || original > 2 ||
        n < 0) {
        throw std::invalid_argument("ConfusionMatrix: labels must be 1 or 2");
    }
    counts[allocated - 1][original - 1] += n;
}

std::int64_t ConfusionMatrix::total() const {
    return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

double ConfusionMatrix::group_accuracy(int group) const {
    if (group < 1 || group > 2) {
        throw std::invalid_argument("ConfusionMatrix: group must be 1 or 2");
    }
    const std::int64_t n = counts[0][group - 1] + counts[1][group - 1];
    if (n == 0) return 0.0;
    return static_cast<double>(counts[group - 1][group - 1]) /
           static_cast<double>(n);
}

double ConfusionMatrix::overall_accuracy() const {
    const std::int64_t n = total();
    if (n == 0) return 0.0;
    return static_cast<double>(counts[0][0] + counts[1][1]) /
           static_cast<double>(n);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> bias_mce(
    const Eigen::MatrixXd& estimates, const Eigen::VectorXd& truth) {
    const Eigen::Index B = estimates.rows();
    const Eigen::Index p = truth.size();
    if (B < 1) {
        throw std::invalid_argument("bias_mce: need at least one replication");
    }
    if (estimates.cols() != p) {
        throw std::invalid_argument(
            "bias_mce: estimate columns do not match truth length");
    }
    const Eigen::VectorXd bias =
        estimates.colwise().mean().transpose() - truth;
    Eigen::VectorXd rmce(p);
    for (Eigen::Index jcol = 0; jcol < p; ++jcol) {
        const double ss =
            (estimates.col(jcol).array() - truth(jcol)).square().sum();
        rmce(jcol) = std::sqrt(ss / static_cast<double>(B));
    }
    return {bias, rmce};
}

SimReport run_study(const SimConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    const EsnParams law1 =
        EsnParams::from_centered(cfg.xi1, cfg.Sigma, cfg.eta, cfg.tau);
    const EsnParams law2 =
        EsnParams::from_centered(cfg.xi2, cfg.Sigma, cfg.eta, cfg.tau);
    const Eigen::VectorXd truth =
        pack_params(cfg.xi1, cfg.xi2, cfg.Sigma, law1.delta());

    const int B = cfg.replications;
    std::vector<std::uint64_t> base_seeds(B);
    for (int b = 0; b < B; ++b) {
        base_seeds[b] = substream_seed(cfg.seed, static_cast<std::uint64_t>(b));
    }

    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(B));
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    const auto drain = [&] {
        for (;;) {
            const int b = next.fetch_add(1);
            if (b >= B) return;
            try {
                outcomes[static_cast<std::size_t>(b)] =
                    run_with_retries(cfg, law1, law2, base_seeds[b], b);
            } catch (...) {
                {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
                next.store(B);  // stop remaining work
                return;
            }
        }
    };

    const int n_workers = std::min(std::max(cfg.workers, 1), B);
    if (n_workers <= 1) {
        drain();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int k = 0; k < n_workers; ++k) pool.emplace_back(drain);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    // Sequential reduction in replication order keeps the report independent
    // of how replications were scheduled across workers.
    const Eigen::Index p = truth.size();
    Eigen::MatrixXd estimates(B, p);
    SimReport report;
    report.config = cfg;
    report.replication_seeds.resize(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        const RepOutcome& o = outcomes[static_cast<std::size_t>(b)];
        estimates.row(b) = o.estimate.transpose();
        report.replication_seeds[static_cast<std::size_t>(b)] = o.seed_used;
        report.confusion.add(1, 1, o.counts[0][0]);
        report.confusion.add(1, 2, o.counts[0][1]);
        report.confusion.add(2, 1, o.counts[1][0]);
        report.confusion.add(2, 2, o.counts[1][1]);
    }

    const auto [bias, rmce] = bias_mce(estimates, truth);
    const std::vector<std::string> names = param_names(cfg.dim());
    report.params.resize(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        report.params[i] = {names[i], truth(static_cast<Eigen::Index>(i)),
                            bias(static_cast<Eigen::Index>(i)),
                            rmce(static_cast<Eigen::Index>(i))};
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
}

SimConfig load_sim_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") +
                                    e.what());
    }
    return config_from_json(j);
}

std::string report_to_json(const SimReport& report) {
    json j;
    j["config"] = config_to_json(report.config);
    j["replication_seeds"] = report.replication_seeds;
    json params = json::array();
    for (const ParamSummary& ps : report.params) {
        json row;
        row["param"] = ps.name;
        row["truth"] = ps.truth;
        row["bias"] = ps.bias;
        row["rmce"] = ps.rmce;
        params.push_back(row);
    }
    j["parameters"] = params;
    json confusion;
    confusion["counts"] = {
        {report.confusion.counts[0][0], report.confusion.counts[0][1]},
        {report.confusion.counts[1][0], report.confusion.counts[1][1]}};
    confusion["group1_accuracy"] = report.confusion.group_accuracy(1);
    confusion["group2_accuracy"] = report.confusion.group_accuracy(2);
    confusion["overall_accuracy"] = report.confusion.overall_accuracy();
    j["confusion"] = confusion;
    return j.dump(2) + "\n";
}

SimReport report_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("report: JSON parse error: ") +
                                    e.what());
    }
    if (!j.is_object() || !j.contains("config") ||
        !j.contains("replication_seeds") || !j.contains("parameters") ||
        !j.contains("confusion")) {
        throw std::invalid_argument(
            "report: expected fields config, replication_seeds, parameters, "
            "confusion");
    }
    SimReport report;
    report.config = config_from_json(j.at("config"));
    for (const json& s : j.at("replication_seeds")) {
        report.replication_seeds.push_back(s.get<std::uint64_t>());
    }
    for (const json& row : j.at("parameters")) {
        ParamSummary ps;
        ps.name = row.at("param").get<std::string>();
        ps.truth = row.at("truth").get<double>();
        ps.bias = row.at("bias").get<double>();
        ps.rmce = row.at("rmce").get<double>();
        report.params.push_back(ps);
    }
    const json& counts = j.at("confusion").at("counts");
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            report.confusion.counts[r][c] =
                counts.at(r).at(c).get<std::int64_t>();
        }
    }
    return report;
}

std::string report_to_csv(const SimReport& report) {
    std::string out = "param,truth,bias,rmce\n";
    for (const ParamSummary& ps : report.params) {
        out += ps.name + "," + fmt_double(ps.truth) + "," +
               fmt_double(ps.bias) + "," + fmt_double(ps.rmce) + "\n";
    }
    out += "confusion,original_1,original_2\n";
    out += "allocated_1," + std::to_string(report.confusion.counts[0][0]) +
           "," + std::to_string(report.confusion.counts[0][1]) + "\n";
    out += "allocated_2," + std::to_string(report.confusion.counts[1][0]) +
           "," + std::to_string(report.confusion.counts[1][1]) + "\n";
    out += "accuracy,group1," + fmt_double(report.confusion.group_accuracy(1)) +
           "\n";
    out += "accuracy,group2," + fmt_double(report.confusion.group_accuracy(2)) +
           "\n";
    out += "accuracy,overall," +
           fmt_double(report.confusion.overall_accuracy()) + "\n";
    return out;
}

std::pair<std::vector<ParamSummary>, ConfusionMatrix> report_from_csv(
    const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line) ||
        split_csv_line(line) !=
            std::vector<std::string>{"param", "truth", "bias", "rmce"}) {
        throw std::invalid_argument(
            "report CSV: expected header param,truth,bias,rmce");
    }
    std::vector<ParamSummary> params;
    ConfusionMatrix confusion;
    bool saw_confusion = false;
    int allocated_row = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        const std::string where = "report CSV line " + std::to_string(line_no);
        if (!saw_confusion) {
            if (cells.at(0) == "confusion") {
                saw_confusion = true;
                continue;
            }
            if (cells.size() != 4) {
                throw std::invalid_argument(where + ": expected 4 columns");
            }
            ParamSummary ps;
            ps.name = cells[0];
            ps.truth = parse_double(cells[1], where);
            ps.bias = parse_double(cells[2], where);
            ps.rmce = parse_double(cells[3], where);
            params.push_back(ps);
            continue;
        }
        if (cells.at(0) == "accuracy") continue;  // derived, recomputed
        if (allocated_row >= 2 || cells.size() != 3) {
            throw std::invalid_argument(where + ": malformed confusion block");
        }
        for (int c = 0; c < 2; ++c) {
            confusion.counts[allocated_row][c] = static_cast<std::int64_t>(
                std::llround(parse_double(cells[static_cast<std::size_t>(c) + 1], where)));
        }
        ++allocated_row;
    }
    if (!saw_confusion || allocated_row != 2) {
        throw std::invalid_argument("report CSV: missing confusion block");
    }
    return {params, confusion};
}

void emit_report(const SimReport& report, const std::string& format,
                 const std::string& path) {
    if (format == "json") {
        write_file(path, report_to_json(report));
    } else if (format == "csv") {
        write_file(path, report_to_csv(report));
    } else {
        throw std::invalid_argument("emit_report: format must be csv or json");
    }
}

std::string theta_to_json(const Theta& theta) {
    json j;
    j["xi1"] = std::vector<double>(theta.xi1.data(),
                                   theta.xi1.data() + theta.xi1.size());
    j["xi2"] = std::vector<double>(theta.xi2.data(),
                                   theta.xi2.data() + theta.xi2.size());
    json rows = json::array();
    for (Eigen::Index r = 0; r < theta.Sigma.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < theta.Sigma.cols(); ++c) {
            row.push_back(theta.Sigma(r, c));
        }
        rows.push_back(row);
    }
    j["Sigma"] = rows;
    j["delta"] = std::vector<double>(theta.delta.data(),
                                     theta.delta.data() + theta.delta.size());
    j["tau"] = theta.tau;
    return j.dump(2) + "\n";
}

Theta theta_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("model: JSON parse error: ") +
                                    e.what());
    }
    if (!j.is_object()) {
        throw std::invalid_argument("model: top level must be a JSON object");
    }
    Theta theta;
    theta.xi1 = vector_from_json(j, "xi1");
    theta.xi2 = vector_from_json(j, "xi2");
    theta.Sigma = matrix_from_json(j, "Sigma");
    theta.delta = vector_from_json(j, "delta");
    theta.tau = number_from_json(j, "tau");
    const Eigen::Index d = theta.xi1.size();
    if (theta.xi2.size() != d || theta.delta.size() != d ||
        theta.Sigma.rows() != d || theta.Sigma.cols() != d) {
        throw std::invalid_argument("model: field dimensions disagree");
    }
    if (!std::isfinite(theta.tau)) {
        throw std::invalid_argument("model: tau must be finite");
    }
    try {
        (void)chol_lower(theta.Sigma);
    } catch (const NotPositiveDefiniteError&) {
        throw std::invalid_argument("model: Sigma is not positive definite");
    }
    return theta;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

RuleKind rule_kind_from_string(const std::string& name) {
    if (name == "esn_exact") return RuleKind::esn_exact;
    if (name == "esn_linear") return RuleKind::esn_linear;
    if (name == "cn_linear") return RuleKind::cn_linear;
    if (name == "ldf") return RuleKind::ldf;
    if (name == "qdf") return RuleKind::qdf;
    throw std::invalid_argument(
        "unknown rule '" + name +
        "' (expected esn_exact, esn_linear, cn_linear, ldf, or qdf)");
}

std::string rule_kind_to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::esn_exact: return "esn_exact";
        case RuleKind::esn_linear: return "esn_linear";
        case RuleKind::cn_linear: return "cn_linear";
        case RuleKind::ldf: return "ldf";
        case RuleKind::qdf: return "qdf";
    }
    throw std::invalid_argument("unknown rule kind");
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> read_grouped_csv(
    const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("grouped CSV: empty input");
    }
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2 || lower(header[0]) != "group") {
        throw std::invalid_argument(
            "grouped CSV: header must be group,y1,...,yd");
    }
    const std::size_t d = header.size() - 1;
    std::vector<Eigen::VectorXd> rows1;
    std::vector<Eigen::VectorXd> rows2;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        const std::string where = "grouped CSV line " + std::to_string(line_no);
        if (cells.size() != d + 1) {
            throw std::invalid_argument(
                where + ": expected " + std::to_string(d + 1) + " columns");
        }
        const std::string& g = cells[0];
        if (g != "1" && g != "2") {
            throw std::invalid_argument(where + ": group must be 1 or 2");
        }
        Eigen::VectorXd row(static_cast<Eigen::Index>(d));
        for (std::size_t c = 0; c < d; ++c) {
            row(static_cast<Eigen::Index>(c)) = parse_double(cells[c + 1], where);
        }
        (g == "1" ? rows1 : rows2).push_back(std::move(row));
    }
    const auto pack = [d](const std::vector<Eigen::VectorXd>& rows) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
        }
        return m;
    };
    return {pack(rows1), pack(rows2)};
}

std::pair<Eigen::MatrixXd, std::vector<int>> read_points_csv(
    const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("points CSV: empty input");
    }
    const std::vector<std::string> header = split_csv_line(line);
    if (header.empty()) {
        throw std::invalid_argument("points CSV: malformed header");
    }
    const bool has_group = lower(header[0]) == "group";
    const std::size_t d = header.size() - (has_group ? 1 : 0);
    if (d < 1) {
        throw std::invalid_argument(
            "points CSV: header must name at least one coordinate");
    }
    std::vector<Eigen::VectorXd> rows;
    std::vector<int> groups;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        const std::string where = "points CSV line " + std::to_string(line_no);
        if (cells.size() != header.size()) {
            throw std::invalid_argument(
                where + ": expected " + std::to_string(header.size()) +
                " columns");
        }
        std::size_t offset = 0;
        if (has_group) {
            if (cells[0] != "1" && cells[0] != "2") {
                throw std::invalid_argument(where + ": group must be 1 or 2");
            }
            groups.push_back(cells[0] == "1" ? 1 : 2);
            offset = 1;
        }
        Eigen::VectorXd row(static_cast<Eigen::Index>(d));
        for (std::size_t c = 0; c < d; ++c) {
            row(static_cast<Eigen::Index>(c)) =
                parse_double(cells[c + offset], where);
        }
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    return {m, groups};
}

}  // namespace eskew
