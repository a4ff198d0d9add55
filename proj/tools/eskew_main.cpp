// Command-line front end: Monte Carlo studies (simulate), one-shot maximum
// likelihood estimation (fit), and rule application (classify).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eskew/discriminant.hpp"
#include "eskew/em.hpp"
#include "eskew/simulate.hpp"
#include "eskew/tpm.hpp"

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in && !in.eof()) {
        throw std::runtime_error("failed while reading '" + path + "'");
    }
    return buf.str();
}

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct SimulateArgs {
    std::string config_path;
    std::string out_path;
    std::string format;
    std::optional<std::uint64_t> seed;
    int replications = -1;  // -1: keep config value
    int train_n = -1;
    std::string rule;  // empty: keep config value
    int workers = 1;
};

int run_simulate(const SimulateArgs& args) {
    eskew::SimConfig cfg = eskew::load_sim_config(read_text_file(args.config_path));
    if (args.seed) cfg.seed = *args.seed;
    if (args.replications > 0) cfg.replications = args.replications;
    if (args.train_n > 0) cfg.train_n = args.train_n;
    if (!args.rule.empty()) cfg.rule_kind = eskew::rule_kind_from_string(args.rule);
    cfg.workers = args.workers;

    const eskew::SimReport report = eskew::run_study(cfg);
    eskew::emit_report(report, args.format, args.out_path);

    // Operator log only; the report files stay byte-reproducible.
    std::cerr << "simulate: B=" << cfg.replications << " train_n=" << cfg.train_n
              << " rule=" << eskew::rule_kind_to_string(cfg.rule_kind)
              << " overall_accuracy=" << fmt(report.confusion.overall_accuracy())
              << " wall_seconds=" << fmt(report.wall_seconds) << "\n";
    return 0;
}

int run_fit(const std::string& data_path, double tau,
            const std::string& out_path) {
    const auto [y1, y2] = eskew::read_grouped_csv(read_text_file(data_path));
    const eskew::TrainingData data(y1, y2);
    const eskew::FitResult res = eskew::fit(data, tau);
    eskew::write_file(out_path, eskew::theta_to_json(res.theta));
    std::cerr << "fit: n1=" << data.n1() << " n2=" << data.n2()
              << " iterations=" << res.iterations
              << " loglik=" << fmt(res.loglik_trace.back()) << "\n";
    return 0;
}

int run_classify(const std::string& model_path, const std::string& data_path,
                 const std::string& priors_text, const std::string& rule_name,
                 const std::optional<std::string>& out_path) {
    const auto comma = priors_text.find(',');
    if (comma == std::string::npos) {
        throw std::invalid_argument("--priors expects two values, e.g. 0.5,0.5");
    }
    const double p1 = std::stod(priors_text.substr(0, comma));
    const double p2 = std::stod(priors_text.substr(comma + 1));

    const eskew::Theta theta =
        eskew::theta_from_json(read_text_file(model_path));
    auto groups = eskew::theta_to_groups(theta);
    const eskew::GroupPair gp(std::move(groups.first), std::move(groups.second),
                              {p1, p2});
    const eskew::RuleKind kind = eskew::rule_kind_from_string(rule_name);

    const auto [points, labels_in] =
        eskew::read_points_csv(read_text_file(data_path));
    (void)labels_in;  // a leading group column, if present, is ignored
    if (points.cols() != gp.dim()) {
        throw std::invalid_argument(
            "classify: data dimension " + std::to_string(points.cols()) +
            " does not match model dimension " + std::to_string(gp.dim()));
    }

    const bool linear = kind == eskew::RuleKind::esn_linear ||
                        kind == eskew::RuleKind::cn_linear;
    std::optional<eskew::LinearRule> rule;
    if (linear) {
        rule = kind == eskew::RuleKind::esn_linear ? eskew::psi_esn_linear(gp)
                                                   : eskew::psi_cn_linear(gp);
        rule->gamma = eskew::optimize_gamma(*rule, gp);
    }

    std::string out = "label,posterior_1,posterior_2\n";
    const double log_p1 = std::log(p1);
    const double log_p2 = std::log(p2);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const Eigen::VectorXd y = points.row(i).transpose();
        int label = 0;
        double l1 = 0.0;
        double l2 = 0.0;
        if (linear) {
            label = eskew::classify_linear(*rule, y);
            // Posterior of the group given the observed score, under the
            // induced univariate laws of the linear score.
            Eigen::VectorXd score(1);
            score(0) = rule->a.dot(y) + rule->b;
            l1 = log_p1 + eskew::log_pdf(rule->law1, score);
            l2 = log_p2 + eskew::log_pdf(rule->law2, score);
        } else {
            label = eskew::classify_exact(gp, y, kind);
            l1 = log_p1 + eskew::log_pdf(gp.g1, y);
            l2 = log_p2 + eskew::log_pdf(gp.g2, y);
        }
        const double m = std::max(l1, l2);
        const double w1 = std::exp(l1 - m);
        const double w2 = std::exp(l2 - m);
        const double post1 = w1 / (w1 + w2);
        out += std::to_string(label) + "," + fmt(post1) + "," +
               fmt(1.0 - post1) + "\n";
    }

    if (out_path) {
        eskew::write_file(*out_path, out);
    } else {
        std::cout << out;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extended skew-normal discrimination toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    CLI::App* sim = app.add_subcommand(
        "simulate", "Run a Monte Carlo study and write a report");
    sim->add_option("--config", sim_args.config_path, "Study configuration JSON")
        ->required()
        ->check(CLI::ExistingFile);
    sim->add_option("--out", sim_args.out_path, "Report output path")->required();
    sim->add_option("--format", sim_args.format, "Report format")
        ->required()
        ->check(CLI::IsMember({"csv", "json"}));
    sim->add_option("--seed", sim_args.seed, "Master seed (overrides config)");
    sim->add_option("--replications", sim_args.replications,
                    "Override configured replication count");
    sim->add_option("--train-n", sim_args.train_n,
                    "Override configured per-group training size");
    sim->add_option("--rule", sim_args.rule,
                    "Override configured rule")
        ->check(CLI::IsMember(
            {"esn_exact", "esn_linear", "cn_linear", "ldf", "qdf"}));
    sim->add_option("--workers", sim_args.workers,
                    "Worker threads (never affects report content)")
        ->check(CLI::PositiveNumber);

    std::string fit_data;
    double fit_tau = 0.0;
    std::string fit_out;
    CLI::App* fit_cmd = app.add_subcommand(
        "fit", "Fit the two-group model to a labeled CSV sample");
    fit_cmd->add_option("--data", fit_data, "CSV with columns group,y1,...,yd")
        ->required()
        ->check(CLI::ExistingFile);
    fit_cmd->add_option("--tau", fit_tau, "Fixed extension parameter")
        ->required();
    fit_cmd->add_option("--out", fit_out, "Model JSON output path")->required();

    std::string cls_model;
    std::string cls_data;
    std::string cls_priors;
    std::string cls_rule;
    std::string cls_out;
    CLI::App* cls = app.add_subcommand(
        "classify", "Label points with a fitted model and a chosen rule");
    cls->add_option("--model", cls_model, "Model JSON from fit")
        ->required()
        ->check(CLI::ExistingFile);
    cls->add_option("--data", cls_data, "CSV with columns y1,...,yd")
        ->required()
        ->check(CLI::ExistingFile);
    cls->add_option("--priors", cls_priors, "Prior probabilities p1,p2")
        ->required();
    cls->add_option("--rule", cls_rule, "Classification rule")
        ->required()
        ->check(CLI::IsMember(
            {"esn_exact", "esn_linear", "cn_linear", "ldf", "qdf"}));
    cls->add_option("--out", cls_out, "Write CSV here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(sim_args);
        if (fit_cmd->parsed()) return run_fit(fit_data, fit_tau, fit_out);
        if (cls->parsed()) {
            return run_classify(
                cls_model, cls_data, cls_priors, cls_rule,
                cls_out.empty() ? std::nullopt
                                : std::optional<std::string>(cls_out));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
