#ifndef ESKEW_SIMULATE_HPP
#define ESKEW_SIMULATE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "eskew/discriminant.hpp"
#include "eskew/em.hpp"

namespace eskew {

/// Monte Carlo study configuration. The Sigma field is the dispersion matrix
/// of the sampled populations (both groups share it, together with eta and
/// tau); see load_sim_config for the JSON schema.
struct SimConfig {
    Eigen::VectorXd xi1;
    Eigen::VectorXd xi2;
    Eigen::MatrixXd Sigma;
    Eigen::VectorXd eta;
    double tau = 0.0;
    int train_n = 0;           ///< training sample size per group
    int test_n = 500;          ///< test sample size per group
    int replications = 1;      ///< B
    std::uint64_t seed = 0;
    RuleKind rule_kind = RuleKind::esn_linear;

    /// Execution knob, not part of the study definition: never read from a
    /// config file, never echoed into reports, and guaranteed not to affect
    /// their content (replication streams are keyed by index, and reduction
    /// is sequential in replication order).
    int workers = 1;

    int dim() const { return static_cast<int>(xi1.size()); }

    /// \throws std::invalid_argument / NotPositiveDefiniteError on invalid
    ///         shapes, non-PD Sigma, B < 1, or train_n < d+2
    void validate() const;
};

/// Aggregate 2×2 confusion counts, allocated label × original group.
struct ConfusionMatrix {
    std::int64_t counts[2][2] = {{0, 0}, {0, 0}};

    void add(int allocated, int original, std::int64_t n = 1);
    std::int64_t total() const;
    double group_accuracy(int group) const;  ///< group in {1, 2}
    double overall_accuracy() const;
};

/// One row of the parameter table: name, truth, and the two Monte Carlo
/// summaries BIAS = mean(θ̂) − θ and √MCE = √(B⁻¹Σ(θ̂ᵢ−θ)²).
struct ParamSummary {
    std::string name;
    double truth = 0.0;
    double bias = 0.0;
    double rmce = 0.0;
};

/// Full study report. Wall time is carried for operator logging but is
/// deliberately excluded from emitted files so that identical (config, seed)
/// runs produce byte-identical reports.
struct SimReport {
    SimConfig config;
    std::vector<std::uint64_t> replication_seeds;
    std::vector<ParamSummary> params;
    ConfusionMatrix confusion;
    double wall_seconds = 0.0;
};

/// BIAS and √MCE per column of a B×p estimate matrix against a p-vector of
/// truths.
/// \throws std::invalid_argument on shape mismatch or empty input
std::pair<Eigen::VectorXd, Eigen::VectorXd> bias_mce(
    const Eigen::MatrixXd& estimates, const Eigen::VectorXd& truth);

/// Runs the full study: per replication (independent substream), simulate
/// training data, fit the two-group EM at the configured τ, build the
/// configured rule from the fitted parameters, classify fresh test samples,
/// and accumulate estimates and confusion counts. Replications run on
/// config.workers threads; results are reduced in replication order, so the
/// report is identical for any worker count. A replication whose fit fails
/// is retried with a derived seed up to 3 times.
/// \throws std::runtime_error if a replication fails all retries
SimReport run_study(const SimConfig& cfg);

/// Parses a SimConfig from JSON text. Required fields: xi1, xi2 (arrays),
/// Sigma (array of rows), eta (array), tau, train_n, replications, seed;
/// optional: test_n (default 500), rule (default "esn_linear"). There are
/// no defaults for the model parameters, and a non-PD Sigma is rejected at
/// load with a pointer to the corrected shipped configuration.
/// \throws std::invalid_argument on schema violations
SimConfig load_sim_config(const std::string& json_text);

/// Serializes the report. JSON includes the config echo, per-replication
/// seeds, parameter table, and confusion block; CSV has one row per
/// parameter (param, truth, bias, rmce) followed by a confusion block.
/// Neither includes wall time (see SimReport).
std::string report_to_json(const SimReport& report);
std::string report_to_csv(const SimReport& report);

/// Inverse of report_to_json (wall time aside, which is not serialized).
SimReport report_from_json(const std::string& json_text);

/// Renders and writes a report in one step; format is "csv" or "json".
/// \throws std::invalid_argument on unknown format, std::runtime_error on I/O
void emit_report(const SimReport& report, const std::string& format,
                 const std::string& path);

/// Serializes fitted model parameters (fields xi1, xi2, Sigma, delta, tau)
/// for interchange between the fit and classify commands.
std::string theta_to_json(const Theta& theta);

/// Inverse of theta_to_json; validates shapes and PD Sigma.
/// \throws std::invalid_argument on schema violations
Theta theta_from_json(const std::string& json_text);

/// Parses the parameter table and confusion block back out of a CSV report.
std::pair<std::vector<ParamSummary>, ConfusionMatrix> report_from_csv(
    const std::string& csv_text);

/// Writes content to path.
/// \throws std::runtime_error (with the path in the message) on I/O failure
void write_file(const std::string& path, const std::string& content);

RuleKind rule_kind_from_string(const std::string& name);
std::string rule_kind_to_string(RuleKind kind);

/// Reads a labeled sample from CSV text with a header row
/// "group,y1,...,yd"; group values must be 1 or 2.
/// \throws std::invalid_argument on malformed input
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> read_grouped_csv(
    const std::string& csv_text);

/// Reads an unlabeled point matrix from CSV text with header "y1,...,yd";
/// a leading "group" column, if present, is returned alongside (empty
/// otherwise) and not treated as a coordinate.
std::pair<Eigen::MatrixXd, std::vector<int>> read_points_csv(
    const std::string& csv_text);

}  // namespace eskew

#endif  // ESKEW_SIMULATE_HPP
