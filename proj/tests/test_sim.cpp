// Monte Carlo study harness: configuration parsing and validation, summary
// statistics, confusion bookkeeping, report serialization round trips,
// reproducibility across runs and worker counts, and the CSV interchange
// readers used by the command-line tools.

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "eskew/rng.hpp"
#include "eskew/simulate.hpp"

namespace {

using eskew::bias_mce;
using eskew::ConfusionMatrix;
using eskew::emit_report;
using eskew::load_sim_config;
using eskew::read_grouped_csv;
using eskew::read_points_csv;
using eskew::report_from_csv;
using eskew::report_from_json;
using eskew::report_to_csv;
using eskew::report_to_json;
using eskew::rule_kind_from_string;
using eskew::rule_kind_to_string;
using eskew::RuleKind;
using eskew::run_study;
using eskew::SimConfig;
using eskew::SimReport;
using eskew::substream_seed;
using eskew::Theta;
using eskew::theta_from_json;
using eskew::theta_to_json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* kSmokeConfig = R"({
  "xi1": [0.0, 4.5],
  "xi2": [2.0, 1.5],
  "Sigma": [[2.5, 0.8], [0.8, 1.5]],
  "eta": [2.5, 1.5],
  "tau": 0.5,
  "train_n": 40,
  "test_n": 50,
  "replications": 3,
  "seed": 7,
  "rule": "esn_linear"
})";

std::string error_message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

TEST(LoadSimConfig, ParsesFullConfig) {
    const SimConfig cfg = load_sim_config(kSmokeConfig);
    EXPECT_EQ(cfg.dim(), 2);
    EXPECT_DOUBLE_EQ(cfg.xi1(1), 4.5);
    EXPECT_DOUBLE_EQ(cfg.xi2(0), 2.0);
    EXPECT_DOUBLE_EQ(cfg.Sigma(0, 1), 0.8);
    EXPECT_DOUBLE_EQ(cfg.eta(0), 2.5);
    EXPECT_DOUBLE_EQ(cfg.tau, 0.5);
    EXPECT_EQ(cfg.train_n, 40);
    EXPECT_EQ(cfg.test_n, 50);
    EXPECT_EQ(cfg.replications, 3);
    EXPECT_EQ(cfg.seed, 7u);
    EXPECT_EQ(cfg.rule_kind, RuleKind::esn_linear);
    EXPECT_EQ(cfg.workers, 1);  // execution knob, never part of the file
}

TEST(LoadSimConfig, AppliesDefaults) {
    const char* minimal = R"({
      "xi1": [0.0], "xi2": [2.0], "Sigma": [[1.0]], "eta": [0.5],
      "tau": 0.0, "train_n": 30, "replications": 2
    })";
    const SimConfig cfg = load_sim_config(minimal);
    EXPECT_EQ(cfg.test_n, 500);
    EXPECT_EQ(cfg.seed, 0u);
    EXPECT_EQ(cfg.rule_kind, RuleKind::esn_linear);
}

TEST(LoadSimConfig, ReportsMissingAndUnknownFields) {
    EXPECT_THROW(load_sim_config("{not json"), std::invalid_argument);
    EXPECT_THROW(load_sim_config("[1,2]"), std::invalid_argument);

    const std::string missing = error_message_of([] {
        load_sim_config(R"({
          "xi1": [0.0], "xi2": [2.0], "Sigma": [[1.0]],
          "tau": 0.0, "train_n": 30, "replications": 2
        })");
    });
    EXPECT_NE(missing.find("eta"), std::string::npos) << missing;

    const std::string unknown = error_message_of([] {
        load_sim_config(R"({
          "xi1": [0.0], "xi2": [2.0], "Sigma": [[1.0]], "eta": [0.5],
          "tau": 0.0, "train_n": 30, "replications": 2, "Omega": [[1.0]]
        })");
    });
    EXPECT_NE(unknown.find("unknown field"), std::string::npos) << unknown;
    EXPECT_NE(unknown.find("Omega"), std::string::npos) << unknown;
}

TEST(LoadSimConfig, RejectsMistypedFields) {
    EXPECT_THROW(load_sim_config(R"({
      "xi1": [0.0], "xi2": [2.0], "Sigma": [[1.0]], "eta": [0.5],
      "tau": "zero", "train_n": 30, "replications": 2
    })"),
                 std::invalid_argument);
    EXPECT_THROW(load_sim_config(R"({
      "xi1": [0.0], "xi2": [2.0], "Sigma": [[1.0]], "eta": [0.5],
      "tau": 0.0, "train_n": 30.5, "replications": 2
    })"),
                 std::invalid_argument);
    EXPECT_THROW(load_sim_config(R"({
      "xi1": [0.0], "xi2": [2.0], "Sigma": [[1.0]], "eta": [0.5],
      "tau": 0.0, "train_n": 30, "replications": 2, "seed": -4
    })"),
                 std::invalid_argument);
    EXPECT_THROW(load_sim_config(R"({
      "xi1": [0.0], "xi2": [2.0], "Sigma": [[1.0]], "eta": [0.5],
      "tau": 0.0, "train_n": 30, "replications": 2, "rule": "fisher"
    })"),
                 std::invalid_argument);
}

TEST(LoadSimConfig, ExplainsKnownMisprintedDispersion) {
    // The transposed-entry variant of the shipped dispersion matrix has
    // determinant -0.25; the loader names the correction rather than failing
    // with a bare PD error.
    const std::string msg = error_message_of([] {
        load_sim_config(R"({
          "xi1": [0.0, 4.5], "xi2": [2.0, 1.5],
          "Sigma": [[2.5, 1.5], [1.5, 0.8]],
          "eta": [2.5, 1.5], "tau": 5.0, "train_n": 500, "replications": 10
        })");
    });
    EXPECT_NE(msg.find("misprinted"), std::string::npos) << msg;
    EXPECT_NE(msg.find("sigma-pd-correction"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[[2.5,0.8],[0.8,1.5]]"), std::string::npos) << msg;
}

TEST(SimConfigValidate, EnforcesShapeAndSizeConstraints) {
    SimConfig good = load_sim_config(kSmokeConfig);
    EXPECT_NO_THROW(good.validate());

    SimConfig bad = good;
    bad.train_n = 3;  // below d + 2
    EXPECT_THROW(bad.validate(), std::invalid_argument);

    bad = good;
    bad.replications = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);

    bad = good;
    bad.test_n = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);

    bad = good;
    bad.eta = VectorXd::Zero(3);
    EXPECT_THROW(bad.validate(), std::invalid_argument);

    bad = good;
    bad.tau = std::nan("");
    EXPECT_THROW(bad.validate(), std::invalid_argument);

    bad = good;
    bad.workers = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(RuleKindStrings, RoundTripAllKinds) {
    for (RuleKind kind :
         {RuleKind::esn_exact, RuleKind::esn_linear, RuleKind::cn_linear,
          RuleKind::ldf, RuleKind::qdf}) {
        EXPECT_EQ(rule_kind_from_string(rule_kind_to_string(kind)), kind);
    }
    EXPECT_EQ(rule_kind_to_string(RuleKind::esn_linear), "esn_linear");
    EXPECT_THROW(rule_kind_from_string("mahalanobis"), std::invalid_argument);
}

TEST(BiasMce, KnownValuesAndProperties) {
    // Perfect estimates: both summaries vanish.
    MatrixXd exact(3, 2);
    exact << 1.0, -2.0, 1.0, -2.0, 1.0, -2.0;
    VectorXd truth(2);
    truth << 1.0, -2.0;
    const auto [bias0, rmce0] = bias_mce(exact, truth);
    EXPECT_LT(bias0.cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT(rmce0.cwiseAbs().maxCoeff(), 1e-15);

    // Symmetric miss: zero bias, unit root mean square error.
    MatrixXd sym(2, 1);
    sym << 0.0, 2.0;
    const auto [bias1, rmce1] = bias_mce(sym, VectorXd::Ones(1));
    EXPECT_NEAR(bias1(0), 0.0, 1e-15);
    EXPECT_NEAR(rmce1(0), 1.0, 1e-15);

    // Decomposition rmce^2 = bias^2 + population variance.
    MatrixXd est(4, 1);
    est << 0.3, 1.1, -0.4, 0.9;
    const auto [bias2, rmce2] = bias_mce(est, VectorXd::Zero(1));
    const double mean = est.col(0).mean();
    const double var_pop = (est.col(0).array() - mean).square().mean();
    EXPECT_NEAR(rmce2(0) * rmce2(0), bias2(0) * bias2(0) + var_pop, 1e-14);
    EXPECT_GE(rmce2(0), std::abs(bias2(0)));

    EXPECT_THROW(bias_mce(MatrixXd::Zero(3, 2), VectorXd::Zero(3)),
                 std::invalid_argument);
    EXPECT_THROW(bias_mce(MatrixXd(0, 2), VectorXd::Zero(2)),
                 std::invalid_argument);
}

TEST(ConfusionMatrixTest, CountsAndAccuracies) {
    ConfusionMatrix cm;
    cm.add(1, 1, 40);
    cm.add(2, 1, 10);
    cm.add(1, 2, 5);
    cm.add(2, 2, 45);
    EXPECT_EQ(cm.total(), 100);
    EXPECT_DOUBLE_EQ(cm.group_accuracy(1), 0.8);
    EXPECT_DOUBLE_EQ(cm.group_accuracy(2), 0.9);
    EXPECT_DOUBLE_EQ(cm.overall_accuracy(), 0.85);

    EXPECT_THROW(cm.add(0, 1), std::invalid_argument);
    EXPECT_THROW(cm.add(1, 3), std::invalid_argument);
    EXPECT_THROW(cm.group_accuracy(0), std::invalid_argument);

    const ConfusionMatrix empty;
    EXPECT_EQ(empty.total(), 0);
    EXPECT_DOUBLE_EQ(empty.group_accuracy(1), 0.0);
    EXPECT_DOUBLE_EQ(empty.overall_accuracy(), 0.0);
}

class RunStudyTest : public ::testing::Test {
protected:
    static const SimReport& smoke_report() {
        static const SimReport report = [] {
            return run_study(load_sim_config(kSmokeConfig));
        }();
        return report;
    }
};

TEST_F(RunStudyTest, ShapesSeedsAndTruthColumn) {
    const SimReport& report = smoke_report();

    // 2d + d(d+1)/2 + d parameters for d = 2.
    ASSERT_EQ(report.params.size(), 9u);
    const char* expected_names[] = {"xi1_1", "xi1_2",    "xi2_1",
                                    "xi2_2", "sigma_11", "sigma_22",
                                    "sigma_12", "delta_1", "delta_2"};
    for (std::size_t i = 0; i < 9; ++i) {
        EXPECT_EQ(report.params[i].name, expected_names[i]) << i;
    }

    // The truth column carries the sampled parametrization: locations, the
    // dispersion entries, and the implied latent loading.
    const double expected_truth[] = {0.0, 4.5, 2.0, 1.5, 2.5, 1.5, 0.8,
                                     1.4610652067794710, 0.8334935743372821};
    for (std::size_t i = 0; i < 9; ++i) {
        EXPECT_NEAR(report.params[i].truth, expected_truth[i], 1e-12) << i;
    }

    ASSERT_EQ(report.replication_seeds.size(), 3u);
    for (std::uint64_t b = 0; b < 3; ++b) {
        EXPECT_EQ(report.replication_seeds[b], substream_seed(7u, b)) << b;
    }

    EXPECT_EQ(report.confusion.total(), 2 * 50 * 3);
    EXPECT_GT(report.confusion.overall_accuracy(), 0.5);
    EXPECT_GT(report.wall_seconds, 0.0);
}

TEST_F(RunStudyTest, JsonRoundTripIsLossless) {
    const SimReport& report = smoke_report();
    const std::string text = report_to_json(report);
    const SimReport parsed = report_from_json(text);
    EXPECT_EQ(report_to_json(parsed), text);

    // Wall time is operator-only; it must not leak into the serialization.
    EXPECT_EQ(text.find("wall"), std::string::npos);
}

TEST_F(RunStudyTest, CsvRoundTripPreservesTableAndCounts) {
    const SimReport& report = smoke_report();
    const std::string text = report_to_csv(report);
    const auto [params, confusion] = report_from_csv(text);

    ASSERT_EQ(params.size(), report.params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        EXPECT_EQ(params[i].name, report.params[i].name);
        EXPECT_DOUBLE_EQ(params[i].truth, report.params[i].truth);
        EXPECT_DOUBLE_EQ(params[i].bias, report.params[i].bias);
        EXPECT_DOUBLE_EQ(params[i].rmce, report.params[i].rmce);
    }
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            EXPECT_EQ(confusion.counts[r][c], report.confusion.counts[r][c]);
        }
    }

    // Structure: header, one row per parameter, then the confusion block.
    EXPECT_EQ(text.rfind("param,truth,bias,rmce\n", 0), 0u);
    EXPECT_NE(text.find("confusion,original_1,original_2\n"),
              std::string::npos);
    EXPECT_NE(text.find("accuracy,overall,"), std::string::npos);
}

TEST_F(RunStudyTest, DeterministicAcrossRunsAndWorkerCounts) {
    const std::string baseline = report_to_json(smoke_report());

    SimConfig again = load_sim_config(kSmokeConfig);
    EXPECT_EQ(report_to_json(run_study(again)), baseline);

    SimConfig threaded = load_sim_config(kSmokeConfig);
    threaded.workers = 3;
    EXPECT_EQ(report_to_json(run_study(threaded)), baseline);
}

TEST_F(RunStudyTest, ExactRuleKindRunsToo) {
    SimConfig cfg = load_sim_config(kSmokeConfig);
    cfg.rule_kind = RuleKind::esn_exact;
    cfg.replications = 1;
    const SimReport report = run_study(cfg);
    EXPECT_EQ(report.confusion.total(), 2 * 50);
    EXPECT_GT(report.confusion.overall_accuracy(), 0.5);
}

TEST_F(RunStudyTest, EmitReportWritesBothFormats) {
    const SimReport& report = smoke_report();
    const std::string dir = ::testing::TempDir();

    const std::string json_path = dir + "/eskew_report.json";
    emit_report(report, "json", json_path);
    std::ifstream json_in(json_path, std::ios::binary);
    ASSERT_TRUE(json_in.good());
    std::stringstream json_buf;
    json_buf << json_in.rdbuf();
    EXPECT_EQ(json_buf.str(), report_to_json(report));

    const std::string csv_path = dir + "/eskew_report.csv";
    emit_report(report, "csv", csv_path);
    std::ifstream csv_in(csv_path, std::ios::binary);
    ASSERT_TRUE(csv_in.good());
    std::stringstream csv_buf;
    csv_buf << csv_in.rdbuf();
    EXPECT_EQ(csv_buf.str(), report_to_csv(report));

    EXPECT_THROW(emit_report(report, "xml", json_path), std::invalid_argument);
    const std::string bad_path = "/nonexistent_dir_zz9/report.json";
    const std::string msg = error_message_of(
        [&] { emit_report(report, "json", bad_path); });
    EXPECT_NE(msg.find(bad_path), std::string::npos) << msg;
}

TEST(ThetaJson, RoundTripsExactly) {
    Theta theta;
    theta.xi1 = (VectorXd(2) << 0.25, -1.75).finished();
    theta.xi2 = (VectorXd(2) << 2.125, 0.375).finished();
    theta.Sigma = (MatrixXd(2, 2) << 1.25, 0.125, 0.125, 0.75).finished();
    theta.delta = (VectorXd(2) << 0.64, -0.32).finished();
    theta.tau = 0.5;

    const Theta parsed = theta_from_json(theta_to_json(theta));
    EXPECT_TRUE(parsed.xi1 == theta.xi1);
    EXPECT_TRUE(parsed.xi2 == theta.xi2);
    EXPECT_TRUE(parsed.Sigma == theta.Sigma);
    EXPECT_TRUE(parsed.delta == theta.delta);
    EXPECT_DOUBLE_EQ(parsed.tau, theta.tau);
}

TEST(ThetaJson, ValidatesSchema) {
    EXPECT_THROW(theta_from_json("{"), std::invalid_argument);
    EXPECT_THROW(theta_from_json(R"({"xi1": [0], "xi2": [1]})"),
                 std::invalid_argument);
    // Dimension disagreement.
    EXPECT_THROW(theta_from_json(R"({
      "xi1": [0, 0], "xi2": [1, 1], "Sigma": [[1.0]],
      "delta": [0.1, 0.2], "tau": 0.0
    })"),
                 std::invalid_argument);
    // Non-PD Sigma.
    EXPECT_THROW(theta_from_json(R"({
      "xi1": [0, 0], "xi2": [1, 1],
      "Sigma": [[1.0, 2.0], [2.0, 1.0]],
      "delta": [0.1, 0.2], "tau": 0.0
    })"),
                 std::invalid_argument);
}

TEST(ReadGroupedCsv, ParsesAndValidates) {
    const auto [y1, y2] = read_grouped_csv(
        "Group,y1,y2\n"
        "1,0.5,1.0\n"
        "2,+2.5,-1.0\n"
        "1,1.5e1,0.25\n"
        "\n"
        "2,3.0,4.0\n");
    ASSERT_EQ(y1.rows(), 2);
    ASSERT_EQ(y2.rows(), 2);
    EXPECT_DOUBLE_EQ(y1(1, 0), 15.0);
    EXPECT_DOUBLE_EQ(y2(0, 0), 2.5);
    EXPECT_DOUBLE_EQ(y2(1, 1), 4.0);

    EXPECT_THROW(read_grouped_csv(""), std::invalid_argument);
    EXPECT_THROW(read_grouped_csv("y1,y2\n0.5,1.0\n"), std::invalid_argument);
    EXPECT_THROW(read_grouped_csv("group,y1\n3,0.5\n"), std::invalid_argument);
    EXPECT_THROW(read_grouped_csv("group,y1,y2\n1,0.5\n"),
                 std::invalid_argument);
    const std::string msg = error_message_of(
        [] { read_grouped_csv("group,y1\n1,0.5\n1,bogus\n"); });
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ReadPointsCsv, HandlesOptionalGroupColumn) {
    const auto [pts, labels] = read_points_csv(
        "y1,y2\n"
        "0.5,1.0\n"
        "-0.25,2.0\n");
    ASSERT_EQ(pts.rows(), 2);
    EXPECT_TRUE(labels.empty());
    EXPECT_DOUBLE_EQ(pts(1, 1), 2.0);

    const auto [pts2, labels2] = read_points_csv(
        "group,y1,y2\n"
        "1,0.5,1.0\n"
        "2,-0.25,2.0\n");
    ASSERT_EQ(pts2.rows(), 2);
    ASSERT_EQ(pts2.cols(), 2);
    ASSERT_EQ(labels2.size(), 2u);
    EXPECT_EQ(labels2[0], 1);
    EXPECT_EQ(labels2[1], 2);
    EXPECT_DOUBLE_EQ(pts2(0, 0), 0.5);

    EXPECT_THROW(read_points_csv(""), std::invalid_argument);
    EXPECT_THROW(read_points_csv("group,y1\n5,0.5\n"), std::invalid_argument);
    EXPECT_THROW(read_points_csv("y1,y2\n0.5\n"), std::invalid_argument);
}

}  // namespace
