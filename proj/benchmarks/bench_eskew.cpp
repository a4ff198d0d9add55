// Microbenchmarks for the numeric kernels on the hot paths: density and
// bivariate-CDF evaluation, sampling, the EM E-step, and threshold
// optimization.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "eskew/discriminant.hpp"
#include "eskew/em.hpp"
#include "eskew/esn.hpp"
#include "eskew/numeric.hpp"
#include "eskew/rng.hpp"
#include "eskew/tpm.hpp"

namespace {

eskew::EsnParams make_law(double tau) {
    Eigen::VectorXd xi(2);
    xi << 0.0, 4.5;
    Eigen::MatrixXd Omega(2, 2);
    Omega << 2.5, 0.8, 0.8, 1.5;
    Eigen::VectorXd eta(2);
    eta << 2.5, 1.5;
    return eskew::EsnParams::from_centered(xi, Omega, eta, tau);
}

eskew::GroupPair make_pair(double tau) {
    Eigen::VectorXd xi2(2);
    xi2 << 2.0, 1.5;
    Eigen::MatrixXd Omega(2, 2);
    Omega << 2.5, 0.8, 0.8, 1.5;
    Eigen::VectorXd eta(2);
    eta << 2.5, 1.5;
    return {make_law(tau),
            eskew::EsnParams::from_centered(xi2, Omega, eta, tau),
            {0.5, 0.5}};
}

void BM_LogPdf(benchmark::State& state) {
    const eskew::EsnParams law = make_law(5.0);
    Eigen::VectorXd y(2);
    y << 1.0, 2.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(eskew::log_pdf(law, y));
    }
}
BENCHMARK(BM_LogPdf);

void BM_BvnCdf(benchmark::State& state) {
    double x = -1.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(eskew::bvn_cdf(x, 0.7, -0.85));
        x = -x;
    }
}
BENCHMARK(BM_BvnCdf);

void BM_Cdf1(benchmark::State& state) {
    Eigen::VectorXd xi(1), eta(1);
    Eigen::MatrixXd Omega(1, 1);
    xi << 0.0;
    Omega << 2.0;
    eta << 1.5;
    const eskew::EsnParams law =
        eskew::EsnParams::from_centered(xi, Omega, eta, 0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eskew::cdf1(law, 0.75));
    }
}
BENCHMARK(BM_Cdf1);

void BM_Sample(benchmark::State& state) {
    const eskew::EsnParams law = make_law(state.range(0));
    eskew::RngStream rng(42);
    const int n = 1000;
    for (auto _ : state) {
        benchmark::DoNotOptimize(eskew::sample(law, rng, n));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Sample)->Arg(0)->Arg(5)->Arg(-8);

void BM_EStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    eskew::RngStream rng(7);
    const eskew::GroupPair gp = make_pair(5.0);
    const eskew::TrainingData data(eskew::sample(gp.g1, rng, n),
                                   eskew::sample(gp.g2, rng, n));
    const eskew::Theta theta = eskew::init(data, 5.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eskew::e_step(theta, data));
    }
    state.SetItemsProcessed(state.iterations() * 2 * n);
}
BENCHMARK(BM_EStep)->Arg(100)->Arg(500);

void BM_OptimizeGamma(benchmark::State& state) {
    const eskew::GroupPair gp = make_pair(5.0);
    const eskew::LinearRule rule = eskew::psi_esn_linear(gp);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eskew::optimize_gamma(rule, gp));
    }
}
BENCHMARK(BM_OptimizeGamma);

}  // namespace

int main(int argc, char** argv) {
    ::benchmark::Initialize(&argc, argv);
    if (::benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    ::benchmark::RunSpecifiedBenchmarks();
    ::benchmark::Shutdown();
    return 0;
}
