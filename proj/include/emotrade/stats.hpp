#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emotrade/corpus.hpp"
#include "emotrade/market.hpp"

namespace emotrade {

double pearson(std::span<const double> x, std::span<const double> y);

struct SampledCorrelation {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation over the draws
};

// Repeatedly correlates `sample_size` index pairs drawn without replacement.
SampledCorrelation sampled_correlation(std::span<const double> x, std::span<const double> y, int n_samples,
                                       int sample_size, std::uint64_t seed);

// Mean coefficient between uniformly permuted copies of x and the fixed y.
double shuffle_baseline(std::span<const double> x, std::span<const double> y, int n_shuffles, std::uint64_t seed);

struct OlsFit {
    Eigen::VectorXd coefficients;
    double rss = 0.0;
};

OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

// Regularised incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
// P(F > f) for F ~ F(d1, d2).
double f_survival(double f, double d1, double d2);

struct GrangerResult {
    int lag = 1;
    double rss_restricted = 0.0;
    double rss_unrestricted = 0.0;
    double f_stat = 0.0;
    int df_num = 0;
    int df_den = 0;
    double p_value = 1.0;
};

// Does x Granger-cause y? Nested OLS with `lag` lags of y (restricted) and
// additionally `lag` lags of x (unrestricted), fitted on the same T - lag rows.
GrangerResult granger_test(std::span<const double> x, std::span<const double> y, int lag);

// "***" p < 0.001, "**" p < 0.01, "*" p < significance, "" otherwise.
std::string significance_tier(double p_value, double significance = 0.05);

struct AnalysisOptions {
    int max_lag = 5;
    double significance = 0.05;
    int n_samples = 100;
    int sample_size = 150;
    int n_shuffles = 100;
    double rho_threshold = 0.2;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct AnalysisRow {
    Target target = Target::close;
    Emotion emotion = Emotion::anger;
    int lag = 1;
    double rho_full = 0.0;
    double rho_sample_mean = 0.0;
    double rho_sample_std = 0.0;
    double rho_shuffle_mean = 0.0;
    double f_stat = 0.0;
    double p_value = 1.0;
    std::string tier;
    bool rho_flag = false;  // |sampled mean rho| above the threshold
    bool degenerate = false;
    std::string error;
};

// Every (target, emotion, lag) cell on an aligned training period. The
// correlation part uses the emotion shifted by `lag` trading days; the Granger
// part tests the unshifted emotion with lag order `lag`. Series are min-max
// normalised first. Rows are sorted by (target, emotion, lag).
std::vector<AnalysisRow> analysis_grid(const PeriodData& train, const AnalysisOptions& options);

void write_analysis_csv(const std::filesystem::path& path, std::span<const AnalysisRow> rows);
std::string analysis_csv(std::span<const AnalysisRow> rows);

}  // namespace emotrade
