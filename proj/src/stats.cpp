#include "emotrade/stats.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "emotrade/rng.hpp"
#include "text_io.hpp"

namespace emotrade {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("pearson: need at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw std::invalid_argument("zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

SampledCorrelation sampled_correlation(std::span<const double> x, std::span<const double> y, int n_samples,
                                       int sample_size, std::uint64_t seed) {
    if (x.size() != y.size()) throw std::invalid_argument("sampled_correlation: length mismatch");
    if (n_samples < 1) throw std::invalid_argument("sampled_correlation: n_samples must be positive");
    if (sample_size < 2 || static_cast<std::size_t>(sample_size) > x.size()) {
        throw std::invalid_argument(
            fmt::format("sample size {} exceeds series length {}", sample_size, x.size()));
    }
    Rng rng(seed);
    const auto m = static_cast<std::size_t>(sample_size);
    std::vector<std::size_t> idx(x.size());
    std::vector<double> xs(m), ys(m), rhos;
    rhos.reserve(static_cast<std::size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        // partial Fisher-Yates: the first m slots become the sample
        for (std::size_t i = 0; i < m; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
            std::swap(idx[i], idx[j]);
            xs[i] = x[idx[i]];
            ys[i] = y[idx[i]];
        }
        rhos.push_back(pearson(xs, ys));
    }
    const double k = static_cast<double>(rhos.size());
    const double mean = std::accumulate(rhos.begin(), rhos.end(), 0.0) / k;
    double var = 0.0;
    for (double r : rhos) var += (r - mean) * (r - mean);
    return {mean, std::sqrt(var / k)};
}

double shuffle_baseline(std::span<const double> x, std::span<const double> y, int n_shuffles, std::uint64_t seed) {
    if (n_shuffles < 1) throw std::invalid_argument("shuffle_baseline: n_shuffles must be positive");
    (void)pearson(x, y);  // same preconditions
    Rng rng(seed);
    std::vector<double> shuffled(x.begin(), x.end());
    double total = 0.0;
    for (int s = 0; s < n_shuffles; ++s) {
        rng.shuffle(shuffled);
        total += pearson(shuffled, y);
    }
    return total / n_shuffles;
}

OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
    if (design.rows() != response.size()) throw std::invalid_argument("ols_fit: row count mismatch");
    if (design.rows() < design.cols() || design.cols() == 0) {
        throw std::invalid_argument("ols_fit: fewer rows than columns");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols()) throw std::invalid_argument("singular design matrix");
    OlsFit fit;
    fit.coefficients = qr.solve(response);
    fit.rss = (response - design * fit.coefficients).squaredNorm();
    return fit;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: a, b must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete_beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_survival(double f, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("f_survival: degrees of freedom must be positive");
    if (std::isnan(f)) throw std::invalid_argument("f_survival: NaN statistic");
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return std::clamp(incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)), 0.0, 1.0);
}

GrangerResult granger_test(std::span<const double> x, std::span<const double> y, int lag) {
    if (x.size() != y.size()) throw std::invalid_argument("granger_test: length mismatch");
    if (lag < 1 || lag > 5) throw std::invalid_argument(fmt::format("granger_test: lag {} outside 1..5", lag));
    const auto n = static_cast<Eigen::Index>(lag);
    const auto t_total = static_cast<Eigen::Index>(y.size());
    const Eigen::Index rows = t_total - n;
    if (rows <= 2 * n + 1) {
        throw std::invalid_argument(
            fmt::format("granger_test: series of length {} too short for lag {}", y.size(), lag));
    }
    Eigen::MatrixXd restricted(rows, 1 + n);
    Eigen::MatrixXd unrestricted(rows, 1 + 2 * n);
    Eigen::VectorXd response(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index t = r + n;
        response(r) = y[static_cast<std::size_t>(t)];
        restricted(r, 0) = unrestricted(r, 0) = 1.0;
        for (Eigen::Index i = 1; i <= n; ++i) {
            restricted(r, i) = unrestricted(r, i) = y[static_cast<std::size_t>(t - i)];
            unrestricted(r, n + i) = x[static_cast<std::size_t>(t - i)];
        }
    }
    GrangerResult out;
    out.lag = lag;
    out.rss_restricted = ols_fit(restricted, response).rss;
    out.rss_unrestricted = ols_fit(unrestricted, response).rss;
    out.df_num = lag;
    out.df_den = static_cast<int>(rows - 2 * n - 1);
    const double gain = std::max(0.0, out.rss_restricted - out.rss_unrestricted);
    if (out.rss_unrestricted <= 0.0) {
        out.f_stat = gain > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    } else {
        out.f_stat = (gain / out.df_num) / (out.rss_unrestricted / out.df_den);
    }
    out.p_value = f_survival(out.f_stat, out.df_num, out.df_den);
    return out;
}

std::string significance_tier(double p_value, double significance) {
    if (p_value < 0.001 && p_value < significance) return "***";
    if (p_value < 0.01 && p_value < significance) return "**";
    if (p_value < significance) return "*";
    return "";
}

namespace {

AnalysisRow analyse_cell(const PeriodData& train, Target target, Emotion emotion, int lag,
                         const AnalysisOptions& opt) {
    AnalysisRow row;
    row.target = target;
    row.emotion = emotion;
    row.lag = lag;
    try {
        const auto& y_all = train.y.column(target);
        const auto shifted = lag_shift(train.x, emotion, lag);
        const auto l = static_cast<std::size_t>(lag);
        const std::vector<double> y_tail(y_all.begin() + static_cast<std::ptrdiff_t>(l), y_all.end());
        const auto xs = minmax_normalize(shifted.values);
        const auto ys = minmax_normalize(y_tail);
        const std::string label = fmt::format("{}/{}/{}", to_string(target), to_string(emotion), lag);

        row.rho_full = pearson(xs, ys);
        const int sample_size = std::min<int>(opt.sample_size, static_cast<int>(xs.size()));
        const auto sampled =
            sampled_correlation(xs, ys, opt.n_samples, sample_size, derive_seed(opt.seed, "sample/" + label));
        row.rho_sample_mean = sampled.mean;
        row.rho_sample_std = sampled.std;
        row.rho_shuffle_mean = shuffle_baseline(xs, ys, opt.n_shuffles, derive_seed(opt.seed, "shuffle/" + label));
        row.rho_flag = std::abs(row.rho_sample_mean) > opt.rho_threshold;

        const auto gx = minmax_normalize(train.x.column(emotion));
        const auto gy = minmax_normalize(y_all);
        const auto g = granger_test(gx, gy, lag);
        row.f_stat = g.f_stat;
        row.p_value = g.p_value;
        row.tier = significance_tier(g.p_value, opt.significance);
    } catch (const std::exception& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.rho_full = row.rho_sample_mean = row.rho_sample_std = row.rho_shuffle_mean = nan;
        row.f_stat = row.p_value = nan;
        row.rho_flag = false;
        row.degenerate = true;
        row.tier = "degenerate";
        row.error = e.what();
    }
    return row;
}

}  // namespace

std::vector<AnalysisRow> analysis_grid(const PeriodData& train, const AnalysisOptions& options) {
    if (options.max_lag < 1 || options.max_lag > 5) throw std::invalid_argument("max_lag outside 1..5");
    if (train.x.dates != train.y.dates) throw std::invalid_argument("analysis_grid: series not aligned");

    struct Cell {
        Target target;
        Emotion emotion;
        int lag;
    };
    std::vector<Cell> cells;
    for (auto t : kTargets)
        for (auto e : kEmotions)
            for (int lag = 1; lag <= options.max_lag; ++lag) cells.push_back({t, e, lag});

    std::vector<AnalysisRow> rows(cells.size());
    const auto workers = static_cast<std::size_t>(std::max(1, options.jobs));
    if (workers == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            rows[i] = analyse_cell(train, cells[i].target, cells[i].emotion, cells[i].lag, options);
        }
    } else {
        std::vector<std::future<void>> futures;
        for (std::size_t w = 0; w < workers; ++w) {
            futures.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < cells.size(); i += workers) {
                    rows[i] = analyse_cell(train, cells[i].target, cells[i].emotion, cells[i].lag, options);
                }
            }));
        }
        for (auto& f : futures) f.get();
    }
    return rows;
}

std::string analysis_csv(std::span<const AnalysisRow> rows) {
    std::string out =
        "target,emotion,lag,rho_full,rho_sample_mean,rho_sample_std,rho_shuffle_mean,f_stat,p_value,"
        "significance_tier\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", to_string(r.target), to_string(r.emotion), r.lag,
                           detail::format_real(r.rho_full), detail::format_real(r.rho_sample_mean),
                           detail::format_real(r.rho_sample_std), detail::format_real(r.rho_shuffle_mean),
                           detail::format_real(r.f_stat), detail::format_real(r.p_value), r.tier);
    }
    return out;
}

void write_analysis_csv(const std::filesystem::path& path, std::span<const AnalysisRow> rows) {
    detail::write_text(path, analysis_csv(rows));
}

}  // namespace emotrade
