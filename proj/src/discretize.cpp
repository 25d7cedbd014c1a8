#include "emotrade/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "emotrade/rng.hpp"

namespace emotrade {

namespace {

std::vector<CategoryLabel> labels_for(int k) {
    if (k == 3) return {-1, 0, 1};
    std::vector<CategoryLabel> out(static_cast<std::size_t>(k));
    std::iota(out.begin(), out.end(), 0);
    return out;
}

std::size_t bin_of(const std::vector<double>& boundaries, double v) {
    // number of boundaries <= v
    return static_cast<std::size_t>(std::upper_bound(boundaries.begin(), boundaries.end(), v) - boundaries.begin());
}

double sse_of(std::span<const double> values, std::span<const std::size_t> assign, std::span<const double> centers) {
    double sse = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - centers[assign[i]];
        sse += d * d;
    }
    return sse;
}

}  // namespace

std::string_view to_string(DiscretizationMethod m) {
    switch (m) {
        case DiscretizationMethod::sign: return "sign";
        case DiscretizationMethod::equal_frequency: return "equal_frequency";
        case DiscretizationMethod::kmeans: return "kmeans";
    }
    return "?";
}

DiscretizationMethod parse_method(std::string_view name) {
    if (name == "sign") return DiscretizationMethod::sign;
    if (name == "equal_frequency") return DiscretizationMethod::equal_frequency;
    if (name == "kmeans") return DiscretizationMethod::kmeans;
    throw std::invalid_argument(fmt::format("unknown discretization method '{}'", name));
}

Discretized binarize_sign(std::span<const double> values) {
    Discretized out;
    out.scheme.method = DiscretizationMethod::sign;
    out.scheme.labels = {0, 1};
    out.labels.reserve(values.size());
    for (double v : values) out.labels.push_back(v > 0.0 ? 1 : 0);
    return out;
}

Discretized equal_frequency(std::span<const double> values, int k) {
    if (k < 1) throw std::invalid_argument("equal_frequency: k must be positive");
    const std::size_t n = values.size();
    if (n < static_cast<std::size_t>(k)) throw std::invalid_argument("equal_frequency: fewer values than bins");
    if (std::adjacent_find(values.begin(), values.end(), std::not_equal_to<>{}) == values.end()) {
        throw std::invalid_argument("degenerate distribution");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    const auto kk = static_cast<std::size_t>(k);
    const std::size_t base = n / kk, rem = n % kk;
    // bin sizes from the top (highest values) downwards
    std::vector<std::size_t> top_sizes(kk);
    for (std::size_t b = 0; b < kk; ++b) top_sizes[b] = base + (b < rem ? 1 : 0);

    Discretized out;
    out.scheme.method = DiscretizationMethod::equal_frequency;
    out.scheme.labels = labels_for(k);
    out.labels.assign(n, 0);
    std::vector<double> bin_min(kk), bin_max(kk);  // indexed by ascending bin
    std::size_t pos = 0;
    for (std::size_t b = 0; b < kk; ++b) {
        const std::size_t asc = kk - 1 - b;
        bin_max[asc] = values[order[pos]];
        for (std::size_t i = 0; i < top_sizes[b]; ++i, ++pos) {
            out.labels[order[pos]] = out.scheme.labels[asc];
        }
        bin_min[asc] = values[order[pos - 1]];
    }
    for (std::size_t b = 0; b + 1 < kk; ++b) {
        out.scheme.boundaries.push_back(0.5 * (bin_max[b] + bin_min[b + 1]));
    }
    for (std::size_t b = 1; b < out.scheme.boundaries.size(); ++b) {
        if (!(out.scheme.boundaries[b - 1] < out.scheme.boundaries[b])) {
            throw std::invalid_argument("degenerate distribution");
        }
    }
    return out;
}

KMeansResult kmeans_1d_detailed(std::span<const double> values, const KMeansOptions& opt) {
    if (opt.k < 1) throw std::invalid_argument("kmeans_1d: k must be positive");
    const auto k = static_cast<std::size_t>(opt.k);
    const std::size_t n = values.size();
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < k) {
        throw std::invalid_argument(fmt::format("kmeans_1d: {} distinct values for k = {}", distinct.size(), k));
    }

    // Centers at the (2j+1)/(2k) quantiles; if ties collapse two of them, take
    // the same quantiles of the distinct values instead.
    auto quantiles = [&](const std::vector<double>& v) {
        std::vector<double> c(k);
        for (std::size_t j = 0; j < k; ++j) {
            const auto idx = static_cast<std::size_t>(std::floor((2.0 * j + 1.0) / (2.0 * k) * v.size()));
            c[j] = v[std::min(idx, v.size() - 1)];
        }
        return c;
    };
    std::vector<double> first = quantiles(sorted);
    if (std::adjacent_find(first.begin(), first.end()) != first.end()) first = quantiles(distinct);

    // k-means++ over the distinct values: each next center drawn with
    // probability proportional to the squared distance to the nearest one.
    Rng rng(derive_seed(opt.seed, "kmeans++"));
    auto plus_plus = [&] {
        std::vector<double> c{distinct[rng.below(distinct.size())]};
        std::vector<double> d2(distinct.size());
        while (c.size() < k) {
            double total = 0.0;
            for (std::size_t i = 0; i < distinct.size(); ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (double x : c) best = std::min(best, (distinct[i] - x) * (distinct[i] - x));
                total += d2[i] = best;
            }
            double u = rng.uniform() * total;
            std::size_t pick = 0;
            while (pick + 1 < distinct.size() && (d2[pick] == 0.0 || u >= d2[pick])) {
                u -= d2[pick];
                ++pick;
            }
            if (d2[pick] == 0.0) break;
            c.push_back(distinct[pick]);
        }
        std::sort(c.begin(), c.end());
        return c;
    };

    auto boundaries_of = [&](const std::vector<double>& c) {
        std::vector<double> b;
        for (std::size_t j = 0; j + 1 < c.size(); ++j) b.push_back(0.5 * (c[j] + c[j + 1]));
        return b;
    };
    struct Run {
        std::vector<double> centers;
        std::vector<std::size_t> assign;
        std::vector<double> history;
        int iterations = 0;
        double sse = 0.0;
    };
    auto lloyd = [&](std::vector<double> centers) {
        Run r;
        r.assign.resize(n);
        auto assign_all = [&](const std::vector<double>& c) {
            const auto b = boundaries_of(c);
            for (std::size_t i = 0; i < n; ++i) r.assign[i] = bin_of(b, values[i]);
        };
        for (int it = 0; it < opt.max_iter; ++it) {
            assign_all(centers);
            std::vector<double> sum(k, 0.0);
            std::vector<std::size_t> count(k, 0);
            for (std::size_t i = 0; i < n; ++i) {
                sum[r.assign[i]] += values[i];
                ++count[r.assign[i]];
            }
            double moved = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                if (count[j] == 0) continue;  // empty cluster keeps its center
                const double c = sum[j] / static_cast<double>(count[j]);
                moved = std::max(moved, std::abs(c - centers[j]));
                centers[j] = c;
            }
            r.iterations = it + 1;
            r.history.push_back(sse_of(values, r.assign, centers));
            std::sort(centers.begin(), centers.end());
            if (moved < opt.tol) break;
        }
        assign_all(centers);
        r.sse = sse_of(values, r.assign, centers);
        r.history.push_back(r.sse);
        r.centers = std::move(centers);
        return r;
    };

    Run best = lloyd(first);
    for (int restart = 1; restart < opt.n_init; ++restart) {
        auto start = plus_plus();
        if (start.size() < k) continue;
        Run r = lloyd(std::move(start));
        if (r.sse < best.sse) best = std::move(r);
    }
    const auto& centers = best.centers;
    const auto& assign = best.assign;

    KMeansResult res;
    res.iterations = best.iterations;
    res.sse = best.sse;
    res.sse_history = best.history;

    auto& scheme = res.discretized.scheme;
    scheme.method = DiscretizationMethod::kmeans;
    scheme.centers = centers;
    scheme.boundaries = boundaries_of(centers);
    scheme.labels = labels_for(opt.k);
    res.discretized.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) res.discretized.labels.push_back(scheme.labels[assign[i]]);
    return res;
}

Discretized kmeans_1d(std::span<const double> values, const KMeansOptions& options) {
    return kmeans_1d_detailed(values, options).discretized;
}

Discretized discretize(DiscretizationMethod method, std::span<const double> values) {
    switch (method) {
        case DiscretizationMethod::sign: return binarize_sign(values);
        case DiscretizationMethod::equal_frequency: return equal_frequency(values, 3);
        case DiscretizationMethod::kmeans: return kmeans_1d(values);
    }
    throw std::invalid_argument("unknown discretization method");
}

CategoryLabel apply_scheme(const DiscretizationScheme& scheme, double value) {
    if (scheme.method == DiscretizationMethod::sign) return value > 0.0 ? 1 : 0;
    return scheme.labels.at(bin_of(scheme.boundaries, value));
}

std::vector<CategoryLabel> apply_scheme(const DiscretizationScheme& scheme, std::span<const double> values) {
    std::vector<CategoryLabel> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(apply_scheme(scheme, v));
    return out;
}

nlohmann::ordered_json scheme_to_json(const DiscretizationScheme& scheme) {
    nlohmann::ordered_json j;
    j["method"] = std::string(to_string(scheme.method));
    j["boundaries"] = scheme.boundaries;
    j["centers"] = scheme.centers;
    j["labels"] = scheme.labels;
    return j;
}

DiscretizationScheme scheme_from_json(const nlohmann::json& j) {
    DiscretizationScheme s;
    s.method = parse_method(j.at("method").get<std::string>());
    s.boundaries = j.at("boundaries").get<std::vector<double>>();
    s.centers = j.value("centers", std::vector<double>{});
    s.labels = j.at("labels").get<std::vector<CategoryLabel>>();
    if (s.method != DiscretizationMethod::sign && s.labels.size() != s.boundaries.size() + 1) {
        throw std::invalid_argument("scheme: label count must be boundary count + 1");
    }
    if (!std::is_sorted(s.boundaries.begin(), s.boundaries.end())) {
        throw std::invalid_argument("scheme: boundaries not sorted");
    }
    return s;
}

}  // namespace emotrade
