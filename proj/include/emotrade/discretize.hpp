#pragma once

#include <cstdint>

#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace emotrade {

enum class DiscretizationMethod { sign, equal_frequency, kmeans };

std::string_view to_string(DiscretizationMethod m);
DiscretizationMethod parse_method(std::string_view name);

using CategoryLabel = int;

// Maps a real value to a category. Bins are delimited by `boundaries`
// (a value equal to a boundary falls in the upper bin) and bin i gets
// `labels[i]`; labels ascend with value.
struct DiscretizationScheme {
    DiscretizationMethod method = DiscretizationMethod::sign;
    std::vector<double> boundaries;
    std::vector<double> centers;  // kmeans only
    std::vector<CategoryLabel> labels;

    std::size_t category_count() const { return labels.size(); }
};

struct Discretized {
    std::vector<CategoryLabel> labels;
    DiscretizationScheme scheme;
};

// 1 for strictly positive values, 0 otherwise.
Discretized binarize_sign(std::span<const double> values);

// Rank-based bins of near-equal size; the remainder goes to the higher-value
// bins. Labels for k = 3 are -1/0/1 from the bottom.
Discretized equal_frequency(std::span<const double> values, int k = 3);

// Lloyd runs from the quantile start plus n_init - 1 seeded k-means++ starts;
// the run with the smallest within-cluster SS is kept.
struct KMeansOptions {
    int k = 3;
    int max_iter = 300;
    double tol = 1e-9;
    int n_init = 20;
    std::uint64_t seed = 0;
};

struct KMeansResult {
    Discretized discretized;
    std::vector<double> sse_history;  // within-cluster SS after each iteration of the kept run
    int iterations = 0;
    double sse = 0.0;
};

KMeansResult kmeans_1d_detailed(std::span<const double> values, const KMeansOptions& options = {});
Discretized kmeans_1d(std::span<const double> values, const KMeansOptions& options = {});

Discretized discretize(DiscretizationMethod method, std::span<const double> values);

CategoryLabel apply_scheme(const DiscretizationScheme& scheme, double value);
std::vector<CategoryLabel> apply_scheme(const DiscretizationScheme& scheme, std::span<const double> values);

nlohmann::ordered_json scheme_to_json(const DiscretizationScheme& scheme);
DiscretizationScheme scheme_from_json(const nlohmann::json& j);

}  // namespace emotrade
