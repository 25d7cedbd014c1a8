#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "emotrade/date.hpp"

namespace emotrade {

// Layout order for every per-emotion vector in the project.
enum class Emotion { anger = 0, disgust = 1, joy = 2, sadness = 3, fear = 4 };

inline constexpr std::size_t kEmotionCount = 5;
inline constexpr std::array<Emotion, kEmotionCount> kEmotions = {
    Emotion::anger, Emotion::disgust, Emotion::joy, Emotion::sadness, Emotion::fear};

std::string_view to_string(Emotion e);
Emotion parse_emotion(std::string_view name);
inline std::size_t index_of(Emotion e) { return static_cast<std::size_t>(e); }

struct Tweet {
    std::string id;
    std::string timestamp;  // YYYY-MM-DDTHH:MM:SS, local time
    std::string text;
    std::optional<Emotion> label;

    Date date() const { return Date::parse(timestamp); }
    // Throws std::invalid_argument if the invariants (non-empty id and text,
    // well-formed timestamp) are violated.
    void validate() const;
};

std::vector<std::string> default_stock_keywords();

class KeywordFilter {
public:
    KeywordFilter();  // default stock keywords
    explicit KeywordFilter(std::vector<std::string> keywords);

    bool matches(std::string_view text) const;
    const std::vector<std::string>& keywords() const { return keywords_; }

private:
    std::vector<std::string> keywords_;
};

std::vector<Tweet> filter_stock_tweets(std::span<const Tweet> tweets, const KeywordFilter& filter);

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
};

// Overlapping character bigrams inside runs of CJK ideographs (a lone ideograph
// is emitted as a unigram); whitespace-delimited words for everything else.
// CJK and full-width punctuation act as separators.
class CjkBigramTokenizer final : public Tokenizer {
public:
    std::vector<std::string> tokenize(std::string_view text) const override;
};

std::vector<std::string> tokenize(std::string_view text);

// Multinomial Naive Bayes with additive smoothing. Only classes seen in
// training are scored; per-class vectors below are parallel to `classes`.
struct NBModel {
    double smoothing = 1.0;
    std::vector<Emotion> classes;
    std::vector<double> class_log_prior;
    std::unordered_map<std::string, std::vector<double>> token_log_likelihood;
    // Contribution of a token outside the vocabulary; identical for every class.
    double oov_log_likelihood = 0.0;

    std::size_t vocabulary_size() const { return token_log_likelihood.size(); }
};

NBModel train_nb(std::span<const Tweet> corpus, double smoothing = 1.0,
                 const Tokenizer& tokenizer = CjkBigramTokenizer{});

// Unnormalised log joint per class (parallel to model.classes).
std::vector<double> class_log_scores(const NBModel& model, std::string_view text,
                                     const Tokenizer& tokenizer = CjkBigramTokenizer{});
std::vector<double> posterior(const NBModel& model, std::string_view text,
                              const Tokenizer& tokenizer = CjkBigramTokenizer{});
Emotion classify(const NBModel& model, const Tweet& tweet,
                 const Tokenizer& tokenizer = CjkBigramTokenizer{});
Emotion classify(const NBModel& model, std::string_view text,
                 const Tokenizer& tokenizer = CjkBigramTokenizer{});

// Returns a copy of `tweets` with every label replaced by the model's prediction.
// Work is split across `jobs` threads; output does not depend on `jobs`.
std::vector<Tweet> label_tweets(const NBModel& model, std::span<const Tweet> tweets, int jobs = 1,
                                const Tokenizer& tokenizer = CjkBigramTokenizer{});

// JSON-Lines tweets: {"id","timestamp","text","label"?}
std::vector<Tweet> read_tweets_jsonl(const std::filesystem::path& path);
void write_tweets_jsonl(const std::filesystem::path& path, std::span<const Tweet> tweets);
std::vector<std::string> read_keywords(const std::filesystem::path& path);

void save_nb_model(const std::filesystem::path& path, const NBModel& model);
NBModel load_nb_model(const std::filesystem::path& path);

}  // namespace emotrade
