#include "emotrade/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "text_io.hpp"

namespace emotrade {

namespace {

constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {"anger", "disgust", "joy",
                                                                       "sadness", "fear"};

struct CodePoint {
    char32_t value;
    std::size_t length;
};

// Decodes one UTF-8 sequence; malformed bytes come back as single-byte U+FFFD.
CodePoint decode_utf8(std::string_view s, std::size_t pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    auto cont = [&](std::size_t i) -> int {
        if (pos + i >= s.size()) return -1;
        const auto b = static_cast<unsigned char>(s[pos + i]);
        return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
    };
    if (b0 < 0x80) return {b0, 1};
    if ((b0 & 0xE0) == 0xC0) {
        const int c1 = cont(1);
        if (c1 >= 0) return {static_cast<char32_t>(((b0 & 0x1F) << 6) | c1), 2};
    } else if ((b0 & 0xF0) == 0xE0) {
        const int c1 = cont(1), c2 = cont(2);
        if (c1 >= 0 && c2 >= 0) return {static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2), 3};
    } else if ((b0 & 0xF8) == 0xF0) {
        const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
        if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
            return {static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3), 4};
        }
    }
    return {0xFFFD, 1};
}

bool is_cjk_ideograph(char32_t c) {
    return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
           (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x20000 && c <= 0x2FA1F);
}

bool is_cjk_separator(char32_t c) {
    return (c >= 0x3000 && c <= 0x303F) || (c >= 0xFF00 && c <= 0xFFEF) || c == 0x2026 ||
           (c >= 0x2018 && c <= 0x201F);
}

bool is_space(char32_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

std::string_view to_string(Emotion e) { return kEmotionNames[index_of(e)]; }

Emotion parse_emotion(std::string_view name) {
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
        if (kEmotionNames[i] == name) return kEmotions[i];
    }
    throw std::invalid_argument(fmt::format("unknown emotion '{}'", name));
}

void Tweet::validate() const {
    if (id.empty()) throw std::invalid_argument("tweet id is empty");
    if (detail::trim(text).empty()) throw std::invalid_argument(fmt::format("tweet '{}' has empty text", id));
    if (timestamp.size() != 19 || timestamp[10] != 'T' || timestamp[13] != ':' || timestamp[16] != ':') {
        throw std::invalid_argument(fmt::format("tweet '{}' has malformed timestamp '{}'", id, timestamp));
    }
    (void)date();
}

std::vector<std::string> default_stock_keywords() {
    // stock, stock market, securities, SZSE composite, SSE composite, component index
    return {"股票", "股市", "证券", "深证综指", "上证综指", "成分指数"};
}

KeywordFilter::KeywordFilter() : KeywordFilter(default_stock_keywords()) {}

KeywordFilter::KeywordFilter(std::vector<std::string> keywords) : keywords_(std::move(keywords)) {
    if (keywords_.empty()) throw std::invalid_argument("keyword list is empty");
    for (const auto& k : keywords_) {
        if (k.empty()) throw std::invalid_argument("keyword list contains an empty keyword");
    }
}

bool KeywordFilter::matches(std::string_view text) const {
    return std::any_of(keywords_.begin(), keywords_.end(),
                       [&](const std::string& k) { return text.find(k) != std::string_view::npos; });
}

std::vector<Tweet> filter_stock_tweets(std::span<const Tweet> tweets, const KeywordFilter& filter) {
    std::vector<Tweet> kept;
    for (const auto& t : tweets) {
        if (filter.matches(t.text)) kept.push_back(t);
    }
    return kept;
}

std::vector<std::string> CjkBigramTokenizer::tokenize(std::string_view text) const {
    std::vector<std::string> tokens;
    std::vector<std::string_view> cjk_run;  // one entry per ideograph
    std::string word;

    auto flush_run = [&] {
        if (cjk_run.size() == 1) {
            tokens.emplace_back(cjk_run[0]);
        } else {
            for (std::size_t i = 0; i + 1 < cjk_run.size(); ++i) {
                std::string bigram(cjk_run[i]);
                bigram.append(cjk_run[i + 1]);
                tokens.push_back(std::move(bigram));
            }
        }
        cjk_run.clear();
    };
    auto flush_word = [&] {
        if (!word.empty()) tokens.push_back(std::move(word));
        word.clear();
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto cp = decode_utf8(text, pos);
        const auto bytes = text.substr(pos, cp.length);
        if (is_cjk_ideograph(cp.value)) {
            flush_word();
            cjk_run.push_back(bytes);
        } else if (is_space(cp.value) || is_cjk_separator(cp.value)) {
            flush_run();
            flush_word();
        } else {
            flush_run();
            word.append(bytes);
        }
        pos += cp.length;
    }
    flush_run();
    flush_word();
    return tokens;
}

std::vector<std::string> tokenize(std::string_view text) { return CjkBigramTokenizer{}.tokenize(text); }

NBModel train_nb(std::span<const Tweet> corpus, double smoothing, const Tokenizer& tokenizer) {
    if (corpus.empty()) throw std::invalid_argument("empty training corpus");
    if (!(smoothing > 0.0)) throw std::invalid_argument("smoothing must be positive");

    std::array<std::size_t, kEmotionCount> doc_count{};
    std::array<double, kEmotionCount> token_total{};
    std::map<std::string, std::array<double, kEmotionCount>> counts;
    for (const auto& tweet : corpus) {
        if (!tweet.label) throw std::invalid_argument(fmt::format("unlabeled tweet '{}'", tweet.id));
        const auto c = index_of(*tweet.label);
        ++doc_count[c];
        for (auto& tok : tokenizer.tokenize(tweet.text)) {
            counts[std::move(tok)][c] += 1.0;
            token_total[c] += 1.0;
        }
    }

    NBModel model;
    model.smoothing = smoothing;
    const double n_docs = static_cast<double>(corpus.size());
    std::vector<std::size_t> present;
    for (std::size_t c = 0; c < kEmotionCount; ++c) {
        if (doc_count[c] == 0) continue;
        present.push_back(c);
        model.classes.push_back(kEmotions[c]);
        model.class_log_prior.push_back(std::log(static_cast<double>(doc_count[c]) / n_docs));
    }

    const double vocab = static_cast<double>(counts.size());
    model.token_log_likelihood.reserve(counts.size());
    for (const auto& [token, per_class] : counts) {
        std::vector<double> ll(present.size());
        for (std::size_t k = 0; k < present.size(); ++k) {
            const auto c = present[k];
            ll[k] = std::log((per_class[c] + smoothing) / (token_total[c] + smoothing * vocab));
        }
        model.token_log_likelihood.emplace(token, std::move(ll));
    }
    model.oov_log_likelihood = -std::log(vocab + 1.0);
    return model;
}

std::vector<double> class_log_scores(const NBModel& model, std::string_view text, const Tokenizer& tokenizer) {
    std::vector<double> scores = model.class_log_prior;
    for (const auto& tok : tokenizer.tokenize(text)) {
        const auto it = model.token_log_likelihood.find(tok);
        for (std::size_t k = 0; k < scores.size(); ++k) {
            scores[k] += it == model.token_log_likelihood.end() ? model.oov_log_likelihood : it->second[k];
        }
    }
    return scores;
}

std::vector<double> posterior(const NBModel& model, std::string_view text, const Tokenizer& tokenizer) {
    auto scores = class_log_scores(model, text, tokenizer);
    const double mx = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (auto& s : scores) {
        s = std::exp(s - mx);
        total += s;
    }
    for (auto& s : scores) s /= total;
    return scores;
}

Emotion classify(const NBModel& model, std::string_view text, const Tokenizer& tokenizer) {
    const auto scores = class_log_scores(model, text, tokenizer);
    // classes are in label order, so the first maximum wins ties
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k) {
        if (scores[k] > scores[best]) best = k;
    }
    return model.classes[best];
}

Emotion classify(const NBModel& model, const Tweet& tweet, const Tokenizer& tokenizer) {
    return classify(model, std::string_view{tweet.text}, tokenizer);
}

std::vector<Tweet> label_tweets(const NBModel& model, std::span<const Tweet> tweets, int jobs,
                                const Tokenizer& tokenizer) {
    std::vector<Tweet> out(tweets.begin(), tweets.end());
    const std::size_t workers = static_cast<std::size_t>(std::max(1, jobs));
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i].label = classify(model, out[i], tokenizer);
    };
    if (workers == 1 || out.size() < 2 * workers) {
        work(0, out.size());
        return out;
    }
    {
        std::vector<std::jthread> threads;
        const std::size_t chunk = (out.size() + workers - 1) / workers;
        for (std::size_t b = 0; b < out.size(); b += chunk) {
            threads.emplace_back(work, b, std::min(out.size(), b + chunk));
        }
    }
    return out;
}

std::vector<Tweet> read_tweets_jsonl(const std::filesystem::path& path) {
    std::vector<Tweet> tweets;
    const auto lines = detail::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(lines[i]);
            Tweet t;
            t.id = j.at("id").get<std::string>();
            t.timestamp = j.at("timestamp").get<std::string>();
            t.text = j.at("text").get<std::string>();
            if (j.contains("label") && !j.at("label").is_null()) {
                t.label = parse_emotion(j.at("label").get<std::string>());
            }
            t.validate();
            tweets.push_back(std::move(t));
        } catch (const std::exception& e) {
            throw std::runtime_error(fmt::format("{}:{}: {}", path.string(), i + 1, e.what()));
        }
    }
    return tweets;
}

void write_tweets_jsonl(const std::filesystem::path& path, std::span<const Tweet> tweets) {
    std::string out;
    for (const auto& t : tweets) {
        nlohmann::ordered_json j;
        j["id"] = t.id;
        j["timestamp"] = t.timestamp;
        j["text"] = t.text;
        if (t.label) j["label"] = std::string(to_string(*t.label));
        out += j.dump();
        out += '\n';
    }
    detail::write_text(path, out);
}

std::vector<std::string> read_keywords(const std::filesystem::path& path) {
    std::vector<std::string> keywords;
    for (const auto& line : detail::read_lines(path)) {
        const auto k = detail::trim(line);
        if (!k.empty()) keywords.emplace_back(k);
    }
    return keywords;
}

void save_nb_model(const std::filesystem::path& path, const NBModel& model) {
    nlohmann::ordered_json j;
    j["smoothing"] = model.smoothing;
    std::vector<std::string> classes;
    for (auto c : model.classes) classes.emplace_back(to_string(c));
    j["classes"] = classes;
    j["class_log_prior"] = model.class_log_prior;
    j["oov_log_likelihood"] = model.oov_log_likelihood;
    // sorted for stable output
    std::map<std::string, std::vector<double>> sorted(model.token_log_likelihood.begin(),
                                                      model.token_log_likelihood.end());
    nlohmann::ordered_json tokens = nlohmann::ordered_json::object();
    for (const auto& [tok, ll] : sorted) tokens[tok] = ll;
    j["token_log_likelihood"] = std::move(tokens);
    detail::write_text(path, j.dump(1) + "\n");
}

NBModel load_nb_model(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    std::string content;
    for (const auto& l : lines) content += l + "\n";
    const auto j = nlohmann::json::parse(content);
    NBModel model;
    model.smoothing = j.at("smoothing").get<double>();
    for (const auto& c : j.at("classes")) model.classes.push_back(parse_emotion(c.get<std::string>()));
    model.class_log_prior = j.at("class_log_prior").get<std::vector<double>>();
    model.oov_log_likelihood = j.at("oov_log_likelihood").get<double>();
    for (const auto& [tok, ll] : j.at("token_log_likelihood").items()) {
        model.token_log_likelihood.emplace(tok, ll.get<std::vector<double>>());
    }
    if (model.classes.empty() || model.class_log_prior.size() != model.classes.size()) {
        throw std::runtime_error(fmt::format("'{}' is not a valid naive Bayes model", path.string()));
    }
    return model;
}

}  // namespace emotrade
