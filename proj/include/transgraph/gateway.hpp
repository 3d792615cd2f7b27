#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "transgraph/errors.hpp"
#include "transgraph/text.hpp"

namespace transgraph {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Requests, responses and the cost ledger.
// ---------------------------------------------------------------------------

// Pipeline stage labels; every request is tagged with exactly one so the
// ledger can be reported per stage.
enum class StageTag { kChunk, kRelation, kTranslate, kJudge };

inline const char* to_string(StageTag tag) {
    switch (tag) {
        case StageTag::kChunk: return "chunk";
        case StageTag::kRelation: return "relation";
        case StageTag::kTranslate: return "translate";
        case StageTag::kJudge: return "judge";
    }
    return "?";
}

inline std::optional<StageTag> stage_tag_from(const std::string& s) {
    if (s == "chunk") return StageTag::kChunk;
    if (s == "relation") return StageTag::kRelation;
    if (s == "translate") return StageTag::kTranslate;
    if (s == "judge") return StageTag::kJudge;
    return std::nullopt;
}

struct DecodingParams {
    double temperature = 0.0;
    double top_p = 1.0;
    int max_output_tokens = 4096;

    void validate() const {
        if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
        if (top_p <= 0.0 || top_p > 1.0) throw ConfigError("top_p must be in (0,1]");
        if (max_output_tokens < 1) throw ConfigError("max_output_tokens must be positive");
    }
};

struct ChatRequest {
    std::string system_text;
    std::string user_text;
    // Unset means "use the gateway's configured decoding parameters".
    std::optional<DecodingParams> decoding;
    StageTag tag = StageTag::kTranslate;

    void validate() const {
        if (user_text.empty()) throw ConfigError("user_text must be non-empty");
        if (decoding) decoding->validate();
    }
};

struct ChatResponse {
    std::string text;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::string backend_id;
};

struct TagCounters {
    std::int64_t calls = 0;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

// Per-run accounting of calls and token counts, total and per stage.
struct CostLedger {
    std::int64_t calls = 0;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::map<std::string, TagCounters> per_tag;

    std::int64_t total_tokens() const { return input_tokens + output_tokens; }

    CostLedger& operator+=(const CostLedger& other) {
        calls += other.calls;
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        for (const auto& [tag, c] : other.per_tag) {
            auto& mine = per_tag[tag];
            mine.calls += c.calls;
            mine.input_tokens += c.input_tokens;
            mine.output_tokens += c.output_tokens;
        }
        return *this;
    }
};

inline json to_json(const CostLedger& ledger) {
    json per_tag = json::object();
    for (const auto& [tag, c] : ledger.per_tag) {
        per_tag[tag] = {{"calls", c.calls},
                        {"input_tokens", c.input_tokens},
                        {"output_tokens", c.output_tokens}};
    }
    return {{"calls", ledger.calls},
            {"input_tokens", ledger.input_tokens},
            {"output_tokens", ledger.output_tokens},
            {"total_tokens", ledger.total_tokens()},
            {"per_tag", per_tag}};
}

inline CostLedger cost_ledger_from_json(const json& j) {
    CostLedger ledger;
    ledger.calls = j.at("calls").get<std::int64_t>();
    ledger.input_tokens = j.at("input_tokens").get<std::int64_t>();
    ledger.output_tokens = j.at("output_tokens").get<std::int64_t>();
    if (j.contains("per_tag")) {
        for (const auto& [tag, c] : j.at("per_tag").items()) {
            ledger.per_tag[tag] = {c.at("calls").get<std::int64_t>(),
                                   c.at("input_tokens").get<std::int64_t>(),
                                   c.at("output_tokens").get<std::int64_t>()};
        }
    }
    return ledger;
}

// Thread-safe accumulator behind the CostLedger snapshot type. Stage tags
// index a fixed array of atomics, so concurrent callers never contend on a
// lock.
class LedgerAccumulator {
  public:
    void add(StageTag tag, std::int64_t in_tokens, std::int64_t out_tokens) {
        auto& slot = slots_[index(tag)];
        slot.calls.fetch_add(1, std::memory_order_relaxed);
        slot.input.fetch_add(in_tokens, std::memory_order_relaxed);
        slot.output.fetch_add(out_tokens, std::memory_order_relaxed);
    }

    CostLedger snapshot() const {
        CostLedger ledger;
        static constexpr std::array<StageTag, 4> kTags = {
            StageTag::kChunk, StageTag::kRelation, StageTag::kTranslate, StageTag::kJudge};
        for (const StageTag tag : kTags) {
            const auto& slot = slots_[index(tag)];
            TagCounters c{slot.calls.load(), slot.input.load(), slot.output.load()};
            if (c.calls == 0 && c.input_tokens == 0 && c.output_tokens == 0) continue;
            ledger.per_tag[to_string(tag)] = c;
            ledger.calls += c.calls;
            ledger.input_tokens += c.input_tokens;
            ledger.output_tokens += c.output_tokens;
        }
        return ledger;
    }

    void reset() {
        for (auto& slot : slots_) {
            slot.calls = 0;
            slot.input = 0;
            slot.output = 0;
        }
    }

  private:
    struct Slot {
        std::atomic<std::int64_t> calls{0};
        std::atomic<std::int64_t> input{0};
        std::atomic<std::int64_t> output{0};
    };
    static std::size_t index(StageTag tag) { return static_cast<std::size_t>(tag); }
    std::array<Slot, 4> slots_;
};

// ---------------------------------------------------------------------------
// Backends.
// ---------------------------------------------------------------------------

class Backend {
  public:
    virtual ~Backend() = default;
    // Returns the backend text verbatim. May throw TransportError for
    // transient failures; an empty response text signals a refusal.
    virtual ChatResponse send(const ChatRequest& request) = 0;
    virtual std::string id() const = 0;
};

// Scripted backend driven by a fixture file: one JSON record per line.
//
//   {"prompt": "<exact user text>", "response": "...", "input_tokens": 3, "output_tokens": 2}
//   {"contains": "<substring of user text>", "response": "..."}
//   {"tag": "translate", "contains": "<substring>", "response": "..."}
//   {"tag": "relation", "ordinal": 0, "response": "..."}
//   {"tag": "translate", "response": "..."}           <- tag default
//
// Lookup order: exact prompt match, first matching "contains" entry in file
// order (restricted to its tag when one is given), then the (tag, ordinal)
// entry where the ordinal counts requests of that tag, then the tag
// default. Token counts default to tokenizer estimates when the record
// omits them.
class MockBackend : public Backend {
  public:
    MockBackend() = default;

    static std::shared_ptr<MockBackend> from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open mock fixture: " + path);
        auto mock = std::make_shared<MockBackend>();
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string stripped = trim(line);
            if (stripped.empty() || stripped[0] == '#') continue;
            json record;
            try {
                record = json::parse(stripped);
            } catch (const json::exception& e) {
                throw ConfigError("mock fixture line " + std::to_string(line_no) + ": " + e.what());
            }
            mock->add(record);
        }
        return mock;
    }

    void add(const json& record) {
        Entry e;
        e.response = record.value("response", std::string{});
        if (record.contains("input_tokens")) e.input_tokens = record.at("input_tokens").get<std::int64_t>();
        if (record.contains("output_tokens")) e.output_tokens = record.at("output_tokens").get<std::int64_t>();
        if (record.contains("prompt")) {
            exact_[record.at("prompt").get<std::string>()] = e;
        } else if (record.contains("contains")) {
            ContainsEntry ce;
            ce.needle = record.at("contains").get<std::string>();
            ce.entry = e;
            if (record.contains("tag")) {
                const auto tag = stage_tag_from(record.at("tag").get<std::string>());
                if (!tag) throw ConfigError("mock fixture: unknown tag " + record.at("tag").dump());
                ce.tag = *tag;
            }
            contains_.push_back(std::move(ce));
        } else if (record.contains("tag")) {
            const auto tag = stage_tag_from(record.at("tag").get<std::string>());
            if (!tag) throw ConfigError("mock fixture: unknown tag " + record.at("tag").dump());
            if (record.contains("ordinal")) {
                ordinal_[{*tag, record.at("ordinal").get<std::int64_t>()}] = e;
            } else {
                tag_default_[*tag] = e;
            }
        } else {
            throw ConfigError("mock fixture record needs prompt, contains or tag");
        }
    }

    // Convenience for tests.
    void add_exact(const std::string& prompt, const std::string& response,
                   std::optional<std::int64_t> in_tokens = std::nullopt,
                   std::optional<std::int64_t> out_tokens = std::nullopt) {
        exact_[prompt] = Entry{response, in_tokens, out_tokens};
    }
    void add_ordinal(StageTag tag, std::int64_t ordinal, const std::string& response,
                     std::optional<std::int64_t> in_tokens = std::nullopt,
                     std::optional<std::int64_t> out_tokens = std::nullopt) {
        ordinal_[{tag, ordinal}] = Entry{response, in_tokens, out_tokens};
    }
    void add_contains(const std::string& needle, const std::string& response,
                      std::optional<StageTag> tag = std::nullopt) {
        contains_.push_back({needle, tag, Entry{response, std::nullopt, std::nullopt}});
    }
    void add_tag_default(StageTag tag, const std::string& response) {
        tag_default_[tag] = Entry{response, std::nullopt, std::nullopt};
    }

    ChatResponse send(const ChatRequest& request) override {
        std::int64_t ordinal = 0;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            ordinal = next_ordinal_[static_cast<std::size_t>(request.tag)]++;
        }
        const Entry* entry = nullptr;
        if (const auto it = exact_.find(request.user_text); it != exact_.end()) {
            entry = &it->second;
        }
        if (!entry) {
            for (const ContainsEntry& ce : contains_) {
                if (ce.tag && *ce.tag != request.tag) continue;
                if (request.user_text.find(ce.needle) != std::string::npos) {
                    entry = &ce.entry;
                    break;
                }
            }
        }
        if (!entry) {
            if (const auto it = ordinal_.find({request.tag, ordinal}); it != ordinal_.end()) {
                entry = &it->second;
            }
        }
        if (!entry) {
            if (const auto it = tag_default_.find(request.tag); it != tag_default_.end()) {
                entry = &it->second;
            }
        }
        ChatResponse response;
        response.backend_id = id();
        if (!entry) return response;  // empty text -> refusal path
        response.text = entry->response;
        response.input_tokens = entry->input_tokens
            ? *entry->input_tokens
            : static_cast<std::int64_t>(count_tokens(request.system_text) + count_tokens(request.user_text));
        response.output_tokens = entry->output_tokens
            ? *entry->output_tokens
            : static_cast<std::int64_t>(count_tokens(entry->response));
        return response;
    }

    std::string id() const override { return "mock"; }

  private:
    struct Entry {
        std::string response;
        std::optional<std::int64_t> input_tokens;
        std::optional<std::int64_t> output_tokens;
    };
    struct ContainsEntry {
        std::string needle;
        std::optional<StageTag> tag;
        Entry entry;
    };
    std::map<std::string, Entry> exact_;
    std::vector<ContainsEntry> contains_;
    std::map<std::pair<StageTag, std::int64_t>, Entry> ordinal_;
    std::map<StageTag, Entry> tag_default_;

    std::mutex mutex_;
    std::array<std::int64_t, 4> next_ordinal_{0, 0, 0, 0};
};

// ---------------------------------------------------------------------------
// Structured-output shapes.
// ---------------------------------------------------------------------------

// Minimal schema: required keys with value kinds, one level of array
// element nesting. Enough for the chunk-proposal and relation payloads.
struct StructuredShape {
    enum class Kind { kString, kInteger, kNumber, kBoolean, kArray, kObject, kAny };

    struct Field {
        std::string key;
        Kind kind = Kind::kAny;
        bool required = true;
        std::shared_ptr<StructuredShape> element;  // for kArray of objects
    };

    std::vector<Field> fields;

    static bool kind_matches(Kind kind, const json& v) {
        switch (kind) {
            case Kind::kString: return v.is_string();
            case Kind::kInteger: return v.is_number_integer();
            case Kind::kNumber: return v.is_number();
            case Kind::kBoolean: return v.is_boolean();
            case Kind::kArray: return v.is_array();
            case Kind::kObject: return v.is_object();
            case Kind::kAny: return true;
        }
        return false;
    }

    bool validate(const json& value, std::string& why) const {
        if (!value.is_object()) {
            why = "payload is not a JSON object";
            return false;
        }
        for (const auto& field : fields) {
            if (!value.contains(field.key)) {
                if (!field.required) continue;
                why = "missing key '" + field.key + "'";
                return false;
            }
            const json& v = value.at(field.key);
            if (!kind_matches(field.kind, v)) {
                why = "key '" + field.key + "' has the wrong type";
                return false;
            }
            if (field.kind == Kind::kArray && field.element) {
                for (const json& item : v) {
                    if (!field.element->validate(item, why)) {
                        why = "element of '" + field.key + "': " + why;
                        return false;
                    }
                }
            }
        }
        return true;
    }
};

// Extracts the first balanced brace-delimited block, skipping over JSON
// string literals. LLMs commonly wrap payloads in prose or code fences.
inline std::optional<std::string> extract_brace_block(std::string_view text) {
    const std::size_t start = text.find('{');
    if (start == std::string_view::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
        } else if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return std::string(text.substr(start, i - start + 1));
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Gateway.
// ---------------------------------------------------------------------------

struct RetryPolicy {
    int transport_retries = 3;   // retries after the first attempt
    int structure_retries = 2;   // repair retries for complete_structured
    int backoff_base_ms = 250;
    int backoff_max_ms = 8000;
    unsigned jitter_seed = 0x5eed;
};

// Provider-agnostic chat client. Every attempt that reaches the backend is
// charged to the ledger under the request's stage tag, retries included.
class Gateway {
  public:
    Gateway(std::shared_ptr<Backend> backend, RetryPolicy policy = {},
            TokenizerFn tokenizer = &tokenize, DecodingParams decoding = {})
        : backend_(std::move(backend)), policy_(policy), tokenizer_(tokenizer),
          decoding_(decoding), rng_(policy.jitter_seed) {
        if (!backend_) throw ConfigError("gateway requires a backend");
        if (!tokenizer_) throw ConfigError("gateway requires a tokenizer");
        decoding_.validate();
    }

    ChatResponse complete(const ChatRequest& original) {
        original.validate();
        ChatRequest request = original;
        if (!request.decoding) request.decoding = decoding_;
        std::string last_error;
        for (int attempt = 0; attempt <= policy_.transport_retries; ++attempt) {
            if (attempt > 0) backoff(attempt);
            ChatResponse response;
            try {
                response = backend_->send(request);
            } catch (const TransportError& e) {
                ledger_.add(request.tag, 0, 0);
                last_error = e.what();
                continue;
            }
            if (response.input_tokens <= 0) {
                response.input_tokens = static_cast<std::int64_t>(
                    (*tokenizer_)(request.system_text).size() + (*tokenizer_)(request.user_text).size());
            }
            if (response.output_tokens <= 0 && !response.text.empty()) {
                response.output_tokens = static_cast<std::int64_t>((*tokenizer_)(response.text).size());
            }
            ledger_.add(request.tag, response.input_tokens, response.output_tokens);
            if (response.text.empty()) {
                last_error = "empty response";
                continue;
            }
            return response;
        }
        if (last_error == "empty response") {
            throw BackendRefusal("backend returned no text for tag '" +
                                 std::string(to_string(request.tag)) + "' after retries");
        }
        throw TransportError("transport failed after retries: " + last_error);
    }

    // Returns the first response that parses and validates against `shape`.
    // Each repair retry re-issues the request with an appended corrective
    // instruction; every attempt is ledger-accounted.
    json complete_structured(const ChatRequest& request, const StructuredShape& shape,
                             int max_retries = -1) {
        if (max_retries < 0) max_retries = policy_.structure_retries;
        ChatRequest attempt_request = request;
        std::string last_raw;
        std::string why;
        for (int attempt = 0; attempt <= max_retries; ++attempt) {
            const ChatResponse response = complete(attempt_request);
            last_raw = response.text;
            const auto block = extract_brace_block(response.text);
            if (block) {
                json parsed = json::parse(*block, nullptr, false);
                if (!parsed.is_discarded() && shape.validate(parsed, why)) {
                    return parsed;
                }
                if (parsed.is_discarded()) why = "invalid JSON";
            } else {
                why = "no brace-delimited block found";
            }
            attempt_request.user_text = request.user_text +
                "\n\nYour previous reply could not be parsed (" + why +
                "). Return ONLY the required JSON object, with no extra text.";
        }
        throw StructureError("structured output failed after " +
                             std::to_string(max_retries + 1) + " attempts: " + why,
                             last_raw);
    }

    std::size_t estimate_tokens(std::string_view text) const {
        return (*tokenizer_)(text).size();
    }

    CostLedger ledger() const { return ledger_.snapshot(); }
    void reset_ledger() { ledger_.reset(); }
    Backend& backend() { return *backend_; }
    const RetryPolicy& policy() const { return policy_; }
    const DecodingParams& decoding() const { return decoding_; }

  private:
    void backoff(int attempt) {
        if (policy_.backoff_base_ms <= 0) return;
        std::int64_t delay = static_cast<std::int64_t>(policy_.backoff_base_ms) << (attempt - 1);
        if (delay > policy_.backoff_max_ms) delay = policy_.backoff_max_ms;
        std::int64_t jitter = 0;
        {
            std::lock_guard<std::mutex> lock(rng_mutex_);
            jitter = std::uniform_int_distribution<std::int64_t>(0, delay / 2)(rng_);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(delay + jitter));
    }

    std::shared_ptr<Backend> backend_;
    RetryPolicy policy_;
    TokenizerFn tokenizer_;
    DecodingParams decoding_;
    LedgerAccumulator ledger_;
    std::mt19937 rng_;
    std::mutex rng_mutex_;
};

}  // namespace transgraph
