#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "transgraph/errors.hpp"
#include "transgraph/gateway.hpp"
#include "transgraph/text.hpp"

namespace transgraph {

enum class CohesionDimension { kCoreference, kConjunction };

inline const char* to_string(CohesionDimension d) {
    return d == CohesionDimension::kCoreference ? "coreference" : "conjunction";
}

inline std::optional<CohesionDimension> cohesion_dimension_from(const std::string& s) {
    if (s == "coreference") return CohesionDimension::kCoreference;
    if (s == "conjunction") return CohesionDimension::kConjunction;
    return std::nullopt;
}

enum class SpanKind { kPronoun, kConjunction };

struct EvalAttrs {
    std::string target_translation;  // words, "omitted" (pronouns only) or "missing"
    bool is_correct = false;
    std::string error_type;  // "null" when correct
};

// One inline annotation: `[surface]<key="value" ...>`. Attribute order is
// preserved so rendering reproduces the input byte for byte.
struct AnnotationSpan {
    std::string surface;
    SpanKind kind = SpanKind::kPronoun;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::optional<EvalAttrs> eval;
    std::size_t offset = 0;  // position of `surface` in the stripped text

    std::optional<std::string> attr(std::string_view key) const {
        for (const auto& [k, v] : attrs) {
            if (k == key) return v;
        }
        return std::nullopt;
    }
};

struct AnnotatedText {
    std::vector<AnnotationSpan> spans;
    std::string stripped;  // the text with all annotations removed
};

struct CohesionScore {
    CohesionDimension dimension = CohesionDimension::kCoreference;
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;  // 100 * correct / total
    std::map<std::string, std::size_t> error_breakdown;
};

// ---------------------------------------------------------------------------
// Annotation grammar.
// ---------------------------------------------------------------------------

namespace detail {

inline const std::vector<std::string>& pronoun_types() {
    static const std::vector<std::string> types = {"personal", "possessive", "demonstrative",
                                                   "reflexive", "relative"};
    return types;
}

inline const std::vector<std::string>& conjunction_types() {
    static const std::vector<std::string> types = {"coordinating", "subordinating",
                                                   "conjunctive_adverb", "transitional_phrase",
                                                   "correlative"};
    return types;
}

inline bool value_in(const std::string& value, const std::vector<std::string>& allowed) {
    for (const std::string& a : allowed) {
        if (value == a) return true;
    }
    return false;
}

// Parses the key="value" list between '<' and '>'. Values are
// quote-delimited and may contain spaces.
inline std::vector<std::pair<std::string, std::string>> parse_attr_list(std::string_view body,
                                                                        std::size_t line_hint) {
    std::vector<std::pair<std::string, std::string>> attrs;
    std::size_t i = 0;
    const auto fail = [&](const std::string& why) -> void {
        throw MalformedSpan("annotation near character " + std::to_string(line_hint) + ": " + why);
    };
    while (i < body.size()) {
        while (i < body.size() && (body[i] == ' ' || body[i] == '\t')) ++i;
        if (i >= body.size()) break;
        std::size_t key_start = i;
        while (i < body.size() && (std::isalnum(static_cast<unsigned char>(body[i])) || body[i] == '_')) ++i;
        if (i == key_start) fail("expected attribute key");
        const std::string key(body.substr(key_start, i - key_start));
        if (i >= body.size() || body[i] != '=') fail("expected '=' after key '" + key + "'");
        ++i;
        if (i >= body.size() || body[i] != '"') fail("expected '\"' after '=' for key '" + key + "'");
        ++i;
        const std::size_t value_start = i;
        while (i < body.size() && body[i] != '"') ++i;
        if (i >= body.size()) fail("unterminated value for key '" + key + "'");
        attrs.emplace_back(key, std::string(body.substr(value_start, i - value_start)));
        ++i;
    }
    return attrs;
}

inline void validate_span(AnnotationSpan& span, CohesionDimension dimension,
                          bool expect_eval_attrs) {
    span.kind = dimension == CohesionDimension::kCoreference ? SpanKind::kPronoun
                                                             : SpanKind::kConjunction;
    const bool pronoun = span.kind == SpanKind::kPronoun;
    std::map<std::string, std::string> seen;
    for (const auto& [key, value] : span.attrs) {
        if (seen.count(key)) {
            throw InvalidAttribute("duplicate attribute '" + key + "' on span [" + span.surface + "]");
        }
        seen[key] = value;
        const bool base_key = key == "type" || (pronoun ? key == "referent" : key == "relationship");
        const bool eval_key =
            key == "target_translation" || key == "is_correct" || key == "error_type";
        if (!base_key && !eval_key) {
            throw InvalidAttribute("unknown attribute '" + key + "' on span [" + span.surface + "]");
        }
        if (eval_key && !expect_eval_attrs) {
            throw InvalidAttribute("unexpected evaluation attribute '" + key + "' on span [" +
                                   span.surface + "]");
        }
    }
    const auto type = span.attr("type");
    if (!type) throw InvalidAttribute("span [" + span.surface + "] lacks a type attribute");
    if (!value_in(*type, pronoun ? pronoun_types() : conjunction_types())) {
        throw InvalidAttribute("span [" + span.surface + "] has disallowed type '" + *type + "'");
    }
    if (!pronoun && !span.attr("relationship")) {
        throw InvalidAttribute("conjunction span [" + span.surface + "] lacks a relationship");
    }
    if (!expect_eval_attrs) return;

    EvalAttrs eval;
    const auto target = span.attr("target_translation");
    const auto is_correct = span.attr("is_correct");
    const auto error_type = span.attr("error_type");
    if (!target || !is_correct || !error_type) {
        throw InvalidAttribute("span [" + span.surface + "] lacks evaluation attributes");
    }
    if (target->empty()) {
        throw InvalidAttribute("span [" + span.surface + "] has an empty target_translation");
    }
    if (*is_correct != "true" && *is_correct != "false") {
        throw InvalidAttribute("span [" + span.surface + "] has non-boolean is_correct");
    }
    eval.target_translation = *target;
    eval.is_correct = *is_correct == "true";
    eval.error_type = *error_type;
    if (*target == "omitted") {
        if (!pronoun) {
            throw InvalidAttribute("conjunction span [" + span.surface +
                                   "] may not be 'omitted'");
        }
        if (!eval.is_correct) {
            throw InvalidAttribute("span [" + span.surface +
                                   "]: an omitted rendering must be correct");
        }
    }
    if (*target == "missing" && eval.is_correct) {
        throw InvalidAttribute("span [" + span.surface +
                               "]: a missing rendering cannot be correct");
    }
    if (eval.is_correct && eval.error_type != "null") {
        throw InvalidAttribute("span [" + span.surface +
                               "]: correct spans must carry error_type=\"null\"");
    }
    if (!eval.is_correct && eval.error_type == "null") {
        throw InvalidAttribute("span [" + span.surface +
                               "]: incorrect spans need a concrete error_type");
    }
    span.eval = eval;
}

}  // namespace detail

// Scans `[surface]<attrs>` spans and returns them in document order along
// with the annotation-stripped plain text. A '[' that is not followed by
// the `]<...>` structure is treated as literal text; unbalanced syntax
// inside a span raises MalformedSpan.
inline AnnotatedText parse_annotations(std::string_view text, CohesionDimension dimension,
                                       bool expect_eval_attrs = false) {
    AnnotatedText result;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '[') {
            result.stripped.push_back(text[i]);
            ++i;
            continue;
        }
        const std::size_t close = text.find_first_of("[]", i + 1);
        if (close == std::string_view::npos || text[close] == '[' || close + 1 >= text.size() ||
            text[close + 1] != '<') {
            if (close != std::string_view::npos && text[close] == '[') {
                throw MalformedSpan("nested '[' inside span near character " + std::to_string(i));
            }
            result.stripped.push_back(text[i]);  // literal bracket
            ++i;
            continue;
        }
        const std::size_t attrs_end = text.find('>', close + 2);
        if (attrs_end == std::string_view::npos) {
            throw MalformedSpan("unterminated attribute block near character " +
                                std::to_string(close));
        }
        AnnotationSpan span;
        span.surface = std::string(text.substr(i + 1, close - i - 1));
        if (span.surface.empty()) {
            throw MalformedSpan("empty span surface near character " + std::to_string(i));
        }
        span.attrs = detail::parse_attr_list(text.substr(close + 2, attrs_end - close - 2), i);
        if (span.attrs.empty()) {
            throw MalformedSpan("span [" + span.surface + "] has no attributes");
        }
        detail::validate_span(span, dimension, expect_eval_attrs);
        span.offset = result.stripped.size();
        result.stripped += span.surface;
        result.spans.push_back(std::move(span));
        i = attrs_end + 1;
    }
    return result;
}

// Inverse of parse_annotations for texts that use single-space attribute
// separation (as the annotation format specifies).
inline std::string render_annotations(const AnnotatedText& annotated) {
    std::string out;
    std::size_t pos = 0;
    for (const AnnotationSpan& span : annotated.spans) {
        out += annotated.stripped.substr(pos, span.offset - pos);
        out += "[" + span.surface + "]<";
        for (std::size_t a = 0; a < span.attrs.size(); ++a) {
            if (a > 0) out += " ";
            out += span.attrs[a].first + "=\"" + span.attrs[a].second + "\"";
        }
        out += ">";
        pos = span.offset + span.surface.size();
    }
    out += annotated.stripped.substr(pos);
    return out;
}

// Accuracy over evaluated spans plus a tally of error types.
inline CohesionScore score_cohesion(const std::vector<AnnotationSpan>& spans) {
    if (spans.empty()) throw EmptySpanList("no annotated spans to score");
    CohesionScore score;
    score.dimension = spans.front().kind == SpanKind::kPronoun ? CohesionDimension::kCoreference
                                                               : CohesionDimension::kConjunction;
    for (const AnnotationSpan& span : spans) {
        if (!span.eval) {
            throw MissingEvalAttrs("span [" + span.surface + "] has no evaluation attributes");
        }
        ++score.total;
        if (span.eval->is_correct) {
            ++score.correct;
        } else {
            ++score.error_breakdown[span.eval->error_type];
        }
    }
    score.accuracy = 100.0 * static_cast<double>(score.correct) /
                     static_cast<double>(score.total);
    return score;
}

// ---------------------------------------------------------------------------
// Judge prompts. The annotation and evaluation instructions below follow
// the two-pass protocol: annotate pronouns/conjunctions in the source,
// then grade each annotated item against the translation inline.
// ---------------------------------------------------------------------------

namespace prompts_cohesion {

inline constexpr std::string_view kPronounAnnotationTemplate =
R"(# Source Pronoun Annotation

You are an expert linguistic annotator working on translation cohesion analysis.

## Task Definition
**Pronouns** are words that refer to entities mentioned elsewhere in the text or understood from context, including:
- **Personal pronouns**: I, you, he, she, it, we, they, me, him, her, us, them
- **Possessive pronouns**: my, your, his, her, its, our, their, mine, yours, hers, ours, theirs
- **Demonstrative pronouns**: this, that, these, those (when used as pronouns, not determiners)
- **Reflexive pronouns**: myself, yourself, himself, herself, itself, ourselves, yourselves, themselves
- **Relative pronouns**: who, whom, whose, which, that (when introducing relative clauses)

## Annotation Instructions

### Step 1: Read the entire document
Understand the content, identify all entities, and track referential relationships throughout the text.

### Step 2: Identify ALL pronouns
Scan systematically through the document for every pronoun that refers to a specific entity or concept.

### Step 3: Determine pronoun type and referent
- Classify the grammatical type of each pronoun
- Identify what specific entity or concept each pronoun refers to

### Step 4: Apply inline annotation
First copy each pronoun exactly as it appears in the original text, then add the attributes after it.

## Annotation Format
Use this exact format:
```
[pronoun]<type="[pronoun_type]" referent="[what_it_refers_to]">
```

**Attribute specifications:**
- `type`: One of: `personal`, `possessive`, `demonstrative`, `reflexive`, `relative`
- `referent`: The specific noun phrase or concept that this pronoun refers to

## Examples

### Example 1 (Basic Pronouns):

**Source document**:
```
John bought a new car yesterday. He drove it to work this morning. Mary saw him and thought the car was beautiful. She told him that she liked it very much.
```

**Expected Output**:
```
John bought a new car yesterday. [He]<type="personal" referent="John"> drove [it]<type="personal" referent="a new car"> to work this morning. Mary saw [him]<type="personal" referent="John"> and thought the car was beautiful. [She]<type="personal" referent="Mary"> told [him]<type="personal" referent="John"> that [she]<type="personal" referent="Mary"> liked [it]<type="personal" referent="the car"> very much.
```

## Document to Annotate

{document}

Return the complete document with every pronoun annotated inline, changing nothing else.)";

inline constexpr std::string_view kConjunctionAnnotationTemplate =
R"(# Source Conjunction Annotation

You are an expert linguistic annotator working on translation cohesion analysis.

## Task Definition
**Conjunctive expressions** are words or phrases that signal logical relationships between clauses or sentences, including:
- **Coordinating conjunctions**: and, but, or, nor, for, so, yet
- **Subordinating conjunctions**: because, since, although, while, if, when, before, after, unless, etc.
- **Conjunctive adverbs**: however, therefore, furthermore, meanwhile, consequently, nevertheless, moreover, etc.
- **Transitional phrases**: in addition, on the other hand, as a result, for example, in contrast, etc.
- **Correlative conjunctions**: both...and, either...or, not only...but also, etc.

## Annotation Instructions
### Step 1: Read the entire document
Understand the content and identify the logical flow and relationships between clauses and sentences.

### Step 2: Identify ALL conjunctive expressions
Scan systematically through the document for every word or phrase that connects ideas or shows logical relationships.

### Step 3: Determine conjunction type and logical relationship
- Classify the grammatical type of each conjunctive expression
- Identify what type of logical connection it signals

### Step 4: Apply inline annotation
First copy each conjunctive expression exactly as it appears in the original text, then add the attributes after it.

## Annotation Format
Use this exact format:
```
[conjunction]<type="[conjunction_type]" relationship="[logical_relationship]">
```

**Attribute specifications:**
- `type`: One of: `coordinating`, `subordinating`, `conjunctive_adverb`, `transitional_phrase`, `correlative`
- `relationship`: One of the logical relationship categories listed below

## Logical Relationship Categories
- **addition**: adding information (and, furthermore, moreover, in addition)
- **contrast**: opposing ideas (but, however, on the other hand, yet)
- **cause**: reasons and causes (because, since, as)
- **result**: outcomes and consequences (therefore, so, as a result, consequently)
- **sequence**: temporal or logical order (first, then, meanwhile, after)
- **condition**: conditional relationships (if, unless, provided that)
- **concession**: conceding a point (although, even though, nevertheless)

## Examples

### Example 1 (Basic Conjunctions):

**Source document**:
```
John was tired, but he had to continue working. Therefore, he decided to have a cup of coffee. He drank it quickly and felt more energetic.
```
**Expected Output**:
```
John was tired, [but]<type="coordinating" relationship="contrast"> he had to continue working. [Therefore]<type="conjunctive_adverb" relationship="result">, he decided to have a cup of coffee. He drank it quickly [and]<type="coordinating" relationship="addition"> felt more energetic.
```

## Document to Annotate

{document}

Return the complete document with every conjunctive expression annotated inline, changing nothing else.)";

inline constexpr std::string_view kPronounEvaluationTemplate =
R"(# Reference Cohesion Translation Quality Evaluation

You are an expert bilingual evaluator of translation cohesion.

## Task Overview

You will receive a source text that has been pre-annotated with pronoun information, along with a translation in a target language. Your job is to evaluate each annotated pronoun by determining:
1. How it was translated in the target language
2. Whether the translation is correct
3. If incorrect, what type of error occurred

## Evaluation Guidelines

For each annotated pronoun in the source text, you must add three new attributes to the existing annotation:

### Required Attributes to Add:
- **target_translation**: How the pronoun was rendered in the target language
- **is_correct**: Whether the translation is accurate (true/false)
- **error_type**: Type of error if translation is incorrect (null if correct)

### target_translation Values:
1. **Specific translation word(s)**: The actual translated pronoun (e.g., "Er", "elle")
2. **"omitted"**: The pronoun was appropriately omitted (common in pro-drop languages like Chinese/Japanese)
3. **"missing"**: The pronoun should have been translated but is absent

### is_correct Logic:
- If `target_translation` = specific word(s) -> `is_correct` can be true or false
- If `target_translation` = "omitted" -> `is_correct` must be true (appropriate omission)
- If `target_translation` = "missing" -> `is_correct` must be false (inappropriate absence)

### error_type Categories:
- **"null"**: No error (translation is correct)
- **"gender_mismatch"**: Wrong gender (he->she, him->her, etc.)
- **"wrong_referent"**: Pronoun resolved to the wrong entity
- **"missing_translation"**: Pronoun absent where it was required
- **"number_mismatch"**: Singular/plural disagreement

## Output Format

Return the complete annotated source text with the three new attributes added to each pronoun annotation:
```
[pronoun]<type="..." referent="..." target_translation="..." is_correct="true|false" error_type="...">
```

## Annotated Source Text

{annotated_source}

## Target Translation

{translation}

Return only the re-annotated source text.)";

inline constexpr std::string_view kConjunctionEvaluationTemplate =
R"(# Conjunction Cohesion Translation Quality Evaluation

You are an expert bilingual evaluator of translation cohesion.

## Task Overview
You will receive a source text that has been pre-annotated with conjunction information, along with a translation in a target language. Your job is to evaluate each annotated conjunction by determining:
1. How it was translated in the target language
2. Whether the translation preserves the correct logical relationship
3. If incorrect, what type of error occurred

## Evaluation Guidelines

For each annotated conjunction in the source text, you must add three new attributes to the existing annotation:

### Required Attributes to Add:
- **target_translation**: How the conjunction was rendered in the target language
- **is_correct**: Whether the translation preserves the logical relationship (true/false)
- **error_type**: Type of error if translation is incorrect (null if correct)

### target_translation Values:
1. **Specific translation word(s)**: The actual translated conjunction (e.g., "aber", "mais")
2. **"missing"**: The conjunction should have been translated but is absent

### is_correct Logic:
- If `target_translation` = specific word(s) -> `is_correct` can be true or false depending on logical relationship
- If `target_translation` = "missing" -> `is_correct` must be false (conjunction information lost)

### error_type Categories:
- **"null"**: No error (translation preserves correct logical relationship)
- **"wrong_conjunction"**: Conjunction translated but expresses wrong logical relationship
- **"missing_conjunction"**: Required conjunction is completely absent
- **"redundant_conjunction"**: Multiple conjunctions expressing same logical relationship
- **"inappropriate_addition"**: Adding conjunctions that create wrong logical relationships
- **"wrong_position"**: Conjunction in wrong syntactic position affecting meaning

## Output Format
Return the complete annotated source text with the three new attributes added to each conjunction annotation:
```
[conjunction]<type="..." relationship="..." target_translation="..." is_correct="true|false" error_type="...">
```

## Annotated Source Text

{annotated_source}

## Target Translation

{translation}

Return only the re-annotated source text.)";

}  // namespace prompts_cohesion

inline ChatRequest build_annotation_prompt(const std::string& source_doc,
                                           CohesionDimension dimension) {
    if (trim(source_doc).empty()) throw EmptyDocument("source document is empty");
    ChatRequest request;
    request.tag = StageTag::kJudge;
    request.user_text = render_template(
        dimension == CohesionDimension::kCoreference
            ? prompts_cohesion::kPronounAnnotationTemplate
            : prompts_cohesion::kConjunctionAnnotationTemplate,
        {{"document", source_doc}});
    return request;
}

inline ChatRequest build_evaluation_prompt(const std::string& annotated_source,
                                           const std::string& translation,
                                           CohesionDimension dimension) {
    try {
        parse_annotations(annotated_source, dimension, false);
    } catch (const Error& e) {
        throw ParseFailure(std::string("annotated source does not parse: ") + e.what());
    }
    ChatRequest request;
    request.tag = StageTag::kJudge;
    request.user_text = render_template(
        dimension == CohesionDimension::kCoreference
            ? prompts_cohesion::kPronounEvaluationTemplate
            : prompts_cohesion::kConjunctionEvaluationTemplate,
        {{"annotated_source", annotated_source}, {"translation", translation}});
    return request;
}

struct CohesionResult {
    CohesionScore score;
    bool anchor_ok = true;  // stripped annotation text matched the source
    std::string annotated_source;
    std::string evaluated_annotation;
};

// Two-pass judge protocol: annotate the source, then grade the annotations
// against the translation. The stripped annotation must reproduce the
// source text; a mismatch flags the run but scoring still proceeds.
inline CohesionResult evaluate_cohesion(const std::string& source_doc,
                                        const std::string& translation,
                                        CohesionDimension dimension, Gateway& gateway) {
    CohesionResult result;
    const ChatRequest annotate = build_annotation_prompt(source_doc, dimension);
    result.annotated_source = gateway.complete(annotate).text;
    const AnnotatedText annotated = parse_annotations(result.annotated_source, dimension, false);
    result.anchor_ok = annotated.stripped == source_doc;

    const ChatRequest evaluate =
        build_evaluation_prompt(result.annotated_source, translation, dimension);
    result.evaluated_annotation = gateway.complete(evaluate).text;
    const AnnotatedText evaluated =
        parse_annotations(result.evaluated_annotation, dimension, true);
    result.score = score_cohesion(evaluated.spans);
    return result;
}

inline json to_json(const CohesionScore& score) {
    json breakdown = json::object();
    for (const auto& [error, count] : score.error_breakdown) breakdown[error] = count;
    return {{"dimension", to_string(score.dimension)},
            {"total", score.total},
            {"correct", score.correct},
            {"accuracy", score.accuracy},
            {"error_breakdown", breakdown}};
}

inline json to_json(const CohesionResult& result) {
    json out = to_json(result.score);
    out["anchor_ok"] = result.anchor_ok;
    return out;
}

}  // namespace transgraph
