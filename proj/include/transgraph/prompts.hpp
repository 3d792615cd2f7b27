#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "transgraph/text.hpp"

namespace transgraph::prompts {

// Stage-1 chunking prompt. {chunk_content} receives the window text with
// window-local sentence indices; the JSON schema braces below are literal.
inline constexpr std::string_view kChunkTemplate =
R"(You are a document chunker. Here is an (incomplete) part of a long document:
{chunk_content}

Split the given text into contiguous, sentence-preserving chunks with coherent, adjacent sentences only. Remember to: (i) never split a sentence, (ii) keep topically related, adjacent sentences together, and (iii) if the last sentence is incomplete, do NOT output it - mark it as carry_over.

Return ONLY valid JSON with this schema:
{
  "chunks": [
    {
      "chunk_id": "<int|string>",
      "rationale": "<2 short sentences on why you choose the following sentences for this chunk>"
      "sentence_indices": [<ints, in order>]
      "carry_over": <true|false>,
    }
  ],...
})";

// Stage-1 relation labeling prompt for a forward chunk pair (i, j).
inline constexpr std::string_view kRelationTemplate =
R"(You are a text relation analyzer. Your task is to examine two chunks of text, taken from the same document, **Chunk {i}** and **Chunk {j}** and determine if they share any meaningful connection. Only define a relation when there truly is one; if the two chunks are topically or semantically independent, indicate that explicitly.

### Instructions

1. **Identify a Relation (if any)**
   - Read **Chunk {j}** (the later chunk) and **Chunk {i}** (an earlier chunk).
   - Ask yourself:
     - Do they refer to the same entities, events, or ideas?
     - Does Chunk {j} expand, clarify, contrast, or provide background for something in Chunk {i}?
     - Does one chunk continue a thought begun in the other (e.g., cause -> effect, premise -> conclusion)?
   - If there is an explicit connection, choose the most precise descriptor from the following categories:
     - **Background->Core** ("Chunk {i} provides necessary background for Chunk {j}")
     - **Core->Detail** ("Chunk {j} drills down into a specific subpoint that Chunk {i} introduced")
     - **Motivation->Method or Problem->Solution** ("Chunk {i} states a problem; Chunk {j} describes the solution.")
     - **Cause->Effect** (e.g., "Chunk {i} describes an experiment; Chunk {j} shows the resulting performance drop.")
     - **Contrast** (e.g., "Chunk {j} explicitly contrasts with Chunk {i}'s claim.")
     - **Comparison** (e.g., "Both chunks compare two architectures.")
     - **Condition** (e.g., "Chunk {i} says 'if X, then Y,' and Chunk {j} describes what happens under that condition.")
     - **Evaluation** (e.g., "Chunk {j} evaluates the approach introduced in Chunk {i}.")
     - **Entity Coreference** ("Both chunks mention the same dataset, model, or variable.")
     - **Terminology Definition** ("Chunk {i} defines a term that appears in Chunk {j}.")

2. **Output Format**
   - Output strictly a dictionary with keys: reason, relation, direction. Reason is a short explanation for the relation. If the relation is 'none', reason should be 'no relation found'. Direction is the direction of the relation, which can be 'forward' or 'backward'.
   - **Do not** include any extra commentary, annotations, or keys. Only the dictionary should be returned.

# Chunk {i}:
{chunk_i}
# Chunk {j}:
{chunk_j}

Your response:)";

// Stage-2 chunk translation prompt.
inline constexpr std::string_view kTranslateTemplate =
R"(You are a high-quality translation assistant. Your task is to translate one specific chunk of the source document from {src_lang} into {tgt_lang}, using the following context to ensure consistent terminology, style, and meaning.

A. RELATED CHUNKS (and WHY THEY MATTER)

Below are all chunks that share a meaningful connection with the "Current Chunk."
For each related chunk, you have:
  - Its "Chunk ID" (an integer).
  - The full source-language text of that chunk.
  - The detected relation-type between that chunk and the current one.
  - A brief "Reason" sentence explaining why this relation helps guide terminology or meaning in the current chunk.

Use these related-chunk definitions to preserve consistent translations of any key terms or ideas that overlap.

{related_chunks}

B. CURRENT CHUNK TO TRANSLATE

Chunk ID: {chunk_id}

Source Text:
{chunk_text}

C. SPECIFIC INSTRUCTIONS

1. **Consistent Terminology:**
   - If any key term has been introduced or defined in a Related Chunk, use **exactly the same target-language rendering** here.
   - If a Related Chunk indicates an acronym expansion, be sure to translate the acronym and its expanded form consistently (following how it was rendered earlier).

2. **Preserve Coreference & Referential Integrity:**
   - If the Current Chunk refers back to an entity or concept defined earlier, ensure you use the same translation for that concept-exactly as in the Related Chunk's translation.

3. **Translate Only the Current Chunk:**
   - Do not attempt to retranslate the entire document or other chunks.
   - Your output should be **only** the translated text of {chunk_id}.
   - Do **not** include any commentary, footnotes, or explanations-just the final translation block.

4. **Formatting:**
   - Keep paragraph breaks as in the source.
   - If the source chunk has multiple paragraphs, translate each paragraph and preserve line breaks.
   - If the source chunk contains inline code, variable names, or labels, keep them in-English or code-style without adding extra formatting.


D. OUTPUT

Provide **only** the translated text of Chunk {chunk_id} in {tgt_lang}, respecting all the instructions above.)";

// Minimal prompts for the sentence-level and single-pass baselines.
inline constexpr std::string_view kSentenceTemplate =
R"(Translate the following {src_lang} sentence into {tgt_lang}. Provide only the translation.

{sentence})";

inline constexpr std::string_view kDocumentTemplate =
R"(Translate the following {src_lang} document into {tgt_lang}. Provide only the translation.

{document})";

inline std::string render_chunk_prompt(const std::string& window_content) {
    return render_template(kChunkTemplate, {{"chunk_content", window_content}});
}

inline std::string render_relation_prompt(int i, int j, const std::string& chunk_i,
                                          const std::string& chunk_j) {
    return render_template(kRelationTemplate, {{"i", std::to_string(i)},
                                               {"j", std::to_string(j)},
                                               {"chunk_i", chunk_i},
                                               {"chunk_j", chunk_j}});
}

inline std::string render_translate_prompt(const std::string& src_lang, const std::string& tgt_lang,
                                           const std::string& related_chunks, int chunk_id,
                                           const std::string& chunk_text) {
    return render_template(kTranslateTemplate, {{"src_lang", src_lang},
                                                {"tgt_lang", tgt_lang},
                                                {"related_chunks", related_chunks},
                                                {"chunk_id", std::to_string(chunk_id)},
                                                {"chunk_text", chunk_text}});
}

inline std::string render_sentence_prompt(const std::string& src_lang, const std::string& tgt_lang,
                                          const std::string& sentence) {
    return render_template(kSentenceTemplate, {{"src_lang", src_lang},
                                               {"tgt_lang", tgt_lang},
                                               {"sentence", sentence}});
}

inline std::string render_document_prompt(const std::string& src_lang, const std::string& tgt_lang,
                                          const std::string& document) {
    return render_template(kDocumentTemplate, {{"src_lang", src_lang},
                                               {"tgt_lang", tgt_lang},
                                               {"document", document}});
}

}  // namespace transgraph::prompts
