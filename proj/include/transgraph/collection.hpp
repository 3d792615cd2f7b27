#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "transgraph/errors.hpp"
#include "transgraph/metrics.hpp"

namespace transgraph {

struct DocumentRecord {
    std::string id;
    std::string source_text;
    std::string reference_text;  // empty when no reference is supplied
    bool has_reference = false;
    std::vector<TermPair> terms;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ManifestError("cannot open file: " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Loads a collection manifest: a JSON file with a "documents" array whose
// records name a source file (or carry inline text) plus optional
// reference and term files, resolved relative to the manifest location.
//
//   {"documents": [{"id": "doc1", "source": "doc1.src.txt",
//                   "reference": "doc1.ref.txt", "terms": "doc1.terms.tsv"}]}
inline std::vector<DocumentRecord> load_collection(const std::string& manifest_path) {
    namespace fs = std::filesystem;
    const fs::path path(manifest_path);
    if (!fs::exists(path)) throw ManifestError("manifest does not exist: " + manifest_path);

    json manifest = json::parse(read_file(path), nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object() || !manifest.contains("documents") ||
        !manifest.at("documents").is_array()) {
        throw ManifestError("manifest must be a JSON object with a 'documents' array");
    }
    const fs::path base = path.parent_path();

    std::vector<DocumentRecord> records;
    std::set<std::string> seen;
    for (const json& entry : manifest.at("documents")) {
        if (!entry.is_object() || !entry.contains("id")) {
            throw ManifestError("document record lacks an id");
        }
        DocumentRecord record;
        record.id = entry.at("id").get<std::string>();
        if (!seen.insert(record.id).second) {
            throw DuplicateId("duplicate document id: " + record.id);
        }
        if (entry.contains("source_text")) {
            record.source_text = entry.at("source_text").get<std::string>();
        } else if (entry.contains("source")) {
            record.source_text = read_file(base / entry.at("source").get<std::string>());
        } else {
            throw ManifestError("document " + record.id + " names no source");
        }
        if (entry.contains("reference_text")) {
            record.reference_text = entry.at("reference_text").get<std::string>();
            record.has_reference = true;
        } else if (entry.contains("reference")) {
            record.reference_text = read_file(base / entry.at("reference").get<std::string>());
            record.has_reference = true;
        }
        if (entry.contains("terms")) {
            record.terms = parse_term_lines(read_file(base / entry.at("terms").get<std::string>()));
        }
        records.push_back(std::move(record));
    }
    std::sort(records.begin(), records.end(),
              [](const DocumentRecord& a, const DocumentRecord& b) { return a.id < b.id; });
    return records;
}

}  // namespace transgraph
