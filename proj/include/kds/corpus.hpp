#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kds {

// One instruction-tuning item: a task directive, an optional input query and
// the reference answer it should be judged against.
struct InstructionRecord {
    std::string id;          // unique, stable across reruns
    std::string instruction; // non-empty after trimming
    std::string question;    // may be empty (instruction-only items)
    std::string answer;      // non-empty after trimming
    nlohmann::json meta;     // opaque passthrough, no semantics assigned
};

struct Corpus {
    std::vector<InstructionRecord> records; // file order, preserved everywhere
    std::string source_path;

    std::size_t size() const { return records.size(); }
    const InstructionRecord* find(const std::string& id) const;
};

// Maps input JSON keys onto record fields. Defaults to the Alpaca-style
// {"instruction","input","output"} layout.
struct FieldMap {
    std::string instruction = "instruction";
    std::string question = "input";
    std::string answer = "output";
    std::string id = "id";     // optional in input; synthesized when absent
    std::string meta = "meta"; // optional passthrough
};

// Synthesized id for records without one: sha256 over the three text fields,
// truncated to 16 hex chars.
std::string synthesize_record_id(const std::string& instruction,
                                 const std::string& question,
                                 const std::string& answer);

// Loads a UTF-8 line-delimited JSON corpus. One object per line; blank lines
// are skipped. Errors carry 1-based line numbers.
Corpus load_corpus(const std::string& path, const FieldMap& field_map = {});

// Writes records back out in the input schema (selected-subset passthrough).
void write_records_jsonl(const std::string& path,
                         const std::vector<const InstructionRecord*>& records,
                         const FieldMap& field_map);

} // namespace kds
