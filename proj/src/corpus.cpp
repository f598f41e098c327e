#include "kds/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include "kds/canonical.hpp"
#include "kds/errors.hpp"
#include "kds/sha256.hpp"

namespace kds {

const InstructionRecord* Corpus::find(const std::string& id) const {
    for (const auto& r : records) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

std::string synthesize_record_id(const std::string& instruction,
                                 const std::string& question,
                                 const std::string& answer) {
    Sha256 h;
    h.update(instruction);
    h.update("\x1f");
    h.update(question);
    h.update("\x1f");
    h.update(answer);
    const auto d = h.digest();
    return to_hex(d.data(), d.size()).substr(0, 16);
}

namespace {

std::string require_text_field(const nlohmann::json& obj, const std::string& key,
                               std::size_t line_no) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw_config("line " + std::to_string(line_no) + ": missing field \"" +
                     key + "\"");
    }
    if (!it->is_string()) {
        throw_config("line " + std::to_string(line_no) + ": field \"" + key +
                     "\" is not a string");
    }
    return it->get<std::string>();
}

} // namespace

Corpus load_corpus(const std::string& path, const FieldMap& field_map) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw_config("cannot open corpus file: " + path);
    }

    Corpus corpus;
    corpus.source_path = path;
    std::unordered_set<std::string> seen_ids;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;

        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw_config("line " + std::to_string(line_no) +
                         ": malformed JSON: " + e.what());
        }
        if (!obj.is_object()) {
            throw_config("line " + std::to_string(line_no) +
                         ": expected a JSON object");
        }

        InstructionRecord rec;
        rec.instruction = require_text_field(obj, field_map.instruction, line_no);
        rec.answer = require_text_field(obj, field_map.answer, line_no);
        if (obj.contains(field_map.question)) {
            if (!obj[field_map.question].is_string()) {
                throw_config("line " + std::to_string(line_no) + ": field \"" +
                             field_map.question + "\" is not a string");
            }
            rec.question = obj[field_map.question].get<std::string>();
        }
        if (obj.contains(field_map.meta)) {
            rec.meta = obj[field_map.meta];
        }

        if (trim(rec.instruction).empty()) {
            throw_config("line " + std::to_string(line_no) +
                         ": empty instruction after trimming");
        }
        if (trim(rec.answer).empty()) {
            throw_config("line " + std::to_string(line_no) +
                         ": empty answer after trimming");
        }

        if (obj.contains(field_map.id) && obj[field_map.id].is_string() &&
            !obj[field_map.id].get<std::string>().empty()) {
            rec.id = obj[field_map.id].get<std::string>();
        } else {
            rec.id = synthesize_record_id(rec.instruction, rec.question, rec.answer);
        }

        if (!seen_ids.insert(rec.id).second) {
            throw_config("line " + std::to_string(line_no) + ": duplicate id \"" +
                         rec.id + "\"");
        }
        corpus.records.push_back(std::move(rec));
    }

    if (corpus.records.empty()) {
        throw_config("corpus is empty: " + path);
    }
    return corpus;
}

void write_records_jsonl(const std::string& path,
                         const std::vector<const InstructionRecord*>& records,
                         const FieldMap& field_map) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw_io("cannot open for writing: " + path);
    }
    for (const auto* rec : records) {
        nlohmann::json obj;
        obj[field_map.id] = rec->id;
        obj[field_map.instruction] = rec->instruction;
        obj[field_map.question] = rec->question;
        obj[field_map.answer] = rec->answer;
        if (!rec->meta.is_null()) obj[field_map.meta] = rec->meta;
        out << obj.dump() << "\n";
    }
    if (!out) {
        throw_io("write failed: " + path);
    }
}

} // namespace kds
