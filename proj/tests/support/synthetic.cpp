#include "support/synthetic.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "kds/mock_backends.hpp"

namespace kds::testsupport {

namespace {

const char* kSubjects[] = {
    "renal potassium handling",     "cranial nerve innervation",
    "hepatic drug metabolism",      "cardiac conduction timing",
    "pulmonary gas exchange",       "endocrine feedback loops",
    "bone mineral homeostasis",     "gastric acid secretion",
    "cerebrospinal fluid flow",     "peripheral insulin signaling",
    "coagulation cascade steps",    "immune complement activation",
};

std::string subject_for(std::uint64_t h) {
    return kSubjects[h % (sizeof(kSubjects) / sizeof(kSubjects[0]))];
}

} // namespace

Corpus make_synthetic_corpus(int n, std::uint64_t content_seed) {
    if (n < 1) throw std::invalid_argument("corpus size must be >= 1");

    Corpus corpus;
    corpus.source_path = "synthetic:" + std::to_string(content_seed);
    corpus.records.reserve(static_cast<std::size_t>(n));

    for (int i = 0; i < n; ++i) {
        const std::string tag = std::to_string(i);
        const std::uint64_t h = mock_hash(content_seed, "record", tag);

        // Decade layout: positions 6,7,8 of each decade form a near-duplicate
        // family (same topic, shared group marker); position 3 garbles the
        // judge; position 4 fails generation.
        const int slot = i % 10;
        const bool in_family = slot == 6 || slot == 7 || slot == 8;
        const int family = i / 10;

        const std::string topic =
            in_family ? "t" + std::to_string(content_seed % 997) + "f" +
                            std::to_string(family)
                      : "t" + std::to_string(content_seed % 997) + "u" + tag;

        InstructionRecord rec;
        rec.id = "r" + std::string(3 - std::min<std::size_t>(3, tag.size()), '0') + tag;

        const std::string subject = subject_for(h);
        rec.instruction =
            "You are a medical assistant. Answer the question about " + subject +
            " concisely and factually.";

        rec.question = "What is the accepted finding for topic=" + topic +
                       " in the context of " + subject + "?";
        if (in_family) {
            rec.question += " group=g" + std::to_string(family);
        }
        if (slot == 3) rec.question += " judge=garbled";
        if (slot == 4) rec.question += " gen=fail";

        switch (mock_hash(content_seed, "answer-form", tag) % 3) {
            case 0:
                rec.answer = "Reference texts state that fact=" + topic +
                             ".0 is the accepted finding for " + subject + ".";
                break;
            case 1:
                rec.answer = "The canonical finding, fact=" + topic +
                             ".0, is well documented in reviews of " + subject + ".";
                break;
            default:
                rec.answer = "Clinically, fact=" + topic +
                             ".0 holds; see standard references on " + subject + ".";
                break;
        }

        corpus.records.push_back(std::move(rec));
    }
    return corpus;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& rec : corpus.records) {
        const nlohmann::json obj{{"id", rec.id},
                                 {"instruction", rec.instruction},
                                 {"input", rec.question},
                                 {"output", rec.answer}};
        out += obj.dump();
        out += '\n';
    }
    return out;
}

void write_corpus_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << corpus_to_jsonl(corpus);
}

} // namespace kds::testsupport
