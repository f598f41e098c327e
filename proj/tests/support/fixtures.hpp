#pragma once

#include <string>
#include <vector>

#include "kds/backends.hpp"

namespace kds::testsupport {

struct AlignmentFixture {
    std::string question;
    std::string answer;
    std::vector<std::string> responses;
};

// Hand-labeled medical QA fixture where every sampled response names the
// wrong nephron segment: all verdicts against the reference are
// contradictions, so ka must be exactly 0.
inline AlignmentFixture low_alignment_fixture() {
    AlignmentFixture f;
    f.question = "In which part of the nephron does approximately 20% of "
                 "potassium (K+) reabsorption occur?";
    f.answer = "Approximately 20% of K+ reabsorption occurs in the thick "
               "ascending limb (loop of Henle).";
    f.responses = {
        "According to physiological knowledge, approximately 20% of potassium "
        "(K+) reabsorption occurs in the proximal convoluted tubule (PCT) of "
        "the nephron.",
        "According to physiological and anatomical knowledge, approximately "
        "20% of potassium (K+) reabsorption occurs in the proximal convoluted "
        "tubule (PCT) of the nephron.",
        "According to physiological knowledge, approximately 20% of potassium "
        "(K+) reabsorption occurs in the distal convoluted tubule (DCT) of the "
        "nephron.",
        "According to physiological and anatomical knowledge, approximately "
        "20% of potassium (K+) reabsorption occurs in the distal convoluted "
        "tubule (DCT) of the nephron.",
        "A question about kidney physiology! According to various "
        "physiological and anatomical sources, approximately 20% of potassium "
        "(K+) reabsorption occurs in the proximal convoluted tubule (PCT) of "
        "the nephron.",
    };
    return f;
}

// Counterpart fixture where every response agrees with the reference: all
// entailments, ka exactly 1.
inline AlignmentFixture high_alignment_fixture() {
    AlignmentFixture f;
    f.question = "Which cranial nerve provides innervation to the levator "
                 "palpebrae superioris muscle?";
    f.answer = "The levator palpebrae superioris muscle is innervated by the "
               "oculomotor nerve (cranial nerve III).";
    f.responses = {
        "Truthfully... The cranial nerve that provides innervation to the "
        "levator palpebrae superioris muscle is the III (Oculomotor) nerve!",
        "The cranial nerve that provides innervation to the levator palpebrae "
        "superioris muscle is the **oculomotor nerve (III)**.",
        "Truthfully, the answer is the oculomotor nerve (cranial nerve III).",
        "The answer is: The cranial nerve that provides innervation to the "
        "levator palpebrae superioris muscle is the Third Cranial Nerve "
        "(Oculomotor Nerve), specifically its superior division.",
        "The cranial nerve that provides innervation to the levator palpebrae "
        "superioris muscle is the oculomotor nerve (CN III).",
    };
    return f;
}

inline ResponseSet fixture_responses(const AlignmentFixture& f) {
    ResponseSet rs;
    rs.record_id = "fixture";
    rs.responses = f.responses;
    rs.temperature = 0.7;
    rs.backend_id = "fixture";
    return rs;
}

} // namespace kds::testsupport
