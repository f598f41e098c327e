#include "kds/backends.hpp"

#include <cctype>
#include <cmath>

#include "kds/errors.hpp"

namespace kds {

std::string_view to_string(NliLabel label) {
    switch (label) {
        case NliLabel::Entailment: return "entailment";
        case NliLabel::Neutral: return "neutral";
        case NliLabel::Contradiction: return "contradiction";
    }
    return "neutral";
}

std::optional<NliLabel> nli_label_from_string(std::string_view s) {
    if (s == "entailment") return NliLabel::Entailment;
    if (s == "neutral") return NliLabel::Neutral;
    if (s == "contradiction") return NliLabel::Contradiction;
    return std::nullopt;
}

void to_json(nlohmann::json& j, const NliVerdict& v) {
    j = nlohmann::json{{"label", std::string(to_string(v.label))},
                       {"scores",
                        {{"entailment", v.p_entailment},
                         {"neutral", v.p_neutral},
                         {"contradiction", v.p_contradiction}}}};
}

void from_json(const nlohmann::json& j, NliVerdict& v) {
    const auto label = nli_label_from_string(j.at("label").get<std::string>());
    if (!label) {
        throw_backend("unknown NLI label: " + j.at("label").get<std::string>());
    }
    v.label = *label;
    const auto& scores = j.at("scores");
    v.p_entailment = scores.at("entailment").get<double>();
    v.p_neutral = scores.at("neutral").get<double>();
    v.p_contradiction = scores.at("contradiction").get<double>();
    const double sum = v.p_entailment + v.p_neutral + v.p_contradiction;
    if (std::abs(sum - 1.0) > 1e-6) {
        throw_backend("NLI scores sum to " + std::to_string(sum) + ", expected 1");
    }
}

void to_json(nlohmann::json& j, const ResponseSet& r) {
    j = nlohmann::json{{"record_id", r.record_id},
                       {"responses", r.responses},
                       {"temperature", r.temperature},
                       {"backend_id", r.backend_id}};
}

void from_json(const nlohmann::json& j, ResponseSet& r) {
    j.at("record_id").get_to(r.record_id);
    j.at("responses").get_to(r.responses);
    j.at("temperature").get_to(r.temperature);
    j.at("backend_id").get_to(r.backend_id);
}

void BackendConfig::validate(std::string_view capability) const {
    if (endpoint_url.empty()) {
        throw_config(std::string(capability) + " backend: endpoint_url is empty");
    }
    if (is_mock()) {
        mock_seed(); // throws on malformed seed
    } else if (endpoint_url.rfind("http://", 0) != 0 &&
               endpoint_url.rfind("https://", 0) != 0) {
        throw_config(std::string(capability) + " backend: endpoint_url must be " +
                     "http(s)://... or mock:<seed>, got " + endpoint_url);
    }
    if (max_in_flight < 1) {
        throw_config(std::string(capability) + " backend: max_in_flight must be >= 1");
    }
    if (retries < 0) {
        throw_config(std::string(capability) + " backend: retries must be >= 0");
    }
    if (max_tokens < 1) {
        throw_config(std::string(capability) + " backend: max_tokens must be >= 1");
    }
}

std::uint64_t BackendConfig::mock_seed() const {
    const std::string seed_str = endpoint_url.substr(5);
    if (seed_str.empty()) {
        throw_config("mock backend needs a seed: mock:<seed>");
    }
    std::uint64_t seed = 0;
    for (const char c : seed_str) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw_config("mock seed is not a non-negative integer: " + seed_str);
        }
        seed = seed * 10 + std::uint64_t(c - '0');
    }
    return seed;
}

std::vector<ChatMessage> make_generation_messages(const InstructionRecord& rec) {
    std::vector<ChatMessage> messages;
    if (!rec.question.empty()) {
        messages.push_back({"system", rec.instruction});
        messages.push_back({"user", rec.question});
    } else {
        messages.push_back({"user", rec.instruction});
    }
    return messages;
}

namespace {

constexpr std::string_view kQualityPromptTemplate =
    "You are a fair and professional medical AI assistant. Your task is to rate "
    "according to the quality of the response to the instruction and the input. "
    "Each response receives a score on a scale of 0 to 5, where a higher score "
    "indicates a higher level of quality. Please directly output a single line "
    "containing the value indicating the scores.\n"
    "\n"
    "Instruction: <instruct>\n"
    "Input: <question>\n"
    "Response: <answer>";

void replace_all(std::string& text, std::string_view placeholder,
                 const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
}

} // namespace

std::string render_quality_prompt(const InstructionRecord& rec) {
    std::string prompt(kQualityPromptTemplate);
    replace_all(prompt, "<instruct>", rec.instruction);
    replace_all(prompt, "<question>", rec.question);
    replace_all(prompt, "<answer>", rec.answer);
    return prompt;
}

std::optional<int> parse_quality(std::string_view reply) {
    const auto is_digit = [](char c) {
        return std::isdigit(static_cast<unsigned char>(c)) != 0;
    };

    std::size_t i = 0;
    const std::size_t n = reply.size();
    while (i < n) {
        if (!is_digit(reply[i])) {
            ++i;
            continue;
        }
        // Maximal digit run starting at i; must not butt against a letter or
        // digit on the left to count as standalone.
        const bool left_ok =
            i == 0 || (!is_digit(reply[i - 1]) &&
                       !std::isalpha(static_cast<unsigned char>(reply[i - 1])));
        std::size_t j = i;
        while (j < n && is_digit(reply[j])) ++j;
        const bool right_alpha =
            j < n && std::isalpha(static_cast<unsigned char>(reply[j]));

        std::size_t next = j;
        if (left_ok && !right_alpha) {
            long value = -1;
            if (j - i <= 3) { // longer runs cannot be in [0,5] anyway
                value = 0;
                for (std::size_t k = i; k < j; ++k) value = value * 10 + (reply[k] - '0');
            }

            // "k/5" counts as k; the denominator is part of the fraction, not
            // a candidate of its own.
            if (j + 1 < n && reply[j] == '/' && reply[j + 1] == '5' &&
                (j + 2 >= n || !is_digit(reply[j + 2]))) {
                next = j + 2;
            }

            if (value >= 0 && value <= 5) return static_cast<int>(value);
        }
        i = next > i ? next : i + 1;
    }
    return std::nullopt;
}

} // namespace kds
