#pragma once

// System-prompt library for the refinement passes. Templates are keyed by
// (pass kind, corpus domain) and carry placeholders for the per-domain role
// descriptions, the correction dictionary, an optional few-shot block, and
// the output-format contract. Built-in defaults cover the AN and SP domains;
// load_directory overlays user-edited template files for new domains.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "satkit/errors.hpp"

namespace satkit {

enum class PassKind { SR, WR, Joint };

inline const char* pass_kind_name(PassKind k) {
    switch (k) {
        case PassKind::SR: return "sr";
        case PassKind::WR: return "wr";
        case PassKind::Joint: return "joint";
    }
    return "?";
}

inline std::optional<PassKind> pass_kind_from_name(const std::string& name) {
    if (name == "sr" || name == "SR") return PassKind::SR;
    if (name == "wr" || name == "WR") return PassKind::WR;
    if (name == "joint" || name == "Joint") return PassKind::Joint;
    return std::nullopt;
}

struct PromptTemplate {
    std::string id;      // e.g. "sr_an"
    PassKind kind = PassKind::SR;
    std::string domain;  // e.g. "AN"
    std::string body;    // contains {{...}} placeholders
};

namespace prompt_text {

// Strict output block appended to every resolved prompt. Keeping the segment
// grammar intact is what makes the output machine-checkable; a response that
// merges segments or adds narrative text is rejected downstream.
inline const char* output_contract() {
    return
        "OUTPUT FORMAT (strict):\n"
        "Return the complete transcript as segment records. Each segment must "
        "preserve its original format:\n"
        "[start_time] - [end_time] [Speaker_Label]\n"
        "[transcribed text]\n"
        "Return exactly the same number of segments as the input, in the same "
        "order. Never merge adjacent segments, never split a segment, never "
        "produce a free-form summary or narrative text. Output only segment "
        "records, nothing else.";
}

inline const char* roles_an() {
    return
        "- The neuropsychologist: gives instructions, asks test questions "
        "(naming images, completing sentences, etc.)\n"
        "- The patient: responds to tests, may express fatigue or discomfort\n"
        "- The neurosurgeon: explains the procedure and answers medical "
        "questions about the operation\n"
        "- The anaesthesiologist: asks about medical history and explains the "
        "anaesthesia protocol\n"
        "- A family member (Proche) may be present and intervene briefly";
}

inline const char* roles_sp() {
    return
        "- The automated answering system: a recorded voice that opens the "
        "call; it is NOT a human speaker and must keep its own label\n"
        "- The psychiatric nurse: leads the interview, asks about mood, "
        "sleep, treatment and safety, offers support\n"
        "- The patient: answers, tells their story, may express distress\n"
        "- A second psychiatric nurse sometimes joins the exchange";
}

inline const char* corrections_fr() {
    return
        "- \"je tue toi\" -> \"je tutoie\"\n"
        "- \"crise épistique\" -> \"crise d'épilepsie\"\n"
        "- \"c'est son précédent\" -> \"ses antécédents\"";
}

inline const char* sr_an() {
    return
        "You are an expert in neurosurgical consultation analysis. You "
        "receive the transcript of a French preoperative consultation for "
        "awake neurosurgery, produced by automatic speech recognition with "
        "automatic speaker diarization.\n"
        "\n"
        "Task: map each generic speaker label (SPEAKER_00, SPEAKER_01, ...) "
        "to a clinical role (Patient, Neurochirurgien, Neuropsychologue, "
        "Anesthésiste, Proche) using the technical vocabulary, the "
        "question-answer patterns and the conversational hierarchy.\n"
        "\n"
        "Typical roles in this consultation:\n"
        "{{role_descriptions}}\n"
        "\n"
        "Rules:\n"
        "- each SPEAKER_XX keeps the SAME role from beginning to end.\n"
        "- if the spoken content suggests a mismatch with a previously "
        "assigned role, correct the inconsistency explicitly.\n"
        "- do not modify the transcribed text or the timestamps in this "
        "pass.\n"
        "{{few_shot}}"
        "{{output_contract}}";
}

inline const char* sr_sp() {
    return
        "You are an expert in analyzing telephone conversations for the "
        "suicide prevention hotline. You receive the transcript of a French "
        "post-suicide-attempt follow-up call, produced by automatic speech "
        "recognition with automatic speaker diarization.\n"
        "\n"
        "Task: map each generic speaker label (SPEAKER_00, SPEAKER_01, ...) "
        "to its role (Patient, Infirmier, Infirmier_2, Voix_automatique) "
        "using the conversational dynamics of the call.\n"
        "\n"
        "Typical roles in this call:\n"
        "{{role_descriptions}}\n"
        "\n"
        "The call usually opens with the automated answering system: a "
        "recorded verbatim announcement. Do not confuse it with a human "
        "speaker.\n"
        "\n"
        "Rules:\n"
        "- each SPEAKER_XX keeps the SAME role from beginning to end.\n"
        "- if the spoken content suggests a mismatch with a previously "
        "assigned role, correct the inconsistency explicitly.\n"
        "- do not modify the transcribed text or the timestamps in this "
        "pass.\n"
        "{{few_shot}}"
        "{{output_contract}}";
}

inline std::string wr_body(const std::string& domain_intro) {
    return
        domain_intro +
        "\n"
        "Task: correct automatic speech recognition errors in the transcribed "
        "text using the clinical context and the speaker roles already "
        "assigned. Fix phonetic confusions and hallucinated words; keep the "
        "wording faithful to spontaneous spoken French; never rephrase, "
        "never summarize.\n"
        "\n"
        "Known systematic confusions, to correct when the context supports "
        "it:\n"
        "{{corrections}}\n"
        "\n"
        "Rules:\n"
        "- always replace ALL proper names with 'name'.\n"
        "- preserve oral speech markers ('euh', 'hm', 'hein', 'ouais', "
        "'bah'); keep hesitations, repetitions, false starts and "
        "self-repairs exactly as spoken.\n"
        "- keep the speaker labels and timestamps unchanged in this pass.\n"
        "- the transcript stays in French.\n"
        "{{few_shot}}"
        "{{output_contract}}";
}

inline std::string joint_body(const std::string& domain_intro,
                              const char* roles_blurb) {
    return
        domain_intro +
        "\n"
        "Task: in a single pass, (1) map each generic speaker label "
        "(SPEAKER_00, SPEAKER_01, ...) to its role, and (2) correct automatic "
        "speech recognition errors in the transcribed text.\n"
        "\n"
        "Typical roles:\n" +
        std::string(roles_blurb) +
        "\n"
        "\n"
        "Known systematic confusions, to correct when the context supports "
        "it:\n"
        "{{corrections}}\n"
        "\n"
        "Rules:\n"
        "- each SPEAKER_XX keeps the SAME role from beginning to end.\n"
        "- always replace ALL proper names with 'name'.\n"
        "- preserve oral speech markers ('euh', 'hm', 'hein', 'ouais', "
        "'bah'); never rephrase or summarize.\n"
        "{{few_shot}}"
        "{{output_contract}}";
}

}  // namespace prompt_text

class PromptLibrary {
public:
    // Defaults for the AN (awake neurosurgery) and SP (suicide prevention)
    // domains.
    static PromptLibrary builtin() {
        PromptLibrary lib;
        lib.role_descriptions_["AN"] = prompt_text::roles_an();
        lib.role_descriptions_["SP"] = prompt_text::roles_sp();
        lib.corrections_["AN"] = prompt_text::corrections_fr();
        lib.corrections_["SP"] = prompt_text::corrections_fr();

        const std::string an_intro =
            "You are an expert transcriber of French neurosurgical "
            "consultations. You receive a speaker-attributed transcript of a "
            "preoperative consultation for awake neurosurgery.\n";
        const std::string sp_intro =
            "You are an expert transcriber of French suicide prevention "
            "hotline calls. You receive a speaker-attributed transcript of a "
            "post-suicide-attempt follow-up call.\n";

        lib.add({"sr_an", PassKind::SR, "AN", prompt_text::sr_an()});
        lib.add({"sr_sp", PassKind::SR, "SP", prompt_text::sr_sp()});
        lib.add({"wr_an", PassKind::WR, "AN", prompt_text::wr_body(an_intro)});
        lib.add({"wr_sp", PassKind::WR, "SP", prompt_text::wr_body(sp_intro)});
        lib.add({"joint_an", PassKind::Joint, "AN",
                 prompt_text::joint_body(an_intro, prompt_text::roles_an())});
        lib.add({"joint_sp", PassKind::Joint, "SP",
                 prompt_text::joint_body(sp_intro, prompt_text::roles_sp())});
        return lib;
    }

    void add(PromptTemplate t) { templates_[key(t.kind, t.domain)] = std::move(t); }

    void set_role_descriptions(const std::string& domain, std::string text) {
        role_descriptions_[domain] = std::move(text);
    }

    void set_corrections(const std::string& domain, std::string text) {
        corrections_[domain] = std::move(text);
    }

    // Overlays templates from a directory: <kind>_<domain>.txt for bodies,
    // roles_<domain>.txt and corrections_<domain>.txt for the data blocks.
    // Domain tags in filenames are lowercase; the domain key keeps the
    // uppercase spelling used in schedules and manifests.
    void load_directory(const std::filesystem::path& dir) {
        namespace fs = std::filesystem;
        if (!fs::is_directory(dir)) {
            throw ConfigError("prompt directory not found: " + dir.string());
        }
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
            const std::string stem = entry.path().stem().string();
            const auto sep = stem.find('_');
            if (sep == std::string::npos) continue;
            const std::string head = stem.substr(0, sep);
            std::string domain = stem.substr(sep + 1);
            for (auto& c : domain) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));

            std::ifstream in(entry.path());
            std::stringstream buffer;
            buffer << in.rdbuf();
            std::string content = buffer.str();

            if (head == "roles") {
                role_descriptions_[domain] = trim(content);
            } else if (head == "corrections") {
                corrections_[domain] = trim(content);
            } else if (const auto kind = pass_kind_from_name(head)) {
                add({stem, *kind, domain, content});
            }
        }
    }

    const PromptTemplate* find(PassKind kind, const std::string& domain) const {
        const auto it = templates_.find(key(kind, domain));
        return it == templates_.end() ? nullptr : &it->second;
    }

    std::string role_descriptions(const std::string& domain) const {
        const auto it = role_descriptions_.find(domain);
        return it == role_descriptions_.end() ? std::string() : it->second;
    }

    std::string corrections(const std::string& domain) const {
        const auto it = corrections_.find(domain);
        return it == corrections_.end() ? std::string() : it->second;
    }

private:
    static std::string key(PassKind kind, const std::string& domain) {
        return std::string(pass_kind_name(kind)) + "\x1f" + domain;
    }

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, PromptTemplate> templates_;
    std::map<std::string, std::string> role_descriptions_;
    std::map<std::string, std::string> corrections_;
};

}  // namespace satkit
