#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "credrag/dataset_io.hpp"
#include "credrag/error.hpp"
#include "credrag/promptkit.hpp"

namespace credrag::promptkit {

namespace {

struct Field {
    const char* file;
    std::string PromptTemplate::*member;
};

constexpr Field kFields[] = {
    {"preamble.txt", &PromptTemplate::preamble},
    {"doc_line.txt", &PromptTemplate::doc_line_format},
    {"numeric_doc_line.txt", &PromptTemplate::numeric_doc_line_format},
    {"plain_doc_line.txt", &PromptTemplate::plain_doc_line_format},
    {"question_line.txt", &PromptTemplate::question_line_format},
    {"date_suffix.txt", &PromptTemplate::date_suffix_format},
    {"option_line.txt", &PromptTemplate::option_line_format},
    {"docs_header.txt", &PromptTemplate::docs_header},
    {"answer_line.txt", &PromptTemplate::answer_line_format},
    {"shot_separator.txt", &PromptTemplate::shot_separator},
};

std::string strip_one_newline(std::string s) {
    if (!s.empty() && s.back() == '\n') s.pop_back();
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

PromptTemplate load_template(const std::filesystem::path& dir, const PromptTemplate& fallback) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("template directory '" + dir.string() + "' not found");
    PromptTemplate t = fallback;
    auto meta_path = dir / "template.json";
    if (std::filesystem::exists(meta_path)) {
        try {
            auto meta = nlohmann::json::parse(read_file(meta_path));
            t.name = meta.value("name", t.name);
            t.version = meta.value("version", t.version);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("malformed '" + meta_path.string() + "': " + e.what());
        }
    }
    for (const auto& f : kFields) {
        auto p = dir / f.file;
        if (std::filesystem::exists(p)) t.*(f.member) = strip_one_newline(read_file(p));
    }
    t.validate();
    return t;
}

TemplateSet load_template_set(const std::filesystem::path& root) {
    auto builtin = builtin_templates();
    return {load_template(root / "plain", builtin.plain), load_template(root / "credibility", builtin.credibility),
            load_template(root / "chain_of_thought", builtin.chain_of_thought)};
}

void save_template_set(const TemplateSet& set, const std::filesystem::path& root) {
    auto write_one = [&](const PromptTemplate& t, const char* sub) {
        auto dir = root / sub;
        std::filesystem::create_directories(dir);
        nlohmann::ordered_json meta;
        meta["name"] = t.name;
        meta["version"] = t.version;
        write_file_atomic(dir / "template.json", meta.dump(2) + "\n");
        for (const auto& f : kFields) write_file_atomic(dir / f.file, t.*(f.member) + "\n");
    };
    write_one(set.plain, "plain");
    write_one(set.credibility, "credibility");
    write_one(set.chain_of_thought, "chain_of_thought");
}

}  // namespace credrag::promptkit
