#include "credrag/dataset_io.hpp"

#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "credrag/error.hpp"
#include "credrag/text.hpp"

namespace credrag {

namespace {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

const std::set<std::string> kDocumentKeys = {"id",           "text",           "source",  "source_reliability",
                                             "published_date", "relevance_score", "is_gold", "is_noise",
                                             "credibility"};
const std::set<std::string> kItemKeys = {"id",      "question",       "query_date",  "answers",
                                         "options", "correct_option", "explanation", "documents"};

std::string get_string(const json& j, const char* key, bool required) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        if (required) throw SchemaError(std::string("missing required field '") + key + "'");
        return {};
    }
    if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
    return text::nfc(it->get<std::string>());
}

std::optional<bool> get_bool(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_boolean()) throw SchemaError(std::string("field '") + key + "' must be a boolean");
    return it->get<bool>();
}

std::optional<CredibilityLevel> get_level(const json& j, const char* key, int level_count) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw SchemaError(std::string("field '") + key + "' must be an integer");
    try {
        return CredibilityLevel(it->get<int>(), level_count);
    } catch (const PreconditionError& e) {
        throw SchemaError(std::string("field '") + key + "': " + e.what());
    }
}

std::optional<Date> get_date(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a date string");
    try {
        return Date::parse(it->get<std::string>());
    } catch (const ParseError& e) {
        throw SchemaError(std::string("field '") + key + "': " + e.what());
    }
}

json extras(const json& j, const std::set<std::string>& known) {
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.contains(it.key())) out[it.key()] = it.value();
    }
    return out;
}

void append_extras(ojson& out, const json& extra) {
    // json objects iterate in sorted key order, which keeps emission canonical.
    for (auto it = extra.begin(); it != extra.end(); ++it) out[it.key()] = it.value();
}

}  // namespace

ojson to_json(const Document& doc) {
    ojson j;
    j["id"] = doc.id;
    j["text"] = doc.text;
    if (!doc.source.empty()) j["source"] = doc.source;
    if (doc.source_reliability) j["source_reliability"] = doc.source_reliability->value();
    if (doc.published_date) j["published_date"] = doc.published_date->to_string();
    if (doc.relevance_score) j["relevance_score"] = *doc.relevance_score;
    if (doc.is_gold) j["is_gold"] = *doc.is_gold;
    if (doc.is_noise) j["is_noise"] = *doc.is_noise;
    if (doc.credibility) j["credibility"] = doc.credibility->value();
    append_extras(j, doc.extra);
    return j;
}

ojson to_json(const QAItem& item) {
    ojson j;
    j["id"] = item.id;
    j["question"] = item.question;
    if (item.query_date) j["query_date"] = item.query_date->to_string();
    if (!item.answers.empty()) j["answers"] = item.answers;
    if (!item.options.empty()) {
        ojson opts = ojson::object();
        for (const auto& [k, v] : item.options) opts[k] = v;
        j["options"] = std::move(opts);
    }
    if (item.correct_option) j["correct_option"] = *item.correct_option;
    if (item.explanation) j["explanation"] = *item.explanation;
    ojson docs = ojson::array();
    for (const auto& d : item.documents) docs.push_back(to_json(d));
    j["documents"] = std::move(docs);
    append_extras(j, item.extra);
    return j;
}

Document document_from_json(const json& j, int level_count) {
    if (!j.is_object()) throw SchemaError("document must be a JSON object");
    Document d;
    d.id = get_string(j, "id", true);
    d.text = get_string(j, "text", true);
    d.source = get_string(j, "source", false);
    d.source_reliability = get_level(j, "source_reliability", level_count);
    d.published_date = get_date(j, "published_date");
    if (auto it = j.find("relevance_score"); it != j.end() && !it->is_null()) {
        if (!it->is_number()) throw SchemaError("field 'relevance_score' must be a number");
        d.relevance_score = it->get<double>();
    }
    d.is_gold = get_bool(j, "is_gold");
    d.is_noise = get_bool(j, "is_noise");
    d.credibility = get_level(j, "credibility", level_count);
    d.extra = extras(j, kDocumentKeys);
    return d;
}

QAItem item_from_json(const json& j, int level_count) {
    if (!j.is_object()) throw SchemaError("record must be a JSON object");
    QAItem item;
    item.id = get_string(j, "id", true);
    item.question = get_string(j, "question", true);
    item.query_date = get_date(j, "query_date");
    if (auto it = j.find("answers"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw SchemaError("field 'answers' must be an array");
        for (const auto& a : *it) {
            if (!a.is_string()) throw SchemaError("answers must be strings");
            item.answers.push_back(text::nfc(a.get<std::string>()));
        }
    }
    if (auto it = j.find("options"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw SchemaError("field 'options' must be an object");
        for (auto o = it->begin(); o != it->end(); ++o) {
            if (!o.value().is_string()) throw SchemaError("option texts must be strings");
            item.options[text::nfc(o.key())] = text::nfc(o.value().get<std::string>());
        }
    }
    if (auto opt = get_string(j, "correct_option", false); !opt.empty()) item.correct_option = opt;
    if (j.contains("explanation") && !j["explanation"].is_null()) {
        item.explanation = get_string(j, "explanation", true);
    }
    if (auto it = j.find("documents"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw SchemaError("field 'documents' must be an array");
        for (const auto& d : *it) item.documents.push_back(document_from_json(d, level_count));
    }
    item.extra = extras(j, kItemKeys);
    validate_item(item);
    return item;
}

std::string to_jsonl_line(const QAItem& item) {
    return to_json(item).dump(-1, ' ', false, json::error_handler_t::strict);
}

std::filesystem::path metadata_path(const std::filesystem::path& dataset_path) {
    auto p = dataset_path;
    p += ".meta.json";
    return p;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    static std::atomic<unsigned long> counter{0};
    auto tmp = path;
    tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "." +
           std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename into '" + path.string() + "'");
    }
}

Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset '" + path.string() + "'");

    Dataset ds;
    ds.name = path.stem().string();
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
        }
        QAItem item;
        try {
            item = item_from_json(j, options.level_count);
        } catch (const SchemaError& e) {
            throw SchemaError(e.what(), lineno);
        } catch (const json::exception& e) {
            throw SchemaError(e.what(), lineno);
        }
        if (!ids.insert(item.id).second) {
            throw SchemaError("duplicate item id '" + item.id + "'", lineno);
        }
        ds.items.push_back(std::move(item));
    }
    if (ds.items.empty() && !options.allow_empty) {
        throw SchemaError("dataset '" + path.string() + "' is empty");
    }

    auto meta = metadata_path(path);
    if (std::filesystem::exists(meta)) {
        json m;
        try {
            m = json::parse(read_file(meta));
        } catch (const json::parse_error& e) {
            throw ParseError("malformed metadata sidecar '" + meta.string() + "': " + e.what());
        }
        if (m.contains("name") && m["name"].is_string()) ds.name = m["name"].get<std::string>();
        if (m.contains("metadata") && m["metadata"].is_object()) ds.metadata = m["metadata"];
    }
    return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    std::string out;
    for (const auto& item : dataset.items) {
        out += to_jsonl_line(item);
        out += '\n';
    }
    write_file_atomic(path, out);

    ojson meta;
    meta["name"] = dataset.name;
    meta["metadata"] = dataset.metadata;
    write_file_atomic(metadata_path(path), meta.dump(2) + "\n");
}

}  // namespace credrag
