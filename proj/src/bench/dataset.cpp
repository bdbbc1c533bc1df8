#include "spinach/bench/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spinach/common/text.hpp"

namespace spinach::bench {

namespace {

using nlohmann::json;

std::string_view source_names[] = {"spinach-dev", "spinach-test", "qald", "wwq", "custom"};

std::string id_of(const json& record, std::size_t index)
{
    const json* id = nullptr;
    for (const char* key : {"id", "question_id"}) {
        if (record.contains(key)) {
            id = &record.at(key);
            break;
        }
    }
    if (id == nullptr) {
        throw SchemaError("missing id", index);
    }
    if (id->is_string()) {
        return id->get<std::string>();
    }
    if (id->is_number_integer()) {
        return std::to_string(id->get<long long>());
    }
    throw SchemaError("id must be a string or integer", index);
}

std::string required_string(const json& record, std::initializer_list<const char*> keys, std::size_t index)
{
    for (const char* key : keys) {
        if (record.contains(key)) {
            const auto& v = record.at(key);
            if (!v.is_string()) {
                throw SchemaError(std::string("field '") + key + "' must be a string", index);
            }
            auto s = v.get<std::string>();
            if (text::trim(s).empty()) {
                throw SchemaError(std::string("field '") + key + "' is empty", index);
            }
            return s;
        }
    }
    throw SchemaError(std::string("missing field '") + *keys.begin() + "'", index);
}

DatasetExample from_spinach(const json& record, std::size_t index, DatasetSource source)
{
    if (!record.is_object()) {
        throw SchemaError("expected an object", index);
    }
    return {id_of(record, index), required_string(record, {"question", "utterance"}, index),
            required_string(record, {"sparql", "query"}, index), std::nullopt, source};
}

DatasetExample from_qald(const json& record, std::size_t index)
{
    if (!record.is_object()) {
        throw SchemaError("expected an object", index);
    }
    std::string question;
    if (record.contains("question") && record.at("question").is_array()) {
        for (const auto& q : record.at("question")) {
            if (q.value("language", "") == "en" && q.contains("string")) {
                question = q.at("string").get<std::string>();
                break;
            }
        }
    }
    if (text::trim(question).empty()) {
        throw SchemaError("no English question", index);
    }
    std::string sparql;
    if (record.contains("query") && record.at("query").is_object()) {
        sparql = record.at("query").value("sparql", "");
    }
    if (text::trim(sparql).empty()) {
        throw SchemaError("missing query.sparql", index);
    }
    return {id_of(record, index), question, sparql, std::nullopt, DatasetSource::qald};
}

} // namespace

std::string_view to_string(DatasetSource source) { return source_names[static_cast<int>(source)]; }

DatasetSource parse_source(std::string_view name)
{
    for (int i = 0; i < 5; ++i) {
        if (source_names[i] == name) {
            return static_cast<DatasetSource>(i);
        }
    }
    throw InvalidArgument("unknown dataset source: " + std::string(name));
}

std::vector<DatasetExample> load_dataset(const std::filesystem::path& path, DatasetSource source)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open dataset " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto content = buffer.str();

    std::vector<DatasetExample> examples;
    json doc;
    bool whole = true;
    try {
        doc = json::parse(content);
    } catch (const json::parse_error&) {
        whole = false;
    }
    if (whole && doc.is_object() && doc.contains("questions")) {
        std::size_t i = 0;
        for (const auto& q : doc.at("questions")) {
            examples.push_back(from_qald(q, i++));
        }
    } else if (whole && doc.is_array()) {
        for (std::size_t i = 0; i < doc.size(); ++i) {
            examples.push_back(from_spinach(doc[i], i, source));
        }
    } else {
        // JSON Lines, or a single object on one line.
        std::size_t index = 0;
        for (const auto& line : text::split_lines(content)) {
            if (text::trim(line).empty()) {
                continue;
            }
            json record;
            try {
                record = json::parse(line);
            } catch (const json::parse_error& e) {
                throw SchemaError(std::string("malformed JSON: ") + e.what(), index);
            }
            examples.push_back(from_spinach(record, index, source));
            ++index;
        }
    }

    std::set<std::string> seen;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (!seen.insert(examples[i].id).second) {
            throw SchemaError("duplicate id '" + examples[i].id + "'", i);
        }
    }
    return examples;
}

} // namespace spinach::bench
