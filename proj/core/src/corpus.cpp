#include "mpo/corpus.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "mpo/errors.hpp"
#include "mpo/text.hpp"

namespace mpo {

std::string to_json_line(const GenerationRecord& record) {
    nlohmann::json j;
    j["id"] = record.id;
    if (!record.cluster.empty()) j["cluster"] = record.cluster;
    j["prompt"] = record.prompt;
    j["generation"] = record.generation;
    if (!record.reference.empty()) j["reference"] = record.reference;
    if (record.score) j["score"] = *record.score;
    return j.dump();
}

std::vector<GenerationRecord> load_corpus(std::istream& in) {
    std::vector<GenerationRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw ParseError("corpus line " + std::to_string(line_no) + " is not JSON");
        GenerationRecord r;
        if (!j.contains("id"))
            throw ValidationError("corpus line " + std::to_string(line_no) + " lacks an id");
        r.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
        r.cluster = j.value("cluster", "");
        r.prompt = j.value("prompt", "");
        r.generation = j.value("generation", "");
        r.reference = j.value("reference", "");
        if (j.contains("score")) r.score = j.at("score").get<int>();
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<GenerationRecord> load_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open corpus " + path);
    return load_corpus(in);
}

void save_corpus_file(const std::string& path, const std::vector<GenerationRecord>& records) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write corpus " + path);
    for (const auto& r : records) out << to_json_line(r) << '\n';
}

}  // namespace mpo
