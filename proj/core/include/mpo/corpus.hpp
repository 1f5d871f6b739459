#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mpo {

/// One generation record, as stored in JSON-lines corpora:
/// {"id": ..., "cluster": ..., "prompt": ..., "generation": ...,
///  "reference": ...?, "score": ...?}
struct GenerationRecord {
    std::string id;
    std::string cluster;
    std::string prompt;
    std::string generation;
    std::string reference;
    std::optional<int> score;
};

std::string to_json_line(const GenerationRecord& record);

std::vector<GenerationRecord> load_corpus(std::istream& in);
std::vector<GenerationRecord> load_corpus_file(const std::string& path);

void save_corpus_file(const std::string& path, const std::vector<GenerationRecord>& records);

}  // namespace mpo
