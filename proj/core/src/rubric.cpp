#include "mpo/rubric.hpp"

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mpo/errors.hpp"
#include "mpo/text.hpp"

namespace mpo {

namespace {

// "- N:" or "- **N**:" with optional leading whitespace. Returns the level
// and the remainder after the colon (with one leading space stripped).
std::optional<std::pair<int, std::string>> match_level_marker(const std::string& line) {
    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size() || line[i] != '-') return std::nullopt;
    ++i;
    while (i < line.size() && line[i] == ' ') ++i;
    bool starred = false;
    if (line.compare(i, 2, "**") == 0) {
        starred = true;
        i += 2;
    }
    std::size_t digits = i;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits])))
        ++digits;
    if (digits == i) return std::nullopt;
    int level = std::stoi(line.substr(i, digits - i));
    i = digits;
    if (starred) {
        if (line.compare(i, 2, "**") != 0) return std::nullopt;
        i += 2;
    }
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size() || line[i] != ':') return std::nullopt;
    ++i;
    if (i < line.size() && line[i] == ' ') ++i;
    return std::make_pair(level, line.substr(i));
}

// Lenient fixture marker: "Criterion for Integer Score: **N**".
std::optional<int> match_criterion_marker(const std::string& line) {
    static const std::string prefix = "Criterion for Integer Score:";
    std::string t = trim(line);
    if (t.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
    std::string rest = trim(t.substr(prefix.size()));
    if (rest.compare(0, 2, "**") != 0) return std::nullopt;
    std::size_t digits = 2;
    while (digits < rest.size() && std::isdigit(static_cast<unsigned char>(rest[digits])))
        ++digits;
    if (digits == 2 || rest.compare(digits, 2, "**") != 0) return std::nullopt;
    return std::stoi(rest.substr(2, digits - 2));
}

// Trailing "(N points)" / "(N point)" on the name line.
std::optional<std::pair<std::string, int>> split_points_suffix(const std::string& name) {
    std::string t = trim(name);
    if (t.empty() || t.back() != ')') return std::nullopt;
    std::size_t open = t.rfind('(');
    if (open == std::string::npos) return std::nullopt;
    std::string inside = t.substr(open + 1, t.size() - open - 2);
    std::istringstream ss(inside);
    int n;
    std::string word, extra;
    if (!(ss >> n >> word) || (ss >> extra)) return std::nullopt;
    if (word != "points" && word != "point") return std::nullopt;
    if (n <= 0) return std::nullopt;
    return std::make_pair(trim(t.substr(0, open)), n);
}

void validate_item(const RubricItem& item, bool strict) {
    if (item.descriptors.empty())
        throw ValidationError("item '" + item.name + "' has no score levels");
    int prev = item.descriptors.front().level;
    for (std::size_t i = 1; i < item.descriptors.size(); ++i) {
        int cur = item.descriptors[i].level;
        if (cur >= prev)
            throw ValidationError("item '" + item.name +
                                  "' has non-decreasing score levels (" +
                                  std::to_string(prev) + " then " + std::to_string(cur) + ")");
        prev = cur;
    }
    if (item.descriptors.front().level != item.max_points)
        throw ValidationError("item '" + item.name + "' top level " +
                              std::to_string(item.descriptors.front().level) +
                              " does not match its " + std::to_string(item.max_points) +
                              " points");
    if (strict && item.descriptors.back().level != 0)
        throw ValidationError("item '" + item.name + "' does not scale down to 0");
    if (item.max_points <= 0)
        throw ValidationError("item '" + item.name + "' has no positive point value");
}

RubricItem parse_item_block(const std::string& block, bool lenient) {
    RubricItem item;
    std::vector<std::string> lines = split_lines(block);

    std::size_t idx = 0;
    while (idx < lines.size() && trim(lines[idx]).empty()) ++idx;
    if (idx == lines.size())
        throw ValidationError("item block is empty");
    std::string name_line = trim(lines[idx]);
    ++idx;

    if (auto suffix = split_points_suffix(name_line)) {
        item.name = suffix->first;
        item.max_points = suffix->second;
        item.explicit_points = true;
    } else {
        item.name = name_line;
    }

    std::optional<int> current_level;
    std::vector<std::string> current_text;
    auto flush = [&]() {
        if (!current_level) return;
        std::string text;
        // Drop blank trailing lines; keep interior ones verbatim.
        while (!current_text.empty() && trim(current_text.back()).empty())
            current_text.pop_back();
        for (std::size_t i = 0; i < current_text.size(); ++i) {
            if (i) text += '\n';
            text += current_text[i];
        }
        item.descriptors.push_back({*current_level, text});
        current_text.clear();
    };

    for (; idx < lines.size(); ++idx) {
        const std::string& line = lines[idx];
        if (auto marker = match_level_marker(line)) {
            flush();
            current_level = marker->first;
            current_text = {marker->second};
            continue;
        }
        if (lenient) {
            if (auto criterion = match_criterion_marker(line)) {
                flush();
                current_level = *criterion;
                current_text = {};
                continue;
            }
        }
        if (!current_level) {
            if (!trim(line).empty()) item.preamble.push_back(line);
        } else {
            current_text.push_back(line);
        }
    }
    flush();

    if (!item.explicit_points) {
        int top = 0;
        for (const auto& d : item.descriptors) top = std::max(top, d.level);
        item.max_points = top;
    }
    validate_item(item, !lenient);
    return item;
}

Rubric parse_impl(const std::string& text, bool lenient) {
    const std::string open_tag = "<rubric>", close_tag = "</rubric>";
    std::size_t open = text.find(open_tag);
    if (open == std::string::npos)
        throw ParseError("missing <rubric> tag", 0);
    std::size_t close = text.find(close_tag, open + open_tag.size());
    if (close == std::string::npos)
        throw ParseError("missing </rubric> tag", text.size());

    Rubric rubric;
    std::size_t cursor = open + open_tag.size();
    while (true) {
        std::size_t item_open = text.find("<item>", cursor);
        if (item_open == std::string::npos || item_open > close) break;
        std::size_t item_close = text.find("</item>", item_open);
        if (item_close == std::string::npos || item_close > close)
            throw ParseError("unbalanced <item> tag", item_open);
        std::string block = text.substr(item_open + 6, item_close - item_open - 6);
        rubric.items.push_back(parse_item_block(block, lenient));
        cursor = item_close + 7;
    }
    if (rubric.items.empty())
        throw ParseError("rubric contains no items", open);
    return rubric;
}

std::string render_item(const RubricItem& item) {
    std::string out = item.name;
    if (item.explicit_points)
        out += " (" + std::to_string(item.max_points) + " points)";
    out += '\n';
    for (const auto& line : item.preamble) out += line + "\n";
    for (const auto& d : item.descriptors) {
        out += "- " + std::to_string(d.level) + ":";
        if (!d.text.empty()) out += " " + d.text;
        out += '\n';
    }
    return out;
}

}  // namespace

Rubric parse_rubric(const std::string& text) { return parse_impl(text, false); }

Rubric parse_rubric_lenient(const std::string& text) { return parse_impl(text, true); }

std::string render_rubric(const Rubric& rubric) {
    std::string out = "<rubric>\n";
    for (const auto& item : rubric.items) {
        out += "<item>\n";
        out += render_item(item);
        out += "</item>\n";
    }
    out += "</rubric>\n";
    return out;
}

int total_attainable(const Rubric& rubric) {
    int total = 0;
    for (const auto& item : rubric.items) total += item.max_points;
    return total;
}

double normalize_score(int total, const Rubric& rubric) {
    int attainable = total_attainable(rubric);
    if (total < 0 || total > attainable)
        throw DomainError("total " + std::to_string(total) + " outside [0, " +
                          std::to_string(attainable) + "]");
    return static_cast<double>(total) / attainable;
}

double mean_item_length(const Rubric& rubric) {
    if (rubric.items.empty()) return 0.0;
    std::size_t words = 0;
    for (const auto& item : rubric.items) words += word_count(render_item(item));
    return static_cast<double>(words) / rubric.items.size();
}

std::string to_json_line(const RubricHistoryEntry& entry) {
    nlohmann::json j;
    j["version"] = entry.version;
    j["timestamp"] = entry.timestamp;
    j["source"] = entry.source;
    j["text"] = entry.text;
    j["total_attainable"] = entry.total_attainable;
    j["mean_item_length"] = entry.mean_item_length;
    return j.dump();
}

std::vector<RubricHistoryEntry> load_rubric_history(std::istream& in) {
    std::vector<RubricHistoryEntry> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError("bad JSON in rubric history");
        if (!j.contains("version")) continue;  // tolerated leading meta record
        RubricHistoryEntry e;
        e.version = j.at("version").get<int>();
        e.timestamp = j.value("timestamp", 0L);
        e.source = j.value("source", "");
        e.text = j.at("text").get<std::string>();
        e.total_attainable = j.value("total_attainable", 0);
        e.mean_item_length = j.value("mean_item_length", 0.0);
        if (!out.empty() && e.version != out.back().version + 1)
            throw ValidationError("rubric history versions must increase without gaps (" +
                                  std::to_string(out.back().version) + " then " +
                                  std::to_string(e.version) + ")");
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<RubricHistoryEntry> load_rubric_history_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    return load_rubric_history(in);
}

}  // namespace mpo
