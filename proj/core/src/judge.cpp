#include "mpo/judge.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "mpo/errors.hpp"
#include "mpo/text.hpp"

namespace mpo {

std::string request_digest(const std::string& prompt) { return fnv1a_hex(prompt); }

std::string complete(JudgeBackend& backend, const std::string& prompt) {
    if (prompt.empty()) throw PreconditionError("prompt must be nonempty");
    const RetryPolicy& retry = backend.retry_policy;
    if (retry.max_attempts < 1) throw ConfigError("retry attempts must be >= 1");

    std::string text;
    int delay = retry.backoff_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            text = backend.complete_once(prompt);
            break;
        } catch (const TransportError&) {
            if (attempt >= retry.max_attempts) throw;
            if (delay > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(delay));
                delay *= 2;
            }
        }
    }

    const std::string& stop = backend.generation.stop;
    if (!stop.empty()) {
        std::size_t pos = text.find(stop);
        if (pos != std::string::npos) text.erase(pos);
    }
    if (text.empty()) throw JudgeFormatError("judge returned an empty completion");
    return text;
}

ScriptedJudge ScriptedJudge::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open judge script " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

ScriptedJudge ScriptedJudge::from_json_text(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("judge script is not valid JSON");

    ScriptedJudge judge;
    std::string mode = j.value("mode", "digest");
    if (mode == "digest") {
        judge.mode_ = Mode::Digest;
        for (auto& [key, value] : j.at("responses").items())
            judge.by_digest_[key] = value.get<std::string>();
    } else if (mode == "sequence") {
        judge.mode_ = Mode::Sequence;
        for (auto& value : j.at("responses"))
            judge.sequence_.push_back(value.get<std::string>());
    } else if (mode == "rules") {
        judge.mode_ = Mode::Rules;
        for (auto& rule : j.at("rules")) {
            Rule r;
            if (rule.at("contains").is_array()) {
                for (auto& needle : rule.at("contains"))
                    r.contains.push_back(needle.get<std::string>());
            } else {
                r.contains.push_back(rule.at("contains").get<std::string>());
            }
            r.response = rule.at("response").get<std::string>();
            judge.rules_.push_back(std::move(r));
        }
        if (j.contains("default")) {
            judge.default_response_ = j.at("default").get<std::string>();
            judge.has_default_ = true;
        }
    } else {
        throw ConfigError("unknown judge script mode '" + mode + "'");
    }
    return judge;
}

ScriptedJudge ScriptedJudge::from_prompt_map(
    const std::map<std::string, std::string>& by_prompt) {
    ScriptedJudge judge;
    judge.mode_ = Mode::Digest;
    for (const auto& [prompt, response] : by_prompt)
        judge.by_digest_[request_digest(prompt)] = response;
    return judge;
}

ScriptedJudge ScriptedJudge::from_sequence(std::vector<std::string> responses) {
    ScriptedJudge judge;
    judge.mode_ = Mode::Sequence;
    judge.sequence_ = std::move(responses);
    return judge;
}

std::string ScriptedJudge::complete_once(const std::string& prompt) {
    ++calls_;
    switch (mode_) {
        case Mode::Digest: {
            auto it = by_digest_.find(request_digest(prompt));
            if (it == by_digest_.end())
                throw TransportError("no scripted response for digest " +
                                     request_digest(prompt) + " (prompt starts: " +
                                     prompt.substr(0, 120) + ")");
            return it->second;
        }
        case Mode::Sequence: {
            if (next_ >= sequence_.size())
                throw TransportError("scripted sequence exhausted after " +
                                     std::to_string(sequence_.size()) + " turns");
            return sequence_[next_++];
        }
        case Mode::Rules: {
            for (const auto& rule : rules_) {
                bool all = true;
                for (const auto& needle : rule.contains)
                    if (!contains(prompt, needle)) {
                        all = false;
                        break;
                    }
                if (all) return rule.response;
            }
            if (has_default_) return default_response_;
            throw TransportError("no scripted rule matches prompt (starts: " +
                                 prompt.substr(0, 120) + ")");
        }
    }
    throw TransportError("unreachable script mode");
}

RemoteJudge::RemoteJudge(std::string url, std::string model, std::string api_key)
    : model_(std::move(model)), api_key_(std::move(api_key)) {
    // Split "<scheme>://host[:port][/path]" into base and path.
    std::size_t scheme = url.find("://");
    std::size_t slash = scheme == std::string::npos ? url.find('/')
                                                    : url.find('/', scheme + 3);
    if (slash == std::string::npos) {
        base_ = url;
        path_ = "/v1/chat/completions";
    } else {
        base_ = url.substr(0, slash);
        path_ = url.substr(slash);
    }
}

std::string RemoteJudge::complete_once(const std::string& prompt) {
    httplib::Client client(base_);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);

    nlohmann::json body;
    body["model"] = model_;
    body["messages"] = nlohmann::json::array(
        {{{"role", "system"}, {"content", system_message}},
         {{"role", "user"}, {"content", prompt}}});
    body["temperature"] = generation.temperature;
    body["max_tokens"] = generation.max_tokens;
    body["stop"] = nlohmann::json::array({generation.stop});

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res)
        throw TransportError("cannot reach judge endpoint " + base_ + path_);
    if (res->status != 200)
        throw TransportError("judge endpoint returned status " +
                             std::to_string(res->status));

    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded())
        throw JudgeFormatError("judge endpoint returned invalid JSON");
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw JudgeFormatError("judge reply lacks choices[0].message.content");
    }
}

std::unique_ptr<JudgeBackend> make_judge_backend(const std::string& spec) {
    if (spec.rfind("scripted:", 0) == 0) {
        return std::make_unique<ScriptedJudge>(ScriptedJudge::from_file(spec.substr(9)));
    }
    if (spec.rfind("remote:", 0) == 0) {
        const char* model = std::getenv("MPO_JUDGE_MODEL");
        const char* key = std::getenv("MPO_JUDGE_KEY");
        return std::make_unique<RemoteJudge>(spec.substr(7), model ? model : "judge",
                                             key ? key : "");
    }
    throw ConfigError("judge spec must be scripted:FILE or remote:URL, got '" + spec + "'");
}

}  // namespace mpo
