#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace mpo {

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_ms = 200;  // doubled after each failed attempt; 0 disables sleeping
};

struct GenerationParams {
    int max_tokens = 2048;
    double temperature = 0.0;
    std::string stop = "<EOE>";
};

/// Stable identifier of a completion request. Retries reuse it, so scripted
/// backends can never diverge across retries of the same prompt.
std::string request_digest(const std::string& prompt);

/// Abstract completion interface to an LLM judge.
class JudgeBackend {
public:
    virtual ~JudgeBackend() = default;

    virtual std::string kind() const = 0;

    /// One raw completion attempt; throws TransportError on failure.
    virtual std::string complete_once(const std::string& prompt) = 0;

    RetryPolicy retry_policy;
    GenerationParams generation;
};

/// Sends the prompt, retrying transport failures per the backend policy, and
/// returns the completion truncated at the first stop sequence. Throws
/// PreconditionError (empty prompt), TransportError (retries exhausted), or
/// JudgeFormatError (empty completion).
std::string complete(JudgeBackend& backend, const std::string& prompt);

/// Deterministic mock: responses come from a script. Three script modes:
///   digest   {"mode":"digest","responses":{"<16 hex>":"..."}}
///   sequence {"mode":"sequence","responses":["...", ...]}   (consumed in order)
///   rules    {"mode":"rules","rules":[{"contains":["..."],"response":"..."}],
///             "default":"..."}                              (first match wins)
class ScriptedJudge : public JudgeBackend {
public:
    static ScriptedJudge from_file(const std::string& path);
    static ScriptedJudge from_json_text(const std::string& json_text);
    /// Digest-mode script built directly from prompt->response pairs.
    static ScriptedJudge from_prompt_map(const std::map<std::string, std::string>& by_prompt);
    static ScriptedJudge from_sequence(std::vector<std::string> responses);

    std::string kind() const override { return "scripted-mock"; }
    std::string complete_once(const std::string& prompt) override;

    std::size_t calls() const { return calls_; }

private:
    enum class Mode { Digest, Sequence, Rules };
    struct Rule {
        std::vector<std::string> contains;
        std::string response;
    };

    Mode mode_ = Mode::Digest;
    std::map<std::string, std::string> by_digest_;
    std::vector<std::string> sequence_;
    std::size_t next_ = 0;
    std::vector<Rule> rules_;
    std::string default_response_;
    bool has_default_ = false;
    std::size_t calls_ = 0;
};

/// HTTP chat-completion client (system + user message, temperature,
/// max tokens, stop list). The endpoint is "<base url>/v1/chat/completions"
/// unless the URL already carries a path.
class RemoteJudge : public JudgeBackend {
public:
    RemoteJudge(std::string url, std::string model, std::string api_key = "");

    std::string kind() const override { return "remote-endpoint"; }
    std::string complete_once(const std::string& prompt) override;

    std::string system_message = "You are a careful, impartial evaluator.";

private:
    std::string base_;
    std::string path_;
    std::string model_;
    std::string api_key_;
};

/// Builds a backend from a CLI spec: "scripted:FILE" or "remote:URL".
/// Remote model and key come from MPO_JUDGE_MODEL / MPO_JUDGE_KEY.
std::unique_ptr<JudgeBackend> make_judge_backend(const std::string& spec);

}  // namespace mpo
