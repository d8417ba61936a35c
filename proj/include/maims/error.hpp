#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace maims {

/// Base of every error thrown by the library. `kind()` is a stable
/// machine-readable tag (used by the CLI and the Python bindings).
class Error : public std::runtime_error {
  public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

  private:
    std::string kind_;
};

class FileNotFound : public Error {
  public:
    explicit FileNotFound(const std::string& path)
        : Error("FileNotFound", "file not found: " + path), path_(path) {}
    [[nodiscard]] const std::string& path() const noexcept { return path_; }

  private:
    std::string path_;
};

class MalformedScale : public Error {
  public:
    explicit MalformedScale(std::vector<std::string> violations)
        : Error("MalformedScale", join(violations)), violations_(std::move(violations)) {}
    [[nodiscard]] const std::vector<std::string>& violations() const noexcept { return violations_; }

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "malformed scale";
        for (const auto& s : v) out += "\n  " + s;
        return out;
    }
    std::vector<std::string> violations_;
};

class MalformedTask : public Error {
  public:
    explicit MalformedTask(std::vector<std::string> violations)
        : Error("MalformedTask", join(violations)), violations_(std::move(violations)) {}
    [[nodiscard]] const std::vector<std::string>& violations() const noexcept { return violations_; }

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "malformed task";
        for (const auto& s : v) out += "\n  " + s;
        return out;
    }
    std::vector<std::string> violations_;
};

class MalformedRecord : public Error {
  public:
    MalformedRecord(std::size_t line, const std::string& reason)
        : Error("MalformedRecord", "line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string& reason() const noexcept { return reason_; }

  private:
    std::size_t line_;
    std::string reason_;
};

class DuplicateId : public Error {
  public:
    explicit DuplicateId(const std::string& post_id)
        : Error("DuplicateId", "duplicate post id: " + post_id), post_id_(post_id) {}
    [[nodiscard]] const std::string& post_id() const noexcept { return post_id_; }

  private:
    std::string post_id_;
};

class MissingLabel : public Error {
  public:
    explicit MissingLabel(const std::string& post_id)
        : Error("MissingLabel", "gold label required but missing for post " + post_id), post_id_(post_id) {}
    [[nodiscard]] const std::string& post_id() const noexcept { return post_id_; }

  private:
    std::string post_id_;
};

class ScaleMismatch : public Error {
  public:
    ScaleMismatch(const std::string& expected, const std::string& got)
        : Error("ScaleMismatch", "scale id mismatch: scale is '" + expected + "', response is '" + got + "'") {}
};

class UnknownOption : public Error {
  public:
    UnknownOption(const std::string& item_id, const std::string& code)
        : Error("UnknownOption", "item " + item_id + ": unknown option code '" + code + "'") {}
};

class BackendUnreachable : public Error {
  public:
    BackendUnreachable(const std::string& role, const std::string& detail)
        : Error("BackendUnreachable", "backend for role " + role + " unreachable: " + detail) {}
};

class BackendRejected : public Error {
  public:
    BackendRejected(int status, std::string body)
        : Error("BackendRejected", "backend rejected request with HTTP " + std::to_string(status) + ": " + body),
          status_(status), body_(std::move(body)) {}
    [[nodiscard]] int status() const noexcept { return status_; }
    [[nodiscard]] const std::string& body() const noexcept { return body_; }

  private:
    int status_;
    std::string body_;
};

class MockScriptMiss : public Error {
  public:
    explicit MockScriptMiss(const std::string& digest)
        : Error("MockScriptMiss", "mock script has no entry for prompt digest " + digest), digest_(digest) {}
    [[nodiscard]] const std::string& digest() const noexcept { return digest_; }

  private:
    std::string digest_;
};

class EmptyCache : public Error {
  public:
    explicit EmptyCache(const std::string& dir) : Error("EmptyCache", "cache is empty: " + dir) {}
};

class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& message) : Error("ConfigError", message) {}
};

class TemplateError : public Error {
  public:
    explicit TemplateError(const std::string& message) : Error("TemplateError", message) {}
};

class PipelineFailure : public Error {
  public:
    explicit PipelineFailure(const std::string& message) : Error("PipelineFailure", message) {}
};

class LengthMismatch : public Error {
  public:
    LengthMismatch(std::size_t a, std::size_t b)
        : Error("LengthMismatch", "label vectors differ in length: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class EmptyInput : public Error {
  public:
    EmptyInput() : Error("EmptyInput", "label vectors are empty") {}
};

class MissingGold : public Error {
  public:
    explicit MissingGold(const std::string& post_id)
        : Error("MissingGold", "no gold label for post " + post_id) {}
};

class UnknownRecord : public Error {
  public:
    explicit UnknownRecord(const std::string& post_id)
        : Error("UnknownRecord", "record references post not in corpus: " + post_id) {}
};

class NotFound : public Error {
  public:
    explicit NotFound(const std::string& what) : Error("NotFound", "not found: " + what) {}
};

} // namespace maims
