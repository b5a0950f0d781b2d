#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ransomtrack {

// Base class for all pipeline errors. CLI maps these to exit code 2 (data),
// anything else to 3 (internal).
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public Error {
  public:
    explicit IoError(const std::string& path, const std::string& reason)
        : Error("io error: " + path + ": " + reason) {}
};

class UnknownFeatureError : public Error {
  public:
    UnknownFeatureError(const std::string& feature, const std::string& record_id)
        : Error("unknown feature '" + feature + "' in record " + record_id),
          feature_(feature), record_id_(record_id) {}
    const std::string& feature() const { return feature_; }
    const std::string& record_id() const { return record_id_; }

  private:
    std::string feature_;
    std::string record_id_;
};

class IdMismatchError : public Error {
  public:
    explicit IdMismatchError(std::size_t row)
        : Error("id mismatch at row " + std::to_string(row)), row_(row) {}
    std::size_t row() const { return row_; }

  private:
    std::size_t row_;
};

class DuplicateFeatureError : public Error {
  public:
    explicit DuplicateFeatureError(const std::string& name)
        : Error("duplicate feature '" + name + "'"), name_(name) {}
    const std::string& name() const { return name_; }

  private:
    std::string name_;
};

class SchemaViolationError : public Error {
  public:
    SchemaViolationError(std::size_t row, std::size_t col, const std::string& reason)
        : Error("schema violation at row " + std::to_string(row) + ", col " +
                std::to_string(col) + ": " + reason),
          row_(row), col_(col) {}
    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

  private:
    std::size_t row_;
    std::size_t col_;
};

class BadDigestError : public Error {
  public:
    explicit BadDigestError(std::size_t row)
        : Error("malformed digest at row " + std::to_string(row)), row_(row) {}
    std::size_t row() const { return row_; }

  private:
    std::size_t row_;
};

class MalformedEventError : public Error {
  public:
    MalformedEventError(std::size_t line, const std::string& reason)
        : Error("malformed trace event at line " + std::to_string(line) + ": " + reason),
          line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class InsufficientSamplesError : public Error {
  public:
    explicit InsufficientSamplesError(int label)
        : Error("class " + std::to_string(label) + " has fewer than 2 samples") {}
};

class DegenerateTrainingError : public Error {
  public:
    DegenerateTrainingError() : Error("training data contains a single class") {}
};

class SpaceMismatchError : public Error {
  public:
    SpaceMismatchError() : Error("feature space does not match the model's space") {}
};

class LengthMismatchError : public Error {
  public:
    LengthMismatchError(std::size_t a, std::size_t b)
        : Error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class SingleClassError : public Error {
  public:
    SingleClassError() : Error("stratified split requires both classes") {}
};

class TooManyFeaturesError : public Error {
  public:
    explicit TooManyFeaturesError(std::size_t n)
        : Error("exact Shapley enumeration capped at 15 features, got " + std::to_string(n)) {}
};

class UnsupportedModelError : public Error {
  public:
    explicit UnsupportedModelError(const std::string& kind)
        : Error("operation not supported for model kind '" + kind + "'") {}
};

class PlanInvalidError : public Error {
  public:
    explicit PlanInvalidError(const std::string& reason)
        : Error("invalid synth plan: " + reason) {}
};

class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& reason) : Error("config: " + reason) {}
};

} // namespace ransomtrack
