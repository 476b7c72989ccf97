#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vqa {

// Root of every error the library raises. Callers that only need a message
// can catch this; the CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, std::string token)
      : Error("parse error at byte " + std::to_string(position) + " near '" + token + "'"),
        position_(position),
        token_(std::move(token)) {}
  std::size_t position() const noexcept { return position_; }
  const std::string& token() const noexcept { return token_; }

 private:
  std::size_t position_;
  std::string token_;
};

class TruncatedFrame : public Error {
 public:
  explicit TruncatedFrame(std::size_t index)
      : Error("truncated or missing frame payload at frame " + std::to_string(index)), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class Unsupported : public Error {
 public:
  explicit Unsupported(std::string tag) : Error("unsupported format tag '" + tag + "'"), tag_(std::move(tag)) {}
  const std::string& tag() const noexcept { return tag_; }

 private:
  std::string tag_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  EmptyInput() : Error("empty input") {}
  explicit EmptyInput(const std::string& what) : Error(what) {}
};

class InsufficientFrames : public Error {
 public:
  using Error::Error;
};

class SourceTooSmall : public Error {
 public:
  using Error::Error;
};

class PlaneTooSmall : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class NoTrainablePairs : public Error {
 public:
  NoTrainablePairs() : Error("no dataset contains a pair with distinct MOS values") {}
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class DegenerateScores : public Error {
 public:
  explicit DegenerateScores(std::size_t model)
      : Error("score list " + std::to_string(model) + " has zero variance"), model_(model) {}
  std::size_t model() const noexcept { return model_; }

 private:
  std::size_t model_;
};

class UndefinedCorrelation : public Error {
 public:
  UndefinedCorrelation() : Error("correlation undefined for constant input") {}
};

class JoinError : public Error {
 public:
  explicit JoinError(std::string id) : Error("no matching row for clip_id '" + id + "'"), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(std::string id) : Error("duplicate clip_id '" + id + "'"), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class SpecMismatch : public Error {
 public:
  using Error::Error;
};

class PipelineFailure : public Error {
 public:
  PipelineFailure(std::size_t run, const std::string& what)
      : Error("pipeline failed on run " + std::to_string(run) + ": " + what), run_(run) {}
  std::size_t run() const noexcept { return run_; }

 private:
  std::size_t run_;
};

}  // namespace vqa
