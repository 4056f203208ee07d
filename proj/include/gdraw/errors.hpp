#pragma once

#include <stdexcept>
#include <string>

namespace gdraw {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error("parse error: " + msg) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error("validation error: " + msg) {}
};

struct ArgumentError : Error {
  explicit ArgumentError(const std::string& msg) : Error("argument error: " + msg) {}
};

struct DegenerateLayout : Error {
  explicit DegenerateLayout(const std::string& msg) : Error("degenerate layout: " + msg) {}
};

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& msg) : Error("shape mismatch: " + msg) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error("domain error: " + msg) {}
};

struct NonScalarLoss : Error {
  explicit NonScalarLoss(const std::string& msg) : Error("non-scalar loss: " + msg) {}
};

struct MissingInitialLayout : Error {
  explicit MissingInitialLayout(const std::string& msg) : Error("missing initial layout: " + msg) {}
};

struct NonFiniteGradient : Error {
  explicit NonFiniteGradient(const std::string& msg) : Error("non-finite gradient: " + msg) {}
};

struct NonFiniteLoss : Error {
  explicit NonFiniteLoss(const std::string& msg) : Error("non-finite loss: " + msg) {}
};

struct EmptyTestSet : Error {
  explicit EmptyTestSet(const std::string& msg) : Error("empty test set: " + msg) {}
};

}  // namespace gdraw
