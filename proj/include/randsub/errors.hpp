#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace randsub {

// Precondition violations on otherwise well-formed input: empty graphs,
// loops where none are allowed, dimension mismatches, bad indices.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A finite extraction could not reach the requested size. The underlying
// objects are infinite; on finite windows we report how far we got.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, std::size_t max_achievable)
      : std::runtime_error(what), max_achievable_(max_achievable) {}

  std::size_t max_achievable() const noexcept { return max_achievable_; }

 private:
  std::size_t max_achievable_;
};

// Malformed input document. Line numbers are 1-based; 0 means unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace randsub
