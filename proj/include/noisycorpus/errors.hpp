// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <stdexcept>
#include <string>

namespace noisycorpus {

// Malformed input text (bad UTF-8, wrong column count, bad TSV line, ...).
// Messages carry 1-based line numbers where applicable.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally parseable input that violates a domain invariant
// (reserved placeholder present, malformed label, empty token, ...).
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Child-process failures: spawn, timeout, nonzero exit, line-count mismatch.
class ProcessError : public std::runtime_error {
public:
  explicit ProcessError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace noisycorpus
