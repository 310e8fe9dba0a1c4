#ifndef NCC_ERRORS_HPP_
#define NCC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ncc {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Source and target files disagree on segment count.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Invalid compound list handed to the fuser.
class FusionError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

// Lookup of a word the model or vocabulary does not know.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace ncc

#endif  // NCC_ERRORS_HPP_
