#ifndef ABRSIM_ERROR_H_
#define ABRSIM_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace abrsim {

// Precondition or invariant violation in caller-supplied data.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input file. `row()` is 1-based and counts the header row.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : std::runtime_error(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

using TraceParseError = ParseError;

// The trace delivers no more data but bytes are still outstanding.
class DownloadStarved : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace abrsim

#endif  // ABRSIM_ERROR_H_
