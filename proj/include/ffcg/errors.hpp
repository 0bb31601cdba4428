#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ffcg {

// Every library failure derives from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FFCG_DEFINE_ERROR(Name)            \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

FFCG_DEFINE_ERROR(DimensionMismatch);
FFCG_DEFINE_ERROR(NumericalBreakdown);
FFCG_DEFINE_ERROR(InvalidRange);
FFCG_DEFINE_ERROR(InvalidCount);
FFCG_DEFINE_ERROR(InfeasibleInitialization);
FFCG_DEFINE_ERROR(StateInconsistency);
FFCG_DEFINE_ERROR(UnknownColumn);
FFCG_DEFINE_ERROR(InvalidBaseline);
FFCG_DEFINE_ERROR(ShapeMismatch);
FFCG_DEFINE_ERROR(EmptyBatch);
FFCG_DEFINE_ERROR(EmptyCandidates);
FFCG_DEFINE_ERROR(InvalidArgument);

#undef FFCG_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace ffcg
