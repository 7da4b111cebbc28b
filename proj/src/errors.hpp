#pragma once

#include <stdexcept>
#include <string>

namespace gridtrade {

// Malformed wire rows, cache lines and decimal text.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Semantic problems with otherwise well-formed data (ordering, duplicates, empty input).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numeric range problems, e.g. a ladder whose levels overflow a double.
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NetworkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when an engine invariant that should be unreachable is violated.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace gridtrade
