#pragma once

#include <stdexcept>
#include <string>

namespace vitalsel {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (sizes, ranges, empty inputs).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Input data could not be used: malformed files, inconsistent catalogs, missing labels.
class DataError : public Error {
public:
    using Error::Error;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw InvalidArgument(message);
    }
}

} // namespace vitalsel
