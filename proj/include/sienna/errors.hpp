#pragma once

#include <stdexcept>
#include <string>

namespace sienna {

// Violated precondition or malformed input (length mismatch, bad parameter).
class SpecError : public std::invalid_argument {
public:
    explicit SpecError(const std::string& what) : std::invalid_argument(what) {}
};

// Message or transition that the pairing state machine does not accept.
class ProtocolError : public std::logic_error {
public:
    explicit ProtocolError(const std::string& what) : std::logic_error(what) {}
};

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw SpecError(what);
}

} // namespace sienna
