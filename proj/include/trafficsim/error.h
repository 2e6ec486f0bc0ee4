#pragma once

#include <stdexcept>
#include <string>

namespace trafficsim {

    class Error : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

    // Malformed document. `position` is a byte offset into the input when known.
    class ParseError : public Error {
    public:
        ParseError(const std::string &message, std::size_t position = npos)
            : Error(position == npos ? message : message + " (at byte " + std::to_string(position) + ")"),
              position(position) {}

        static constexpr std::size_t npos = static_cast<std::size_t>(-1);
        std::size_t position;
    };

    // Well-formed document that references something that does not exist or breaks an invariant.
    class SemanticError : public Error {
    public:
        using Error::Error;
    };

    class ConfigError : public Error {
    public:
        using Error::Error;
    };

    class ParameterError : public Error {
    public:
        using Error::Error;
    };

    // Caller broke a precondition of a stateful operation.
    class ContractError : public Error {
    public:
        using Error::Error;
    };

    // The engine detected corrupted world state.
    class InvariantError : public Error {
    public:
        using Error::Error;
    };

}
