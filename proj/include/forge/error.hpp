#pragma once
// Error type shared by every forge module.
//
// All failures are reported as forge::Error carrying a machine-readable kind;
// the CLI prints them as a single `error: <kind>: <message>` line.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

enum class ErrorKind {
    empty_input,
    invalid_table,
    exhaustion,
    parse,
    load,
    unknown_symbol,
    non_termination,
    resolution,
    derivation_failure,
    missing_lexeme,
    derivation_refused,
    arity,
    empty_lexicon,
    alignment,
    missing_resource,
    contract_violation,
    transport,
    io,
    usage,
};

constexpr std::string_view kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::empty_input: return "empty-input";
        case ErrorKind::invalid_table: return "invalid-table";
        case ErrorKind::exhaustion: return "exhaustion";
        case ErrorKind::parse: return "parse";
        case ErrorKind::load: return "load";
        case ErrorKind::unknown_symbol: return "unknown-symbol";
        case ErrorKind::non_termination: return "non-termination";
        case ErrorKind::resolution: return "resolution";
        case ErrorKind::derivation_failure: return "derivation-failure";
        case ErrorKind::missing_lexeme: return "missing-lexeme";
        case ErrorKind::derivation_refused: return "derivation-refused";
        case ErrorKind::arity: return "arity";
        case ErrorKind::empty_lexicon: return "empty-lexicon";
        case ErrorKind::alignment: return "alignment";
        case ErrorKind::missing_resource: return "missing-resource";
        case ErrorKind::contract_violation: return "contract-violation";
        case ErrorKind::transport: return "transport";
        case ErrorKind::io: return "io";
        case ErrorKind::usage: return "usage";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message,
          std::optional<std::size_t> position = std::nullopt)
        : std::runtime_error(message), kind_(kind), position_(position) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Character offset (parse errors), line number (load errors) or attempt
    // count (exhaustion), depending on the kind.
    std::optional<std::size_t> position() const noexcept { return position_; }

private:
    ErrorKind kind_;
    std::optional<std::size_t> position_;
};

}  // namespace forge
