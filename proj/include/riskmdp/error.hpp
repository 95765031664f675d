// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT

#ifndef RISKMDP_ERROR_HPP
#define RISKMDP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace riskmdp {

/// Exception type carrying a stable machine-readable error kind alongside the
/// human-readable message.  Kinds are part of the public contract (tests and
/// the CLI exit-code mapping dispatch on them):
///
///   NegativeProb, MassNotOne, EmptySupport, NegativeScale, LengthMismatch,
///   BadWeights, BadLevel, BadTau, BadEta, EmptyScenarios, Overflow,
///   ParseError, ValidationError, IoError, NegativeAsk, InvalidBook,
///   SizeOverflow, InadmissibleAction, NoActions, NotStationary,
///   NotNormalized, PolicyIncomplete, BadArgs, TreeTooLarge,
///   EnumerationTooLarge, TooManyActions, SolveFailed
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

[[noreturn]] inline void fail(std::string kind, const std::string& message) {
    throw Error(std::move(kind), message);
}

} // namespace riskmdp

#endif // RISKMDP_ERROR_HPP
