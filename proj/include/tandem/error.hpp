// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tandem {

enum class ErrorCode {
    UnsatisfiableConfig,
    IllegalAction,
    UnknownGoal,
    UnknownTarget,
    SchemaMismatch,
    CorruptDocument,
    EvaluatorFailure,
    RemoteProtocolError,
    UnparseableReply,
    IrreparablePlan,
    NoPathToGoal,
    NoSignal,
    TrainingDiverged,
    InvalidMode,
    EmptyTrials,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure the library reports is a tandem::Error carrying one code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tandem
