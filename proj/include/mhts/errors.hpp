#pragma once

#include <stdexcept>
#include <string>

namespace mhts {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments, malformed config, violated preconditions.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

// Anything that went wrong talking to a model provider: auth, retry
// exhaustion, missing replay fixture. Maps to CLI exit code 3.
class ProviderError : public Error {
public:
    explicit ProviderError(const std::string& msg) : Error(msg) {}
};

// A provider failure worth retrying (rate limit, 5xx, connect failure).
class TransientProviderError : public ProviderError {
public:
    explicit TransientProviderError(const std::string& msg) : ProviderError(msg) {}
};

// A pipeline stage failed (missing input artifact, stage logic error).
// Maps to CLI exit code 2.
class StageError : public Error {
public:
    explicit StageError(const std::string& msg) : Error(msg) {}
};

}  // namespace mhts
