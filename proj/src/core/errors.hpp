#pragma once

#include <stdexcept>
#include <string>

namespace specsharp {

enum class ErrorKind {
    contract,  // precondition violated by the caller
    decode,    // unreadable or unsupported image data
    io,        // file system failure
    cache,     // weight cache missing, stale or corrupt
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ContractError : public Error {
public:
    explicit ContractError(const std::string& what) : Error(ErrorKind::contract, what) {}
};

class DecodeError : public Error {
public:
    explicit DecodeError(const std::string& what) : Error(ErrorKind::decode, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class CacheError : public Error {
public:
    explicit CacheError(const std::string& what) : Error(ErrorKind::cache, what) {}
};

inline void require(bool condition, const std::string& message) {
    if (!condition)
        throw ContractError(message);
}

}  // namespace specsharp
