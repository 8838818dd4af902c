#pragma once

#include <stdexcept>
#include <string>

namespace spectrace {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyDocument : Error {
    using Error::Error;
};
struct RootNotFound : Error {
    using Error::Error;
};
struct PermissionDenied : Error {
    using Error::Error;
};
struct ProviderFailure : Error {
    using Error::Error;
};
struct AuthError : Error {
    using Error::Error;
};
struct UnparseableResponse : Error {
    using Error::Error;
};
struct EmbeddingFailure : Error {
    using Error::Error;
};
struct MissingGroundTruth : Error {
    using Error::Error;
};
struct EmptyIndex : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

} // namespace spectrace
