#pragma once

#include <stdexcept>
#include <string>

namespace pkm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// topology
struct NotATree : Error { using Error::Error; };
struct NonCanonicalOrder : Error { using Error::Error; };
struct DanglingBody : Error { using Error::Error; };
struct UnknownBody : Error { using Error::Error; };

// constraints / solver
struct SingularGy : Error { using Error::Error; };
struct SingularTaskJacobian : Error { using Error::Error; };
struct MaxIterationsExceeded : Error { using Error::Error; };

// dynamics
struct SingularActuationJacobian : Error { using Error::Error; };

// front end
struct ConfigError : Error { using Error::Error; };
struct ModelError : Error { using Error::Error; };

}  // namespace pkm
