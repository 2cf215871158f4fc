#pragma once

#include <stdexcept>
#include <string>

namespace oubridge {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not proceed (stability bound, singular step,
/// non-finite intermediate).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace oubridge
