#pragma once

#include <stdexcept>
#include <string>

namespace fvim {

// Raised when a numerical quantity (gradient, loss, optimizer state) stops
// being finite. Training loops catch this and std::overflow_error and record
// them as stability events instead of crashing: a failed run is data.
class NonFiniteError : public std::runtime_error {
public:
    explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

struct StabilityEvent {
    int iteration = 0;
    std::string description;
};

}  // namespace fvim
