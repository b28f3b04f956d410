#pragma once

#include <stdexcept>

namespace lipfield {

/// A numerical solve failed (singular system, iteration budget exhausted).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lipfield
