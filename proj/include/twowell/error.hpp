#pragma once

#include <stdexcept>
#include <string>

namespace twowell {

/// Invalid parameters or malformed input (CLI exit code 2).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A computation left its domain of validity (CLI exit code 3):
/// singular cosets, points outside the hull, failed decompositions.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace twowell
