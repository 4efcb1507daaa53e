#pragma once

#include <stdexcept>
#include <string>

namespace ldiphoto {

/// Malformed or inconsistent input (files, dimensions, parameters).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid planar geometry, e.g. a self-intersecting chart polygon.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values produced during computation.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ldiphoto
