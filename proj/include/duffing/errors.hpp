// errors.hpp: Exception types shared by the library and the CLI

#pragma once

#include <stdexcept>
#include <string>

namespace duffing {

// Bad or inconsistent configuration. The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Base for the physics guards. The CLI maps every subclass to exit code 2.
class PhysicsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Population reached the top of the Fock truncation.
class TruncationOverflow : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

// Requested detuning is outside the bistable regime.
class NoBistability : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

// P_S(t) did not decay enough inside the record to resolve a rate.
class InsufficientDecay : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

class TraceDrift : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

class DegenerateTracking : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

class GridTooSmall : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

} // namespace duffing
