#pragma once

#include <stdexcept>
#include <string>

namespace hapsurf {

/// Point or region outside the valid geometry (plate, grid, contact area).
class GeometryError : public std::runtime_error {
public:
    explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration value (non-positive dimension, bad mode count, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed persisted data; the message names the offending field or line.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Violated ordering or consistency of a streamed input.
class StreamError : public std::runtime_error {
public:
    explicit StreamError(const std::string& what) : std::runtime_error(what) {}
};

/// A planner could not satisfy its constraints; message lists near misses.
class PlanningError : public std::runtime_error {
public:
    explicit PlanningError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace hapsurf
