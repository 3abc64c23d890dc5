#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace terrasight {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A query or window left the 20 m x 20 m map.
class OutOfMapError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling could not place a terrain feature.
class PlacementError : public Error {
 public:
  using Error::Error;
};

/// An episode could not be completed (left the map, camera inside terrain).
/// Aborted episodes are regenerated with a fresh seed, never stored.
class EpisodeAborted : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Base class for dataset read failures; each subclass is a distinct cause.
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

class DimensionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class PathError : public FormatError {
 public:
  PathError(const std::string& what, std::int64_t episode_index)
      : FormatError(what), episode_index_(episode_index) {}

  std::int64_t episode_index() const { return episode_index_; }

 private:
  std::int64_t episode_index_;
};

}  // namespace terrasight
