#pragma once

#include <stdexcept>
#include <string>

namespace gwrdp {

// Base for everything the library throws on bad input or impossible requests.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: shape mismatches, invalid pmfs, out-of-range indices.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The constraint set of an optimization (or a typical set) is empty.
class Infeasible : public Error {
 public:
  using Error::Error;
};

// A request exceeds a configured resource cap (memory, enumeration size).
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

}  // namespace gwrdp
