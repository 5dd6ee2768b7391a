#pragma once

#include <stdexcept>

namespace binpack {

// One exception type per failure mode so callers and tests can catch
// precisely what they expect.

struct OutOfBounds : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasiblePlacement : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyStream : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BadConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CyclicDependency : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatVersionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingCache : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BadSchedule : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AllMasked : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MaskedTarget : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedTrace : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingCheckpoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace binpack
