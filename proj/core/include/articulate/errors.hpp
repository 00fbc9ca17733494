#pragma once

#include <stdexcept>
#include <string>

namespace articulate {

// Named error conditions. Each maps to one failure mode of the pipeline so
// callers (and the CLI) can report which contract was violated.

struct DegenerateInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooFewPoints : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StateOutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownCategory : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegeneratePart : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResampleLimitExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaVersionMismatch : SchemaError {
  using SchemaError::SchemaError;
};
struct LengthMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyPart : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientVotes : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CountMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateAxis : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace articulate
