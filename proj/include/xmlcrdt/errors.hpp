#pragma once

#include <stdexcept>
#include <string>

namespace xmlcrdt {

/// A message was delivered twice. Effect counters are not idempotent, so
/// the engine enforces exactly-once delivery by rejecting a timestamp it
/// has already recorded.
struct DuplicateDeliveryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A message arrived before one of its prerequisites (parent Add, target
/// Add, or the operation an Undo/Redo refers to). The delivery harness is
/// expected to hold such messages back; reaching the engine is a bug in
/// the harness, not a recoverable condition.
struct CausalityViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Clock or minimum regression on a channel that is supposed to be FIFO.
struct FifoViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// generate_position called with left >= right.
struct InvalidBoundaryError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A scripted or fuzzed action could not be generated (e.g. deleting an
/// invisible edge, undoing outside the authorization window).
struct GenerationRejectedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace xmlcrdt
