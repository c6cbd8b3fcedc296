#pragma once

#include <stdexcept>
#include <string>

namespace prevent {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// field-mpc
class InvalidPartyCount : public Error {
 public:
  using Error::Error;
};
class IncompleteShareSet : public Error {
 public:
  using Error::Error;
};
class TripleExhausted : public Error {
 public:
  using Error::Error;
};
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// spatial-grid / client-agent
class PointOutsideServiceArea : public Error {
 public:
  using Error::Error;
};
class InvalidSequence : public Error {
 public:
  using Error::Error;
};
class OutOfPseudoIds : public Error {
 public:
  using Error::Error;
};
class RetryExhausted : public Error {
 public:
  using Error::Error;
};

// tracing-server
class PseudoIdReuse : public Error {
 public:
  using Error::Error;
};

// subscriber-registry
class AlreadyRegistered : public Error {
 public:
  using Error::Error;
};
class NotRegistered : public Error {
 public:
  using Error::Error;
};

// analytics and config parsing
class InvalidInput : public Error {
 public:
  using Error::Error;
};

}  // namespace prevent
