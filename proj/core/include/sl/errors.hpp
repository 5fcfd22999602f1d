#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sl {

// Every failure raised by the library derives from Error so that the CLI
// can map it onto a stable exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(int line, int col, const std::string& what)
      : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(col) + ": " + what),
        line(line),
        col(col) {}
  int line;
  int col;
};

class UnboundIdentifier : public Error {
 public:
  explicit UnboundIdentifier(const std::string& id) : Error("unbound identifier " + id), id(id) {}
  std::string id;
};

class ArityMismatch : public Error {
 public:
  ArityMismatch(const std::string& id, std::size_t expected, std::size_t got)
      : Error("arity mismatch for " + id + ": expected " + std::to_string(expected) + ", got " +
              std::to_string(got)),
        id(id) {}
  std::string id;
};

class UndeclaredSignal : public Error {
 public:
  explicit UndeclaredSignal(const std::string& s) : Error("undeclared signal " + s), signal(s) {}
  std::string signal;
};

// Raised when a thread touches a signal outside the environment's domain.
// It can only happen if an invariant of the interpreter is broken.
class UnboundSignal : public Error {
 public:
  explicit UnboundSignal(const std::string& s) : Error("signal outside environment: " + s), signal(s) {}
  std::string signal;
};

class NotSuspended : public Error {
 public:
  NotSuspended() : Error("end of instant requested on a thread that can still reduce") {}
};

class FuelExhausted : public Error {
 public:
  FuelExhausted(std::uint64_t steps, std::size_t instant)
      : Error("fuel exhausted after " + std::to_string(steps) + " reductions in instant " +
              std::to_string(instant)),
        steps(steps),
        instant(instant) {}
  std::uint64_t steps;
  std::size_t instant;
};

class IndexExplosion : public Error {
 public:
  explicit IndexExplosion(std::size_t limit)
      : Error("CPS equation table exceeded " + std::to_string(limit) + " indices"), limit(limit) {}
  std::size_t limit;
};

class ArityTooLarge : public Error {
 public:
  explicit ArityTooLarge(int n) : Error("input arity " + std::to_string(n) + " exceeds 12") {}
};

class HasSignalGeneration : public Error {
 public:
  HasSignalGeneration() : Error("program generates signals; no finite Mealy machine extraction") {}
};

class StateExplosion : public Error {
 public:
  explicit StateExplosion(std::size_t limit)
      : Error("more than " + std::to_string(limit) + " reachable states") {}
};

class StateLimit : public Error {
 public:
  explicit StateLimit(std::size_t limit) : Error("state limit " + std::to_string(limit) + " reached") {}
};

class NotFiniteState : public Error {
 public:
  NotFiniteState()
      : Error("exact bisimulation refused: program combines recursion with signal generation") {}
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace sl
