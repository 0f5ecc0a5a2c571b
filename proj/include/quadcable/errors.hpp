#pragma once
#include <stdexcept>
#include <string>

namespace quadcable {

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct InvalidState : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularConfiguration : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AllocationInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateAllocation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateAttitude : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CertificationFailed : std::runtime_error {
  int condition = 0;
  CertificationFailed(const std::string& what, int cond)
      : std::runtime_error(what), condition(cond) {}
};
struct InvalidGains : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalBlowup : std::runtime_error {
  long step;
  double time;
  NumericalBlowup(const std::string& what, long k, double t)
      : std::runtime_error(what), step(k), time(t) {}
};

// config problems; `field` is the dotted key that failed
struct ValidationError : std::runtime_error {
  std::string field;
  ValidationError(const std::string& key, const std::string& msg)
      : std::runtime_error(key + ": " + msg), field(key) {}
};

}  // namespace quadcable
