#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fogplace {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: unknown ids, bad config values, parse failures.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what) {}
  InputError(const std::string& what, std::vector<std::string> details)
      : Error(join(what, details)), details_(std::move(details)) {}

  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  static std::string join(const std::string& head, const std::vector<std::string>& lines) {
    std::string out = head;
    for (const auto& line : lines) {
      out += "\n  - ";
      out += line;
    }
    return out;
  }

  std::vector<std::string> details_;
};

/// Constraint class that made a problem infeasible.
enum class Infeasibility {
  timing,     // 4-minute budget cannot be met
  rate,       // a link cannot grant the minimum resource allocation
  capacity,   // demand exceeds what the candidate nodes can host
  placement,  // no assignment satisfies coverage/geo/cap together
};

inline const char* to_string(Infeasibility kind) {
  switch (kind) {
    case Infeasibility::timing: return "timing";
    case Infeasibility::rate: return "rate";
    case Infeasibility::capacity: return "capacity";
    case Infeasibility::placement: return "placement";
  }
  return "unknown";
}

class InfeasibleError : public Error {
 public:
  InfeasibleError(Infeasibility kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  Infeasibility kind() const noexcept { return kind_; }

 private:
  Infeasibility kind_;
};

}  // namespace fogplace
