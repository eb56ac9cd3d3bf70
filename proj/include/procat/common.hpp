#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace procat {

using Json = nlohmann::json;

// Base class for every error raised by the library.  `kind` is a stable
// machine-readable tag (e.g. "TypeMismatch", "BudgetExceeded").
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Search limits shared by every procedure that may scan an infinite domain.
struct Limits {
  std::int64_t horizon = 64;
  std::int64_t budget = 1'000'000;
};

enum class Outcome { Holds, Fails, Inconclusive };

std::string to_string(Outcome o);

// Three-valued outcome of a decision procedure.  Holds and Fails carry
// replayable evidence; Inconclusive records the horizon that was exhausted.
struct Verdict {
  Outcome outcome = Outcome::Inconclusive;
  Json evidence = Json::object();
  std::int64_t horizon = 0;

  static Verdict holds(Json evidence = Json::object());
  static Verdict fails(Json evidence = Json::object());
  static Verdict inconclusive(std::int64_t horizon, Json evidence = Json::object());

  bool is_holds() const noexcept { return outcome == Outcome::Holds; }
  bool is_fails() const noexcept { return outcome == Outcome::Fails; }
  bool is_inconclusive() const noexcept { return outcome == Outcome::Inconclusive; }
};

Json to_json(const Verdict& v);

// Conjunction: any Fails wins, else any Inconclusive, else Holds.
Outcome meet(Outcome a, Outcome b);

std::int64_t gcd64(std::int64_t a, std::int64_t b);
std::int64_t lcm64(std::int64_t a, std::int64_t b);
// Non-negative remainder.
std::int64_t mod64(std::int64_t a, std::int64_t m);
// (a * b) mod m without overflow.
std::int64_t mulmod64(std::int64_t a, std::int64_t b, std::int64_t m);

}  // namespace procat
