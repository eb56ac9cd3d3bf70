#include "procat/common.hpp"

#include <numeric>

namespace procat {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Holds: return "Holds";
    case Outcome::Fails: return "Fails";
    case Outcome::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

Verdict Verdict::holds(Json evidence) { return {Outcome::Holds, std::move(evidence), 0}; }
Verdict Verdict::fails(Json evidence) { return {Outcome::Fails, std::move(evidence), 0}; }
Verdict Verdict::inconclusive(std::int64_t horizon, Json evidence) {
  return {Outcome::Inconclusive, std::move(evidence), horizon};
}

Json to_json(const Verdict& v) {
  Json j = {{"verdict", to_string(v.outcome)}, {"evidence", v.evidence}};
  if (v.is_inconclusive()) j["horizon"] = v.horizon;
  return j;
}

Outcome meet(Outcome a, Outcome b) {
  if (a == Outcome::Fails || b == Outcome::Fails) return Outcome::Fails;
  if (a == Outcome::Inconclusive || b == Outcome::Inconclusive) return Outcome::Inconclusive;
  return Outcome::Holds;
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

std::int64_t lcm64(std::int64_t a, std::int64_t b) {
  if (a == 0 || b == 0) return 0;
  return (a / std::gcd(a, b)) * b;
}

std::int64_t mod64(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

std::int64_t mulmod64(std::int64_t a, std::int64_t b, std::int64_t m) {
  __int128 p = static_cast<__int128>(mod64(a, m)) * static_cast<__int128>(mod64(b, m));
  return static_cast<std::int64_t>(p % m);
}

}  // namespace procat
