#include "bdssd/chain.hpp"

namespace bdssd {

std::string_view to_string(Monotonicity m) {
  switch (m) {
    case Monotonicity::Strict: return "strict";
    case Monotonicity::Monotone: return "monotone";
    case Monotonicity::NonMonotone: return "non-monotone";
  }
  return "unknown";
}

}  // namespace bdssd
