#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dlr/miner/functions.hpp"

namespace dlr::miner {

struct PairingResult {
  std::vector<std::pair<FunctionSpan, FunctionSpan>> pairs;
  std::size_t ambiguous = 0;  // (name, arity) keys seen more than once
  std::size_t unmatched = 0;
};

// Pairs functions by (name, parameter count). Keys that occur more than once
// on either side are dropped as ambiguous. Pairs come out in before order.
PairingResult pair_functions(std::span<const FunctionSpan> before, std::span<const FunctionSpan> after);

}  // namespace dlr::miner
