#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "prevent/orchestration.hpp"
#include "prevent/workload.hpp"

namespace prevent::harness {

struct OracleHit {
  std::uint32_t user = 0;
  std::uint32_t generation = 1;
  bool operator==(const OracleHit&) const = default;
};

// Brute-force plaintext reference for the multi-generation query:
// breadth-first search over stay points with exact integer arithmetic.
// Two stays are in contact when they share a day, their distance is
// at most D and their arrival gap fits the window. Every stay of the
// patient inside the incubation window seeds the search; the patient
// never appears in the output.
std::vector<OracleHit> oracle_trace(std::span<const TruthStay> stays,
                                    std::uint32_t patient,
                                    const orchestration::QueryParams& params,
                                    std::int32_t query_day);

}  // namespace prevent::harness
