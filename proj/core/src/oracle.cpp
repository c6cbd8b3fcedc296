#include "prevent/oracle.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace prevent::harness {

namespace {

bool in_contact(const TruthStay& previous, const TruthStay& candidate,
                const orchestration::QueryParams& params) {
  const std::int64_t dx = candidate.stay.p.x - previous.stay.p.x;
  const std::int64_t dy = candidate.stay.p.y - previous.stay.p.y;
  if (dx * dx + dy * dy >
      params.infectious_distance_cm * params.infectious_distance_cm) {
    return false;
  }
  const std::int64_t gap =
      static_cast<std::int64_t>(candidate.stay.arrival_seconds) -
      static_cast<std::int64_t>(previous.stay.arrival_seconds);
  if (params.symmetric_window) {
    return gap <= params.infectious_window_s &&
           -gap <= params.infectious_window_s;
  }
  return gap <= params.infectious_window_s;
}

}  // namespace

std::vector<OracleHit> oracle_trace(std::span<const TruthStay> stays,
                                    std::uint32_t patient,
                                    const orchestration::QueryParams& params,
                                    std::int32_t query_day) {
  const std::int32_t window =
      static_cast<std::int32_t>(params.incubation_days);
  auto in_window = [&](std::int32_t day, std::int32_t anchor) {
    return day > anchor - window && day <= anchor;
  };

  // Contacts share a day, so the all-pairs scan runs per day bucket.
  std::unordered_map<std::int32_t, std::vector<std::size_t>> by_day;
  for (std::size_t i = 0; i < stays.size(); ++i) {
    by_day[stays[i].day].push_back(i);
  }

  std::vector<std::size_t> frontier;
  std::vector<std::int32_t> generation(stays.size(), -1);
  for (std::size_t i = 0; i < stays.size(); ++i) {
    if (stays[i].user == patient && in_window(stays[i].day, query_day)) {
      generation[i] = 0;
      frontier.push_back(i);
    }
  }

  std::map<std::uint32_t, std::uint32_t> best_generation;
  std::uint32_t gen = 1;
  while (!frontier.empty()) {
    if (params.max_generations && gen > *params.max_generations) break;
    std::vector<std::size_t> next;
    for (std::size_t f : frontier) {
      // The default keeps the first patient's window for every
      // generation; the variant re-anchors at the contact's record.
      const std::int32_t anchor =
          params.window_from_contact ? stays[f].day : query_day;
      if (!in_window(stays[f].day, anchor)) continue;
      auto bucket = by_day.find(stays[f].day);
      if (bucket == by_day.end()) continue;
      for (std::size_t i : bucket->second) {
        if (generation[i] >= 0) continue;
        if (!in_contact(stays[f], stays[i], params)) continue;
        generation[i] = static_cast<std::int32_t>(gen);
        next.push_back(i);
        const std::uint32_t user = stays[i].user;
        if (user != patient && !best_generation.contains(user)) {
          best_generation.emplace(user, gen);
        }
      }
    }
    frontier = std::move(next);
    ++gen;
  }

  std::vector<OracleHit> hits;
  hits.reserve(best_generation.size());
  for (const auto& [user, g] : best_generation) {
    hits.push_back(OracleHit{user, g});
  }
  std::sort(hits.begin(), hits.end(),
            [](const OracleHit& a, const OracleHit& b) {
              if (a.generation != b.generation) return a.generation < b.generation;
              return a.user < b.user;
            });
  return hits;
}

}  // namespace prevent::harness
