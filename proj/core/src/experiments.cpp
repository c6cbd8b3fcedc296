#include "prevent/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "prevent/errors.hpp"

namespace prevent::harness {

namespace {

// p = 0.001 critical value of the chi-square distribution, df = 15.
constexpr double kChiSquareCritical = 37.697;

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

ChiSquare chi_square_uniformity(std::span<const mpc::FieldElement> values) {
  ChiSquare out;
  out.samples = values.size();
  if (values.empty()) return out;

  // 16 buckets over the top 4 bits of the 61-bit value.
  std::array<std::uint64_t, 16> buckets{};
  for (const mpc::FieldElement& v : values) {
    buckets[static_cast<std::size_t>(v.value() >> 57)]++;
  }
  const double expected = static_cast<double>(values.size()) / 16.0;
  double statistic = 0;
  for (std::uint64_t count : buckets) {
    const double diff = static_cast<double>(count) - expected;
    statistic += diff * diff / expected;
  }
  out.statistic = statistic;
  out.pass = statistic < kChiSquareCritical;
  return out;
}

double spearman_rho(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 2) {
    throw InvalidInput("spearman needs two equal series of length >= 2");
  }
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;
      for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mean_rank;
      i = j + 1;
    }
    return rank;
  };
  const std::vector<double> rx = ranks(xs);
  const std::vector<double> ry = ranks(ys);
  const double mean = (static_cast<double>(n) - 1) / 2.0;
  double cov = 0, var_x = 0, var_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (rx[i] - mean) * (ry[i] - mean);
    var_x += (rx[i] - mean) * (rx[i] - mean);
    var_y += (ry[i] - mean) * (ry[i] - mean);
  }
  if (var_x == 0 || var_y == 0) return 0;
  return cov / std::sqrt(var_x * var_y);
}

std::vector<UniformityRow> uniformity_report(const mpc::TraceLog& trace,
                                             std::uint32_t parties) {
  std::vector<UniformityRow> rows;
  if (trace.events().empty()) return rows;
  for (mpc::PartyId p = 0; p < parties; ++p) {
    const std::vector<mpc::FieldElement> received = trace.received_by(p);
    const ChiSquare chi = chi_square_uniformity(received);
    rows.push_back(UniformityRow{"server_" + std::to_string(p),
                                 chi.samples, chi.statistic, chi.pass});
  }
  return rows;
}

void write_uniformity_csv(std::ostream& out,
                          std::span<const UniformityRow> rows) {
  out << "stream,samples,chi_square,pass\n";
  for (const UniformityRow& row : rows) {
    out << row.stream << ',' << row.samples << ',' << row.statistic << ','
        << (row.pass ? 1 : 0) << '\n';
  }
}

Simulation build_simulation(const WorkloadSpec& spec, std::uint32_t servers) {
  Simulation sim;
  sim.spec = spec;
  sim.workload = generate_workload(spec);
  sim.parties = std::make_unique<orchestration::PartySet>(servers, spec.grid,
                                                          spec.seed);
  sim.authority = std::make_unique<subscriber::TokenAuthority>();
  sim.registry = std::make_unique<subscriber::SubscriberRegistry>(
      "sub-0", sim.authority.get(), mpc::SeededRng(spec.seed).fork(0x5b5cUL));
  sim.last_day = static_cast<std::int32_t>(spec.days) - 1;

  // Group fixes per user-day. The workload writes them in (user, day,
  // time) order already.
  std::unordered_map<std::string, std::uint32_t> user_of;
  for (std::uint32_t u = 0; u < spec.users; ++u) {
    user_of.emplace(real_id_for(u), u);
  }
  std::vector<std::vector<std::vector<client::RawFix>>> fixes(
      spec.users,
      std::vector<std::vector<client::RawFix>>(spec.days));
  for (const client::FixRow& row : sim.workload.fixes) {
    fixes[user_of.at(row.user_id)][static_cast<std::size_t>(row.day)]
        .push_back(row.fix);
  }

  std::vector<bool> registered(spec.users, false);
  const auto insert_start = std::chrono::steady_clock::now();
  const std::uint64_t eq_before =
      sim.parties->ctx().counters().equality_tests;

  for (std::int32_t day = 0; day < static_cast<std::int32_t>(spec.days);
       ++day) {
    for (std::uint32_t user = 0; user < spec.users; ++user) {
      const std::vector<client::RawFix>& day_fixes =
          fixes[user][static_cast<std::size_t>(day)];
      if (day_fixes.empty()) continue;
      const std::vector<client::StayPoint> stays = client::detect_stay_points(
          day_fixes, spec.params.infectious_window_s, spec.stay_radius_cm);
      if (stays.empty()) continue;
      sim.stay_points += stays.size();

      client::PseudoIdPool pool =
          registered[user]
              ? sim.registry->issue_pool(real_id_for(user), spec.pool_size)
              : sim.registry->register_user(real_id_for(user), spec.pool_size);
      registered[user] = true;

      mpc::SeededRng agent_rng =
          mpc::SeededRng(spec.seed).fork(0xa6e27ULL).fork(user).fork(
              static_cast<std::uint64_t>(day));
      client::DayReportBatches batches = client::build_day_reports(
          stays, pool, spec.grid, spec.params.infectious_distance_cm,
          servers, agent_rng);
      sim.message_sets += batches.message_sets;
      orchestration::flush(std::move(batches), sim.parties->transport());
    }
    orchestration::ingest_day(*sim.parties, day);
    for (server::TracingServer& srv : sim.parties->servers()) {
      srv.retire_old_days(day, spec.effective_retention());
    }
  }

  sim.insert_equality_tests =
      sim.parties->ctx().counters().equality_tests - eq_before;
  sim.insert_wall_ms = elapsed_ms(insert_start);
  return sim;
}

QueryOutcome run_patient_query(Simulation& sim, std::uint32_t patient_user,
                               bool check_oracle) {
  QueryOutcome out;
  const std::string real_id = real_id_for(patient_user);
  const std::uint64_t before = sim.parties->record_comparisons();
  const auto start = std::chrono::steady_clock::now();
  out.result = sim.registry->is_registered(real_id)
                   ? sim.registry->initiate_trace(real_id, *sim.parties,
                                                  sim.spec.params, sim.last_day)
                   : orchestration::TraceResult{};
  out.wall_ms = elapsed_ms(start);
  out.comparisons = sim.parties->record_comparisons() - before;

  for (const orchestration::TraceResult::Hit& hit : out.result.hits) {
    const std::string* owner = sim.registry->owner_of(hit.pseudo_id);
    if (owner == nullptr) {
      throw ProtocolError("query returned a token nobody issued");
    }
    out.real_ids.insert(*owner);
  }

  if (check_oracle) {
    out.oracle_checked = true;
    std::set<std::string> expected;
    for (const OracleHit& hit :
         oracle_trace(sim.workload.truth, patient_user, sim.spec.params,
                      sim.last_day)) {
      expected.insert(real_id_for(hit.user));
    }
    out.oracle_agreement = expected == out.real_ids;
  }
  return out;
}

const char* axis_name(ExperimentAxis axis) {
  switch (axis) {
    case ExperimentAxis::trajectories: return "trajectories";
    case ExperimentAxis::cell_size: return "cell-size";
    case ExperimentAxis::distance: return "distance";
    case ExperimentAxis::incubation: return "incubation";
  }
  return "unknown";
}

ExperimentAxis parse_axis(const std::string& name) {
  if (name == "trajectories") return ExperimentAxis::trajectories;
  if (name == "cell-size") return ExperimentAxis::cell_size;
  if (name == "distance") return ExperimentAxis::distance;
  if (name == "incubation") return ExperimentAxis::incubation;
  throw InvalidInput("unknown experiment axis: " + name);
}

namespace {

ExperimentRecord measure_level(ExperimentAxis axis, double x_value,
                               const WorkloadSpec& spec,
                               std::uint32_t servers, std::uint32_t queries) {
  Simulation sim = build_simulation(spec, servers);

  ExperimentRecord record;
  record.axis = axis_name(axis);
  record.x_value = x_value;
  record.seed = spec.seed;
  record.insert_equality_tests = sim.insert_equality_tests;
  record.stay_points = sim.stay_points;
  record.insertion_messages = sim.message_sets;
  record.mean_insert_ms =
      sim.message_sets == 0 ? 0
                            : sim.insert_wall_ms /
                                  static_cast<double>(sim.message_sets);

  mpc::SeededRng patient_rng = mpc::SeededRng(spec.seed).fork(0x9a71e27ULL);
  double total_ms = 0;
  double total_comparisons = 0;
  bool agreement = true;
  for (std::uint32_t q = 0; q < queries; ++q) {
    const std::uint32_t patient =
        static_cast<std::uint32_t>(patient_rng.below(spec.users));
    QueryOutcome outcome = run_patient_query(sim, patient, true);
    total_ms += outcome.wall_ms;
    total_comparisons += static_cast<double>(outcome.comparisons);
    agreement = agreement && outcome.oracle_agreement;
  }
  record.mean_query_ms = queries == 0 ? 0 : total_ms / queries;
  record.query_comparisons_mean =
      queries == 0 ? 0 : total_comparisons / queries;
  record.oracle_agreement = agreement;
  return record;
}

}  // namespace

std::vector<ExperimentRecord> run_experiment(ExperimentAxis axis,
                                             const WorkloadSpec& base,
                                             std::uint32_t servers,
                                             std::uint32_t queries) {
  std::vector<ExperimentRecord> records;
  switch (axis) {
    case ExperimentAxis::trajectories: {
      // User count scales 1x..5x with everything else fixed.
      for (std::uint32_t factor = 1; factor <= 5; ++factor) {
        WorkloadSpec spec = base;
        spec.users = base.users * factor;
        records.push_back(measure_level(axis, spec.users, spec, servers,
                                        queries));
      }
      break;
    }
    case ExperimentAxis::cell_size: {
      for (const grid::GridConfig& grid :
           {desk_grid_small_cells(), desk_grid_large_cells()}) {
        WorkloadSpec spec = base;
        spec.grid = grid;
        records.push_back(measure_level(
            axis, static_cast<double>(grid.width_at(1)), spec, servers,
            queries));
      }
      break;
    }
    case ExperimentAxis::distance: {
      for (std::int64_t distance : {std::int64_t{200}, std::int64_t{400}}) {
        WorkloadSpec spec = base;
        spec.params.infectious_distance_cm = distance;
        records.push_back(measure_level(axis, static_cast<double>(distance),
                                        spec, servers, queries));
      }
      break;
    }
    case ExperimentAxis::incubation: {
      for (std::uint32_t t :
           {base.days / 4, base.days / 2, base.days}) {
        WorkloadSpec spec = base;
        spec.params.incubation_days = std::max(1u, t);
        records.push_back(measure_level(
            axis, spec.params.incubation_days, spec, servers, queries));
      }
      break;
    }
  }
  return records;
}

void write_experiment_csv(std::ostream& out,
                          std::span<const ExperimentRecord> records) {
  out << "axis,x_value,mean_insert_ms,mean_query_ms,insert_equality_tests,"
         "stay_points,insertion_messages,query_comparisons_mean,"
         "oracle_agreement,seed\n";
  for (const ExperimentRecord& r : records) {
    out << r.axis << ',' << r.x_value << ',' << r.mean_insert_ms << ','
        << r.mean_query_ms << ',' << r.insert_equality_tests << ','
        << r.stay_points << ',' << r.insertion_messages << ','
        << r.query_comparisons_mean << ',' << (r.oracle_agreement ? 1 : 0)
        << ',' << r.seed << '\n';
  }
}

}  // namespace prevent::harness
