#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "prevent/mpc.hpp"
#include "prevent/oracle.hpp"
#include "prevent/orchestration.hpp"
#include "prevent/subscriber.hpp"
#include "prevent/workload.hpp"

namespace prevent::harness {

// Chi-square against uniform over 16 equal value buckets, df = 15.
// `pass` means the statistic stays under the p = 0.001 critical value
// (37.697): the stream is indistinguishable from uniform at that level.
struct ChiSquare {
  double statistic = 0;
  std::size_t samples = 0;
  bool pass = false;
};
ChiSquare chi_square_uniformity(std::span<const mpc::FieldElement> values);

double spearman_rho(std::span<const double> xs, std::span<const double> ys);

struct UniformityRow {
  std::string stream;
  std::size_t samples = 0;
  double statistic = 0;
  bool pass = false;
};

// One row per party: the chi-square of everything that party received
// during the traced protocol run. Empty trace, empty report.
std::vector<UniformityRow> uniformity_report(const mpc::TraceLog& trace,
                                             std::uint32_t parties);
void write_uniformity_csv(std::ostream& out,
                          std::span<const UniformityRow> rows);

// A fully ingested deployment: workload generated, stay points
// detected, reports built, shipped and inserted day by day.
struct Simulation {
  WorkloadSpec spec;
  std::unique_ptr<orchestration::PartySet> parties;
  std::unique_ptr<subscriber::TokenAuthority> authority;
  std::unique_ptr<subscriber::SubscriberRegistry> registry;
  GeneratedWorkload workload;
  std::size_t stay_points = 0;
  std::size_t message_sets = 0;
  std::uint64_t insert_equality_tests = 0;
  double insert_wall_ms = 0;
  std::int32_t last_day = 0;
};

Simulation build_simulation(const WorkloadSpec& spec, std::uint32_t servers);

struct QueryOutcome {
  orchestration::TraceResult result;
  std::set<std::string> real_ids;  // result tokens mapped through the registry
  std::uint64_t comparisons = 0;
  double wall_ms = 0;
  bool oracle_checked = false;
  bool oracle_agreement = true;
};

// Runs the full multi-generation query for one user and, on request,
// replays it against the plaintext oracle.
QueryOutcome run_patient_query(Simulation& sim, std::uint32_t patient_user,
                               bool check_oracle);

enum class ExperimentAxis { trajectories, cell_size, distance, incubation };

const char* axis_name(ExperimentAxis axis);
ExperimentAxis parse_axis(const std::string& name);

struct ExperimentRecord {
  std::string axis;
  double x_value = 0;
  double mean_insert_ms = 0;  // per message set
  double mean_query_ms = 0;
  std::uint64_t insert_equality_tests = 0;
  std::size_t stay_points = 0;
  std::uint64_t insertion_messages = 0;
  double query_comparisons_mean = 0;
  bool oracle_agreement = true;
  std::uint64_t seed = 0;
};

// Builds one deployment per level of the chosen axis and measures
// insertion and query work, in wall time and in comparison counts
// (the hardware-independent metric). Patients are drawn at random per
// level; each query is cross-checked against the oracle.
std::vector<ExperimentRecord> run_experiment(ExperimentAxis axis,
                                             const WorkloadSpec& base,
                                             std::uint32_t servers,
                                             std::uint32_t queries);

void write_experiment_csv(std::ostream& out,
                          std::span<const ExperimentRecord> records);

}  // namespace prevent::harness
