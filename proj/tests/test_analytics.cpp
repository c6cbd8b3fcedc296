#include <cmath>

#include "doctest.h"
#include "prevent/analytics.hpp"
#include "prevent/errors.hpp"
#include "prevent/rng.hpp"

using namespace prevent;
using namespace prevent::analytics;
using mpc::SeededRng;

TEST_CASE("flat query cost follows the closed form") {
  CostModelInput input;
  input.users = 1000;
  input.mean_locations_per_user = 0;
  input.mean_trajectory_length = 500;
  input.side = 10000;
  input.cell_width = 100;
  CHECK(query_cost_flat(input) == 0);  // nothing stored

  // Single cell covering the space degenerates to a full scan.
  input.mean_locations_per_user = 1;
  input.mean_trajectory_length = 10000;
  input.cell_width = 10000;
  CHECK(query_cost_flat(input) == doctest::Approx(1000));

  SeededRng rng(1);
  for (int i = 0; i < 1000; ++i) {
    input.users = static_cast<double>(1 + rng.below(1000000));
    input.mean_locations_per_user = static_cast<double>(rng.below(100));
    input.mean_trajectory_length = static_cast<double>(1 + rng.below(100000));
    input.side = static_cast<double>(1000 + rng.below(1000000));
    input.cell_width = static_cast<double>(1 + rng.below(10000));
    const double expected = input.users * input.mean_locations_per_user *
                            input.mean_trajectory_length * input.cell_width /
                            (input.side * input.side);
    CHECK(query_cost_flat(input) == doctest::Approx(expected));
  }

  input.side = 0;
  CHECK_THROWS_AS(query_cost_flat(input), InvalidInput);
}

TEST_CASE("tree query cost reproduces the published example") {
  CHECK(query_cost_tree(10, 464, 464, 100000000) == 13920);
  CHECK(query_cost_tree(0, 464, 464, 100000000) == 0);
  CHECK(query_cost_tree(7, 1, 1, 1000) == 7 * (2 + 1000));
  CHECK_THROWS_AS(query_cost_tree(1, 0, 4, 10), InvalidInput);

  // Speedup over the brute-force scan, as reported: about 71,839x.
  const std::uint64_t brute = 10ULL * 100000000ULL;
  const std::uint64_t tree = query_cost_tree(10, 464, 464, 100000000);
  CHECK(brute / tree == 71839);
}

TEST_CASE("partition planner lands on the balanced cube root") {
  CHECK(plan_partition(100000000) == Partition{464, 464});
  CHECK(plan_partition(8) == Partition{2, 2});
  CHECK(plan_partition(1) == Partition{1, 1});
  CHECK(plan_partition(27) == Partition{3, 3});
  CHECK_THROWS_AS(plan_partition(0), InvalidInput);
}

TEST_CASE("planner output is locally optimal in the tree cost") {
  SeededRng rng(2);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t users = 1 + rng.below(3000000);
    const Partition p = plan_partition(users);
    const std::uint64_t cost = query_cost_tree(1, p.regions, p.cells, users);
    for (std::int64_t delta : {std::int64_t{-1}, std::int64_t{1}}) {
      const std::int64_t r = static_cast<std::int64_t>(p.regions) + delta;
      if (r < 1) continue;
      CHECK(cost <= query_cost_tree(1, static_cast<std::uint64_t>(r),
                                    static_cast<std::uint64_t>(r), users));
    }
  }
}

TEST_CASE("identity-guess bound multiplies the domains") {
  CHECK(theorem1_bound(1, 1) == doctest::Approx(1.0));
  CHECK(theorem1_bound(1000000, 10000) == doctest::Approx(1e-10));
  CHECK_THROWS_AS(theorem1_bound(0, 5), InvalidInput);

  // Monte-Carlo guessing oracle on a tiny 16x16 domain.
  SeededRng rng(3);
  const std::uint64_t truth_pseudo = rng.below(16);
  const std::uint64_t truth_real = rng.below(16);
  std::uint64_t wins = 0;
  const int trials = 1000000;
  for (int i = 0; i < trials; ++i) {
    if (rng.below(16) == truth_pseudo && rng.below(16) == truth_real) ++wins;
  }
  const double p = theorem1_bound(16, 16);
  const double sigma = std::sqrt(p * (1 - p) / trials);
  CHECK(std::abs(static_cast<double>(wins) / trials - p) < 3 * sigma);
}

TEST_CASE("cell-guess bound is one over the cell count") {
  CHECK(theorem2_bound(1) == doctest::Approx(1.0));
  CHECK(theorem2_bound(1000000) == doctest::Approx(1e-6));
  CHECK_THROWS_AS(theorem2_bound(0), InvalidInput);

  SeededRng rng(4);
  const std::uint64_t truth_cell = rng.below(256);
  std::uint64_t wins = 0;
  const int trials = 1000000;
  for (int i = 0; i < trials; ++i) {
    if (rng.below(256) == truth_cell) ++wins;
  }
  const double p = theorem2_bound(256);
  const double sigma = std::sqrt(p * (1 - p) / trials);
  CHECK(std::abs(static_cast<double>(wins) / trials - p) < 3 * sigma);
}

TEST_CASE("trajectory inference bound equals the falling-factorial product") {
  const LocationInferenceBound paper_case = theorem3_probability(880, 3);
  CHECK(paper_case.probability > 3.3e-20);
  CHECK(paper_case.probability < 4.1e-20);

  CHECK(theorem3_probability(1, 1).probability == doctest::Approx(0.25));
  CHECK(theorem3_probability(5, 0).probability == doctest::Approx(1.0));
  CHECK(theorem3_probability(5, 0).log10_probability == doctest::Approx(0.0));
  CHECK_THROWS_AS(theorem3_probability(1, 5), InvalidInput);
  CHECK_THROWS_AS(theorem3_probability(0, 0), InvalidInput);

  // Exact cross-check on small domains.
  SeededRng rng(5);
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t nv = 1 + rng.below(30);
    const std::uint64_t cells = 4 * nv * nv;
    const std::uint64_t q = rng.below(std::min<std::uint64_t>(cells, 12) + 1);
    long double product = 1.0L;
    for (std::uint64_t j = 0; j < q; ++j) {
      product /= static_cast<long double>(cells - j);
    }
    CHECK(theorem3_probability(nv, q).probability ==
          doctest::Approx(static_cast<double>(product)).epsilon(1e-9));
  }

  // Log form carries the magnitude even when the probability
  // underflows a double.
  const LocationInferenceBound huge = theorem3_probability(100000, 50);
  CHECK(huge.log10_probability < -500);
  CHECK(huge.probability == 0.0);
}
