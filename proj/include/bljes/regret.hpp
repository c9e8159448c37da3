#ifndef BLJES_REGRET_HPP
#define BLJES_REGRET_HPP

#include <Eigen/Dense>
#include <vector>

#include "bljes/benchmarks.hpp"
#include "bljes/types.hpp"

namespace bljes {

// Level-wise normalized regrets of a single queried point. Components are
// in [0, 1] with pool-computed normalizers; zero-denominator cases
// (constant objectives) are defined as zero regret.
struct RegretComponents {
  double r_f = 0.0;
  double r_g = 0.0;
  Eigen::VectorXd r_c;  // upper constraints then lower constraints

  double aggregate() const;
};

RegretComponents regret_components_at(int ix, int it, const BenchmarkSpec& spec,
                                      const GroundTruth& gt);

// Pool-mode lookup: the point must sit on the spec's grid (usage error
// otherwise).
RegretComponents regret_components(const QueryPoint& point,
                                   const BenchmarkSpec& spec,
                                   const GroundTruth& gt);

// Off-grid variant for continuous-domain runs: normalizers come from the
// reference-grid ground truth, the lower-level curve is rescanned at the
// actual x over the reference theta grid.
RegretComponents regret_components_continuous(const QueryPoint& point,
                                              const BenchmarkSpec& spec,
                                              const GroundTruth& gt);

// bilevel simple regret: running minimum over queried points of the
// worst component
std::vector<double> bilevel_simple_regret(const std::vector<QueryPoint>& points,
                                          const BenchmarkSpec& spec,
                                          const GroundTruth& gt);

struct RegretTraceEntry {
  int iteration = 0;
  QueryPoint point;
  RegretComponents components;
  double cumulative_min_regret = 0.0;
};

using RegretTrace = std::vector<RegretTraceEntry>;

}  // namespace bljes

#endif  // BLJES_REGRET_HPP
