#include <cmath>

#include "doctest.h"
#include "gwrdp/region.hpp"

using namespace gwrdp;

namespace {

JointPmf dsbs(double p) {
  return JointPmf({2, 2}, {(1 - p) / 2, p / 2, p / 2, (1 - p) / 2}, {Role::X, Role::Y});
}

GrayWynerProblem problem(double d, double p) {
  return GrayWynerProblem::hamming(dsbs(0.1), PerceptionMeasure::total_variation(),
                                   {d, d, p, p});
}

bool dominated(const RegionPoint& p, const std::vector<RegionPoint>& by) {
  for (const auto& q : by)
    if (q.r0 <= p.r0 + 1e-9 && q.r1 <= p.r1 + 1e-9 && q.r2 <= p.r2 + 1e-9) return true;
  return false;
}

}  // namespace

TEST_CASE("corner points") {
  const auto pr = problem(0.1, kUnbounded);
  const auto ind = rate_triple_for_aux(pr, AuxChannel::independent(4, 3));
  CHECK(ind.r0 < 1e-12);
  const double h = -(0.1 * std::log2(0.1) + 0.9 * std::log2(0.9));
  CHECK(std::abs(ind.r1 - (1 - h)) < 1e-6);
  const auto cp = rate_triple_for_aux(problem(0.0, 0.0), AuxChannel::copy(4, 4));
  CHECK(std::abs(cp.r0 - entropy(dsbs(0.1))) < 1e-9);
  CHECK(cp.r1 < 1e-6);
}

TEST_CASE("frontier points recompute from their witnesses and pass the cut-set bound") {
  const auto pr = problem(0.1, 0.2);
  FrontierOptions o;
  o.samples = 10;
  o.seed = 4;
  const auto f = compute_frontier(pr, o);
  REQUIRE_FALSE(f.points.empty());
  for (const auto& p : f.points) CHECK(witness_deviation(pr, p) < 1e-6);
  const auto audit = cut_set_audit(pr, f);
  for (bool b : audit.pass) CHECK(b);
}

TEST_CASE("frontier is independent of the thread count and prefix stable") {
  const auto pr = problem(0.1, kUnbounded);
  FrontierOptions a;
  a.samples = 3;
  a.seed = 2;
  a.local_sweeps = 1;
  a.strategy = SearchStrategy::RandomRestart;
  FrontierOptions b = a;
  b.threads = 4;
  const auto fa = compute_frontier(pr, a), fb = compute_frontier(pr, b);
  REQUIRE(fa.points.size() == fb.points.size());
  for (std::size_t i = 0; i < fa.points.size(); ++i) {
    CHECK(fa.points[i].r0 == fb.points[i].r0);
    CHECK(fa.points[i].r1 == fb.points[i].r1);
    CHECK(fa.points[i].r2 == fb.points[i].r2);
  }
  FrontierOptions more = a;
  more.samples = 5;
  const auto fm = compute_frontier(pr, more);
  for (const auto& p : fa.points) CHECK(dominated(p, fm.points));
}

TEST_CASE("pareto filter") {
  auto mk = [](double a, double b, double c, std::size_t idx) {
    RegionPoint p;
    p.r0 = a;
    p.r1 = b;
    p.r2 = c;
    p.candidate = idx;
    return p;
  };
  const auto kept = pareto_filter({mk(1, 1, 1, 0), mk(0.5, 1, 1, 1), mk(0.5, 1, 1, 2),
                                   mk(2, 0, 0, 3), mk(2, 0.5, 0, 4)});
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].candidate == 1);
  CHECK(kept[1].candidate == 3);
}
