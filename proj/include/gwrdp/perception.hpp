#pragma once

#include <functional>
#include <span>
#include <string>

#include "gwrdp/prob.hpp"

namespace gwrdp {

// Convex generator f of an f-divergence D_f(P || Q) = sum_a Q(a) f(P(a)/Q(a)).
// f must be convex with f(1) = 0 and strictly convex at 1. Derivatives are
// evaluated only for u > 0.
struct FGenerator {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
  double f_at_zero = 0.0;          // lim_{u->0+} f(u), used when P(a) = 0
  double slope_at_infinity = 0.0;  // lim_{u->inf} f(u)/u, used when Q(a) = 0
};

// Distance d(P_X, Q_Xhat) between the source marginal and the reconstruction
// marginal. Total variation is kept as its own kind because the solver treats
// its non-smooth constraint through slack variables.
class PerceptionMeasure {
 public:
  enum class Kind { TotalVariation, KullbackLeibler, FDivergence };

  PerceptionMeasure() : PerceptionMeasure(total_variation()) {}

  static PerceptionMeasure total_variation();
  // D(P_X || Q_Xhat) in bits.
  static PerceptionMeasure kl();
  static PerceptionMeasure chi_square();
  static PerceptionMeasure squared_hellinger();
  static PerceptionMeasure f_divergence(FGenerator g);
  // "tv", "kl", "chi2", "hellinger".
  static PerceptionMeasure from_name(const std::string& name);

  Kind kind() const { return kind_; }
  const std::string& name() const { return gen_.name; }

  // d(p, q); q may contain zeros. p and q must have equal size.
  double operator()(std::span<const double> p, std::span<const double> q) const;
  double operator()(const Pmf& p, const Pmf& q) const { return (*this)(p.probs(), q.probs()); }

  // Per-coordinate contribution q f(p/q) and its first two derivatives with
  // respect to q (q > 0). Not used for total variation.
  double term(double p, double q) const;
  double term_d1(double p, double q) const;
  double term_d2(double p, double q) const;

 private:
  PerceptionMeasure(Kind k, FGenerator g) : kind_(k), gen_(std::move(g)) {}
  Kind kind_;
  FGenerator gen_;
};

}  // namespace gwrdp
