#include "gwrdp/perception.hpp"

#include <cmath>
#include <limits>

#include "gwrdp/error.hpp"

namespace gwrdp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kInvLn2 = 1.0 / std::log(2.0);

}  // namespace

PerceptionMeasure PerceptionMeasure::total_variation() {
  FGenerator g{"tv",
               [](double u) { return std::abs(u - 1.0); },
               [](double u) { return u > 1.0 ? 1.0 : (u < 1.0 ? -1.0 : 0.0); },
               [](double) { return 0.0; },
               1.0,
               1.0};
  return PerceptionMeasure(Kind::TotalVariation, std::move(g));
}

PerceptionMeasure PerceptionMeasure::kl() {
  FGenerator g{"kl",
               [](double u) { return u * std::log2(u); },
               [](double u) { return std::log2(u) + kInvLn2; },
               [](double u) { return kInvLn2 / u; },
               0.0,
               kInf};
  return PerceptionMeasure(Kind::KullbackLeibler, std::move(g));
}

PerceptionMeasure PerceptionMeasure::chi_square() {
  FGenerator g{"chi2",
               [](double u) { return (u - 1.0) * (u - 1.0); },
               [](double u) { return 2.0 * (u - 1.0); },
               [](double) { return 2.0; },
               1.0,
               kInf};
  return PerceptionMeasure(Kind::FDivergence, std::move(g));
}

PerceptionMeasure PerceptionMeasure::squared_hellinger() {
  FGenerator g{"hellinger",
               [](double u) { return (std::sqrt(u) - 1.0) * (std::sqrt(u) - 1.0); },
               [](double u) { return 1.0 - 1.0 / std::sqrt(u); },
               [](double u) { return 0.5 / (u * std::sqrt(u)); },
               1.0,
               1.0};
  return PerceptionMeasure(Kind::FDivergence, std::move(g));
}

PerceptionMeasure PerceptionMeasure::f_divergence(FGenerator g) {
  if (!g.f || !g.df || !g.d2f)
    throw InvalidArgument("f_divergence: generator and both derivatives are required");
  if (std::abs(g.f(1.0)) > 1e-12)
    throw InvalidArgument("f_divergence: generator must satisfy f(1) = 0");
  if (!(g.d2f(1.0) > 0.0))
    throw InvalidArgument("f_divergence: generator must be strictly convex at 1");
  if (g.name.empty()) g.name = "f";
  return PerceptionMeasure(Kind::FDivergence, std::move(g));
}

PerceptionMeasure PerceptionMeasure::from_name(const std::string& name) {
  if (name == "tv") return total_variation();
  if (name == "kl") return kl();
  if (name == "chi2") return chi_square();
  if (name == "hellinger") return squared_hellinger();
  throw InvalidArgument("unknown perception measure '" + name +
                        "' (expected tv, kl, chi2 or hellinger)");
}

double PerceptionMeasure::term(double p, double q) const {
  if (q == 0.0) return p == 0.0 ? 0.0 : p * gen_.slope_at_infinity;
  if (p == 0.0) return q * gen_.f_at_zero;
  return q * gen_.f(p / q);
}

double PerceptionMeasure::term_d1(double p, double q) const {
  if (p == 0.0) return gen_.f_at_zero;
  const double u = p / q;
  return gen_.f(u) - u * gen_.df(u);
}

double PerceptionMeasure::term_d2(double p, double q) const {
  if (p == 0.0) return 0.0;
  const double u = p / q;
  return u * u * gen_.d2f(u) / q;
}

double PerceptionMeasure::operator()(std::span<const double> p,
                                     std::span<const double> q) const {
  if (p.size() != q.size())
    throw InvalidArgument("perception: alphabet size mismatch");
  if (kind_ == Kind::TotalVariation) return tv_distance(p, q);
  double d = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) d += term(p[a], q[a]);
  return std::max(d, 0.0);
}

}  // namespace gwrdp
