#include "gwrdp/derandomizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>

#include "gwrdp/error.hpp"

namespace gwrdp {
namespace {

// K^n0, saturated at cap + 1.
std::size_t atom_count(std::size_t k, std::size_t n0, std::size_t cap) {
  std::size_t c = 1;
  for (std::size_t i = 0; i < n0; ++i) {
    if (c > cap / k) return cap + 1;
    c *= k;
  }
  return c;
}

std::vector<double> atom_probabilities(const JointPmf& p_xy, std::size_t n0, std::size_t atoms) {
  const std::size_t k = p_xy.size();
  std::vector<double> p(atoms, 1.0);
  for (std::size_t a = 0; a < atoms; ++a) {
    std::size_t rest = a;
    double v = 1.0;
    for (std::size_t t = 0; t < n0; ++t) {
      v *= p_xy.probs()[rest % k];
      rest /= k;
    }
    p[a] = v;
  }
  return p;
}

}  // namespace

std::size_t OmegaMap::atom_index(std::span<const Symbol> x_tail,
                                 std::span<const Symbol> y_tail) const {
  if (x_tail.size() != n0 || y_tail.size() != n0)
    throw InvalidArgument("OmegaMap: tail length must equal n0");
  std::size_t a = 0;
  for (std::size_t t = 0; t < n0; ++t) {
    if (x_tail[t] >= x_size || y_tail[t] >= y_size)
      throw InvalidArgument("OmegaMap: tail symbol out of range");
    a = a * (x_size * y_size) + x_tail[t] * y_size + y_tail[t];
  }
  return a;
}

std::size_t OmegaMap::bin(std::span<const Symbol> x_tail, std::span<const Symbol> y_tail) const {
  return assignment[atom_index(x_tail, y_tail)];
}

OmegaMap build_omega(const JointPmf& p_xy, std::size_t n0, std::size_t n, std::size_t atom_cap) {
  if (p_xy.rank() != 2) throw InvalidArgument("build_omega: p_xy must have axes (X, Y)");
  if (n == 0) throw InvalidArgument("build_omega: n must be positive");
  const std::size_t k = p_xy.size();
  const std::size_t atoms = atom_count(k, n0, atom_cap);
  if (atoms > atom_cap) {
    std::ostringstream os;
    os << "build_omega: " << k << "^" << n0 << " atoms exceed the atom cap " << atom_cap;
    throw ResourceLimit(os.str());
  }
  if (atoms < n) {
    std::size_t need = 0;
    for (std::size_t c = 1; c < n; c *= k) ++need;
    std::ostringstream os;
    os << "build_omega: " << atoms << " atoms cannot populate " << n << " bins; n0 must be at least "
       << need;
    throw Infeasible(os.str());
  }
  // Atom probabilities are computed with the last position least significant,
  // i.e. position index reversed relative to atom_index; products commute.
  const std::vector<double> prob = atom_probabilities(p_xy, n0, atoms);
  std::vector<std::uint32_t> order(atoms);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return prob[a] > prob[b]; });

  OmegaMap m;
  m.n0 = n0;
  m.n = n;
  m.x_size = p_xy.shape()[0];
  m.y_size = p_xy.shape()[1];
  m.assignment.assign(atoms, 0);
  m.bin_mass.assign(n, 0.0);
  m.p_max = prob[order[0]];

  using Entry = std::pair<double, std::size_t>;  // (mass, bin)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t b = 0; b < n; ++b) heap.emplace(0.0, b);
  double heaviest = 0.0;
  for (std::uint32_t a : order) {
    auto [mass, b] = heap.top();
    heap.pop();
    mass += prob[a];
    m.assignment[a] = static_cast<std::uint32_t>(b);
    m.bin_mass[b] = mass;
    heaviest = std::max(heaviest, mass);
    heap.emplace(mass, b);
    if (heaviest - heap.top().first > m.p_max * (1.0 + 1e-12) + 1e-300)
      throw Error("build_omega: greedy spread exceeded the largest atom");
  }
  for (double v : m.bin_mass)
    m.max_deviation = std::max(m.max_deviation, std::abs(v - 1.0 / static_cast<double>(n)));
  return m;
}

OmegaAudit audit_omega(const OmegaMap& omega, const JointPmf& p_xy) {
  OmegaAudit a;
  const std::size_t k = p_xy.size();
  const std::size_t nx = p_xy.shape()[0], ny = p_xy.shape()[1];
  if (nx != omega.x_size || ny != omega.y_size)
    throw InvalidArgument("audit_omega: alphabet mismatch");
  const std::size_t atoms = atom_count(k, omega.n0, omega.atoms());
  a.every_atom_assigned = atoms == omega.atoms();
  a.bin_mass.assign(omega.n, 0.0);
  double pair_max = 0.0;
  for (double v : p_xy.probs()) pair_max = std::max(pair_max, v);
  a.bound = std::pow(pair_max, static_cast<double>(omega.n0));
  // Decode each atom through atom_index so the audit does not share the
  // builder's digit order.
  std::vector<Symbol> xs(omega.n0), ys(omega.n0);
  std::vector<std::size_t> digits(omega.n0, 0);
  for (std::size_t step = 0; step < atoms; ++step) {
    double p = 1.0;
    for (std::size_t t = 0; t < omega.n0; ++t) {
      xs[t] = static_cast<Symbol>(digits[t] / ny);
      ys[t] = static_cast<Symbol>(digits[t] % ny);
      p *= p_xy(xs[t], ys[t]);
    }
    const std::size_t b = omega.bin(xs, ys);
    if (b >= omega.n) a.every_atom_assigned = false;
    else a.bin_mass[b] += p;
    for (std::size_t t = omega.n0; t-- > 0;) {
      if (++digits[t] < k) break;
      digits[t] = 0;
    }
  }
  double lo = 1.0, hi = 0.0;
  for (double v : a.bin_mass) {
    a.max_deviation = std::max(a.max_deviation, std::abs(v - 1.0 / static_cast<double>(omega.n)));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  a.spread = hi - lo;
  a.pass = a.every_atom_assigned && a.max_deviation <= a.bound * (1.0 + 1e-12);
  return a;
}

std::size_t default_n0(std::size_t pair_alphabet, std::size_t n) {
  if (pair_alphabet < 2) throw InvalidArgument("default_n0: pair alphabet must have >= 2 symbols");
  const std::size_t target = n * n;
  std::size_t n0 = 0;
  for (std::size_t c = 1; c < target; c *= pair_alphabet) ++n0;
  return n0;
}

std::size_t n0_from_alpha(std::size_t n, double alpha) {
  if (!(alpha >= 0.0)) throw InvalidArgument("n0_from_alpha: alpha must be non-negative");
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * alpha));
}

double seed_rate_overhead(std::size_t n, std::size_t n0) {
  return std::log2(static_cast<double>(n)) / static_cast<double>(n + n0);
}

DeterministicMessages deterministic_encode(std::span<const Symbol> x_ext,
                                           std::span<const Symbol> y_ext,
                                           const Codebook& codebook, const CodingScheme& scheme,
                                           const OmegaMap& omega) {
  const std::size_t n = codebook.n();
  if (omega.n != n) throw InvalidArgument("deterministic_encode: omega built for another n");
  if (x_ext.size() != n + omega.n0 || y_ext.size() != n + omega.n0)
    throw InvalidArgument("deterministic_encode: extended sequences must have length n + n0");
  DeterministicMessages d;
  d.k = omega.bin(x_ext.subspan(n), y_ext.subspan(n));
  d.messages = encode(x_ext.first(n), y_ext.first(n), d.k, codebook, scheme);
  return d;
}

std::pair<Sequence, Sequence> deterministic_decode(std::size_t s0, std::size_t s1, std::size_t s2,
                                                   std::size_t k, const Codebook& codebook,
                                                   std::size_t n0) {
  const std::size_t n = codebook.n();
  if (n0 > n) throw InvalidArgument("deterministic_decode: n0 must not exceed n");
  if (k >= n) throw InvalidArgument("deterministic_decode: seed out of range");
  auto [x, y] = decode(s0, s1, s2, k, codebook);
  x.resize(n + n0);
  y.resize(n + n0);
  for (std::size_t j = 0; j < n0; ++j) {
    x[n + j] = x[j];
    y[n + j] = y[j];
  }
  return {std::move(x), std::move(y)};
}

}  // namespace gwrdp
