#pragma once

// Replaces the shared shift seed by a near-uniform function of n0 extra
// source symbols, giving a deterministic code of blocklength n + n0.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gwrdp/prob.hpp"
#include "gwrdp/typicality.hpp"

namespace gwrdp {

// Atom: a length-n0 joint source sequence, indexed base |X||Y| with the first
// position most significant and pair symbol x * |Y| + y.
struct OmegaMap {
  std::size_t n0 = 0;
  std::size_t n = 1;
  std::size_t x_size = 1;
  std::size_t y_size = 1;
  std::vector<std::uint32_t> assignment;  // atom -> bin in [0, n-1]
  std::vector<double> bin_mass;
  double p_max = 1.0;          // largest atom probability
  double max_deviation = 0.0;  // max_b |bin_mass[b] - 1/n|

  std::size_t atoms() const { return assignment.size(); }
  std::size_t atom_index(std::span<const Symbol> x_tail, std::span<const Symbol> y_tail) const;
  std::size_t bin(std::span<const Symbol> x_tail, std::span<const Symbol> y_tail) const;
  friend bool operator==(const OmegaMap&, const OmegaMap&) = default;
};

inline constexpr std::size_t kDefaultAtomCap = std::size_t{1} << 22;

// Greedy least-loaded packing: atoms in descending probability (ties by
// index), each into the lightest bin (ties by bin index). Throws Infeasible
// when (|X||Y|)^n0 < n and ResourceLimit when the atom count exceeds atom_cap.
OmegaMap build_omega(const JointPmf& p_xy, std::size_t n0, std::size_t n,
                     std::size_t atom_cap = kDefaultAtomCap);

struct OmegaAudit {
  std::vector<double> bin_mass;  // recomputed from scratch
  double max_deviation = 0.0;
  double bound = 0.0;            // p_max = (largest pair probability)^n0
  double spread = 0.0;           // heaviest minus lightest bin
  bool every_atom_assigned = false;
  bool pass = false;
};

// Exhaustive recomputation of every bin mass from P_XY.
OmegaAudit audit_omega(const OmegaMap& omega, const JointPmf& p_xy);

// Smallest n0 with (|X||Y|)^n0 >= n^2.
std::size_t default_n0(std::size_t pair_alphabet, std::size_t n);
// floor(n * alpha).
std::size_t n0_from_alpha(std::size_t n, double alpha);

// Seed contribution log2(n) / (n + n0) added to each rate.
double seed_rate_overhead(std::size_t n, std::size_t n0);

struct DeterministicMessages {
  Messages messages;
  std::size_t k = 0;  // seed derived from the tail
};

// Seed from the last n0 symbols via omega, messages from the first n.
DeterministicMessages deterministic_encode(std::span<const Symbol> x_ext,
                                           std::span<const Symbol> y_ext,
                                           const Codebook& codebook, const CodingScheme& scheme,
                                           const OmegaMap& omega);

// Head: pi_k of the selected codewords; tail position n + j copies position j.
std::pair<Sequence, Sequence> deterministic_decode(std::size_t s0, std::size_t s1, std::size_t s2,
                                                   std::size_t k, const Codebook& codebook,
                                                   std::size_t n0);

}  // namespace gwrdp
