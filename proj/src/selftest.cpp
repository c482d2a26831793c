#include <cmath>
#include <functional>
#include <sstream>

#include "gwrdp/app.hpp"

namespace gwrdp {
namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;
  void near(double got, double want, double tol, const char* what) {
    if (!(std::abs(got - want) <= tol)) {
      ok = false;
      detail << what << ": got " << got << ", want " << want << " +- " << tol << "; ";
    }
  }
  void truth(bool cond, const char* what) {
    if (!cond) {
      ok = false;
      detail << what << " failed; ";
    }
  }
};

JointPmf uniform_xy() { return JointPmf({2, 2}, {0.25, 0.25, 0.25, 0.25}, {Role::X, Role::Y}); }
JointPmf dsbs(double p) {
  return JointPmf({2, 2}, {(1 - p) / 2, p / 2, p / 2, (1 - p) / 2}, {Role::X, Role::Y});
}
const DistortionMatrix kHam2 = DistortionMatrix::hamming(2);

CodingScheme identity_scheme() {
  return CodingScheme::build(uniform_xy(), Kernel::constant(4, Pmf({1.0})), Kernel::identity(2),
                             Kernel::identity(2), kHam2, kHam2);
}

RdpQuery p2p(const Pmf& p, double d, double perc) {
  RdpQuery q;
  q.q_xw = JointPmf({p.size(), 1}, std::vector<double>(p.probs().begin(), p.probs().end()),
                    {Role::X, Role::W});
  q.delta = DistortionMatrix::hamming(p.size());
  q.d_budget = d;
  q.p_budget = perc;
  return q;
}

SimConfig small_sim(SimMode mode) {
  SimConfig c;
  c.p_xy = uniform_xy();
  c.aux = Kernel::constant(4, Pmf({1.0}));
  c.test_x = Kernel::identity(2);
  c.test_y = Kernel::identity(2);
  c.delta1 = c.delta2 = kHam2;
  c.budgets = {0.1, 0.1, 0.1, 0.1};
  c.n = 4;
  c.delta = 0.5;
  c.trials = 200;
  c.seed = 5;
  c.mode = mode;
  return c;
}

using Case = std::pair<const char*, std::function<void(Check&)>>;

std::vector<Case> cases() {
  std::vector<Case> v;
  v.emplace_back("entropy of uniform binary is 1", [](Check& c) {
    c.near(entropy(Pmf::uniform(2)), 1.0, 1e-15, "H");
  });
  v.emplace_back("entropy of a point mass is 0", [](Check& c) {
    c.near(entropy(Pmf({1.0, 0.0})), 0.0, 0.0, "H");
  });
  v.emplace_back("mutual information of independent uniforms is 0", [](Check& c) {
    c.near(mutual_information(uniform_xy()), 0.0, 1e-15, "I");
  });
  v.emplace_back("mutual information of a copied uniform bit is 1", [](Check& c) {
    c.near(mutual_information(JointPmf({2, 2}, {0.5, 0, 0, 0.5})), 1.0, 1e-15, "I");
  });
  v.emplace_back("conditional mutual information under conditional independence is 0",
                 [](Check& c) {
                   const JointPmf j = attach(dsbs(0.2), Kernel::constant(4, Pmf({0.3, 0.7})));
                   const JointPmf acb = j.marginal(std::vector<std::size_t>{0, 2, 1});
                   c.near(conditional_mutual_information(acb), 0.0, 1e-12, "I(A;C|B)");
                 });
  v.emplace_back("conditional mutual information with constant C equals I(A;B)", [](Check& c) {
    const JointPmf j = attach(dsbs(0.2), Kernel::constant(4, Pmf({1.0})));
    c.near(conditional_mutual_information(j), mutual_information(dsbs(0.2)), 1e-12, "I");
  });
  v.emplace_back("total variation examples", [](Check& c) {
    c.near(tv_distance(Pmf::uniform(2), Pmf::uniform(2)), 0.0, 0.0, "identical");
    c.near(tv_distance(Pmf({1, 0}), Pmf({0, 1})), 2.0, 0.0, "disjoint");
    c.near(tv_distance(Pmf({0.7, 0.3}), Pmf({0.5, 0.5})), 0.4, 1e-15, "direct");
  });
  v.emplace_back("expected Hamming distortion examples", [](Check& c) {
    c.near(expected_distortion(JointPmf({2, 2}, {0.5, 0, 0, 0.5}), kHam2), 0.0, 0.0, "diagonal");
    c.near(expected_distortion(uniform_xy(), kHam2), 0.5, 0.0, "independent");
  });
  v.emplace_back("empirical types and shifts", [](Check& c) {
    c.truth(empirical_type(Sequence{0, 1, 0, 1}, 2).counts == std::vector<std::size_t>{2, 2},
            "(0,1,0,1)");
    c.truth(empirical_type(Sequence(5, 0), 2).counts == std::vector<std::size_t>{5, 0}, "constant");
    const Sequence s{0, 1, 1, 0, 1};
    c.truth(empirical_type(circular_shift(3, s), 2) == empirical_type(s, 2), "shift");
  });
  v.emplace_back("zero distortion and perception give H(X)", [](Check& c) {
    const Pmf p({0.2, 0.3, 0.5});
    c.near(conditional_rdp(p2p(p, 0.0, 0.0)).rate, entropy(p), 1e-6, "rate");
  });
  v.emplace_back("unconstrained perception and large distortion give rate 0", [](Check& c) {
    c.near(conditional_rdp(p2p(Pmf({0.3, 0.7}), 0.3, kUnbounded)).rate, 0.0, 1e-6, "rate");
  });
  v.emplace_back("zero distortion gives H(X) for any perception budget", [](Check& c) {
    c.near(conditional_rdp(p2p(Pmf({0.3, 0.7}), 0.0, 0.5)).rate, entropy(Pmf({0.3, 0.7})), 1e-6,
           "rate");
  });
  v.emplace_back("brute force at D = P = 0 is the identity channel", [](Check& c) {
    RdpQuery q;
    q.q_xw = JointPmf({2, 2}, {0.4, 0.1, 0.2, 0.3}, {Role::X, Role::W});
    q.delta = kHam2;
    q.d_budget = 0.0;
    q.p_budget = 0.0;
    const auto b = brute_force_rdp(q, 5);
    c.near(b.rate, conditional_entropy(q.q_xw, {0}, {1}), 1e-9, "rate");
  });
  v.emplace_back("refining the grid never raises the brute-force rate", [](Check& c) {
    const RdpQuery q = p2p(Pmf({0.3, 0.7}), 0.1, 0.2);
    c.truth(brute_force_rdp(q, 11).rate <= brute_force_rdp(q, 6).rate + 1e-12, "nested grids");
  });
  v.emplace_back("boundedness holds for finite alphabets and fails without zero-distortion symbol",
                 [](Check& c) {
                   c.truth(check_assumption1(p2p(Pmf({0.3, 0.7}), 0.1, 0.1), 1e-6).satisfied,
                           "finite");
                   RdpQuery bad = p2p(Pmf({0.3, 0.7}), 0.0, kUnbounded);
                   bad.reconstruction = {0};
                   const auto r = check_assumption1(bad, 1e-6);
                   c.truth(!r.satisfied && !r.diagnostic.empty(), "violated with diagnostic");
                 });
  v.emplace_back("independent W gives the point-to-point corner", [](Check& c) {
    const auto pr = GrayWynerProblem::hamming(dsbs(0.1), PerceptionMeasure::total_variation(),
                                              {0.1, 0.1, 0.2, 0.2});
    const auto p = rate_triple_for_aux(pr, AuxChannel::independent(4, 2));
    const double rx = rdp_point_to_point(Pmf::uniform(2), kHam2, pr.perception1, 0.1, 0.2).rate;
    c.near(p.r0, 0.0, 1e-12, "r0");
    c.near(p.r1, rx, 1e-6, "r1");
    c.near(p.r2, rx, 1e-6, "r2");
  });
  v.emplace_back("copy W with zero budgets gives (H(X,Y), 0, 0)", [](Check& c) {
    const auto pr = GrayWynerProblem::hamming(dsbs(0.1), PerceptionMeasure::total_variation(),
                                              {0.0, 0.0, 0.0, 0.0});
    const auto p = rate_triple_for_aux(pr, AuxChannel::copy(4, 4));
    c.near(p.r0, entropy(dsbs(0.1)), 1e-9, "r0");
    c.near(p.r1, 0.0, 1e-6, "r1");
    c.near(p.r2, 0.0, 1e-6, "r2");
  });
  v.emplace_back("grid frontier with one sample contains the independent corner", [](Check& c) {
    const auto pr = GrayWynerProblem::hamming(dsbs(0.1), PerceptionMeasure::total_variation(),
                                              {0.1, 0.1, kUnbounded, kUnbounded});
    FrontierOptions fo;
    fo.samples = 1;
    const auto f = compute_frontier(pr, fo);
    bool found = false;
    for (const auto& p : f.points) found = found || (p.r0 < 1e-12);
    c.truth(found, "corner present");
  });
  v.emplace_back("a larger search budget dominates a smaller one", [](Check& c) {
    const auto pr = GrayWynerProblem::hamming(dsbs(0.1), PerceptionMeasure::total_variation(),
                                              {0.1, 0.1, kUnbounded, kUnbounded});
    FrontierOptions small, large;
    small.samples = 4;
    large.samples = 12;
    const auto a = compute_frontier(pr, small), b = compute_frontier(pr, large);
    for (const auto& p : a.points) {
      bool dominated = false;
      for (const auto& q : b.points)
        dominated = dominated || (q.r0 <= p.r0 + 1e-9 && q.r1 <= p.r1 + 1e-9 && q.r2 <= p.r2 + 1e-9);
      c.truth(dominated, "dominated");
    }
  });
  v.emplace_back("scalarized search examples", [](Check& c) {
    const auto pr = GrayWynerProblem::hamming(dsbs(0.1), PerceptionMeasure::total_variation(),
                                              {0.05, 0.05, kUnbounded, kUnbounded});
    SearchOptions so;
    so.seed = 3;
    c.near(scalarized_search(pr, 1, 0, 0, 2, so).r0, 0.0, 1e-9, "r0 under (1,0,0)");
    const auto ind = rate_triple_for_aux(pr, AuxChannel::independent(4, default_w_size(pr)));
    const auto s = scalarized_search(pr, 0, 1, 1, 2, so);
    c.truth(s.r1 + s.r2 <= ind.r1 + ind.r2 + 1e-9, "(0,1,1) no worse than independent");
    const auto s2 = scalarized_search(pr, 0, 1, 1, 2, so);
    c.truth(s.r0 == s2.r0 && s.r1 == s2.r1 && s.r2 == s2.r2, "repeatable");
  });
  v.emplace_back("theta examples", [](Check& c) {
    c.truth(theta(5, 0, 3) == 3 && theta(5, 2, 4) == 1 && theta(4, 3, 2) == 1, "values");
  });
  v.emplace_back("circular shift examples", [](Check& c) {
    const Sequence s{0, 1, 2, 3};
    c.truth(circular_shift(0, s) == s, "identity");
    c.truth(circular_shift(1, s) == Sequence{1, 2, 3, 0}, "(a,b,c,d) -> (b,c,d,a)");
    for (std::size_t k = 0; k < 4; ++k)
      c.truth(circular_shift(k, inverse_circular_shift(k, s)) == s, "inverse pair");
  });
  v.emplace_back("typicality examples", [](Check& c) {
    c.truth(is_typical(Sequence{1, 1, 1, 1, 1, 0, 0, 0, 0, 0}, Pmf::uniform(2), 0.2), "five ones");
    c.truth(!is_typical(Sequence{1, 1, 1, 1, 1, 1, 1, 1, 0, 0}, Pmf::uniform(2), 0.2), "eight ones");
    c.truth(!is_typical(Sequence{0, 2, 1}, Pmf({0.5, 0.5, 0.0}), 5.0), "zero-probability symbol");
  });
  v.emplace_back("samplers return typical sequences", [](Check& c) {
    const TypicalSetSpec spec{Pmf({0.3, 0.7}), 0.2, 20};
    for (const auto& s : sample_uniform_typical(spec, 100, 1)) c.truth(is_typical(s, spec.q, 0.2), "uniform");
    const JointPmf q_ac({2, 2}, {0.35, 0.15, 0.15, 0.35});
    const ConditionalTypicalSampler cs(q_ac, 0.3, 20);
    Rng rng(2);
    Sequence w(20, 0);
    for (std::size_t i = 10; i < 20; ++i) w[i] = 1;
    for (int i = 0; i < 100; ++i) c.truth(is_cond_typical(cs(w, rng), w, q_ac, 0.3), "conditional");
  });
  v.emplace_back("no common information gives m0 = 1", [](Check& c) {
    c.truth(compute_code_sizes(identity_scheme(), 10, 1e-6).m0 == 1, "m0");
  });
  v.emplace_back("codebook with sizes (1,1,1) is typical and reproducible", [](Check& c) {
    CodeSizes s;
    s.n = 12;
    s.delta = 0.4;
    const auto scheme = identity_scheme();
    const Codebook a = generate_codebook(scheme, s, 9, 1 << 20);
    c.truth(audit_codebook(a, scheme).x_atypical == 0, "typical");
    c.truth(a == generate_codebook(scheme, s, 9, 1 << 20), "same seed");
  });
  v.emplace_back("all x-codewords are conditionally typical with their parent", [](Check& c) {
    CodeSizes s;
    s.m0 = 2;
    s.m1 = 8;
    s.m2 = 3;
    s.n = 16;
    s.delta = 0.3;
    const auto scheme = identity_scheme();
    const Codebook cb = generate_codebook(scheme, s, 4, 1 << 20);
    for (std::size_t i = 0; i < s.m0; ++i)
      for (std::size_t j = 0; j < s.m1; ++j)
        c.truth(is_cond_typical(cb.x(i, j), cb.w(i), scheme.q_xt_w, s.delta), "x codeword");
  });
  v.emplace_back("self-encoding clears all flags and meets the threshold", [](Check& c) {
    const auto scheme = identity_scheme();
    const Sequence x{0, 1, 1, 0, 1, 0, 0, 1}, y{1, 1, 0, 0, 1, 0, 1, 0};
    CodeSizes s;
    s.n = 8;
    s.delta = 0.5;
    for (std::size_t k = 0; k < 8; ++k) {
      const Codebook cb(8, 0.5, 0, s, Sequence(8, 0), inverse_circular_shift(k, x),
                        inverse_circular_shift(k, y));
      const Messages m = encode(x, y, k, cb, scheme);
      c.truth(!m.e0 && !m.e1 && !m.e2, "flags clear");
      const auto [xh, yh] = decode(m.s0, m.s1, m.s2, k, cb);
      c.truth(average_distortion(x, xh, kHam2) <= m.threshold1, "threshold");
      c.truth(empirical_type(xh, 2) == empirical_type(cb.x(m.s0, m.s1), 2), "type preserved");
    }
  });
  v.emplace_back("single-codeword book falls back with the common-layer flag", [](Check& c) {
    CodeSizes s;
    s.n = 8;
    s.delta = 0.1;
    const Codebook cb(8, 0.1, 0, s, Sequence(8, 0), Sequence{0, 1, 0, 1, 0, 1, 0, 1},
                      Sequence{0, 1, 0, 1, 0, 1, 0, 1});
    const Messages m = encode(Sequence(8, 1), Sequence(8, 1), 0, cb, identity_scheme());
    c.truth(m.e0 && m.s0 == 0 && m.s1 == 0 && m.s2 == 0, "fallback");
  });
  v.emplace_back("decode at k = 0 returns raw codewords", [](Check& c) {
    CodeSizes s;
    s.m1 = 4;
    s.m2 = 4;
    s.n = 10;
    s.delta = 0.5;
    const Codebook cb = generate_codebook(identity_scheme(), s, 1, 1 << 20);
    const auto [xh, yh] = decode(0, 2, 3, 0, cb);
    c.truth(std::equal(xh.begin(), xh.end(), cb.x(0, 2).begin()), "x");
    c.truth(std::equal(yh.begin(), yh.end(), cb.y(0, 3).begin()), "y");
  });
  v.emplace_back("omega on four uniform atoms", [](Check& c) {
    const auto a = audit_omega(build_omega(uniform_xy(), 1, 2), uniform_xy());
    c.truth(a.pass && a.max_deviation == 0.0 && a.bin_mass == std::vector<double>{0.5, 0.5}, "n=2");
    const auto b = audit_omega(build_omega(uniform_xy(), 1, 4), uniform_xy());
    c.truth(b.pass && b.max_deviation == 0.0, "n=4");
  });
  v.emplace_back("deterministic codec contracts", [](Check& c) {
    CodeSizes s;
    s.m1 = 6;
    s.m2 = 6;
    s.n = 8;
    s.delta = 0.5;
    const auto scheme = identity_scheme();
    const Codebook cb = generate_codebook(scheme, s, 2, 1 << 20);
    const OmegaMap om = build_omega(uniform_xy(), 2, 8);
    const Sequence x{0, 1, 1, 0, 1, 0, 0, 1, 1, 0}, y{1, 1, 0, 0, 1, 0, 1, 0, 0, 0};
    const auto d1 = deterministic_encode(x, y, cb, scheme, om);
    const auto d2 = deterministic_encode(x, y, cb, scheme, om);
    c.truth(d1.k == d2.k && d1.messages == d2.messages, "repeatable");
    // Another tail in the same bin.
    for (std::size_t a = 0; a < om.atoms(); ++a) {
      if (om.assignment[a] != d1.k) continue;
      Sequence x2 = x, y2 = y;
      x2[8] = static_cast<Symbol>((a / 4) / 2);
      y2[8] = static_cast<Symbol>((a / 4) % 2);
      x2[9] = static_cast<Symbol>((a % 4) / 2);
      y2[9] = static_cast<Symbol>((a % 4) % 2);
      c.truth(deterministic_encode(x2, y2, cb, scheme, om).messages == d1.messages, "same bin");
    }
    const auto [xh, yh] = deterministic_decode(1 % s.m0, 2, 3, d1.k, cb, 2);
    c.truth(xh[8] == xh[0] && xh[9] == xh[1] && yh[8] == yh[0] && yh[9] == yh[1], "tail copy");
    const auto plain = decode(0, 2, 3, d1.k, cb);
    const auto zero = deterministic_decode(0, 2, 3, d1.k, cb, 0);
    c.truth(plain == zero, "n0 = 0");
    const OmegaMap one = build_omega(uniform_xy(), 0, 1);
    c.truth(one.assignment.size() == 1 && one.assignment[0] == 0, "constant omega");
  });
  v.emplace_back("simulation is repeatable and thread-count independent", [](Check& c) {
    SimConfig cfg = small_sim(SimMode::CommonRandomness);
    const Json a = to_json(run_simulation(cfg));
    cfg.threads = 3;
    c.truth(a == to_json(run_simulation(cfg)), "identical reports");
  });
  v.emplace_back("deterministic simulation copies head marginals into the tail", [](Check& c) {
    SimConfig cfg = small_sim(SimMode::Deterministic);
    cfg.n0 = 2;
    const SimReport r = run_simulation(cfg);
    c.truth(r.x.positions[4].counts == r.x.positions[0].counts &&
                r.x.positions[5].counts == r.x.positions[1].counts,
            "tail marginals");
    c.near(r.rate_overhead, std::log2(4.0) / 6.0, 0.0, "overhead");
    c.near(r.x.realized_rate, (std::log2(static_cast<double>(r.sizes.m1)) + 2.0) / 6.0, 1e-15,
           "rate");
  });
  v.emplace_back("single-element n_list equals run_simulation", [](Check& c) {
    const SimConfig cfg = small_sim(SimMode::CommonRandomness);
    const auto s = convergence_study(cfg, {cfg.n}, cfg.trials);
    c.truth(to_json(s.rows.at(0)) == to_json(run_simulation(cfg)), "identical");
  });
  v.emplace_back("rdp command on uniform binary with D = P = 0 reports rate 1", [](Check& c) {
    const Json cfg{{"source", {0.5, 0.5}}, {"d_budget", 0.0}, {"p_budget", 0.0}};
    const auto out = cmd_rdp(cfg, {});
    c.near(out.document["result"]["rate_bits"].get<double>(), 1.0, 1e-6, "rate");
  });
  v.emplace_back("missing required field maps to exit 2 and is named", [](Check& c) {
    try {
      cmd_rdp(Json{{"source", {0.5, 0.5}}}, {});
      c.truth(false, "expected an error");
    } catch (const std::exception& e) {
      c.truth(exit_code_for(e) == kExitConfig, "exit 2");
      c.truth(std::string(e.what()).find("d_budget") != std::string::npos, "field named");
    }
  });
  v.emplace_back("independent strategy yields the single corner point", [](Check& c) {
    const Json cfg{{"p_xy", {{0.45, 0.05}, {0.05, 0.45}}},
                   {"budgets", {{"d1", 0.1}, {"d2", 0.1}}},
                   {"strategy", "independent"}};
    const auto out = cmd_region(cfg, {});
    c.truth(out.document["frontier"]["points"].size() == 1, "one point");
    c.near(out.document["frontier"]["points"][0]["r0_bits"].get<double>(), 0.0, 1e-12, "r0");
  });
  v.emplace_back("region rerun with a fixed seed gives identical CSV", [](Check& c) {
    const Json cfg{{"p_xy", {{0.45, 0.05}, {0.05, 0.45}}},
                   {"budgets", {{"d1", 0.1}, {"d2", 0.1}}},
                   {"samples", 6},
                   {"seed", 11}};
    RunOptions serial, parallel;
    serial.threads = 1;
    parallel.threads = 4;
    c.truth(cmd_region(cfg, serial).csv_files == cmd_region(cfg, parallel).csv_files, "bytes");
  });
  v.emplace_back("derand audit on four uniform atoms passes with zero deviation", [](Check& c) {
    const Json cfg{{"p_xy", {{0.25, 0.25}, {0.25, 0.25}}}, {"n", 4}, {"n0", 1}};
    const auto out = cmd_derand_audit(cfg, {});
    c.truth(out.document["audit"]["pass"].get<bool>(), "pass");
    c.near(out.document["audit"]["max_deviation"].get<double>(), 0.0, 0.0, "deviation");
  });
  v.emplace_back("over-cap simulation maps to exit 3", [](Check& c) {
    const Json cfg{{"p_xy", {{0.25, 0.25}, {0.25, 0.25}}},
                   {"budgets", {{"d1", 0.1}, {"d2", 0.1}}},
                   {"n", 64},
                   {"delta", 0.1},
                   {"trials", 1},
                   {"memory_cap", 1000}};
    try {
      cmd_simulate(cfg, {});
      c.truth(false, "expected a resource error");
    } catch (const std::exception& e) {
      c.truth(exit_code_for(e) == kExitResource, e.what());
    }
  });
  return v;
}

}  // namespace

std::vector<SelftestCase> run_selftest() {
  std::vector<SelftestCase> out;
  for (auto& [name, fn] : cases()) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << "threw: " << e.what();
    }
    out.push_back({name, c.ok, c.detail.str()});
  }
  return out;
}

}  // namespace gwrdp
