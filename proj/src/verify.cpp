#include "vlcshape/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "vlcshape/binary_codes.hpp"
#include "vlcshape/constellation.hpp"
#include "vlcshape/lattice_engine.hpp"
#include "vlcshape/link_simulator.hpp"
#include "vlcshape/shaping_geometry.hpp"
#include "vlcshape/shell_indexer.hpp"

namespace vlcshape::verify {

namespace {

using lattice::LatticePoint;

struct Counter {
  PropertyResult r;

  explicit Counter(std::string name) { r.name = std::move(name); }
  void check(bool ok, const std::string& what = {}) {
    ++r.checks;
    if (!ok) {
      ++r.failures;
      r.passed = false;
      if (r.detail.empty()) r.detail = what;
    }
  }
};

std::vector<double> noise_in_ball(std::mt19937_64& rng, int n, double radius) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  std::vector<double> z(n);
  double norm = 0.0;
  for (auto& v : z) {
    v = g(rng);
    norm += v * v;
  }
  const double r = radius * std::pow(u(rng), 1.0 / n) / std::sqrt(norm);
  for (auto& v : z) v *= r;
  return z;
}

LatticePoint random_h24(std::mt19937_64& rng) {
  const auto& golay = codes::golay24();
  const codes::Word c = golay.codewords()[rng() % 4096];
  std::uniform_int_distribution<std::int64_t> zd(-4, 4);
  LatticePoint p(24);
  std::int64_t sum = 0;
  for (int i = 0; i < 24; ++i) {
    const std::int64_t z = zd(rng);
    sum += z;
    p[i] = 2 * z + (c >> i & 1U);
  }
  if (sum % 2 != 0) p[rng() % 24] += 2;
  return p;
}

void golay_weights(const Options& o, Counter& c) {
  std::vector<codes::Word> rows(codes::kGolayParityRows.begin(), codes::kGolayParityRows.end());
  if (o.fault == Fault::Golay) rows[5] ^= 1U << 3;
  const codes::SystematicCode code(24, rows, 1);
  const auto w = codes::weight_enumerator(code);
  for (int k = 0; k <= 24; ++k) {
    const std::uint64_t want = k == 0 || k == 24 ? 1 : k == 8 || k == 16 ? 759 : k == 12 ? 2576 : 0;
    c.check(w[k] == want, "weight " + std::to_string(k) + " count " + std::to_string(w[k]));
  }
}

void golay_self_dual(const Options& o, Counter& c) {
  std::vector<codes::Word> rows(codes::kGolayParityRows.begin(), codes::kGolayParityRows.end());
  if (o.fault == Fault::Golay) rows[5] ^= 1U << 3;
  const codes::SystematicCode code(24, rows, 1);
  c.check(code.k() * 2 == code.n(), "dimension is not n/2");
  c.check(codes::is_self_orthogonal(code), "generator rows are not mutually orthogonal");
}

void golay_soft_ml(const Options& o, Counter& c) {
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> g;
  const auto& golay = codes::golay24();
  for (int t = 0; t < 300; ++t) {
    std::vector<double> r(24);
    for (auto& v : r) v = g(rng);
    double best = 1e300;
    for (const auto cw : golay.codewords()) {
      double m = 0.0;
      for (int i = 0; i < 24; ++i) m += (cw >> i & 1U) ? r[i] : 0.0;
      best = std::min(best, m);
    }
    c.check(std::fabs(golay.soft_decode(r).metric - best) < 1e-9, "soft decoder missed the minimum");
  }
}

void parity_wagner(const Options& o, Counter& c) {
  std::mt19937_64 rng(o.seed + 1);
  std::normal_distribution<double> g;
  const codes::ParityCheckCode code(8);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> r(8);
    for (auto& v : r) v = g(rng);
    double best = 1e300;
    for (codes::Word m = 0; m < 128; ++m) {
      const auto cw = codes::parity_encode(m, 8);
      double s = 0.0;
      for (int i = 0; i < 8; ++i) s += (cw >> i & 1U) ? r[i] : 0.0;
      best = std::min(best, s);
    }
    c.check(std::fabs(code.soft_decode(r).metric - best) < 1e-9, "Wagner rule is not ML");
  }
}

void h24_bdd(const Options& o, Counter& c) {
  std::mt19937_64 rng(o.seed + 2);
  for (int t = 0; t < 2000; ++t) {
    const auto p = random_h24(rng);
    const auto z = noise_in_ball(rng, 24, std::sqrt(2.0) * 0.999);
    std::vector<double> y(24);
    for (int i = 0; i < 24; ++i) y[i] = static_cast<double>(p[i]) + z[i];
    c.check(lattice::bdd_half_lattice(y, codes::golay24()) == p, "H24 decoder failed inside radius");
  }
}

void leech_bdd(const Options& o, Counter& c) {
  std::mt19937_64 rng(o.seed + 3);
  const auto xi = lattice::leech::xi();
  for (int t = 0; t < 1000; ++t) {
    auto p = random_h24(rng);
    const bool shifted = rng() & 1U;
    for (int i = 0; i < 24; ++i) p[i] = 2 * p[i] + (shifted ? xi[i] : 0);
    const auto z = noise_in_ball(rng, 24, 2.0 * std::sqrt(2.0) * 0.999);
    std::vector<double> y(24);
    for (int i = 0; i < 24; ++i) y[i] = static_cast<double>(p[i]) + z[i];
    c.check(lattice::leech::decode(y).point == p, "Leech decoder failed inside radius");
  }
}

void dn_exhaustive(const Options& o, Counter& c) {
  std::mt19937_64 rng(o.seed + 4);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> y(4);
    for (auto& v : y) v = u(rng);
    double best = 1e300;
    LatticePoint q(4);
    for (q[0] = -4; q[0] <= 4; ++q[0]) {
      for (q[1] = -4; q[1] <= 4; ++q[1]) {
        for (q[2] = -4; q[2] <= 4; ++q[2]) {
          for (q[3] = -4; q[3] <= 4; ++q[3]) {
            if (lattice::in_dn(q)) best = std::min(best, lattice::distance_sq(y, q));
          }
        }
      }
    }
    const auto p = lattice::nearest_point_dn(y);
    c.check(lattice::in_dn(p) && std::fabs(lattice::distance_sq(y, p) - best) < 1e-12, "D4 decoder not nearest");
  }
}

std::vector<LatticePoint> enumerate_td(int n, int H, int max_sum) {
  std::vector<LatticePoint> pts;
  LatticePoint x(n, 0);
  while (true) {
    std::int64_t s = 0;
    for (const auto v : x) s += v;
    if (s % 2 == 0 && s <= max_sum) pts.push_back(x);
    int i = n - 1;
    while (i >= 0 && x[i] == H) x[i--] = 0;
    if (i < 0) break;
    ++x[i];
  }
  return pts;
}

void shell_counts(const Options&, Counter& c) {
  for (int H = 1; H <= 4; ++H) {
    for (int L = 0; L <= 8; ++L) {
      const auto pts = enumerate_td(4, H, 2 * L);
      c.check(shell::count_td(4, H, L) == pts.size(),
              "count mismatch at H=" + std::to_string(H) + " L=" + std::to_string(L));
    }
  }
}

void shell_bijection(const Options&, Counter& c) {
  const int n = 4;
  const int H = 3;
  const int L = 5;
  auto pts = enumerate_td(n, H, 2 * L);
  const auto l1 = [](const LatticePoint& p) {
    std::int64_t s = 0;
    for (const auto v : p) s += v;
    return s;
  };
  std::stable_sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
    return l1(a) != l1(b) ? l1(a) < l1(b) : a < b;
  });
  const std::size_t m = pts.size() - 5;
  const shell::ShellIndexer idx({n, H, L, shell::BigInt(m)});
  for (std::size_t i = 0; i < m; ++i) {
    const auto p = idx.index_to_point(shell::BigInt(i));
    c.check(p == pts[i], "index " + std::to_string(i) + " is not the expected point");
    c.check(idx.point_to_index(p) == i, "rank is not the inverse of unrank");
  }
  for (std::size_t i = m; i < pts.size(); ++i) c.check(!idx.try_point_to_index(pts[i]), "point beyond M_s accepted");
}

void irwin_hall(const Options&, Counter& c) {
  for (int n = 1; n <= 10; ++n) {
    for (int k = 1; k < 20; ++k) {
      const double x = k / 20.0;
      // P(mean >= x) = 1 - (1/n!) sum_j (-1)^j C(n, j) (n x - j)_+^n
      long double cdf = 0.0L;
      long double binom = 1.0L;
      long double fact = 1.0L;
      for (int j = 1; j <= n; ++j) fact *= j;
      for (int j = 0; j <= n; ++j) {
        const long double base = static_cast<long double>(n) * x - j;
        if (base > 0) cdf += (j % 2 ? -1.0L : 1.0L) * binom * std::pow(base, n);
        binom = binom * (n - j) / (j + 1);
      }
      const double want = static_cast<double>(1.0L - cdf / fact);
      c.check(std::fabs(shaping::irwin_hall_tail(n, x) - want) < 1e-12, "tail mismatch at n=" + std::to_string(n));
    }
  }
}

void shaping_solver(const Options&, Counter& c) {
  for (int n = 2; n <= 32; ++n) {
    for (double alpha : {0.1, 0.2, 0.3, 0.4}) {
      const auto s = shaping::solve_t_star(n, alpha);
      c.check(std::fabs(shaping::avg_first_moment(n, s.t_star) - alpha) < 1e-9,
              "P_n(t*) != alpha at n=" + std::to_string(n));
    }
  }
}

void constraint_feasibility(const Options&, Counter& c) {
  using constellation::Kind;
  for (auto kind : {Kind::OSLC, Kind::Cubic, Kind::TCC}) {
    for (int beta = 1; beta <= 5; ++beta) {
      for (double alpha : {0.2, 0.3}) {
        const auto s = constellation::build_spec(kind, beta, alpha);
        c.check(constellation::satisfies_constraints(s),
                constellation::to_string(kind) + " beta=" + std::to_string(beta) + " violates a constraint");
      }
    }
  }
}

void oslc_mapping(const Options& o, Counter& c) {
  const auto s = constellation::build_oslc_spec(3, 0.2);
  std::mt19937_64 rng(o.seed + 5);
  for (int t = 0; t < 4000; ++t) {
    std::vector<int> bits(s.bits());
    for (auto& b : bits) b = static_cast<int>(rng() & 1U);
    const auto w = constellation::from_bits(s, bits);
    const auto lam = constellation::map_bits(s, w);
    c.check(std::all_of(lam.begin(), lam.end(), [](auto v) { return v >= 0; }), "negative intensity");
    c.check(lattice::leech::contains(lam), "mapped point is not a Leech point");
    c.check(constellation::demap_point(s, lam) == w, "demap is not the inverse of map");
  }
}

void simulator_determinism(const Options& o, Counter& c) {
  const auto s = constellation::build_tcc_spec(2, 0.3);
  const auto a = sim::simulate_ser(s, 12.0, {50000, 200}, o.seed, 1);
  const auto b = sim::simulate_ser(s, 12.0, {50000, 200}, o.seed, 3);
  c.check(a.trials == b.trials && a.errors == b.errors, "record depends on the worker count");
  c.check(a.errors > 0, "no errors at a noisy operating point");
}

void noise_calibration(const Options& o, Counter& c) {
  const int pairs = 500000;
  double sq = 0.0;
  double sum = 0.0;
  for (int t = 0; t < pairs; ++t) {
    sim::TrialRng rng(o.seed, t);
    const auto [a, b] = rng.gaussian_pair();
    sum += a + b;
    sq += a * a + b * b;
  }
  const double mean = sum / (2.0 * pairs);
  c.check(std::fabs(mean) < 0.01, "noise mean off zero");
  c.check(std::fabs(sq / (2.0 * pairs) - mean * mean - 1.0) < 0.01, "noise variance off one");
}

}  // namespace

std::vector<PropertyResult> run_all(const Options& options) {
  const std::vector<std::pair<const char*, std::function<void(const Options&, Counter&)>>> props{
      {"golay_weight_enumerator", golay_weights},
      {"golay_self_dual", golay_self_dual},
      {"golay_soft_ml_vs_brute_force", golay_soft_ml},
      {"parity_check_wagner_ml", parity_wagner},
      {"h24_bounded_distance", h24_bdd},
      {"leech_bounded_distance", leech_bdd},
      {"dn_nearest_point_exhaustive", dn_exhaustive},
      {"shell_count_vs_enumeration", shell_counts},
      {"shell_bijection_least_l1", shell_bijection},
      {"irwin_hall_tail_identity", irwin_hall},
      {"shaping_solver_consistency", shaping_solver},
      {"constraint_feasibility", constraint_feasibility},
      {"oslc_map_demap_bijection", oslc_mapping},
      {"simulator_worker_invariance", simulator_determinism},
      {"noise_calibration", noise_calibration}};
  std::vector<PropertyResult> out;
  for (const auto& [name, run] : props) {
    Counter c(name);
    try {
      run(options, c);
    } catch (const std::exception& e) {
      c.check(false, std::string("exception: ") + e.what());
    }
    out.push_back(c.r);
  }
  return out;
}

bool all_passed(const std::vector<PropertyResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

nlohmann::json to_json(const std::vector<PropertyResult>& results) {
  nlohmann::json props = nlohmann::json::array();
  for (const auto& r : results) {
    props.push_back({{"name", r.name},
                     {"passed", r.passed},
                     {"checks", r.checks},
                     {"failures", r.failures},
                     {"detail", r.detail}});
  }
  return {{"passed", all_passed(results)}, {"property_count", results.size()}, {"properties", props}};
}

}  // namespace vlcshape::verify
