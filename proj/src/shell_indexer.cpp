#include "vlcshape/shell_indexer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>

#include "vlcshape/errors.hpp"
#include "vlcshape/shaping_geometry.hpp"

namespace vlcshape::shell {

namespace {

constexpr std::array<char, 4> kMagic = {'V', 'T', 'D', 'C'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr u128 kSaturated = u128{1} << 127;

void write_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xffU));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw ConfigError("truncated count-table cache");
    v |= static_cast<std::uint32_t>(c) << (8 * i);
  }
  return v;
}

std::vector<BigInt> build_entries(int n, int H, int max_sum) {
  if (n < 0 || H < 0 || max_sum < 0) throw ConfigError("count table needs n, H, max_sum >= 0");
  const std::size_t width = static_cast<std::size_t>(max_sum) + 1;
  std::vector<BigInt> e((static_cast<std::size_t>(n) + 1) * width, BigInt(0));
  e[0] = 1;
  for (int m = 1; m <= n; ++m) {
    const BigInt* prev = &e[(m - 1) * width];
    BigInt* row = &e[m * width];
    // Sliding window: N[m][s] = N[m][s-1] + N[m-1][s] - N[m-1][s-H-1].
    for (int s = 0; s <= max_sum; ++s) {
      BigInt v = prev[s];
      if (s > 0) v += row[s - 1];
      if (s - H - 1 >= 0) v -= prev[s - H - 1];
      row[s] = std::move(v);
    }
  }
  return e;
}

u128 saturate(const BigInt& v) {
  return v != 0 && msb(v) >= 127 ? kSaturated : to_u128(v);
}

void check_point_shape(std::span<const std::int64_t> d, int n) {
  if (static_cast<int>(d.size()) != n) throw ContractViolation("point dimension mismatch");
}

}  // namespace

BigInt to_bigint(u128 v) {
  const BigInt hi = static_cast<std::uint64_t>(v >> 64);
  return (hi << 64) | BigInt(static_cast<std::uint64_t>(v));
}

u128 to_u128(const BigInt& v) {
  if (v < 0 || (v != 0 && msb(v) >= 128)) throw ContractViolation("value does not fit in 128 bits");
  const auto lo = static_cast<std::uint64_t>(v & BigInt(~std::uint64_t{0}));
  const auto hi = static_cast<std::uint64_t>(v >> 64);
  return (static_cast<u128>(hi) << 64) | lo;
}

CountTable::CountTable(int n, int H, int max_sum)
    : CountTable(n, H, max_sum, build_entries(n, H, max_sum)) {}

CountTable::CountTable(int n, int H, int max_sum, std::vector<BigInt> entries)
    : n_(n), H_(H), max_sum_(max_sum), entries_(std::move(entries)) {}

const BigInt& CountTable::at(int m, int s) const {
  if (m < 0 || m > n_ || s < 0 || s > max_sum_) throw ContractViolation("count table index");
  return entries_[static_cast<std::size_t>(m) * (max_sum_ + 1) + s];
}

void CountTable::save(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(n_));
  write_u32(out, static_cast<std::uint32_t>(H_));
  write_u32(out, static_cast<std::uint32_t>(max_sum_));
  std::vector<unsigned char> bytes;
  for (const BigInt& v : entries_) {
    bytes.clear();
    if (v != 0) export_bits(v, std::back_inserter(bytes), 8, false);
    write_u32(out, static_cast<std::uint32_t>(bytes.size()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

CountTable CountTable::load(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ConfigError("not a count-table cache");
  if (read_u32(in) != kFormatVersion) throw ConfigError("unsupported count-table cache version");
  const int n = static_cast<int>(read_u32(in));
  const int H = static_cast<int>(read_u32(in));
  const int max_sum = static_cast<int>(read_u32(in));
  const std::size_t count = (static_cast<std::size_t>(n) + 1) * (static_cast<std::size_t>(max_sum) + 1);
  std::vector<BigInt> entries(count);
  std::vector<unsigned char> bytes;
  for (auto& v : entries) {
    bytes.resize(read_u32(in));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw ConfigError("truncated count-table cache");
    v = 0;
    if (!bytes.empty()) import_bits(v, bytes.begin(), bytes.end(), 8, false);
  }
  return CountTable(n, H, max_sum, std::move(entries));
}

CountTable CountTable::load_or_build(int n, int H, int max_sum,
                                     const std::optional<std::filesystem::path>& dir) {
  if (!dir) return CountTable(n, H, max_sum);
  const auto path = *dir / ("td_" + std::to_string(n) + "_" + std::to_string(H) + "_" +
                            std::to_string(max_sum) + ".bin");
  if (std::ifstream in(path, std::ios::binary); in) {
    try {
      CountTable t = load(in);
      if (t.n_ == n && t.H_ == H && t.max_sum_ == max_sum) return t;
    } catch (const ConfigError&) {
      // Stale or corrupt cache: rebuild below.
    }
  }
  CountTable t(n, H, max_sum);
  std::error_code ec;
  std::filesystem::create_directories(*dir, ec);
  if (std::ofstream out(path, std::ios::binary); out) t.save(out);
  return t;
}

BigInt count_td(int n, int H, int L) {
  if (n < 1 || H < 0 || L < 0) throw DomainError("count_td needs n >= 1, H >= 0, L >= 0");
  const int max_sum = std::min(2 * L, n * H);
  const CountTable t(n, H, max_sum);
  BigInt total = 0;
  for (int s = 0; s <= max_sum; s += 2) total += t.at(n, s);
  return total;
}

TdParams determine_params(int n, int beta, int k_c, int k_a, double alpha) {
  const int k_s = n * beta - k_c - k_a;
  if (n < 1 || k_s < 1) {
    throw ConfigError("no shaping bits: n*beta - k_c - k_a = " + std::to_string(k_s));
  }
  const BigInt m_s = BigInt(1) << k_s;
  const double t_star = shaping::solve_t_star(n, alpha).t_star;
  for (int H = 1;; ++H) {
    // Even-sum points of {0..H}^n: ((H+1)^n + [H even]) / 2.
    const BigInt box = (boost::multiprecision::pow(BigInt(H + 1), static_cast<unsigned>(n)) +
                        (H % 2 == 0 ? 1 : 0)) /
                       2;
    if (box < m_s) continue;
    const CountTable t(n, H, n * H);
    BigInt cum = 0;
    int l_min = 0;
    for (int s = 0;; s += 2) {
      cum += t.at(n, s);
      if (cum >= m_s) {
        l_min = s / 2;
        break;
      }
    }
    if (2.0 * l_min <= H * t_star + 2.0) {
      const int proportional = static_cast<int>(std::ceil(H * t_star / 2.0));
      const int full = (n * H + 1) / 2;
      return {n, H, std::max(l_min, std::min(proportional, full)), m_s};
    }
  }
}

ShellIndexer::ShellIndexer(TdParams params, const std::optional<std::filesystem::path>& cache_dir)
    : params_(std::move(params)),
      table_(CountTable::load_or_build(params_.n, params_.H,
                                       std::min(2 * params_.L, params_.n * params_.H), cache_dir)) {
  const int n = params_.n;
  if (n < 1 || params_.M_s < 1) throw ConfigError("shell indexer needs n >= 1 and M_s >= 1");
  BigInt start = 0;
  for (int s = 0; s <= table_.max_sum(); s += 2) {
    shell_start_.push_back(start);
    const BigInt& shell = table_.at(n, s);
    if (start + shell >= params_.M_s) {
      last_shell_ = s;
      last_shell_taken_ = params_.M_s - start;
      break;
    }
    start += shell;
    if (s + 2 > table_.max_sum()) {
      throw ConfigError("M_s exceeds |TD_n(H, 2L)| = " + start.str());
    }
  }
  fast_ = params_.M_s <= (BigInt(1) << 126);
  if (fast_) {
    table_fast_.reserve(table_.entries().size());
    for (const auto& v : table_.entries()) table_fast_.push_back(saturate(v));
    for (const auto& v : shell_start_) shell_start_fast_.push_back(saturate(v));
  }
}

namespace {

// Lexicographic walk inside one shell. `count(m, s)` returns N[m][s]; counts may
// saturate above any reachable rank, since only j < count is ever tested before
// subtracting.
template <class Int, class Count>
void unrank_in_shell(Int j, int rem, int n, Count&& count, std::span<std::int64_t> out) {
  for (int p = 0; p < n; ++p) {
    const int m = n - p - 1;
    int v = 0;
    for (;; ++v) {
      const auto& c = count(m, rem - v);
      if (j < c) break;
      j -= c;
    }
    out[p] = v;
    rem -= v;
  }
}

}  // namespace

lattice::LatticePoint ShellIndexer::index_to_point(const BigInt& i) const {
  if (i < 0 || i >= params_.M_s) throw ContractViolation("shell index out of range");
  lattice::LatticePoint out(params_.n);
  if (fast_) {
    index_to_point(to_u128(i), out);
    return out;
  }
  const auto it = std::upper_bound(shell_start_.begin(), shell_start_.end(), i) - 1;
  const int s = 2 * static_cast<int>(it - shell_start_.begin());
  const int width = table_.max_sum() + 1;
  const auto& e = table_.entries();
  unrank_in_shell(BigInt(i - *it), s, params_.n,
                  [&](int m, int sum) -> const BigInt& { return e[m * width + sum]; }, out);
  return out;
}

void ShellIndexer::index_to_point(u128 i, std::span<std::int64_t> out) const {
  if (!fast_) throw ContractViolation("128-bit path unavailable for this M_s");
  check_point_shape(out, params_.n);
  if (to_bigint(i) >= params_.M_s) throw ContractViolation("shell index out of range");
  const auto it = std::upper_bound(shell_start_fast_.begin(), shell_start_fast_.end(), i) - 1;
  const int s = 2 * static_cast<int>(it - shell_start_fast_.begin());
  const int width = table_.max_sum() + 1;
  unrank_in_shell(u128(i - *it), s, params_.n,
                  [&](int m, int sum) -> const u128& { return table_fast_[m * width + sum]; }, out);
}

std::optional<BigInt> ShellIndexer::try_point_to_index(std::span<const std::int64_t> d) const {
  if (static_cast<int>(d.size()) != params_.n) return std::nullopt;
  std::int64_t sum = 0;
  for (const auto v : d) {
    if (v < 0 || v > params_.H) return std::nullopt;
    sum += v;
  }
  if (sum % 2 != 0 || sum > last_shell_) return std::nullopt;
  BigInt idx = shell_start_[sum / 2];
  int rem = static_cast<int>(sum);
  for (int p = 0; p < params_.n; ++p) {
    const int m = params_.n - p - 1;
    for (int v = 0; v < d[p]; ++v) idx += table_.at(m, rem - v);
    rem -= static_cast<int>(d[p]);
  }
  if (idx >= params_.M_s) return std::nullopt;
  return idx;
}

BigInt ShellIndexer::point_to_index(std::span<const std::int64_t> d) const {
  check_point_shape(d, params_.n);
  auto idx = try_point_to_index(d);
  if (!idx) throw DemapError("point is not among the selected shaping points");
  return *idx;
}

L1Stats ShellIndexer::l1_stats() const {
  L1Stats st;
  for (int s = 0; s < last_shell_; s += 2) st.sum_l1 += table_.at(params_.n, s) * s;
  st.sum_l1 += last_shell_taken_ * last_shell_;
  st.mean_l1 = static_cast<double>(shaping::Rational(st.sum_l1, params_.M_s));
  return st;
}

std::vector<BigInt> ShellIndexer::coordinate_marginal(int coord) const {
  const int n = params_.n;
  const int H = params_.H;
  if (coord < 0 || coord >= n) throw ContractViolation("coordinate out of range");
  std::vector<BigInt> marg(H + 1, BigInt(0));
  // Points with d_coord = u and the remaining n-1 coordinates summing to s - u.
  auto add_free = [&](int m, int total) {
    for (int u = 0; u <= std::min(H, total); ++u) marg[u] += table_.at(m, total - u);
  };
  for (int s = 0; s < last_shell_; s += 2) add_free(n - 1, s);
  // The partial shell splits into blocks: a fixed prefix, a smaller value at
  // position p, and a free suffix.
  BigInt j = last_shell_taken_;
  std::vector<int> prefix(n, 0);
  int rem = last_shell_;
  for (int p = 0; p < n && j > 0; ++p) {
    const int m = n - p - 1;
    int v = 0;
    for (; v <= std::min(H, rem); ++v) {
      const BigInt& c = table_.at(m, rem - v);
      if (j < c) break;
      j -= c;
      if (c == 0) continue;
      if (coord < p) {
        marg[prefix[coord]] += c;
      } else if (coord == p) {
        marg[v] += c;
      } else {
        add_free(m - 1, rem - v);
      }
    }
    prefix[p] = v;
    rem -= v;
  }
  return marg;
}

int ShellIndexer::coordinate_max(int coord) const {
  const auto marg = coordinate_marginal(coord);
  for (int v = params_.H; v >= 0; --v) {
    if (marg[v] > 0) return v;
  }
  return 0;
}

}  // namespace vlcshape::shell
