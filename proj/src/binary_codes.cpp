#include "vlcshape/binary_codes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vlcshape/errors.hpp"

namespace vlcshape::codes {

namespace {

Word low_mask(int bits) { return bits >= 32 ? ~Word{0} : (Word{1} << bits) - 1; }

std::vector<Word> systematic_rows(int n, const std::vector<Word>& parity_rows) {
  const int k = static_cast<int>(parity_rows.size());
  std::vector<Word> rows(k);
  for (int j = 0; j < k; ++j) {
    if (parity_rows[j] & ~low_mask(n - k)) throw ConfigError("parity row wider than n - k");
    rows[j] = (Word{1} << j) | (parity_rows[j] << k);
  }
  return rows;
}

}  // namespace

BinaryBlockCode::BinaryBlockCode(int n, int k, int d_min, std::vector<Word> generator)
    : n_(n), k_(k), d_min_(d_min), generator_(std::move(generator)) {
  if (n < 1 || n > 32 || k < 0 || k > n) throw ConfigError("unsupported code dimensions");
}

Word BinaryBlockCode::encode(Word message) const {
  if (message & ~low_mask(k_)) {
    throw ContractViolation("message has more than " + std::to_string(k_) + " bits");
  }
  Word c = 0;
  for (int j = 0; j < k_; ++j) {
    if (message >> j & 1U) c ^= generator_[j];
  }
  return c;
}

SystematicCode::SystematicCode(int n, std::vector<Word> parity_rows, int d_min)
    : BinaryBlockCode(n, static_cast<int>(parity_rows.size()), d_min,
                      systematic_rows(n, parity_rows)) {
  if (k() > 16) throw ConfigError("exhaustive soft decoding limited to k <= 16");
  const Word count = Word{1} << k();
  codewords_.resize(count);
  // Gray-code walk: one XOR per codeword.
  Word c = 0;
  for (Word i = 1; i < count; ++i) {
    c ^= generator()[__builtin_ctz(i)];
    codewords_[i ^ (i >> 1)] = c;
  }
  int true_d = n;
  for (Word m = 1; m < count; ++m) true_d = std::min(true_d, weight(codewords_[m]));
  if (k() > 0 && true_d < d_min) {
    throw ConfigError("stated minimum distance " + std::to_string(d_min) + " exceeds true " +
                      std::to_string(true_d));
  }
}

Word SystematicCode::message_of(Word codeword) const {
  if (!contains(codeword)) throw ContractViolation("word is not a codeword");
  return codeword & low_mask(k());
}

bool SystematicCode::contains(Word word) const {
  if (word & ~low_mask(n())) return false;
  return codewords_[word & low_mask(k())] == word;
}

SoftDecodeResult SystematicCode::soft_decode(std::span<const double> r) const {
  if (static_cast<int>(r.size()) != n()) throw ContractViolation("reliability length != n");
  // Partial sums of r over every subset of each byte of the word.
  const int bytes = (n() + 7) / 8;
  std::array<std::array<double, 256>, 4> table{};
  for (int b = 0; b < bytes; ++b) {
    auto& t = table[b];
    t[0] = 0.0;
    for (int bit = 0; bit < 8; ++bit) {
      const int coord = 8 * b + bit;
      const double v = coord < n() ? r[coord] : 0.0;
      const int half = 1 << bit;
      for (int s = 0; s < half; ++s) t[half + s] = t[s] + v;
    }
  }
  SoftDecodeResult best{0, 0.0};
  bool first = true;
  for (const Word c : codewords_) {
    double m = table[0][c & 0xffU];
    for (int b = 1; b < bytes; ++b) m += table[b][(c >> (8 * b)) & 0xffU];
    if (first || m < best.metric) {
      best = {c, m};
      first = false;
    }
  }
  return best;
}

Word SystematicCode::hard_decode(Word received) const {
  Word best = 0;
  int best_d = n() + 1;
  for (const Word c : codewords_) {
    const int d = weight(c ^ received);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

namespace {

std::vector<Word> parity_generator(int n) {
  if (n < 2 || n > 32) throw ConfigError("parity code needs 2 <= n <= 32");
  std::vector<Word> rows(n - 1);
  for (int j = 0; j < n - 1; ++j) rows[j] = (Word{1} << j) | (Word{1} << (n - 1));
  return rows;
}

}  // namespace

ParityCheckCode::ParityCheckCode(int n) : BinaryBlockCode(n, n - 1, 2, parity_generator(n)) {}

Word ParityCheckCode::message_of(Word codeword) const {
  if (!contains(codeword)) throw ContractViolation("word is not even weight");
  return codeword & low_mask(k());
}

bool ParityCheckCode::contains(Word word) const {
  return (word & ~low_mask(n())) == 0 && weight(word) % 2 == 0;
}

SoftDecodeResult ParityCheckCode::soft_decode(std::span<const double> r) const {
  if (static_cast<int>(r.size()) != n()) throw ContractViolation("reliability length != n");
  Word c = 0;
  double metric = 0.0;
  int weakest = 0;
  for (int i = 0; i < n(); ++i) {
    if (r[i] < 0.0) {
      c |= Word{1} << i;
      metric += r[i];
    }
    if (std::fabs(r[i]) < std::fabs(r[weakest])) weakest = i;
  }
  if (weight(c) % 2 != 0) {
    c ^= Word{1} << weakest;
    metric += std::fabs(r[weakest]);
  }
  return {c, metric};
}

Word ParityCheckCode::hard_decode(Word received) const {
  received &= low_mask(n());
  // Any single flip is optimal; flip the last coordinate to stay deterministic.
  return weight(received) % 2 == 0 ? received : received ^ (Word{1} << (n() - 1));
}

std::vector<std::uint64_t> weight_enumerator(const SystematicCode& code) {
  std::vector<std::uint64_t> counts(code.n() + 1, 0);
  for (const Word c : code.codewords()) ++counts[weight(c)];
  return counts;
}

bool is_self_orthogonal(const BinaryBlockCode& code) {
  const auto& g = code.generator();
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i; j < g.size(); ++j) {
      if (weight(g[i] & g[j]) % 2 != 0) return false;
    }
  }
  return true;
}

const SystematicCode& golay24() {
  static const SystematicCode code = [] {
    SystematicCode c(24, std::vector<Word>(kGolayParityRows.begin(), kGolayParityRows.end()), 8);
    const auto a = weight_enumerator(c);
    const bool weights_ok = a[0] == 1 && a[8] == 759 && a[12] == 2576 && a[16] == 759 &&
                            a[24] == 1 && a[0] + a[8] + a[12] + a[16] + a[24] == 4096;
    if (!weights_ok || !is_self_orthogonal(c)) {
      throw ConfigError("stored Golay generator fails its (24,12,8) self-check");
    }
    return c;
  }();
  return code;
}

Word golay_encode(Word message) { return golay24().encode(message); }

SoftDecodeResult golay_soft_ml_decode(std::span<const double> reliabilities) {
  return golay24().soft_decode(reliabilities);
}

Word parity_encode(Word message, int n) {
  if (n < 2) throw ContractViolation("parity code needs n >= 2");
  if (message & ~low_mask(n - 1)) throw ContractViolation("message wider than n - 1 bits");
  return message | (static_cast<Word>(weight(message) & 1) << (n - 1));
}

Word to_word(std::span<const int> bits) {
  if (bits.size() > 32) throw ContractViolation("word longer than 32 bits");
  Word w = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0 && bits[i] != 1) throw ContractViolation("bit value must be 0 or 1");
    w |= static_cast<Word>(bits[i]) << i;
  }
  return w;
}

std::vector<int> to_bits(Word w, int n) {
  std::vector<int> bits(n);
  for (int i = 0; i < n; ++i) bits[i] = static_cast<int>(w >> i & 1U);
  return bits;
}

}  // namespace vlcshape::codes
