#pragma once

// Binary linear block codes for the coding layer of Construction A/B lattices.
// Words are bit masks: bit i holds coordinate i, so n <= 32.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace vlcshape::codes {

using Word = std::uint32_t;

inline int weight(Word w) { return __builtin_popcount(w); }

/// Codeword chosen by a soft decoder. `metric` is sum_{i : c_i = 1} r_i for the
/// reliabilities r passed in; callers add their own bit-0 baseline.
struct SoftDecodeResult {
  Word codeword = 0;
  double metric = 0.0;
};

class BinaryBlockCode {
 public:
  virtual ~BinaryBlockCode() = default;

  int n() const { return n_; }
  int k() const { return k_; }
  int d_min() const { return d_min_; }
  /// k rows, each an n-bit word.
  const std::vector<Word>& generator() const { return generator_; }

  /// Message bit j selects generator row j.
  Word encode(Word message) const;
  /// Inverse of encode on codewords. Throws ContractViolation for non-codewords.
  virtual Word message_of(Word codeword) const = 0;
  virtual bool contains(Word word) const = 0;

  /// ML decoding for the additive metric sum_i c_i r_i, where r_i is the cost
  /// of bit 1 minus the cost of bit 0 at coordinate i. Ties go to the codeword
  /// with the smaller message.
  virtual SoftDecodeResult soft_decode(std::span<const double> reliabilities) const = 0;

  /// Nearest codeword in Hamming distance (smallest message on ties).
  virtual Word hard_decode(Word received) const = 0;

 protected:
  BinaryBlockCode(int n, int k, int d_min, std::vector<Word> generator);

 private:
  int n_;
  int k_;
  int d_min_;
  std::vector<Word> generator_;
};

/// Systematic code [I_k | P]: message bits are coordinates 0..k-1. Soft
/// decoding scans all 2^k codewords using per-byte partial-sum tables.
class SystematicCode final : public BinaryBlockCode {
 public:
  /// `parity_rows[j]` is row j of P, an (n-k)-bit word. Throws ConfigError
  /// when k > 16 or n > 32, or when the stated d_min exceeds the true one.
  SystematicCode(int n, std::vector<Word> parity_rows, int d_min);

  Word message_of(Word codeword) const override;
  bool contains(Word word) const override;
  SoftDecodeResult soft_decode(std::span<const double> reliabilities) const override;
  Word hard_decode(Word received) const override;

  /// All 2^k codewords, indexed by message.
  const std::vector<Word>& codewords() const { return codewords_; }

 private:
  std::vector<Word> codewords_;
};

/// (n, n-1) single parity-check code: the last coordinate completes even weight.
class ParityCheckCode final : public BinaryBlockCode {
 public:
  explicit ParityCheckCode(int n);

  Word message_of(Word codeword) const override;
  bool contains(Word word) const override;
  /// Wagner rule: hard decisions, then flip the least reliable bit if odd.
  SoftDecodeResult soft_decode(std::span<const double> reliabilities) const override;
  Word hard_decode(Word received) const override;
};

/// Parity part of the systematic extended Golay generator, row j for message bit j.
inline constexpr std::array<Word, 12> kGolayParityRows = {
    0xc75, 0x49f, 0xd4b, 0x6e3, 0x9b3, 0xb66, 0xecc, 0x1ed, 0x3da, 0x7b4, 0xb1d, 0xe3a};

/// Shared (24,12,8) extended Golay code. The first call checks the weight
/// enumerator and self-duality and throws ConfigError on mismatch.
const SystematicCode& golay24();

/// Encodes a 12-bit message; throws ContractViolation if higher bits are set.
Word golay_encode(Word message);

SoftDecodeResult golay_soft_ml_decode(std::span<const double> reliabilities);

/// Appends the parity bit at coordinate n-1 to an (n-1)-bit message.
Word parity_encode(Word message, int n);

/// Number of codewords of each weight 0..n, by enumeration.
std::vector<std::uint64_t> weight_enumerator(const SystematicCode& code);

/// True when every pair of generator rows has even overlap.
bool is_self_orthogonal(const BinaryBlockCode& code);

/// Vector form helpers, coordinate i <-> bit i.
Word to_word(std::span<const int> bits);
std::vector<int> to_bits(Word w, int n);

}  // namespace vlcshape::codes
