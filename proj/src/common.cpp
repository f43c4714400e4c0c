#include "dgs/common.hpp"
#include "dgs/rng.hpp"

namespace dgs {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::EnumerationBudgetExceeded: return "EnumerationBudgetExceeded";
    case ErrorKind::NoVectorInRadius: return "NoVectorInRadius";
    case ErrorKind::ParamConstraint: return "ParamConstraint";
    case ErrorKind::EmptySampleSet: return "EmptySampleSet";
    case ErrorKind::RatioOutOfRange: return "RatioOutOfRange";
    case ErrorKind::ZeroGoodAmplitude: return "ZeroGoodAmplitude";
    case ErrorKind::PhiOutOfRange: return "PhiOutOfRange";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::NoSolutionInSupport: return "NoSolutionInSupport";
    case ErrorKind::MissingInput: return "MissingInput";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

std::uint64_t box_size(const std::vector<std::pair<std::int64_t, std::int64_t>>& box) {
  long double total = 1;
  for (const auto& [lo, hi] : box) {
    if (hi < lo) return 0;
    total *= static_cast<long double>(hi - lo + 1);
  }
  if (total > static_cast<long double>(std::numeric_limits<std::uint64_t>::max()))
    return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(total);
}

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

Philox Philox::substream(std::uint64_t id) const {
  return Philox(seed_, splitmix64(stream_ ^ splitmix64(id + 0x632BE59BD9B4E019ULL)));
}

void Philox::refill() {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                      static_cast<std::uint32_t>(seed_ >> 32)};
  buffer_ = philox_block(ctr, key);
  ++block_;
  used_ = 0;
}

std::uint64_t Philox::next_u64() {
  if (used_ > 2) refill();
  std::uint64_t v = (static_cast<std::uint64_t>(buffer_[used_]) << 32) | buffer_[used_ + 1];
  used_ += 2;
  return v;
}

double Philox::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Philox::uniform_below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = max() - max() % n;
  while (true) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % n;
  }
}

}  // namespace dgs
