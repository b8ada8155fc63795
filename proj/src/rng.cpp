#include "sfs/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sfs {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::array<std::uint32_t, 2> derive_key(std::uint64_t seed,
                                        const std::vector<RngStream::PathElement>& path) {
  std::uint64_t h = splitmix64(seed ^ 0x5DEECE66Dull);
  for (const auto& e : path) {
    h = splitmix64(h ^ splitmix64(e.id + 0x632BE59BD9B4E019ull));
    h = splitmix64(h ^ e.role);
  }
  return {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
}

// Increments are rounded to this grid so that every partial sum of magnitude
// below 2^12 is exact in double precision.
constexpr double kIncrementQuantum = 0x1p-40;

double quantize(double v) { return std::nearbyint(v / kIncrementQuantum) * kIncrementQuantum; }

}  // namespace

namespace detail {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

}  // namespace detail

std::uint64_t hash_role(std::string_view role) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : role) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

RngStream::RngStream(std::uint64_t root_seed) : RngStream(root_seed, {}) {}

RngStream::RngStream(std::uint64_t root_seed, std::vector<PathElement> path)
    : root_seed_(root_seed), path_(std::move(path)), key_(derive_key(root_seed_, path_)) {}

RngStream RngStream::substream(std::uint64_t id, std::string_view role) const {
  auto p = path_;
  p.push_back({id, hash_role(role)});
  return RngStream(root_seed_, std::move(p));
}

void RngStream::refill() {
  const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(counter_),
                                            static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u};
  block_ = detail::philox4x32_10(ctr, key_);
  ++counter_;
  block_pos_ = 0;
}

std::uint64_t RngStream::next_u64() {
  if (block_pos_ > 2) refill();
  const std::uint64_t lo = block_[block_pos_];
  const std::uint64_t hi = block_[block_pos_ + 1];
  block_pos_ += 2;
  return (hi << 32) | lo;
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

double RngStream::uniform_open() {
  return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1p-52;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * m;
  has_spare_ = true;
  return u * m;
}

void RngStream::fill_normal(std::span<double> out) {
  for (double& x : out) x = normal();
}

RngStream substream(std::uint64_t seed, std::uint64_t replicate, std::string_view role) {
  return RngStream(seed).substream(replicate, role);
}

GaussianPool::GaussianPool(std::size_t n, std::size_t dim, std::vector<double> samples)
    : n_(n), dim_(dim), samples_(std::move(samples)) {
  if (n_ == 0 || dim_ == 0) throw std::invalid_argument("GaussianPool: n and dim must be >= 1");
  if (samples_.size() != n_ * dim_) throw std::invalid_argument("GaussianPool: size mismatch");
}

GaussianPool GaussianPool::prefix_view(std::size_t m) const {
  if (m == 0 || m > n_) throw std::out_of_range("GaussianPool::prefix_view: m out of range");
  return GaussianPool(m, dim_, std::vector<double>(samples_.begin(),
                                                   samples_.begin() + static_cast<std::ptrdiff_t>(m * dim_)));
}

GaussianPool sample_pool(RngStream& stream, std::size_t n, std::size_t dim) {
  if (n == 0 || dim == 0) throw std::invalid_argument("sample_pool: n and dim must be >= 1");
  std::vector<double> z(n * dim);
  stream.fill_normal(z);
  return GaussianPool(n, dim, std::move(z));
}

BrownianGrid::BrownianGrid(int level, std::size_t dim, std::vector<double> increments)
    : level_(level), dim_(dim), increments_(std::move(increments)) {
  if (level_ < 0) throw std::invalid_argument("BrownianGrid: negative level");
  if (level_ > 30) throw std::invalid_argument("BrownianGrid: level too large");
  if (dim_ == 0) throw std::invalid_argument("BrownianGrid: dim must be >= 1");
  if (increments_.size() != steps() * dim_) {
    throw std::invalid_argument("BrownianGrid: expected " + std::to_string(steps() * dim_) +
                                " values, got " + std::to_string(increments_.size()));
  }
}

Vec BrownianGrid::terminal() const {
  Vec w(dim_, 0.0);
  for (std::size_t k = 0; k < steps(); ++k) {
    for (std::size_t j = 0; j < dim_; ++j) w[j] += increments_[k * dim_ + j];
  }
  return w;
}

BrownianGrid sample_brownian(RngStream& stream, int level, std::size_t dim) {
  if (level < 0) throw std::invalid_argument("sample_brownian: negative level");
  if (level > 30) throw std::invalid_argument("sample_brownian: level too large");
  const std::size_t steps = std::size_t{1} << level;
  const double sd = std::sqrt(1.0 / static_cast<double>(steps));
  std::vector<double> inc(steps * dim);
  for (double& x : inc) x = quantize(sd * stream.normal());
  return BrownianGrid(level, dim, std::move(inc));
}

BrownianGrid coarsen(const BrownianGrid& grid) {
  if (grid.level() < 1) throw std::invalid_argument("coarsen: level-0 grid cannot be coarsened");
  const std::size_t d = grid.dim();
  const std::size_t coarse_steps = grid.steps() / 2;
  std::vector<double> out(coarse_steps * d);
  for (std::size_t k = 0; k < coarse_steps; ++k) {
    const auto a = grid.increment(2 * k);
    const auto b = grid.increment(2 * k + 1);
    for (std::size_t j = 0; j < d; ++j) out[k * d + j] = a[j] + b[j];
  }
  return BrownianGrid(grid.level() - 1, d, std::move(out));
}

}  // namespace sfs
