#pragma once

// Counter-based random streams addressed by (root seed, path).
//
// A stream is a Philox4x32-10 generator whose key is a hash of the root seed
// and the path of (id, role) pairs that identifies it. Substreams never
// consume state from their parent, so replicate i sees the same numbers no
// matter how many replicates run or in which order.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "sfs/common.hpp"

namespace sfs {

class RngStream {
 public:
  struct PathElement {
    std::uint64_t id;
    std::uint64_t role;
    bool operator==(const PathElement&) const = default;
  };

  explicit RngStream(std::uint64_t root_seed);

  // Child stream at path + (id, role). Does not advance this stream.
  [[nodiscard]] RngStream substream(std::uint64_t id, std::string_view role) const;

  [[nodiscard]] std::uint64_t root_seed() const { return root_seed_; }
  [[nodiscard]] const std::vector<PathElement>& path() const { return path_; }

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1).
  double uniform_open();
  // Standard normal (Marsaglia polar method, deterministic across platforms).
  double normal();
  void fill_normal(std::span<double> out);

 private:
  RngStream(std::uint64_t root_seed, std::vector<PathElement> path);
  void refill();

  std::uint64_t root_seed_;
  std::vector<PathElement> path_;
  std::array<std::uint32_t, 2> key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int block_pos_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

namespace detail {
// Philox4x32 with 10 rounds.
[[nodiscard]] std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                         std::array<std::uint32_t, 2> key);
}  // namespace detail

// Stream for one replicate and role, rooted at `seed`.
[[nodiscard]] RngStream substream(std::uint64_t seed, std::uint64_t replicate,
                                  std::string_view role);

[[nodiscard]] std::uint64_t hash_role(std::string_view role);

// Fixed set of N standard Gaussian d-vectors, stored row-major.
class GaussianPool {
 public:
  GaussianPool(std::size_t n, std::size_t dim, std::vector<double> samples);

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {samples_.data() + i * dim_, dim_};
  }
  [[nodiscard]] std::span<const double> samples() const { return samples_; }

  // First m rows as a pool of size m.
  [[nodiscard]] GaussianPool prefix_view(std::size_t m) const;

 private:
  std::size_t n_;
  std::size_t dim_;
  std::vector<double> samples_;
};

[[nodiscard]] GaussianPool sample_pool(RngStream& stream, std::size_t n, std::size_t dim);

// Wiener increments on the dyadic grid of step 2^-level over [0, 1].
class BrownianGrid {
 public:
  BrownianGrid(int level, std::size_t dim, std::vector<double> increments);

  [[nodiscard]] int level() const { return level_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] std::size_t steps() const { return std::size_t{1} << level_; }
  [[nodiscard]] double dt() const { return 1.0 / static_cast<double>(steps()); }
  [[nodiscard]] std::span<const double> increment(std::size_t k) const {
    return {increments_.data() + k * dim_, dim_};
  }
  [[nodiscard]] std::span<const double> increments() const { return increments_; }

  // Sum of all increments, accumulated in step order.
  [[nodiscard]] Vec terminal() const;

 private:
  int level_;
  std::size_t dim_;
  std::vector<double> increments_;
};

[[nodiscard]] BrownianGrid sample_brownian(RngStream& stream, int level, std::size_t dim);

// One level coarser: increment k is fine increment 2k plus fine increment 2k+1.
[[nodiscard]] BrownianGrid coarsen(const BrownianGrid& grid);

}  // namespace sfs
