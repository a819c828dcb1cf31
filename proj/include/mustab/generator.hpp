#pragma once

// Seeded random systems. Every draw goes through std::mt19937_64 and
// uniform_below, so output depends only on the spec.

#include <cstdint>
#include <random>
#include <string>

#include "mustab/system_file.hpp"

namespace mustab {

enum class GeneratorModel { L1Lattice, Explicit };

const char* to_string(GeneratorModel model);
std::optional<GeneratorModel> parse_generator_model(std::string_view text);

struct GeneratorSpec {
  std::size_t n = 1;
  std::uint64_t seed = 0;
  GeneratorModel model = GeneratorModel::L1Lattice;
  /// l1-lattice: coordinates in [0, range]. explicit: edge weights in [1, range].
  std::int64_t range = 8;
  /// Every distance is divided by this.
  std::int64_t scale = 1;
};

class RangeTooSmall : public Error {
 public:
  using Error::Error;
};

/// Map "f" plus measures "dirac" (at a random point) and "full" (random
/// weights, full support). n = 1 gives the identity and the Dirac measure.
SystemFile generate_system(const GeneratorSpec& spec);

/// Labels x0, x1, ...
std::vector<std::string> default_labels(std::size_t n);

/// Taxicab metric on the given integer points, divided by `scale`.
FiniteMetricSpace l1_space(const std::vector<std::pair<std::int64_t, std::int64_t>>& points,
                           std::int64_t scale = 1);

EndoMap random_map(std::mt19937_64& rng, std::size_t n);
EndoMap random_bijection(std::mt19937_64& rng, std::size_t n);
/// Integer weights in [1, max_weight] on `support` (nonempty), normalized.
Measure random_measure(std::mt19937_64& rng, std::size_t n, PointSet support, std::uint64_t max_weight = 4);
/// Uniformly random nonempty subset of {0, ..., n-1}.
PointSet random_nonempty_subset(std::mt19937_64& rng, std::size_t n);

/// splitmix64 finalizer over (seed, index): independent per-trial seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace mustab
