#pragma once

#include <cmath>

#include "fairprobe/dataset.hpp"
#include "fairprobe/random.hpp"

namespace bench {

/// Loan-style data: three sensitive features (one integer) and three others.
inline fairprobe::StructuredDataset loans(std::size_t rows, std::uint64_t seed = 1) {
  using namespace fairprobe;
  const FeatureSchema schema({{"gender", CategoricalDomain{{"female", "male"}}, true},
                              {"race", CategoricalDomain{{"white", "black", "asian", "hispanic"}}, true},
                              {"age", ContinuousDomain{18, 80, true}, true},
                              {"income", ContinuousDomain{10, 200, false}, false},
                              {"debt", ContinuousDomain{0, 1, false}, false},
                              {"tenure", ContinuousDomain{0, 40, true}, false}},
                             {"no", "yes"}, "yes");
  Rng rng(seed);
  std::vector<LabeledRow> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    FeatureVector x{static_cast<double>(rng.uniform_index(2)), static_cast<double>(rng.uniform_index(4)),
                    static_cast<double>(18 + rng.uniform_index(63)), std::round(10 + 190 * rng.uniform01()),
                    std::round(rng.uniform01() * 100) / 100, static_cast<double>(rng.uniform_index(41))};
    const double logit = (x[3] - 80) / 40 - 3 * (x[4] - 0.4) - (x[0] == 0 && x[1] == 1 ? 1.0 : 0.0);
    out.push_back({std::move(x), rng.bernoulli(1 / (1 + std::exp(-logit))) ? 1u : 0u});
  }
  return StructuredDataset(schema, std::move(out));
}

} // namespace bench
