#pragma once

#include "osp/graph.hpp"
#include "osp/types.hpp"

#include <cstdint>
#include <iosfwd>

namespace osp {

// Hop distance matrix with most pair values hidden. mask marks observed
// positions and unobserved values are zero. The diagonal counts as
// observed, a node being zero hops from itself.
struct PartialMatrix {
  Eigen::MatrixXd values;
  MaskMatrix mask;
  double sampled_fraction = 0.0;

  Index size() const { return values.rows(); }

  // Validates shape and symmetry invariants before assembling the struct.
  static PartialMatrix checked(Eigen::MatrixXd values, MaskMatrix mask,
                               double sampled_fraction);
};

// Disjoint split of the observed off-diagonal pairs. train_mask keeps the
// diagonal; validation_mask is purely off-diagonal.
struct SplitMask {
  MaskMatrix train_mask;
  MaskMatrix validation_mask;
};

// Samples ceil(fraction * N(N-1)/2) distinct unordered pairs uniformly at
// random and mirrors them into both triangles.
PartialMatrix sample_random_pairs(const HopDistanceMatrix& h, double fraction,
                                  std::uint64_t seed);

SplitMask split_observed(const PartialMatrix& p, double validation_share,
                         std::uint64_t seed);

// Complement of the observed set, diagonal excluded.
MaskMatrix unobserved_mask(const PartialMatrix& p);

// Number of observed unordered off-diagonal pairs.
Index observed_pair_count(const PartialMatrix& p);

// "i,j,hop" rows, one per observed pair with i < j.
void write_partial_csv(const PartialMatrix& p, std::ostream& out);
PartialMatrix read_partial_csv(std::istream& in, Index n);

}  // namespace osp
