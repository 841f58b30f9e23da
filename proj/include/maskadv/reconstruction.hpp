#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "maskadv/data_model.hpp"
#include "maskadv/masking.hpp"

namespace maskadv {

// Everything the reconstruction of F(A,Y) may condition on:
//   Type 1  row targets      -- the original 1D marginal, Dist(A) (optional)
//   Type 2  group targets    -- frequency per masked value, implied by Type 3
//   Type 3  block targets    -- the masked joint F(M(A),Y)
// plus the inverse image of the mask, which defines which original rows
// feed each (masked value, label) block, and the record count N.
class ConstraintSet {
 public:
  // Case II: masked joint + inverse image only.
  static ConstraintSet without_marginal(JointDistribution masked_joint,
                                        InverseImage inverse);

  // Case I: additionally the original marginal. Throws if the marginal is
  // inconsistent with any masked group total (names the masked value).
  static ConstraintSet with_marginal(JointDistribution masked_joint,
                                     InverseImage inverse,
                                     MarginalDistribution row_targets);

  bool has_row_targets() const { return row_targets_.has_value(); }
  const std::optional<MarginalDistribution>& row_targets() const { return row_targets_; }
  const JointDistribution& block_targets() const { return block_targets_; }
  const InverseImage& inverse() const { return inverse_; }
  Vector group_targets() const { return block_targets_.row_sums(); }  // Type 2
  double total() const { return block_targets_.total; }

  const AttributeDomain& original_domain() const { return inverse_.original_domain; }
  const AttributeDomain& label_domain() const { return block_targets_.col_domain; }

 private:
  ConstraintSet() = default;

  JointDistribution block_targets_;
  InverseImage inverse_;
  std::optional<MarginalDistribution> row_targets_;
};

struct IpfSettings {
  double tolerance = 1e-9;     // relative to N; residual is max |achieved-target| / N
  int max_iterations = 1000;
  std::uint64_t rounding_seed = 0;
};

struct ReconstructionResult {
  JointDistribution fractional;
  JointDistribution integral;   // per-cell randomized rounding of fractional
  int iterations = 0;
  double residual = 0.0;        // relative max-norm at the returned iterate
  bool converged = false;
  std::vector<double> residual_history;  // one entry per sweep
};

// The fully uniform table N / (|Dom(A)| * |Dom(Y)|).
JointDistribution uniform_init(const AttributeDomain& row_domain,
                               const AttributeDomain& col_domain, double n);

// Iterative proportional fitting from the uniform table. Each sweep scales
// every (masked value, label) block to its Type 3 target and then, when a
// marginal is present, every row to its Type 1 target. Zero targets pin
// their cells to zero before the first sweep. Stops when the residual
// drops to tolerance * N or at max_iterations (best iterate, flagged
// non-converged).
ReconstructionResult reconstruct(const ConstraintSet& constraints,
                                 const IpfSettings& settings = {});

// Sampling baseline: every unit of count in a masked cell (a',y) is
// re-assigned to a preimage row of a' drawn uniformly with replacement.
JointDistribution sampling_reconstruct(const JointDistribution& masked_joint,
                                       const InverseImage& inverse,
                                       std::uint64_t seed);

}  // namespace maskadv
