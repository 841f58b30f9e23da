#include "maskadv/reconstruction.hpp"

#include <cmath>
#include <stdexcept>

#include "maskadv/rng.hpp"

namespace maskadv {

namespace {

void check_inverse_matches(const JointDistribution& masked_joint, const InverseImage& inverse) {
  if (!inverse.masked_domain.same_values(masked_joint.row_domain))
    throw std::invalid_argument(
        "inverse image's masked domain does not match the masked joint's rows");
}

// Re-indexes the masked joint onto the inverse image's masked domain. The
// domain may be a declared universe wider than the observed one; a masked
// value with no joint row carries zero mass. A joint row the mask cannot
// produce is an error.
JointDistribution align_blocks(JointDistribution masked_joint, const InverseImage& inverse) {
  if (inverse.masked_domain.same_values(masked_joint.row_domain)) return masked_joint;
  for (const auto& v : masked_joint.row_domain.values())
    if (!inverse.masked_domain.index_of(v))
      throw std::invalid_argument("masked joint row '" + v +
                                  "' is not produced by the masking function over the "
                                  "declared domain");
  Matrix cells = Matrix::Zero(inverse.masked_domain.size(), masked_joint.col_domain.size());
  for (Index r = 0; r < masked_joint.row_domain.size(); ++r)
    cells.row(*inverse.masked_domain.index_of(masked_joint.row_domain.value(r))) =
        masked_joint.cells.row(r);
  return JointDistribution::make(inverse.masked_domain, masked_joint.col_domain,
                                 std::move(cells), masked_joint.total);
}

}  // namespace

ConstraintSet ConstraintSet::without_marginal(JointDistribution masked_joint,
                                              InverseImage inverse) {
  masked_joint = align_blocks(std::move(masked_joint), inverse);
  ConstraintSet c;
  c.block_targets_ = std::move(masked_joint);
  c.inverse_ = std::move(inverse);
  return c;
}

ConstraintSet ConstraintSet::with_marginal(JointDistribution masked_joint,
                                           InverseImage inverse,
                                           MarginalDistribution row_targets) {
  masked_joint = align_blocks(std::move(masked_joint), inverse);
  if (!inverse.original_domain.same_values(row_targets.domain))
    throw std::invalid_argument(
        "marginal domain does not match the inverse image's original domain");
  if (std::abs(static_cast<double>(row_targets.total) - masked_joint.total) >
      1e-6 * std::max(1.0, masked_joint.total))
    throw std::invalid_argument("marginal total " + std::to_string(row_targets.total) +
                                " does not match masked joint total " +
                                format_number(masked_joint.total));

  // Feasibility: within each masked group the marginal must account for
  // exactly the group's mass. A mismatch means corrupted summaries, not a
  // fitting problem.
  Vector groups = masked_joint.row_sums();
  for (Index g = 0; g < masked_joint.row_domain.size(); ++g) {
    double from_marginal = 0;
    for (Index r : inverse.preimages[static_cast<std::size_t>(g)])
      from_marginal += row_targets.counts[r];
    if (std::abs(from_marginal - groups[g]) > 1e-6 * std::max(1.0, masked_joint.total))
      throw std::invalid_argument(
          "infeasible constraints for masked value '" +
          masked_joint.row_domain.value(g) + "': marginal gives " +
          format_number(from_marginal) + " records, masked joint gives " +
          format_number(groups[g]));
  }

  ConstraintSet c;
  c.block_targets_ = std::move(masked_joint);
  c.inverse_ = std::move(inverse);
  c.row_targets_ = std::move(row_targets);
  return c;
}

JointDistribution uniform_init(const AttributeDomain& row_domain,
                               const AttributeDomain& col_domain, double n) {
  if (row_domain.size() == 0 || col_domain.size() == 0)
    throw std::invalid_argument("uniform_init requires non-empty domains");
  if (!(n > 0)) throw std::invalid_argument("uniform_init requires a positive total");
  double cell = n / (static_cast<double>(row_domain.size()) *
                     static_cast<double>(col_domain.size()));
  return JointDistribution::make(row_domain, col_domain,
                                 Matrix::Constant(row_domain.size(), col_domain.size(), cell),
                                 n);
}

ReconstructionResult reconstruct(const ConstraintSet& constraints,
                                 const IpfSettings& settings) {
  if (!(settings.tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
  if (settings.max_iterations < 1)
    throw std::invalid_argument("max-iterations must be at least 1");

  const JointDistribution& blocks = constraints.block_targets();
  const InverseImage& inv = constraints.inverse();
  const double n = constraints.total();
  const Index rows = constraints.original_domain().size();
  const Index cols = constraints.label_domain().size();
  const Index groups = blocks.row_domain.size();

  Matrix f = uniform_init(constraints.original_domain(), constraints.label_domain(), n).cells;

  // Zero targets pin their cells before iteration; IPF cannot recover mass
  // multiplied into zero and the constraint is exact.
  for (Index g = 0; g < groups; ++g)
    for (Index y = 0; y < cols; ++y)
      if (blocks.cells(g, y) == 0.0)
        for (Index r : inv.preimages[static_cast<std::size_t>(g)]) f(r, y) = 0.0;
  const Vector* row_targets = nullptr;
  if (constraints.has_row_targets()) {
    row_targets = &constraints.row_targets()->counts;
    for (Index r = 0; r < rows; ++r)
      if ((*row_targets)[r] == 0.0) f.row(r).setZero();
  }

  auto residual_of = [&](const Matrix& m) {
    double worst = 0;
    for (Index g = 0; g < groups; ++g) {
      const auto& pre = inv.preimages[static_cast<std::size_t>(g)];
      for (Index y = 0; y < cols; ++y) {
        double s = 0;
        for (Index r : pre) s += m(r, y);
        worst = std::max(worst, std::abs(s - blocks.cells(g, y)));
      }
    }
    if (row_targets)
      for (Index r = 0; r < rows; ++r)
        worst = std::max(worst, std::abs(m.row(r).sum() - (*row_targets)[r]));
    return worst / n;
  };

  ReconstructionResult result;
  Matrix best = f;
  double best_residual = residual_of(f);
  int sweeps = 0;

  while (sweeps < settings.max_iterations) {
    ++sweeps;
    // Type 3 pass: scale every (masked value, label) block to its target.
    for (Index g = 0; g < groups; ++g) {
      const auto& pre = inv.preimages[static_cast<std::size_t>(g)];
      for (Index y = 0; y < cols; ++y) {
        double target = blocks.cells(g, y);
        if (target <= 0.0) continue;
        if (pre.size() == 1) {
          // singleton blocks are pinned exactly, not multiplied, so
          // injective masks reconstruct bit-for-bit
          f(pre[0], y) = target;
          continue;
        }
        double sum = 0;
        for (Index r : pre) sum += f(r, y);
        if (sum <= 0.0)
          throw std::runtime_error("degenerate block for masked value '" +
                                   blocks.row_domain.value(g) + "', label '" +
                                   blocks.col_domain.value(y) +
                                   "': zero mass with positive target");
        double factor = target / sum;
        for (Index r : pre) f(r, y) *= factor;
      }
    }
    // Type 1 pass (Case I only): scale every row to its marginal count.
    if (row_targets) {
      for (Index r = 0; r < rows; ++r) {
        double target = (*row_targets)[r];
        if (target <= 0.0) continue;
        double sum = f.row(r).sum();
        if (sum <= 0.0)
          throw std::runtime_error("degenerate row for value '" +
                                   constraints.original_domain().value(r) +
                                   "': zero mass with positive target");
        f.row(r) *= target / sum;
      }
    }

    double residual = residual_of(f);
    result.residual_history.push_back(residual);
    if (residual < best_residual) {
      best_residual = residual;
      best = f;
    }
    if (residual <= settings.tolerance) {
      result.converged = true;
      break;
    }
  }

  result.iterations = sweeps;
  result.residual = result.converged ? result.residual_history.back() : best_residual;
  Matrix final_cells = result.converged ? std::move(f) : std::move(best);

  // Randomized rounding: each cell independently goes to floor or ceiling,
  // up with probability equal to its fractional part. The stream is
  // addressed per cell so the result is order-independent.
  Matrix rounded(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index y = 0; y < cols; ++y) {
      double c = final_cells(r, y);
      double fl = std::floor(c);
      double frac = c - fl;
      double u = unit_at(settings.rounding_seed, static_cast<std::uint64_t>(r),
                         static_cast<std::uint64_t>(y));
      rounded(r, y) = fl + (u < frac ? 1.0 : 0.0);
    }
  }

  result.fractional = JointDistribution::make(constraints.original_domain(),
                                              constraints.label_domain(),
                                              std::move(final_cells), n);
  double rounded_total = rounded.sum();
  result.integral = JointDistribution::make(constraints.original_domain(),
                                            constraints.label_domain(), std::move(rounded),
                                            rounded_total);
  return result;
}

JointDistribution sampling_reconstruct(const JointDistribution& masked_joint,
                                       const InverseImage& inverse, std::uint64_t seed) {
  check_inverse_matches(masked_joint, inverse);
  const Index rows = inverse.original_domain.size();
  const Index cols = masked_joint.col_domain.size();
  Matrix cells = Matrix::Zero(rows, cols);
  Rng rng(seed);
  for (Index g = 0; g < masked_joint.row_domain.size(); ++g) {
    const auto& pre = inverse.preimages[static_cast<std::size_t>(g)];
    for (Index y = 0; y < cols; ++y) {
      auto count = static_cast<std::int64_t>(std::llround(masked_joint.cells(g, y)));
      for (std::int64_t u = 0; u < count; ++u)
        cells(pre[rng.below(pre.size())], y) += 1.0;
    }
  }
  double total = cells.sum();
  return JointDistribution::make(inverse.original_domain, masked_joint.col_domain,
                                 std::move(cells), total);
}

}  // namespace maskadv
