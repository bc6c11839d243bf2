#pragma once

#include <span>
#include <vector>

namespace scnn {

double mean(std::span<const double> xs);

/// Sample variance with divisor n-1 (0 when fewer than 2 values).
double sample_variance(std::span<const double> xs);

/// Fractional ranks (average rank for ties), 1-based.
std::vector<double> fractional_ranks(std::span<const double> xs);

/// Spearman rank correlation; ties get average ranks. Returns 0 when either
/// sequence is constant.
double spearman(std::span<const double> xs, std::span<const double> ys);

}  // namespace scnn
