#pragma once

#include <optional>
#include <span>
#include <vector>

namespace uwmarl::stats {

/// Median of the values; nullopt for an empty input.
std::optional<double> median(std::vector<double> values);

/// Median where nullopt entries (e.g. runs that never converged) rank above
/// every finite value. Returns nullopt when the median itself is such an entry.
std::optional<double> median_with_censoring(std::span<const std::optional<double>> values);

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> ranks(std::span<const double> values);

/// Spearman correlation = Pearson correlation of average ranks. Returns 0 if
/// either side is constant. Throws std::invalid_argument on length mismatch.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace uwmarl::stats
