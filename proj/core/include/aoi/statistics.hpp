#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace aoi {

/// Sample mean and standard error of a set of independent replication values.
struct ReplicationSummary {
    double mean = 0.0;
    double std_dev = 0.0;
    double std_error = 0.0;  // +inf when fewer than two values
    std::size_t count = 0;
};

ReplicationSummary summarize(std::span<const double> values);

/// Two-sided Student-t critical value for the given confidence and degrees of freedom.
double student_t_quantile(double confidence, std::size_t dof);

/// Seed of replication `index`: the (index+1)-th output of a SplitMix64
/// stream started at `master_seed`.
std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

}  // namespace aoi
