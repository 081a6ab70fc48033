#include "aoi/statistics.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "aoi/error.hpp"

namespace aoi {

ReplicationSummary summarize(std::span<const double> values) {
    ReplicationSummary s;
    s.count = values.size();
    if (values.empty()) {
        throw NoDataError("cannot summarize an empty set of replications");
    }
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    s.mean = sum / static_cast<double>(s.count);
    if (s.count < 2) {
        s.std_dev = 0.0;
        s.std_error = std::numeric_limits<double>::infinity();
        return s;
    }
    double ss = 0.0;
    for (double v : values) {
        ss += (v - s.mean) * (v - s.mean);
    }
    s.std_dev = std::sqrt(ss / static_cast<double>(s.count - 1));
    s.std_error = s.std_dev / std::sqrt(static_cast<double>(s.count));
    return s;
}

double student_t_quantile(double confidence, std::size_t dof) {
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw ValidationError("confidence level must lie in (0, 1)");
    }
    if (dof == 0) {
        return std::numeric_limits<double>::infinity();
    }
    const boost::math::students_t_distribution<double> dist(static_cast<double>(dof));
    return boost::math::quantile(dist, 0.5 + 0.5 * confidence);
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
    std::uint64_t z = master_seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace aoi
