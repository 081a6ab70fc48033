#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace aoi {

using Rng = std::mt19937_64;

struct Deterministic {
    double value;
};

struct Exponential {
    double rate;
};

struct Erlang {
    int shape;
    double rate;
};

struct Gamma {
    double shape;
    double rate;
};

/// A positive random duration with closed-form Laplace-Stieltjes transform.
///
/// Used for service times and, in the simulator, for renewal interarrival
/// times. Values are immutable once constructed and safe to share between
/// threads. All transform derivatives are exact closed forms.
class ServiceDistribution {
public:
    using Kind = std::variant<Deterministic, Exponential, Erlang, Gamma>;

    static ServiceDistribution deterministic(double value);
    static ServiceDistribution exponential(double rate);
    static ServiceDistribution erlang(int shape, double rate);
    static ServiceDistribution gamma(double shape, double rate);

    /// Parses `det:<d>`, `exp:<mu>`, `erlang:<k>:<nu>` or `gamma:<alpha>:<nu>`.
    static ServiceDistribution parse(std::string_view spec);

    const Kind& kind() const noexcept { return kind_; }

    double mean() const noexcept;
    double second_moment() const noexcept;

    /// G(s) = E exp(-s sigma). Throws DomainError for s < 0.
    double laplace(double s) const;
    /// G'(s) = -E[sigma exp(-s sigma)].
    double laplace_d1(double s) const;
    /// G''(s) = E[sigma^2 exp(-s sigma)].
    double laplace_d2(double s) const;

    double sample(Rng& rng) const;

    /// Canonical text form, parseable by parse().
    std::string to_string() const;

    friend bool operator==(const ServiceDistribution& a, const ServiceDistribution& b);

private:
    explicit ServiceDistribution(Kind kind) : kind_(kind) {}

    Kind kind_;
};

struct TransformCheckRow {
    double s;
    double laplace_exact, laplace_mc;
    double d1_exact, d1_mc;
    double d2_exact, d2_mc;
};

struct TransformCheckReport {
    std::vector<TransformCheckRow> rows;
    double max_relative_error = 0.0;
};

/// Monte-Carlo estimates of E e^{-s sigma}, E sigma e^{-s sigma} and
/// E sigma^2 e^{-s sigma} on a grid of s, compared against the closed forms.
TransformCheckReport transform_checks(const ServiceDistribution& dist,
                                      std::span<const double> s_grid,
                                      std::size_t draws,
                                      std::uint64_t seed);

}  // namespace aoi
