#include "aoi/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "aoi/error.hpp"

namespace aoi {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw ValidationError(std::string(what) + " must be a finite positive number");
    }
}

void require_nonnegative_s(double s) {
    if (!(s >= 0.0)) {
        throw DomainError("Laplace transform argument must be >= 0, got " + std::to_string(s));
    }
}

// Gamma(shape, rate) family; Exponential and Erlang are special cases.
double gamma_laplace(double shape, double rate, double s) {
    return std::pow(rate / (rate + s), shape);
}

double parse_number(std::string_view text, std::string_view spec) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty()) {
        throw ValidationError("bad number '" + std::string(text) + "' in distribution spec '" +
                              std::string(spec) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

std::string format_double(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

ServiceDistribution ServiceDistribution::deterministic(double value) {
    require_positive(value, "deterministic duration");
    return ServiceDistribution(Deterministic{value});
}

ServiceDistribution ServiceDistribution::exponential(double rate) {
    require_positive(rate, "exponential rate");
    return ServiceDistribution(Exponential{rate});
}

ServiceDistribution ServiceDistribution::erlang(int shape, double rate) {
    if (shape < 1) {
        throw ValidationError("Erlang shape must be a positive integer");
    }
    require_positive(rate, "Erlang rate");
    return ServiceDistribution(Erlang{shape, rate});
}

ServiceDistribution ServiceDistribution::gamma(double shape, double rate) {
    require_positive(shape, "gamma shape");
    require_positive(rate, "gamma rate");
    return ServiceDistribution(Gamma{shape, rate});
}

ServiceDistribution ServiceDistribution::parse(std::string_view spec) {
    auto parts = split(spec, ':');
    const auto name = parts.front();
    auto expect_arity = [&](std::size_t n) {
        if (parts.size() != n + 1) {
            throw ValidationError("distribution spec '" + std::string(spec) + "' expects " +
                                  std::to_string(n) + " parameter(s)");
        }
    };
    if (name == "det") {
        expect_arity(1);
        return deterministic(parse_number(parts[1], spec));
    }
    if (name == "exp") {
        expect_arity(1);
        return exponential(parse_number(parts[1], spec));
    }
    if (name == "erlang") {
        expect_arity(2);
        const double k = parse_number(parts[1], spec);
        if (k != std::floor(k) || k < 1.0 || k > 1e6) {
            throw ValidationError("Erlang shape must be a positive integer in '" +
                                  std::string(spec) + "'");
        }
        return erlang(static_cast<int>(k), parse_number(parts[2], spec));
    }
    if (name == "gamma") {
        expect_arity(2);
        return gamma(parse_number(parts[1], spec), parse_number(parts[2], spec));
    }
    throw ValidationError("unknown distribution '" + std::string(name) +
                          "' (expected det, exp, erlang or gamma)");
}

double ServiceDistribution::mean() const noexcept {
    return std::visit(Overloaded{
                          [](const Deterministic& d) { return d.value; },
                          [](const Exponential& d) { return 1.0 / d.rate; },
                          [](const Erlang& d) { return d.shape / d.rate; },
                          [](const Gamma& d) { return d.shape / d.rate; },
                      },
                      kind_);
}

double ServiceDistribution::second_moment() const noexcept {
    return std::visit(Overloaded{
                          [](const Deterministic& d) { return d.value * d.value; },
                          [](const Exponential& d) { return 2.0 / (d.rate * d.rate); },
                          [](const Erlang& d) {
                              return d.shape * (d.shape + 1.0) / (d.rate * d.rate);
                          },
                          [](const Gamma& d) {
                              return d.shape * (d.shape + 1.0) / (d.rate * d.rate);
                          },
                      },
                      kind_);
}

double ServiceDistribution::laplace(double s) const {
    require_nonnegative_s(s);
    if (s == 0.0) {
        return 1.0;
    }
    return std::visit(Overloaded{
                          [s](const Deterministic& d) { return std::exp(-s * d.value); },
                          [s](const Exponential& d) { return d.rate / (s + d.rate); },
                          [s](const Erlang& d) { return gamma_laplace(d.shape, d.rate, s); },
                          [s](const Gamma& d) { return gamma_laplace(d.shape, d.rate, s); },
                      },
                      kind_);
}

double ServiceDistribution::laplace_d1(double s) const {
    require_nonnegative_s(s);
    return std::visit(
        Overloaded{
            [s](const Deterministic& d) { return -d.value * std::exp(-s * d.value); },
            [s](const Exponential& d) { return -d.rate / ((s + d.rate) * (s + d.rate)); },
            [s](const Erlang& d) {
                return -d.shape / (d.rate + s) * gamma_laplace(d.shape, d.rate, s);
            },
            [s](const Gamma& d) {
                return -d.shape / (d.rate + s) * gamma_laplace(d.shape, d.rate, s);
            },
        },
        kind_);
}

double ServiceDistribution::laplace_d2(double s) const {
    require_nonnegative_s(s);
    auto gamma_d2 = [s](double shape, double rate) {
        const double r = rate + s;
        return shape * (shape + 1.0) / (r * r) * gamma_laplace(shape, rate, s);
    };
    return std::visit(
        Overloaded{
            [s](const Deterministic& d) { return d.value * d.value * std::exp(-s * d.value); },
            [s](const Exponential& d) {
                const double r = s + d.rate;
                return 2.0 * d.rate / (r * r * r);
            },
            [&](const Erlang& d) { return gamma_d2(d.shape, d.rate); },
            [&](const Gamma& d) { return gamma_d2(d.shape, d.rate); },
        },
        kind_);
}

double ServiceDistribution::sample(Rng& rng) const {
    return std::visit(
        Overloaded{
            [](const Deterministic& d) { return d.value; },
            [&rng](const Exponential& d) {
                return std::exponential_distribution<double>(d.rate)(rng);
            },
            [&rng](const Erlang& d) {
                return std::gamma_distribution<double>(d.shape, 1.0 / d.rate)(rng);
            },
            [&rng](const Gamma& d) {
                return std::gamma_distribution<double>(d.shape, 1.0 / d.rate)(rng);
            },
        },
        kind_);
}

std::string ServiceDistribution::to_string() const {
    return std::visit(
        Overloaded{
            [](const Deterministic& d) { return "det:" + format_double(d.value); },
            [](const Exponential& d) { return "exp:" + format_double(d.rate); },
            [](const Erlang& d) {
                return "erlang:" + std::to_string(d.shape) + ":" + format_double(d.rate);
            },
            [](const Gamma& d) {
                return "gamma:" + format_double(d.shape) + ":" + format_double(d.rate);
            },
        },
        kind_);
}

bool operator==(const ServiceDistribution& a, const ServiceDistribution& b) {
    return a.to_string() == b.to_string();
}

TransformCheckReport transform_checks(const ServiceDistribution& dist,
                                      std::span<const double> s_grid,
                                      std::size_t draws,
                                      std::uint64_t seed) {
    TransformCheckReport report;
    if (s_grid.empty() || draws == 0) {
        return report;
    }
    std::vector<double> sum0(s_grid.size()), sum1(s_grid.size()), sum2(s_grid.size());
    Rng rng(seed);
    for (std::size_t n = 0; n < draws; ++n) {
        const double x = dist.sample(rng);
        for (std::size_t k = 0; k < s_grid.size(); ++k) {
            const double w = std::exp(-s_grid[k] * x);
            sum0[k] += w;
            sum1[k] += x * w;
            sum2[k] += x * x * w;
        }
    }
    auto rel = [](double exact, double estimate) {
        return std::abs(estimate - exact) / std::max(std::abs(exact), 1e-300);
    };
    const auto n = static_cast<double>(draws);
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
        const double s = s_grid[k];
        TransformCheckRow row{s,
                              dist.laplace(s),
                              sum0[k] / n,
                              dist.laplace_d1(s),
                              -sum1[k] / n,
                              dist.laplace_d2(s),
                              sum2[k] / n};
        report.max_relative_error =
            std::max({report.max_relative_error, rel(row.laplace_exact, row.laplace_mc),
                      rel(row.d1_exact, row.d1_mc), rel(row.d2_exact, row.d2_mc)});
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace aoi
