#pragma once

#include <array>
#include <optional>

#include "aoi/distributions.hpp"

namespace aoi {

/// Poisson arrival rate, buffer size and service law of a P_m system.
struct SystemParams {
    double lambda;
    int m;
    ServiceDistribution service;

    /// Throws ValidationError unless lambda > 0 and m >= 1.
    void validate() const;
};

using Vector3 = std::array<double, 3>;
using Matrix3 = std::array<Vector3, 3>;

/// Embedded chain of the occupancy left behind by successful departures (m = 3).
struct ChainModel {
    Matrix3 P;
    Vector3 pi;
};

/// Conditional means for one service interval under Poisson arrivals at rate
/// lambda, where tau, tau1, tau2 are the first interarrival gaps counted from
/// the interval's start (or, by reversibility, backwards from its end).
struct Step1Table {
    double e_sigma_tau_gt;   // E(sigma | tau > sigma)
    double e_sigma_tau_le;   // E(sigma | tau <= sigma)
    double e_sigma_two_le;   // E(sigma | tau1 + tau2 <= sigma)
    double e_sigma_between;  // E(sigma | tau1 <= sigma < tau1 + tau2)
    double e_tau_two_le;     // E(tau1 | tau1 + tau2 <= sigma)
    double e_tau_between;    // E(tau1 | tau1 <= sigma < tau1 + tau2)
    double q;                // P(tau1 + tau2 > sigma | tau1 <= sigma)
    double e_tau_le;         // E(tau | tau <= sigma)
};

struct CycleMoments {
    Vector3 mean_given_k0;  // E0(S1 | K0 = l)
    double mean;            // E0 S1
    double second_moment;   // E0 S1^2
};

enum class Method { analytic, simulated };

const char* to_string(Method method) noexcept;

struct AoiEstimate {
    double mean_aoi;
    Method method;
    double ci_halfwidth;  // 0 for analytic values
    SystemParams params;
};

/// 3x3x3 table of E0(alpha(0) | K_{-2}=i, K_{-1}=j, K_0=l).
///
/// Triples that have zero probability under the chain are stored as empty
/// cells; reading one through value() throws ProtocolViolation.
class ConditionalAoiTable {
public:
    bool used(int i, int j, int l) const;
    double value(int i, int j, int l) const;
    const std::optional<double>& cell(int i, int j, int l) const;

    void set(int i, int j, int l, double v);

private:
    std::array<std::optional<double>, 27> cells_{};
};

Matrix3 transition_matrix(const SystemParams& params);

/// Closed-form stationary vector, verified against pi P = pi and against an
/// independent linear solve; throws ProtocolViolation if either check fails.
Vector3 stationary_distribution(const SystemParams& params);

/// Solves pi (P - I) = 0, sum(pi) = 1 directly.
Vector3 solve_stationary(const Matrix3& P);

ChainModel chain_model(const SystemParams& params);

Step1Table step1_table(const SystemParams& params);

CycleMoments cycle_moments(const SystemParams& params, const Vector3& pi);

ConditionalAoiTable conditional_aoi_table(const SystemParams& params);

/// P(K_{-2}=i, K_{-1}=j | K_0=l) for the stationary chain, indexed [i][j].
Matrix3 backward_weights(const ChainModel& chain, int l);

/// E0[alpha(0) | K_0 = l] for l = 0, 1, 2.
Vector3 aoi_given_k0(const SystemParams& params);

AoiEstimate mean_aoi_m1(const SystemParams& params);
AoiEstimate mean_aoi_m2(const SystemParams& params);
AoiEstimate mean_aoi_m3(const SystemParams& params);

/// Dispatches on params.m; m >= 4 throws UnsupportedConfiguration.
AoiEstimate mean_aoi(const SystemParams& params);

}  // namespace aoi
