#include "aoi/analytic.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "aoi/error.hpp"

namespace aoi {

namespace {

constexpr double kTinyDenominator = 1e-300;
constexpr double kSmallLambdaGuard = 1e-12;
constexpr double kStationarityTolerance = 1e-12;
constexpr double kCrossCheckTolerance = 1e-10;

void require_m3(const SystemParams& params, const char* op) {
    params.validate();
    if (params.m != 3) {
        throw UnsupportedConfiguration(std::string(op) + " is defined for m = 3 only (got m = " +
                                       std::to_string(params.m) + ")");
    }
}

double checked_ratio(double num, double den, const char* what) {
    if (!(std::abs(den) >= kTinyDenominator)) {
        throw DegenerateRegime(std::string("vanishing denominator in ") + what);
    }
    return num / den;
}

// Transform values at s = lambda, evaluated once per call.
struct TransformAt {
    double g, d1, d2, mean;

    explicit TransformAt(const SystemParams& p)
        : g(p.service.laplace(p.lambda)),
          d1(p.service.laplace_d1(p.lambda)),
          d2(p.service.laplace_d2(p.lambda)),
          mean(p.service.mean()) {}
};

int index(int i, int j, int l) {
    if (i < 0 || i > 2 || j < 0 || j > 2 || l < 0 || l > 2) {
        throw ProtocolViolation("conditional AoI table index out of range");
    }
    return (i * 3 + j) * 3 + l;
}

}  // namespace

void SystemParams::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ValidationError("arrival rate lambda must be positive and finite");
    }
    if (m < 1) {
        throw ValidationError("buffer size m must be >= 1");
    }
}

const char* to_string(Method method) noexcept {
    return method == Method::analytic ? "analytic" : "simulated";
}

bool ConditionalAoiTable::used(int i, int j, int l) const {
    return cells_[index(i, j, l)].has_value();
}

double ConditionalAoiTable::value(int i, int j, int l) const {
    const auto& c = cells_[index(i, j, l)];
    if (!c) {
        throw ProtocolViolation("read of unused conditional AoI cell (" + std::to_string(i) + "," +
                                std::to_string(j) + "," + std::to_string(l) + ")");
    }
    return *c;
}

const std::optional<double>& ConditionalAoiTable::cell(int i, int j, int l) const {
    return cells_[index(i, j, l)];
}

void ConditionalAoiTable::set(int i, int j, int l, double v) { cells_[index(i, j, l)] = v; }

Matrix3 transition_matrix(const SystemParams& params) {
    require_m3(params, "transition_matrix");
    const TransformAt t(params);
    const double lam = params.lambda;
    const double none = t.g;                        // P(tau1 > sigma)
    const double exactly_one = -lam * t.d1;         // P(tau1 <= sigma < tau1 + tau2)
    const double two_or_more = 1.0 - t.g + lam * t.d1;  // P(tau1 + tau2 <= sigma)
    const Vector3 from_low{none, exactly_one, two_or_more};
    return Matrix3{from_low, from_low, Vector3{0.0, none, 1.0 - none}};
}

Vector3 solve_stationary(const Matrix3& P) {
    Eigen::Matrix3d A;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            A(r, c) = P[c][r] - (r == c ? 1.0 : 0.0);
        }
    }
    A.row(2).setOnes();
    const Eigen::Vector3d rhs(0.0, 0.0, 1.0);
    const Eigen::Vector3d x = A.fullPivLu().solve(rhs);
    return Vector3{x(0), x(1), x(2)};
}

Vector3 stationary_distribution(const SystemParams& params) {
    require_m3(params, "stationary_distribution");
    const TransformAt t(params);
    const double lam = params.lambda;
    const double norm = 1.0 + lam * t.d1;
    if (!(norm > 0.0)) {
        throw DegenerateRegime("1 + lambda G'(lambda) is not positive");
    }
    const Vector3 pi{t.g * t.g / norm, t.g * (1.0 - t.g) / norm, (1.0 - t.g + lam * t.d1) / norm};

    const Matrix3 P = transition_matrix(params);
    for (int j = 0; j < 3; ++j) {
        double piP = 0.0;
        for (int i = 0; i < 3; ++i) {
            piP += pi[i] * P[i][j];
        }
        if (std::abs(piP - pi[j]) > kStationarityTolerance) {
            throw ProtocolViolation("closed-form pi violates pi P = pi at lambda = " +
                                    std::to_string(lam));
        }
    }
    const Vector3 solved = solve_stationary(P);
    for (int j = 0; j < 3; ++j) {
        if (std::abs(solved[j] - pi[j]) > kCrossCheckTolerance) {
            throw ProtocolViolation("closed-form pi disagrees with linear solve at lambda = " +
                                    std::to_string(lam));
        }
    }
    return pi;
}

ChainModel chain_model(const SystemParams& params) {
    return ChainModel{transition_matrix(params), stationary_distribution(params)};
}

Step1Table step1_table(const SystemParams& params) {
    params.validate();
    const TransformAt t(params);
    const double lam = params.lambda;
    const double p_some = 1.0 - t.g;  // P(tau <= sigma)
    if (p_some < kSmallLambdaGuard) {
        throw DegenerateRegime("1 - G(lambda) below 1e-12; lambda too small for conditional means");
    }
    const double p_none = t.g;
    const double p_one = -lam * t.d1;
    const double p_two = 1.0 - t.g + lam * t.d1;

    Step1Table s{};
    s.e_sigma_tau_gt = checked_ratio(-t.d1, p_none, "E(sigma | tau > sigma)");
    s.e_sigma_tau_le = checked_ratio(t.mean + t.d1, p_some, "E(sigma | tau <= sigma)");
    s.e_sigma_two_le =
        checked_ratio(t.mean + t.d1 - lam * t.d2, p_two, "E(sigma | tau1 + tau2 <= sigma)");
    s.e_sigma_between = checked_ratio(t.d2, -t.d1, "E(sigma | exactly one arrival)");
    s.e_tau_two_le = checked_ratio((1.0 - t.g) / lam + t.d1 - 0.5 * lam * t.d2, p_two,
                                   "E(tau1 | tau1 + tau2 <= sigma)");
    s.e_tau_between = checked_ratio(t.d2, -2.0 * t.d1, "E(tau1 | exactly one arrival)");
    s.q = checked_ratio(p_one, p_some, "q");
    s.e_tau_le = checked_ratio((1.0 - t.g) / lam + t.d1, p_some, "E(tau | tau <= sigma)");
    return s;
}

CycleMoments cycle_moments(const SystemParams& params, const Vector3& pi) {
    require_m3(params, "cycle_moments");
    const double inv_lam = 1.0 / params.lambda;
    const double inv_mu = params.service.mean();
    CycleMoments cm{};
    cm.mean_given_k0 = Vector3{inv_lam + inv_mu, inv_mu, inv_mu};
    cm.mean = pi[0] * inv_lam + inv_mu;
    cm.second_moment = params.service.second_moment() + pi[0] * 2.0 * (inv_mu + inv_lam) * inv_lam;
    return cm;
}

ConditionalAoiTable conditional_aoi_table(const SystemParams& params) {
    require_m3(params, "conditional_aoi_table");
    const Step1Table s = step1_table(params);
    const Matrix3 P = transition_matrix(params);

    // Service time of the message departing at S_0, given how many arrivals it
    // saw. From K_{-1} in {0,1} the count maps to K_0 directly; from K_{-1} = 2
    // the departure leaves at least one message behind.
    const Vector3 sigma_from_low{s.e_sigma_tau_gt, s.e_sigma_between, s.e_sigma_two_le};
    const Vector3 sigma_from_full{0.0, s.e_sigma_tau_gt, s.e_sigma_tau_le};

    // K_{-2} = 2, K_{-1} = 1: the freshest served message at S_{-1} is the last
    // arrival of [S_{-3}, S_{-2}). That interval had exactly one arrival only if
    // it started from K_{-3} = 2, which the reversed chain gives with
    // probability P[2][2]; otherwise it had two or more.
    const double one_arrival_before = P[2][2] * s.q;
    const double freshest_lag_21 =
        one_arrival_before * s.e_tau_between + (1.0 - one_arrival_before) * s.e_tau_two_le;

    ConditionalAoiTable table;
    for (int l = 0; l < 3; ++l) {
        // K_{-1} = 0: the served message arrived to an empty system.
        for (int i = 0; i < 2; ++i) {
            table.set(i, 0, l, sigma_from_low[l]);
        }
        // K_{-1} = 1.
        for (int i = 0; i < 2; ++i) {
            table.set(i, 1, l, s.e_tau_between + sigma_from_low[l]);
        }
        table.set(2, 1, l, freshest_lag_21 + s.e_sigma_tau_gt + sigma_from_low[l]);
    }
    // K_{-1} = 2; K_0 = 0 is unreachable.
    for (int l = 1; l < 3; ++l) {
        for (int i = 0; i < 2; ++i) {
            table.set(i, 2, l, s.e_tau_two_le + sigma_from_full[l]);
        }
        table.set(2, 2, l, s.e_tau_le + sigma_from_full[l]);
    }
    return table;
}

Matrix3 backward_weights(const ChainModel& chain, int l) {
    if (l < 0 || l > 2) {
        throw ProtocolViolation("K_0 index out of range");
    }
    const double pi_l = chain.pi[l];
    if (!(pi_l >= kTinyDenominator)) {
        throw DegenerateRegime("stationary probability of K_0 = " + std::to_string(l) +
                               " vanishes");
    }
    Matrix3 w{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            w[i][j] = chain.pi[i] * chain.P[i][j] * chain.P[j][l] / pi_l;
        }
    }
    return w;
}

Vector3 aoi_given_k0(const SystemParams& params) {
    const ChainModel chain = chain_model(params);
    const ConditionalAoiTable table = conditional_aoi_table(params);
    Vector3 out{};
    for (int l = 0; l < 3; ++l) {
        const Matrix3 w = backward_weights(chain, l);
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                if (table.used(i, j, l)) {
                    acc += table.value(i, j, l) * w[i][j];
                } else if (w[i][j] != 0.0) {
                    throw ProtocolViolation("positive weight on an unreachable (K-2, K-1, K0)");
                }
            }
        }
        out[l] = acc;
    }
    return out;
}

AoiEstimate mean_aoi_m1(const SystemParams& params) {
    params.validate();
    if (params.m != 1) {
        throw UnsupportedConfiguration("mean_aoi_m1 requires m = 1");
    }
    const double g = params.service.laplace(params.lambda);
    if (!(g > 0.0)) {
        throw DegenerateRegime("G(lambda) underflows to 0");
    }
    return AoiEstimate{1.0 / (params.lambda * g), Method::analytic, 0.0, params};
}

AoiEstimate mean_aoi_m2(const SystemParams& params) {
    params.validate();
    if (params.m != 2) {
        throw UnsupportedConfiguration("mean_aoi_m2 requires m = 2");
    }
    const TransformAt t(params);
    const double lam = params.lambda;
    const double inv_mu = t.mean;
    const double second = params.service.second_moment();  // G''(0)
    const double value = inv_mu + (1.0 - t.g + lam * t.d1) / lam +
                         (t.g - lam * t.d1 + 0.5 * lam * lam * second) /
                             (lam * (lam * inv_mu + t.g));
    return AoiEstimate{value, Method::analytic, 0.0, params};
}

AoiEstimate mean_aoi_m3(const SystemParams& params) {
    require_m3(params, "mean_aoi_m3");
    const ChainModel chain = chain_model(params);
    const CycleMoments cm = cycle_moments(params, chain.pi);
    const Vector3 alpha = aoi_given_k0(params);
    double alpha_s1 = 0.0;
    for (int l = 0; l < 3; ++l) {
        alpha_s1 += alpha[l] * cm.mean_given_k0[l] * chain.pi[l];
    }
    const double value = (alpha_s1 + 0.5 * cm.second_moment) / cm.mean;
    return AoiEstimate{value, Method::analytic, 0.0, params};
}

AoiEstimate mean_aoi(const SystemParams& params) {
    params.validate();
    switch (params.m) {
        case 1:
            return mean_aoi_m1(params);
        case 2:
            return mean_aoi_m2(params);
        case 3:
            return mean_aoi_m3(params);
        default:
            throw UnsupportedConfiguration("no closed form for m = " + std::to_string(params.m) +
                                           "; use the simulator");
    }
}

}  // namespace aoi
