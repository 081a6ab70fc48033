// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: acceptance [criterion numbers...]   (default: all nine)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aoi/analytic.hpp"
#include "aoi/simulator.hpp"
#include "cli/commands.hpp"
#include "oracles.hpp"

namespace {

using namespace aoi;

struct Outcome {
    bool pass;
    std::string detail;
    std::vector<std::string> notes;  // printed indented under the criterion line
};

struct Criterion {
    int id;
    const char* title;
    double time_limit_s;  // 0 = none
    std::function<Outcome()> run;
};

SystemParams params(double lambda, int m, const std::string& service) {
    return SystemParams{lambda, m, ServiceDistribution::parse(service)};
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Outcome check_chain_correctness() {
    Rng rng(20240601);
    std::uniform_real_distribution<double> log_lambda(std::log(0.05), std::log(50.0));
    std::uniform_real_distribution<double> param(0.2, 5.0);
    std::uniform_int_distribution<int> shape(1, 10);
    double worst_balance = 0.0, worst_solve = 0.0, worst_row = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double lam = std::exp(log_lambda(rng));
        ServiceDistribution d = [&] {
            switch (k % 4) {
                case 0: return ServiceDistribution::deterministic(param(rng));
                case 1: return ServiceDistribution::exponential(param(rng));
                case 2: return ServiceDistribution::erlang(shape(rng), param(rng));
                default: return ServiceDistribution::gamma(param(rng), param(rng));
            }
        }();
        const ChainModel c = chain_model(SystemParams{lam, 3, d});
        const Vector3 solved = solve_stationary(c.P);
        for (int j = 0; j < 3; ++j) {
            double piP = 0.0, row = 0.0;
            for (int i = 0; i < 3; ++i) {
                piP += c.pi[i] * c.P[i][j];
                row += c.P[j][i];
            }
            worst_balance = std::max(worst_balance, std::abs(piP - c.pi[j]));
            worst_solve = std::max(worst_solve, std::abs(solved[j] - c.pi[j]));
            worst_row = std::max(worst_row, std::abs(row - 1.0));
        }
    }
    const bool ok = worst_balance <= 1e-10 && worst_solve <= 1e-10 && worst_row <= 1e-12;
    return {ok, "200 cases; max |piP - pi| = " + fmt("%.2e", worst_balance) +
                    ", max |pi - solve| = " + fmt("%.2e", worst_solve) +
                    ", max |row sum - 1| = " + fmt("%.2e", worst_row)};
}

Outcome check_step1_oracle() {
    Outcome o{true, "", {}};
    int compared = 0;
    double worst_z = 0.0;
    for (const char* svc : {"det:1", "exp:1", "erlang:3:3"}) {
        for (double lam : {0.5, 1.0, 4.0}) {
            const auto p = params(lam, 3, svc);
            const Step1Table s = step1_table(p);
            const auto mc = testing::step1_monte_carlo(p.service, lam, 10'000'000, 7);
            auto check = [&](const char* name, double exact, const testing::MeanEstimate& e) {
                ++compared;
                const double diff = std::abs(exact - e.mean);
                // Degenerate conditional laws (deterministic sigma) have zero spread.
                const bool ok = diff <= 3.0 * e.std_error + 1e-12;
                if (e.std_error > 0) {
                    worst_z = std::max(worst_z, diff / e.std_error);
                }
                if (!ok) {
                    o.pass = false;
                    o.notes.push_back(std::string(svc) + " lambda=" + fmt("%g", lam) + " " + name +
                                      ": exact " + fmt("%.8g", exact) + " mc " +
                                      fmt("%.8g", e.mean) + " se " + fmt("%.3g", e.std_error));
                }
            };
            check("E(sigma|tau1>sigma)", s.e_sigma_tau_gt, mc.e_sigma_tau_gt);
            check("E(sigma|tau1<=sigma)", s.e_sigma_tau_le, mc.e_sigma_tau_le);
            check("E(sigma|tau1+tau2<=sigma)", s.e_sigma_two_le, mc.e_sigma_two_le);
            check("E(sigma|tau1<=sigma<tau1+tau2)", s.e_sigma_between, mc.e_sigma_between);
            check("E(tau1|tau1+tau2<=sigma)", s.e_tau_two_le, mc.e_tau_two_le);
            check("E(tau1|tau1<=sigma<tau1+tau2)", s.e_tau_between, mc.e_tau_between);
            check("q", s.q, mc.q);
            check("E(tau1|tau1<=sigma)", s.e_tau_le, mc.e_tau_le);
        }
    }
    o.detail = std::to_string(compared) + " comparisons at 1e7 samples; max |z| = " +
               fmt("%.2f", worst_z);
    return o;
}

Outcome check_closed_form_vs_simulation() {
    const cli::ValidateOptions opts = cli::make_validate_options();
    const auto rows = cli::run_validation(opts);
    Outcome o{true, "", {}};
    int passed = 0;
    double worst_z = 0.0;
    for (const auto& r : rows) {
        const double z = (r.simulated - r.analytic) / r.std_error;
        worst_z = std::max(worst_z, std::abs(z));
        passed += r.pass;
        o.pass = o.pass && r.pass;
        std::ostringstream line;
        line << (r.pass ? "ok   " : "FAIL ") << "m=" << r.spec.m << " lambda=" << r.spec.lambda
             << " " << r.spec.service << ": analytic " << fmt("%.8f", r.analytic) << " sim "
             << fmt("%.8f", r.simulated) << " se " << fmt("%.2e", r.std_error) << " z "
             << fmt("%+.2f", z);
        o.notes.push_back(line.str());
    }
    o.detail = std::to_string(passed) + "/" + std::to_string(rows.size()) +
               " cases within 3 s.e. (horizon 1e7, 8 replications); max |z| = " +
               fmt("%.2f", worst_z);
    return o;
}

Outcome check_deterministic_ordering() {
    int points = 0, violations = 0;
    for (int k = 0; k <= 30; ++k) {
        const double lam = 0.5 + 0.25 * k;
        const double a1 = mean_aoi(params(lam, 1, "det:1")).mean_aoi;
        const double a2 = mean_aoi(params(lam, 2, "det:1")).mean_aoi;
        const double a3 = mean_aoi(params(lam, 3, "det:1")).mean_aoi;
        ++points;
        violations += !(a2 < a3 && a3 < a1);
    }
    return {violations == 0, "E[a2] < E[a3] < E[a1] at " + std::to_string(points - violations) +
                                 "/" + std::to_string(points) + " grid points"};
}

Outcome check_exponential_ordering() {
    int points = 0, violations = 0;
    for (int k = 1; k <= 800; ++k) {
        const double lam = 0.01 * k;
        const double a1 = mean_aoi(params(lam, 1, "exp:1")).mean_aoi;
        const double a2 = mean_aoi(params(lam, 2, "exp:1")).mean_aoi;
        const double a3 = mean_aoi(params(lam, 3, "exp:1")).mean_aoi;
        ++points;
        violations += !(a1 < a2 && a2 < a3);
    }
    return {violations == 0, "E[a1] < E[a2] < E[a3] at " + std::to_string(points - violations) +
                                 "/" + std::to_string(points) + " points of 0.01:8:0.01"};
}

Outcome check_saturation() {
    Outcome o{true, "", {}};
    std::ostringstream detail;
    for (const char* svc : {"exp:1", "det:1"}) {
        double prev = INFINITY;
        detail << svc << " gaps";
        for (double lam : {4.0, 8.0, 16.0, 32.0}) {
            const double gap = std::abs(mean_aoi(params(lam, 3, svc)).mean_aoi -
                                        mean_aoi(params(lam, 2, svc)).mean_aoi);
            detail << " " << fmt("%.3e", gap);
            o.pass = o.pass && gap < prev;
            prev = gap;
        }
        o.pass = o.pass && prev < 0.01;
        detail << (svc[0] == 'e' ? "; " : "");
    }
    o.detail = detail.str() + " (need strictly decreasing, last < 0.01)";
    return o;
}

Outcome check_simulated_ordering() {
    struct Run {
        std::string service;
        int m;
        SimulationResult result;
    };
    std::vector<Run> runs;
    auto simulate = [&](const std::string& svc, int m) {
        SimConfig c(params(1.0, m, svc));
        c.horizon = 1e7;
        c.replications = 16;
        c.seed = 4;
        runs.push_back({svc, m, run(c)});
    };
    for (int m : {2, 3, 4}) {
        simulate("det:1", m);
    }
    for (int m : {1, 2, 3, 4}) {
        simulate("exp:1", m);
    }
    Outcome o{true, "", {}};
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i].result;
        o.notes.push_back(runs[i].service + " m=" + std::to_string(runs[i].m) + ": " +
                          fmt("%.6f", r.estimate.mean_aoi) + " +- 3se " +
                          fmt("%.6f", 3.0 * r.std_error));
        if (i > 0 && runs[i - 1].service == runs[i].service) {
            const auto& lo = runs[i - 1].result;
            const bool separated =
                lo.estimate.mean_aoi + 3.0 * lo.std_error < r.estimate.mean_aoi - 3.0 * r.std_error;
            o.pass = o.pass && separated;
        }
    }
    o.detail = "det: E[a2] < E[a3] < E[a4], exp: E[a1] < ... < E[a4], 3 s.e. bands disjoint "
               "(horizon 1e7, 16 replications)";
    return o;
}

Outcome check_cycle_moments() {
    SimConfig c(params(1.0, 3, "exp:1"));
    c.horizon = 1e7;
    c.replications = 8;
    c.seed = 8;
    const SimulationResult r = run(c);
    const CycleDiagnostics d = cycle_diagnostics(r);
    const EmpiricalChain ch = empirical_chain(r);
    const double z1 = (d.mean_gap - 4.0 / 3.0) / d.mean_gap_se;
    const double z2 = (d.second_moment - 10.0 / 3.0) / d.second_moment_se;
    double pi_err = 0.0;
    for (double p : ch.pi) {
        pi_err = std::max(pi_err, std::abs(p - 1.0 / 3.0));
    }
    const bool ok = std::abs(z1) <= 3.0 && std::abs(z2) <= 3.0 && pi_err <= 0.01;
    return {ok, "E0 S1 = " + fmt("%.6f", d.mean_gap) + " (z " + fmt("%+.2f", z1) +
                    "), E0 S1^2 = " + fmt("%.6f", d.second_moment) + " (z " + fmt("%+.2f", z2) +
                    "), max |pi - 1/3| = " + fmt("%.2e", pi_err)};
}

Outcome check_stale_departures() {
    SimConfig c3(params(1.0, 3, "exp:1"));
    c3.seed = 9;
    const SimulationResult r3 = run(c3);
    SimConfig c2(params(1.0, 2, "exp:1"));
    c2.seed = 9;
    const SimulationResult r2 = run(c2);
    const double f3 = static_cast<double>(r3.stale_departures) / static_cast<double>(r3.departures);
    const bool ok = r3.stale_departures > 0 && r2.stale_departures == 0 && r2.departures >= 1'000'000;
    return {ok, "m=3 stale fraction " + fmt("%.4f", f3) + " over " +
                    std::to_string(r3.departures) + " departures; m=2 stale count " +
                    std::to_string(r2.stale_departures) + " over " +
                    std::to_string(r2.departures) + " departures"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "embedded chain stationary law", 1.0, check_chain_correctness},
        {2, "single-service conditional means vs Monte Carlo", 60.0, check_step1_oracle},
        {3, "closed forms vs simulation, default validation grid", 600.0,
         check_closed_form_vs_simulation},
        {4, "deterministic service ordering m2 < m3 < m1", 1.0, check_deterministic_ordering},
        {5, "exponential service ordering m1 < m2 < m3", 1.0, check_exponential_ordering},
        {6, "m3 and m2 converge as lambda grows", 0.0, check_saturation},
        {7, "ordering up to m = 4 by simulation", 900.0, check_simulated_ordering},
        {8, "inter-departure moments and empirical chain", 0.0, check_cycle_moments},
        {9, "stale departures at m = 3 only", 0.0, check_stale_departures},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        selected.insert(std::atoi(argv[i]));
    }

    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.contains(c.id)) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what(), {}};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt("%.2f s", secs);
        if (c.time_limit_s > 0) {
            timing += " (limit " + fmt("%g", c.time_limit_s) + " s)";
            if (secs >= c.time_limit_s) {
                o.pass = false;
            }
        }
        failures += !o.pass;
        std::printf("%s  criterion %d: %s -- %s [%s]\n", o.pass ? "PASS" : "FAIL", c.id, c.title,
                    o.detail.c_str(), timing.c_str());
        for (const auto& n : o.notes) {
            std::printf("        %s\n", n.c_str());
        }
        std::fflush(stdout);
    }
    std::printf("%s  %d criteria failed\n", failures == 0 ? "PASS" : "FAIL", failures);
    return failures == 0 ? 0 : 1;
}
