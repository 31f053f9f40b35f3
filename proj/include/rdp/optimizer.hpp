#pragma once

// Chooses (l, c) minimizing D_tcr for a given precomputation coefficient and
// target success probability. l is discrete; c is found by scanning for sign
// changes of p(c) - target and refining each by bisection.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "rdp/theory.hpp"

namespace rdp::optimizer {

inline constexpr double kScanMin = 0.05;
inline constexpr double kScanMax = 4.0;
inline constexpr double kScanStep = 0.01;
inline constexpr double kProbabilityTolerance = 1e-4;

struct Candidate {
    std::uint32_t l = 0;
    double c = 0.0;
    double achieved_p = 0.0;
    double D_tcr = 0.0;
};

struct OptimizationResult {
    std::uint32_t l = 0;
    double c = 0.0;
    double achieved_p = 0.0;
    double D_pc = 0.0;
    double D_tcr = 0.0;
    bool feasible = false;
    /// Best root per l that reached the target, ascending l.
    std::vector<Candidate> candidates;
};

/// Success probability in coefficient form.
inline double achieved_success(std::uint32_t l, double c, double d_pc) {
    if (d_pc <= 0.0) return 0.0;
    return theory::success_prob(theory::TheoryInputs::from_coefficients(l, c, d_pc));
}

inline double tradeoff(std::uint32_t l, double c, double d_pc,
                       theory::FalseAlarmWeight w = theory::FalseAlarmWeight::StoredChains) {
    return theory::tradeoff_coefficient(theory::TheoryInputs::from_coefficients(l, c, d_pc), w);
}

/// Every c in the scan range with achieved_success = target_p (to 1e-4),
/// ascending.
inline std::vector<double> success_roots(std::uint32_t l, double d_pc, double target_p) {
    std::vector<double> roots;
    if (!(target_p > 0.0 && target_p < 1.0)) throw ContractViolation("target probability must be in (0, 1)");
    const int steps = static_cast<int>(std::lround((kScanMax - kScanMin) / kScanStep));
    auto excess = [&](double c) { return achieved_success(l, c, d_pc) - target_p; };
    double prev_c = kScanMin;
    double prev = excess(prev_c);
    for (int k = 1; k <= steps; ++k) {
        const double c = kScanMin + k * kScanStep;
        const double cur = excess(c);
        if (prev == 0.0) {
            roots.push_back(prev_c);
        } else if ((prev < 0.0) != (cur < 0.0) && cur != 0.0) {
            auto stop = [&](double a, double b) {
                return std::abs(b - a) < 1e-12 || std::abs(excess(0.5 * (a + b))) <= kProbabilityTolerance * 1e-3;
            };
            const auto [lo, hi] = boost::math::tools::bisect(excess, prev_c, c, stop);
            roots.push_back(0.5 * (lo + hi));
        }
        prev_c = c;
        prev = cur;
    }
    if (prev == 0.0) roots.push_back(prev_c);
    return roots;
}

/// The root for this l with minimal D_tcr, or absent when the target is unreachable.
inline std::optional<Candidate> solve_c(std::uint32_t l, double d_pc, double target_p,
                                        theory::FalseAlarmWeight w = theory::FalseAlarmWeight::StoredChains) {
    std::optional<Candidate> best;
    for (double c : success_roots(l, d_pc, target_p)) {
        Candidate cand{l, c, achieved_success(l, c, d_pc), tradeoff(l, c, d_pc, w)};
        if (!best || cand.D_tcr < best->D_tcr) best = cand;
    }
    return best;
}

inline OptimizationResult optimize(double d_pc, double target_p, std::uint32_t l_max = 8,
                                   theory::FalseAlarmWeight w = theory::FalseAlarmWeight::StoredChains) {
    if (l_max < 1) throw ContractViolation("l_max must be >= 1");
    OptimizationResult res;
    res.D_pc = d_pc;
    for (std::uint32_t l = 1; l <= l_max; ++l) {
        if (auto cand = solve_c(l, d_pc, target_p, w)) {
            res.candidates.push_back(*cand);
            if (!res.feasible || cand->D_tcr < res.D_tcr) {
                res.feasible = true;
                res.l = cand->l;
                res.c = cand->c;
                res.achieved_p = cand->achieved_p;
                res.D_tcr = cand->D_tcr;
            }
        }
    }
    return res;
}

} // namespace rdp::optimizer
