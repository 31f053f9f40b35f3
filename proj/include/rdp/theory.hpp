#pragma once

// Analytic model of the rainbow distinguished point tradeoff: column
// populations, failure/success probabilities, expected false alarms, online
// time and the tradeoff coefficient D_tcr = T M^2 / N^2.
//
// Notation in code: ratio = m0_tilde * t / N, H = 2 / (2 + ratio),
// D_pc = m0 * t * l / N = ratio * l * (1 - e^-c).

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rdp/error.hpp"
#include "rdp/params.hpp"

namespace rdp::theory {

namespace detail {

template <typename F>
double gk31(const F& f, double a, double b, double* l1) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, nullptr, l1);
}

template <typename F>
double integrate_piece(const F& f, double a, double b, double whole, double l1, double abs_tol, int depth) {
    const double mid = 0.5 * (a + b);
    double l1_left = 0.0, l1_right = 0.0;
    const double left = gk31(f, a, mid, &l1_left);
    const double right = gk31(f, mid, b, &l1_right);
    const double err = std::abs(whole - (left + right));
    if (err <= abs_tol || err <= 64 * std::numeric_limits<double>::epsilon() * l1 || depth == 0) return left + right;
    return integrate_piece(f, a, mid, left, l1_left, 0.5 * abs_tol, depth - 1) +
           integrate_piece(f, mid, b, right, l1_right, 0.5 * abs_tol, depth - 1);
}

} // namespace detail

/// Adaptive 31-point Gauss-Kronrod on [a, b]. A piece is accepted when the
/// rule on the whole piece and on its two halves agree within the piece's
/// share of `abs_tol`, or to round-off.
template <typename F>
double integrate(const F& f, double a, double b, double abs_tol, int depth = 30) {
    if (a == b) return 0.0;
    double l1 = 0.0;
    const double whole = detail::gk31(f, a, b, &l1);
    return detail::integrate_piece(f, a, b, whole, l1, abs_tol, depth);
}

/// As `integrate`, with the tolerance relative to a first estimate of the integral.
template <typename F>
double integrate_relative(const F& f, double a, double b, double rel_tol) {
    if (a == b) return 0.0;
    double l1 = 0.0;
    const double rough = detail::gk31(f, a, b, &l1);
    return integrate(f, a, b, std::max(std::abs(rough) * rel_tol, 1e-300));
}

/// Which population weights the false-alarm term of the online time.
///
/// StartingPoints uses m0_tilde, as the per-iteration false-alarm expectation
/// is derived (chains of every length are counted before discarding). It
/// reproduces the absolute online time of the reference experiment.
/// StoredChains uses m0 (i.e. D_pc) in that term, which is the closed
/// expression behind the published optimal-parameter table.
enum class FalseAlarmWeight { StartingPoints, StoredChains };

struct TheoryInputs {
    double m0_tilde_ratio = 0.0;
    double c = 0.0;
    std::uint32_t l = 1;
    /// Absolute scale; zero when only coefficients are known.
    std::uint64_t t = 0;
    std::uint64_t N = 0;

    bool has_absolute() const { return t > 0 && N > 0; }
    double m0_tilde() const { return m0_tilde_ratio * static_cast<double>(N) / static_cast<double>(t); }
    double d_pc() const { return m0_tilde_ratio * l * (1.0 - std::exp(-c)); }
    std::uint32_t t_hat() const { return chain_length_bound(c, t); }

    void validate() const {
        if (!(m0_tilde_ratio >= 0.0) || !std::isfinite(m0_tilde_ratio)) throw ContractViolation("m0_tilde_ratio must be >= 0");
        if (!(c > 0.0) || !std::isfinite(c)) throw ContractViolation("c must be > 0");
        if (l < 1) throw ContractViolation("l must be >= 1");
    }

    void require_absolute(const char* what) const {
        if (!has_absolute()) throw ContractViolation(std::string(what) + " needs absolute t and N");
    }

    static TheoryInputs from_params(const SpaceParams& p) {
        TheoryInputs in;
        in.t = p.t();
        in.N = p.N();
        in.m0_tilde_ratio = static_cast<double>(p.m0_tilde) * static_cast<double>(in.t) / static_cast<double>(in.N);
        in.c = p.c;
        in.l = p.l;
        return in;
    }

    /// Coefficient form: m0_tilde * t / N = D_pc / (l (1 - e^-c)).
    static TheoryInputs from_coefficients(std::uint32_t l, double c, double d_pc) {
        TheoryInputs in;
        in.l = l;
        in.c = c;
        in.m0_tilde_ratio = d_pc / (l * (1.0 - std::exp(-c)));
        return in;
    }
};

inline double h_value(double m0_tilde_ratio) {
    if (m0_tilde_ratio < 0.0) throw ContractViolation("m0_tilde_ratio must be >= 0");
    return 2.0 / (2.0 + m0_tilde_ratio);
}

inline double h_value(const TheoryInputs& in) { return h_value(in.m0_tilde_ratio); }

/// Distinct points in column i before discarding over-long chains.
inline double m_tilde(double i, const TheoryInputs& in) {
    in.require_absolute("m_tilde");
    if (i < 0.0) throw ContractViolation("column must be >= 0");
    const double h = h_value(in);
    return in.m0_tilde() * h / (std::exp(i / static_cast<double>(in.t)) - (1.0 - h));
}

/// Distinct points in column i of the stored matrix.
inline double m_col(double i, const TheoryInputs& in) {
    return m_tilde(i, in) * (1.0 - std::exp(i / static_cast<double>(in.t) - in.c));
}

namespace detail {
inline void check_integral_args(double a, double b, double h, double c) {
    if (!(a >= 0.0 && a <= b && b <= c)) throw ContractViolation("inner integral needs 0 <= a <= b <= c");
    if (!(h > 0.0 && h <= 1.0)) throw ContractViolation("H must be in (0, 1]");
}
} // namespace detail

/// Integral over [a, b] of (1 - e^{u-c}) / (e^u - (1-H)), by quadrature.
inline double inner_integral(double a, double b, double h, double c) {
    detail::check_integral_args(a, b, h, c);
    // e^u - (1 - H) written as expm1(u) + H keeps digits when H is small
    return integrate([=](double u) { return -std::expm1(u - c) / (std::expm1(u) + h); }, a, b, 1e-13);
}

/// Same integral from the antiderivative
///   F(u) = ln(1 - K e^-u) / K - e^-c ln(e^u - K),   K = 1 - H,
/// with the K -> 0 limit F(u) = -e^-u - e^-c u.
inline double inner_integral_closed(double a, double b, double h, double c) {
    detail::check_integral_args(a, b, h, c);
    const double k = 1.0 - h;
    const double ec = std::exp(-c);
    if (k == 0.0) return (std::exp(-a) - std::exp(-b)) - ec * (b - a);
    auto first = [k](double u) { return std::log1p(-k * std::exp(-u)) / k; };
    // ln(e^u - K) = u + ln(1 - K e^-u)
    auto second = [k](double u) { return u + std::log1p(-k * std::exp(-u)); };
    return (first(b) - first(a)) - ec * (second(b) - second(a));
}

/// Probability that the first k iterations all fail (integral form).
inline double failure_prob(double k, const TheoryInputs& in) {
    in.validate();
    in.require_absolute("failure_prob");
    if (k <= 0.0) return 1.0;
    const double h = h_value(in);
    const double lower = std::max(0.0, in.c - k / static_cast<double>(in.t));
    return std::exp(-in.m0_tilde_ratio * in.l * h * inner_integral(lower, in.c, h, in.c));
}

inline double success_prob(const TheoryInputs& in) {
    in.validate();
    const double h = h_value(in);
    return 1.0 - std::exp(-in.m0_tilde_ratio * in.l * h * inner_integral(0.0, in.c, h, in.c));
}

/// p_0..p_{t_hat} from the column sums p_k = exp(-l sum_{i=1..k} m_{t_hat-i} / N).
inline std::vector<double> failure_probs_discrete(const TheoryInputs& in) {
    in.validate();
    in.require_absolute("failure_probs_discrete");
    const std::uint32_t t_hat = in.t_hat();
    const double n = static_cast<double>(in.N);
    std::vector<double> p(std::size_t(t_hat) + 1);
    double sum = 0.0;
    p[0] = 1.0;
    for (std::uint32_t k = 1; k <= t_hat; ++k) {
        sum += std::max(0.0, m_col(double(t_hat - k), in));
        p[k] = std::exp(-static_cast<double>(in.l) * sum / n);
    }
    return p;
}

/// Expected false alarms per table in iteration i (simplified form).
inline double expected_false_alarms(double i, const TheoryInputs& in) {
    in.require_absolute("expected_false_alarms");
    const double x = i / static_cast<double>(in.t);
    return in.m0_tilde_ratio * std::exp(-in.c) * (std::expm1(x) - x);
}

/// Same expectation summed over chain lengths j = t_hat-i+1..t_hat, each
/// length holding m0_tilde (1-1/t)^{j-1} / t chains that merge with
/// probability (j - (t_hat - i)) / N.
inline double expected_false_alarms_exact(std::uint32_t i, const TheoryInputs& in) {
    in.require_absolute("expected_false_alarms_exact");
    const std::uint32_t t_hat = in.t_hat();
    if (i < 1 || i > t_hat) throw ContractViolation("iteration outside [1, t_hat]");
    const double t = static_cast<double>(in.t);
    const double q = 1.0 - 1.0 / t;
    double sum = 0.0;
    for (std::uint32_t j = t_hat - i + 1; j <= t_hat; ++j)
        sum += std::pow(q, double(j) - 1.0) / t * (double(j) - double(t_hat - i));
    return in.m0_tilde() * sum / static_cast<double>(in.N);
}

namespace detail {

/// Multiplier of e^-c (c-v)(e^v-1-v) in the online-time integrand, per table set.
inline double false_alarm_weight(const TheoryInputs& in, FalseAlarmWeight w) {
    return w == FalseAlarmWeight::StartingPoints ? in.m0_tilde_ratio * in.l : in.d_pc();
}

/// Integral over v in [0, c] of [l v + W e^-c (c-v)(e^v-1-v)] exp(-ratio l H I(c-v, c)).
inline double online_time_integral(double l, double weight, double exponent_scale, double h, double c) {
    const double ec = std::exp(-c);
    auto integrand = [=](double v) {
        const double alarm = weight * ec * (c - v) * (std::expm1(v) - v);
        return (l * v + alarm) * std::exp(-exponent_scale * inner_integral(c - v, c, h, c));
    };
    return integrate_relative(integrand, 0.0, c, 1e-10);
}

} // namespace detail

/// Expected online f-invocations T (integral form).
inline double expected_online_time(const TheoryInputs& in, FalseAlarmWeight w = FalseAlarmWeight::StartingPoints) {
    in.validate();
    in.require_absolute("expected_online_time");
    const double t = static_cast<double>(in.t);
    const double h = h_value(in);
    return t * t *
           detail::online_time_integral(in.l, detail::false_alarm_weight(in, w), in.m0_tilde_ratio * in.l * h, h, in.c);
}

/// T = sum_{i=1..t_hat} l [(i-1) + (t_hat-i+1) E_fa(i)] p_{i-1}, with discrete p.
inline double expected_online_time_discrete(const TheoryInputs& in,
                                            FalseAlarmWeight w = FalseAlarmWeight::StartingPoints) {
    const auto p = failure_probs_discrete(in);
    const std::uint32_t t_hat = in.t_hat();
    const double scale = w == FalseAlarmWeight::StartingPoints ? 1.0 : 1.0 - std::exp(-in.c);
    double total = 0.0;
    for (std::uint32_t i = 1; i <= t_hat; ++i) {
        const double fa = scale * expected_false_alarms(i, in);
        total += in.l * ((i - 1.0) + (t_hat - i + 1.0) * fa) * p[i - 1];
    }
    return total;
}

/// Expected false alarms over a whole search: sum_i l E_fa(i) p_{i-1} (integral form).
inline double expected_total_false_alarms(const TheoryInputs& in) {
    in.validate();
    in.require_absolute("expected_total_false_alarms");
    const double h = h_value(in);
    const double ec = std::exp(-in.c);
    const double scale = in.m0_tilde_ratio * in.l * h;
    auto integrand = [&](double v) {
        return in.m0_tilde_ratio * in.l * ec * (std::expm1(v) - v) *
               std::exp(-scale * inner_integral(in.c - v, in.c, h, in.c));
    };
    return static_cast<double>(in.t) * integrate_relative(integrand, 0.0, in.c, 1e-10);
}

inline double expected_total_false_alarms_discrete(const TheoryInputs& in) {
    const auto p = failure_probs_discrete(in);
    double total = 0.0;
    for (std::uint32_t i = 1; i <= in.t_hat(); ++i) total += in.l * expected_false_alarms(i, in) * p[i - 1];
    return total;
}

/// D_tcr in coefficient form:
///   D_pc^2 * int_0^c [l v + D e^-c (c-v)(e^v-1-v)] exp(-D_pc H / (1-e^-c) I(c-v, c)) dv
/// where D is D_pc (StoredChains) or D_pc / (1-e^-c) (StartingPoints).
inline double tradeoff_coefficient(const TheoryInputs& in, FalseAlarmWeight w = FalseAlarmWeight::StoredChains) {
    in.validate();
    const double d_pc = in.d_pc();
    const double keep = 1.0 - std::exp(-in.c);
    const double h = h_value(in);
    const double weight = w == FalseAlarmWeight::StoredChains ? d_pc : d_pc / keep;
    return d_pc * d_pc * detail::online_time_integral(in.l, weight, d_pc * h / keep, h, in.c);
}

struct TheoryReport {
    double H = 0.0;
    double D_pc = 0.0;
    double success_p = 0.0;
    /// Published coefficient form (false-alarm term weighted by D_pc).
    double D_tcr = 0.0;
    std::optional<double> m0;
    std::optional<double> M;
    std::optional<double> precomp_invocations;
    std::optional<double> expected_T;
    std::optional<double> expected_total_false_alarms;
    /// expected_T * M^2 / N^2.
    std::optional<double> D_tcr_from_T;
};

inline TheoryReport make_report(const TheoryInputs& in) {
    in.validate();
    TheoryReport r;
    r.H = h_value(in);
    r.D_pc = in.d_pc();
    r.success_p = success_prob(in);
    r.D_tcr = tradeoff_coefficient(in);
    if (in.has_absolute()) {
        const double n = static_cast<double>(in.N);
        r.m0 = in.m0_tilde() * (1.0 - std::exp(-in.c));
        r.M = *r.m0 * in.l;
        r.precomp_invocations = r.D_pc * n;
        r.expected_T = expected_online_time(in);
        r.expected_total_false_alarms = expected_total_false_alarms(in);
        r.D_tcr_from_T = *r.expected_T * *r.M * *r.M / (n * n);
    }
    return r;
}

} // namespace rdp::theory
