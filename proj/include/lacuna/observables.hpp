#pragma once

// Zero-mean bounded-variation observables on the circle: a sawtooth part
// slope * ({x} - 1/2) plus a piecewise-constant part with rational
// breakpoints. Every function in the example catalog has this form, and so do
// their periodizations (hat functions), which keeps all of them exact.

#include "lacuna/bigint.hpp"
#include "lacuna/contfrac.hpp"
#include "lacuna/piecewise.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

namespace lacuna {

class StepFunction {
public:
    /// Pure sawtooth slope * ({x} - 1/2); slope 1 gives phi0.
    explicit StepFunction(Rational slope = 0, std::string name = "")
        : name_(std::move(name)), slope_(std::move(slope)) {}

    /// Step part given by its jumps; the additive constant is chosen so the
    /// mean is zero. Step jump sizes must sum to zero.
    static StepFunction from_jumps(Rational slope, std::vector<Jump> step_jumps, std::string name = "") {
        StepFunction f(std::move(slope), std::move(name));
        auto jumps = detail::normalize_jumps(std::move(step_jumps));
        Rational total = 0;
        for (const auto& j : jumps) total += j.size;
        if (total != 0) throw DomainError("step jumps must sum to zero");
        if (jumps.empty()) return f;

        // values_[i] lives on [breaks_[i], breaks_[i+1]) with the last piece
        // wrapping around to breaks_[0] + 1.
        Rational level = 0;
        for (const auto& j : jumps) {
            if (!f.breaks_.empty()) level += j.size;
            f.breaks_.push_back(j.at);
            f.values_.push_back(level);
        }
        Rational mean = 0;
        for (std::size_t i = 0; i < f.breaks_.size(); ++i) mean += f.piece_length(i) * f.values_[i];
        for (auto& v : f.values_) v -= mean;
        return f;
    }

    const std::string& name() const noexcept { return name_; }
    const Rational& slope() const noexcept { return slope_; }
    const std::vector<Rational>& breakpoints() const noexcept { return breaks_; }
    const std::vector<Rational>& values() const noexcept { return values_; }

    Rational evaluate(const Rational& x) const {
        Rational y = frac(x);
        Rational out = slope_ * (y - Rational(1, 2));
        if (!breaks_.empty()) out += values_[piece_index(y)];
        return out;
    }

    double evaluate(double x) const {
        double y = x - std::floor(x);
        double out = slope_.get_d() * (y - 0.5);
        if (breaks_.empty()) return out;
        std::size_t idx = breaks_.size() - 1;
        for (std::size_t i = 0; i < breaks_.size(); ++i) {
            if (breaks_[i].get_d() <= y) idx = i;
            else break;
        }
        return out + values_[idx].get_d();
    }

    /// Jumps of the piecewise-constant part only.
    std::vector<Jump> step_jumps() const {
        std::vector<Jump> out;
        const std::size_t m = breaks_.size();
        for (std::size_t i = 0; i < m; ++i) {
            out.push_back({breaks_[i], values_[i] - values_[(i + m - 1) % m]});
        }
        return out;
    }

    /// Jumps of the whole function, including -slope at 0 from the sawtooth.
    std::vector<Jump> jumps() const {
        auto out = step_jumps();
        out.push_back({Rational(0), -slope_});
        return detail::normalize_jumps(std::move(out));
    }

    UniformSlopeFunction as_uniform_slope() const { return {slope_, jumps()}; }

    Rational mean() const {
        Rational m = 0;
        for (std::size_t i = 0; i < breaks_.size(); ++i) m += piece_length(i) * values_[i];
        return m;
    }

    /// Total variation on the circle, wrap-around jump included.
    Rational variation() const {
        Rational v = abs(slope_);
        for (const auto& j : jumps()) v += abs(j.size);
        return v;
    }

    /// K = sup_r |gamma_r| <= sum |jumps| / (2 pi).
    double fourier_bound() const {
        Rational s = 0;
        for (const auto& j : jumps()) s += abs(j.size);
        return s.get_d() / (2 * std::numbers::pi);
    }

    /// sup |f|, taken over one-sided limits at the piece ends.
    Rational sup_norm() const {
        Rational best = 0;
        for (const auto& p : detail::pieces_of(as_uniform_slope())) {
            for (const Rational* y : {&p.start, &p.end}) {
                Rational v = abs(slope_ * *y + p.offset);
                if (v > best) best = v;
            }
        }
        return best;
    }

    Rational l2_norm_sq() const { return lacuna::l2_norm_sq(as_uniform_slope()); }

private:
    Rational piece_length(std::size_t i) const {
        const std::size_t m = breaks_.size();
        if (m == 1) return 1;
        return i + 1 < m ? Rational(breaks_[i + 1] - breaks_[i]) : Rational(breaks_[0] + 1 - breaks_[i]);
    }

    std::size_t piece_index(const Rational& y) const {
        std::size_t idx = breaks_.size() - 1;
        for (std::size_t i = 0; i < breaks_.size(); ++i) {
            if (breaks_[i] <= y) idx = i;
            else break;
        }
        return idx;
    }

    std::string name_;
    Rational slope_;
    std::vector<Rational> breaks_;
    std::vector<Rational> values_;
};

struct VectorObservable {
    StepFunction first;
    StepFunction second;
};

/// Bounds used by the quasi-orthogonality machinery; R(f, t) <= C_R t^-gamma.
struct SmoothnessBudget {
    double sup_norm;
    double l2_norm;
    double c_r;
    double gamma;
};

inline SmoothnessBudget smoothness_budget(const StepFunction& f) {
    return {f.sup_norm().get_d(), std::sqrt(f.l2_norm_sq().get_d()), 2 * f.fourier_bound(), 0.5};
}

namespace detail {

/// {r * theta} for theta = n/d in [0, 1), iterated over r = 1, 2, ...
/// Integer state keeps the phase exact however large r gets.
class PhaseWalker {
public:
    explicit PhaseWalker(const Rational& theta) : big_(theta.get_den() >= pow2(120)) {
        if (big_) {
            n_big_ = theta.get_num();
            d_big_ = theta.get_den();
            cur_big_ = 0;
            inv_d_ = 1.0 / d_big_.get_d();
        } else {
            n_ = to_u128(theta.get_num());
            d_ = to_u128(theta.get_den());
            inv_d_ = 1.0 / static_cast<double>(d_);
        }
    }

    /// Advances r by one and returns {r * theta} as a double in [0, 1).
    double next() {
        if (big_) {
            cur_big_ += n_big_;
            if (cur_big_ >= d_big_) cur_big_ -= d_big_;
            return ratio(cur_big_, d_big_).get_d();
        }
        cur_ += n_;
        if (cur_ >= d_) cur_ -= d_;
        return static_cast<double>(cur_) * inv_d_;
    }

private:
    static unsigned __int128 to_u128(const BigInt& v) {
        BigInt hi = v >> 64;
        BigInt lo = v - (hi << 64);
        return (static_cast<unsigned __int128>(to_u64(hi)) << 64) | to_u64(lo);
    }

    bool big_;
    unsigned __int128 n_ = 0, d_ = 1, cur_ = 0;
    BigInt n_big_, d_big_, cur_big_;
    double inv_d_ = 1;
};

inline std::complex<double> gamma_from_phases(const std::vector<Jump>& jumps, const std::vector<double>& phases) {
    std::complex<double> acc = 0;
    for (std::size_t k = 0; k < jumps.size(); ++k) {
        double ang = -2 * std::numbers::pi * phases[k];
        acc += jumps[k].size.get_d() * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return acc / std::complex<double>(0, 2 * std::numbers::pi);
}

}  // namespace detail

/// gamma_r = r * c_r = sum_k D_k exp(-2 pi i r u_k) / (2 pi i) over all jumps.
inline std::complex<double> fourier_gamma(const StepFunction& f, const BigInt& r) {
    if (r == 0) throw DomainError("fourier_gamma needs r != 0");
    auto jumps = f.jumps();
    std::vector<double> phases;
    phases.reserve(jumps.size());
    for (const auto& j : jumps) phases.push_back(frac(Rational(r) * j.at).get_d());
    return detail::gamma_from_phases(jumps, phases);
}

inline std::complex<double> fourier_gamma(const StepFunction& f, long r) { return fourier_gamma(f, BigInt(r)); }

/// c_r = gamma_r / r.
inline std::complex<double> fourier_coefficient(const StepFunction& f, long r) {
    return fourier_gamma(f, r) / static_cast<double>(r);
}

// ---------------------------------------------------------------------------
// Catalog

inline StepFunction phi0() { return StepFunction(Rational(1), "phi0"); }

/// 1_[0, beta) - beta.
inline StepFunction indicator(const Rational& beta) {
    if (beta <= 0 || beta >= 1) throw DomainError("indicator needs beta in (0, 1)");
    return StepFunction::from_jumps(0, {{Rational(0), Rational(1)}, {beta, Rational(-1)}},
                                    "indicator:beta=" + to_string(beta));
}

/// 1_[0, 1/2) - 1_[1/2, 1).
inline StepFunction half() {
    return StepFunction::from_jumps(0, {{Rational(0), Rational(2)}, {Rational(1, 2), Rational(-2)}}, "half");
}

/// 1_[0, beta) - 1_[gamma, gamma + beta), the second interval read mod 1.
inline StepFunction double_interval(const Rational& beta, const Rational& gamma) {
    if (beta <= 0 || beta >= 1 || gamma <= 0 || gamma >= 1) {
        throw DomainError("double_interval needs beta, gamma in (0, 1)");
    }
    return StepFunction::from_jumps(0,
                                    {{Rational(0), Rational(1)},
                                     {beta, Rational(-1)},
                                     {gamma, Rational(-1)},
                                     {frac(gamma + beta), Rational(1)}},
                                    "double_interval:beta=" + to_string(beta) + ",gamma=" + to_string(gamma));
}

/// 1_[0, beta) - 1_[1/2, 1/2 + beta).
inline StepFunction half_shifted(const Rational& beta) {
    auto f = double_interval(beta, Rational(1, 2));
    return StepFunction::from_jumps(0, f.step_jumps(), "half_shifted:beta=" + to_string(beta));
}

/// The vector observable (1_[0,a/2) - 1_[1/2,1/2+a/2), 1_[0,1/2-a/2) - 1_[1/2,1-a/2)).
inline VectorObservable billiard_pair(const Rational& alpha) {
    return {half_shifted(alpha / 2), half_shifted(Rational(1, 2) - alpha / 2)};
}

/// Components of the cell displacement over two collisions:
/// psi1 = 1_[1/2-a/2, 1/2) - 1_[1-a/2, 1), psi2 = 1_[0, 1/2-a/2) - 1_[1/2, 1-a/2).
inline VectorObservable billiard_displacement(const Rational& alpha) {
    if (alpha <= 0 || alpha >= 1) throw DomainError("alpha must lie in (0, 1)");
    Rational u = Rational(1, 2) - alpha / 2;
    Rational w = 1 - alpha / 2;
    Rational h(1, 2);
    auto psi1 = StepFunction::from_jumps(
        0, {{u, Rational(1)}, {h, Rational(-1)}, {w, Rational(-1)}, {Rational(0), Rational(1)}}, "psi1");
    auto psi2 = StepFunction::from_jumps(
        0, {{Rational(0), Rational(1)}, {u, Rational(-1)}, {h, Rational(-1)}, {w, Rational(1)}}, "psi2");
    return {psi1, psi2};
}

/// "phi0", "indicator:beta=1/3", "half", "double_interval:beta=..,gamma=..",
/// "half_shifted:beta=..".
inline StepFunction parse_observable(const std::string& text) {
    auto colon = text.find(':');
    std::string kind = text.substr(0, colon);
    std::string params = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (kind == "phi0") return phi0();
    if (kind == "half") return half();
    if (kind == "indicator") return indicator(parse_rational(detail::param(params, "beta", "")));
    if (kind == "double_interval") {
        return double_interval(parse_rational(detail::param(params, "beta", "")),
                               parse_rational(detail::param(params, "gamma", "")));
    }
    if (kind == "half_shifted") return half_shifted(parse_rational(detail::param(params, "beta", "")));
    throw DomainError("unknown observable '" + text + "'");
}

// ---------------------------------------------------------------------------
// Hat functions

/// phi_hat_l with phi_hat_l(l x) = sum_{j<l} phi(x + j/l). A jump of phi at u
/// becomes a jump of the same size at {l u}; the sawtooth maps to itself.
inline StepFunction hat_observable(const StepFunction& f, const BigInt& ell) {
    if (ell < 1) throw DomainError("hat_observable needs l >= 1");
    std::vector<Jump> mapped;
    for (const auto& j : f.step_jumps()) mapped.push_back({frac(Rational(ell) * j.at), j.size});
    return StepFunction::from_jumps(f.slope(), std::move(mapped), f.name() + "^hat");
}

struct SeriesValue {
    double value;
    double tail_bound;
};

/// sum_{0<|r|<=R} |gamma_{r l}|^2 / r^2 with the tail bound 2 K^2 / R.
inline SeriesValue hat_norm_sq(const StepFunction& f, const BigInt& ell, long r_max) {
    if (ell < 1) throw DomainError("hat_norm_sq needs l >= 1");
    if (r_max < 1) throw DomainError("hat_norm_sq needs R >= 1");
    auto jumps = f.jumps();
    std::vector<detail::PhaseWalker> walkers;
    std::vector<double> phases(jumps.size());
    for (const auto& j : jumps) walkers.emplace_back(frac(Rational(ell) * j.at));
    double acc = 0;
    for (long r = 1; r <= r_max; ++r) {
        for (std::size_t k = 0; k < jumps.size(); ++k) phases[k] = walkers[k].next();
        double g = std::norm(detail::gamma_from_phases(jumps, phases));
        acc += 2 * g / (static_cast<double>(r) * static_cast<double>(r));
    }
    double kk = f.fourier_bound();
    return {acc, 2 * kk * kk / static_cast<double>(r_max)};
}

/// ||phi_hat_l||_2^2 exactly, by integrating the hat function piecewise.
inline Rational hat_norm_sq_exact(const StepFunction& f, const BigInt& ell) {
    return hat_observable(f, ell).l2_norm_sq();
}

}  // namespace lacuna
