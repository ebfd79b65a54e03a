#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "gwp/errors.hpp"

namespace gwp {

// Scalar function of time used for forces and Hamiltonian coefficients.
class TimeFunction {
public:
    struct Constant {
        double value = 0.0;
    };
    // amplitude * cos(omega t + phase) + offset
    struct Sinusoid {
        double amplitude = 0.0, omega = 0.0, phase = 0.0, offset = 0.0;
    };
    // Piecewise linear through (t_k, v_k), held constant outside the table.
    struct Tabulated {
        std::vector<double> t, v;
    };
    struct Custom {
        std::function<double(double)> fn;
    };

    TimeFunction() : rep_(Constant{0.0}) {}
    TimeFunction(Constant c) : rep_(c) {}
    TimeFunction(Sinusoid s) : rep_(s) {}
    TimeFunction(Tabulated tab) : rep_(std::move(tab)) {
        auto& tb = std::get<Tabulated>(rep_);
        if (tb.t.size() != tb.v.size() || tb.t.empty())
            throw DomainError("tabulated series needs matching non-empty t and v");
        for (std::size_t k = 1; k < tb.t.size(); ++k)
            if (!(tb.t[k] > tb.t[k - 1])) throw DomainError("tabulated times must increase strictly");
        for (double x : tb.v)
            if (!std::isfinite(x)) throw DomainError("tabulated values must be finite");
    }
    TimeFunction(Custom c) : rep_(std::move(c)) {}

    static TimeFunction constant(double v) { return Constant{v}; }
    static TimeFunction sinusoid(double amp, double omega, double phase, double offset = 0.0) {
        return Sinusoid{amp, omega, phase, offset};
    }
    static TimeFunction custom(std::function<double(double)> f) { return Custom{std::move(f)}; }

    double operator()(double t) const {
        t += shift_;
        return std::visit(
            [t](const auto& r) -> double {
                using R = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<R, Constant>) {
                    return r.value;
                } else if constexpr (std::is_same_v<R, Sinusoid>) {
                    return r.amplitude * std::cos(r.omega * t + r.phase) + r.offset;
                } else if constexpr (std::is_same_v<R, Tabulated>) {
                    if (t <= r.t.front()) return r.v.front();
                    if (t >= r.t.back()) return r.v.back();
                    auto it = std::upper_bound(r.t.begin(), r.t.end(), t);
                    std::size_t k = static_cast<std::size_t>(it - r.t.begin());
                    double w = (t - r.t[k - 1]) / (r.t[k] - r.t[k - 1]);
                    return (1.0 - w) * r.v[k - 1] + w * r.v[k];
                } else {
                    return r.fn(t);
                }
            },
            rep_);
    }

    // Same function read from time t0 onward: g(t) = f(t + t0).
    TimeFunction shifted(double t0) const {
        TimeFunction out = *this;
        out.shift_ += t0;
        return out;
    }
    TimeFunction scaled(double k) const {
        TimeFunction src = *this;
        return custom([src, k](double t) { return k * src(t); });
    }

    bool is_zero() const {
        if (auto c = std::get_if<Constant>(&rep_)) return c->value == 0.0;
        if (auto s = std::get_if<Sinusoid>(&rep_)) return s->amplitude == 0.0 && s->offset == 0.0;
        return false;
    }
    bool is_constant() const { return std::holds_alternative<Constant>(rep_); }
    const auto& representation() const { return rep_; }
    double shift() const { return shift_; }

private:
    std::variant<Constant, Sinusoid, Tabulated, Custom> rep_;
    double shift_ = 0.0;
};

struct ForceSpec {
    TimeFunction f;
    double tolerance = 1e-10;        // Q_a, Q_b
    double phase_tolerance = 1e-9;   // double integral for the phase

    static ForceSpec zero() { return {}; }
    static ForceSpec constant(double f0) { return {TimeFunction::constant(f0)}; }
    static ForceSpec sinusoid(double f0, double omega_d, double phi_d) {
        return {TimeFunction::sinusoid(f0, omega_d, phi_d)};
    }
    ForceSpec shifted(double t0) const { return {f.shifted(t0), tolerance, phase_tolerance}; }
    double operator()(double t) const { return f(t); }
};

}  // namespace gwp
