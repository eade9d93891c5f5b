#include "grb/activation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace grb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw InvalidInputError(std::string("activation: non-finite ") + what);
    }
}

}  // namespace

Activation::Activation(ActivationKind kind, double clamp_margin)
    : kind_(kind), clamp_margin_(clamp_margin) {
    if (!(clamp_margin > 0.0)) {
        throw InvalidInputError("activation: clamp margin must be positive");
    }
    switch (kind) {
        case ActivationKind::tanh:
            name_ = "tanh";
            range_lo_ = -1.0;
            range_hi_ = 1.0;
            safe_lo_ = -0.4;
            safe_hi_ = 0.4;
            break;
        case ActivationKind::sigmoid:
            name_ = "sigmoid";
            range_lo_ = 0.0;
            range_hi_ = 1.0;
            safe_lo_ = -0.4;
            safe_hi_ = 0.4;
            break;
        case ActivationKind::arctan:
            name_ = "arctan";
            range_lo_ = -M_PI / 2.0;
            range_hi_ = M_PI / 2.0;
            safe_lo_ = -0.4;
            safe_hi_ = 0.4;
            break;
        case ActivationKind::softplus:
            name_ = "softplus";
            range_lo_ = 0.0;
            range_hi_ = kInf;
            safe_lo_ = 0.1;
            safe_hi_ = 0.9;
            break;
        case ActivationKind::exp:
            name_ = "exp";
            range_lo_ = 0.0;
            range_hi_ = kInf;
            safe_lo_ = 0.1;
            safe_hi_ = 0.9;
            break;
        case ActivationKind::quadratic:
            name_ = "quadratic";
            range_lo_ = 0.0;
            range_hi_ = kInf;
            safe_lo_ = 0.1;
            safe_hi_ = 0.9;
            break;
    }
}

Activation Activation::from_name(std::string_view name) {
    if (name == "tanh") return Activation(ActivationKind::tanh);
    if (name == "sigmoid") return Activation(ActivationKind::sigmoid);
    if (name == "arctan") return Activation(ActivationKind::arctan);
    if (name == "softplus") return Activation(ActivationKind::softplus);
    if (name == "exp") return Activation(ActivationKind::exp);
    if (name == "quadratic") return Activation(ActivationKind::quadratic);
    throw InvalidInputError("unknown activation name: " + std::string(name));
}

double Activation::eval(double x) const {
    require_finite(x, "input to eval");
    switch (kind_) {
        case ActivationKind::tanh: return std::tanh(x);
        case ActivationKind::sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case ActivationKind::arctan: return std::atan(x);
        case ActivationKind::softplus:
            // ln(1+e^x) without overflow for large x.
            return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
        case ActivationKind::exp: return std::exp(x);
        case ActivationKind::quadratic: return x * x;
    }
    return 0.0;
}

double Activation::deriv1(double x) const {
    require_finite(x, "input to deriv1");
    switch (kind_) {
        case ActivationKind::tanh: {
            const double s = std::tanh(x);
            return 1.0 - s * s;
        }
        case ActivationKind::sigmoid: {
            const double s = eval(x);
            return s * (1.0 - s);
        }
        case ActivationKind::arctan: return 1.0 / (1.0 + x * x);
        case ActivationKind::softplus: return 1.0 / (1.0 + std::exp(-x));
        case ActivationKind::exp: return std::exp(x);
        case ActivationKind::quadratic: return 2.0 * x;
    }
    return 0.0;
}

double Activation::deriv2(double x) const {
    require_finite(x, "input to deriv2");
    switch (kind_) {
        case ActivationKind::tanh: {
            const double s = std::tanh(x);
            return 2.0 * s * (s * s - 1.0);
        }
        case ActivationKind::sigmoid: {
            const double s = eval(x);
            return s * (1.0 - s) * (1.0 - 2.0 * s);
        }
        case ActivationKind::arctan: {
            const double d = 1.0 + x * x;
            return -2.0 * x / (d * d);
        }
        case ActivationKind::softplus: {
            // e^x / (1+e^x)^2 = sigmoid'(x)
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 - s);
        }
        case ActivationKind::exp: return std::exp(x);
        case ActivationKind::quadratic: return 2.0;
    }
    return 0.0;
}

double Activation::inverse(double y) const {
    require_finite(y, "input to inverse");
    const bool admissible = (kind_ == ActivationKind::quadratic)
                                ? (y >= 0.0)
                                : (y > range_lo_ && y < range_hi_);
    if (!admissible) {
        throw OutOfRangeError("activation " + name_ + ": value outside range of sigma", y);
    }
    switch (kind_) {
        case ActivationKind::tanh: return std::atanh(y);
        case ActivationKind::sigmoid: return std::log(y / (1.0 - y));
        case ActivationKind::arctan: return std::tan(y);
        case ActivationKind::softplus:
            // ln(e^y - 1); for large y use y + ln(1 - e^-y) to avoid overflow.
            return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y));
        case ActivationKind::exp: return std::log(y);
        case ActivationKind::quadratic: return std::sqrt(y);
    }
    return 0.0;
}

double Activation::clamp_to_range(double y) const {
    require_finite(y, "input to clamp_to_range");
    const bool finite_width = std::isfinite(range_lo_) && std::isfinite(range_hi_);
    const double w = finite_width ? (range_hi_ - range_lo_) : std::max(1.0, std::abs(y));
    const double lo = std::isfinite(range_lo_) ? range_lo_ + clamp_margin_ * w : -kInf;
    const double hi = std::isfinite(range_hi_) ? range_hi_ - clamp_margin_ * w : kInf;
    return std::min(std::max(y, lo), hi);
}

}  // namespace grb
