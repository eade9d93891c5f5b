#pragma once

#include <string>
#include <string_view>

#include "grb/errors.hpp"

namespace grb {

enum class ActivationKind { tanh, sigmoid, arctan, softplus, exp, quadratic };

// Scalar nonlinearity sigma with first/second derivatives and inverse,
// plus the metadata needed to keep generated snapshots invertible:
// the open range of sigma, a recommended input box for pre-scaled
// snapshot values, and a clamp margin for values that stray out of range.
class Activation {
public:
    explicit Activation(ActivationKind kind, double clamp_margin = 1e-8);

    static Activation from_name(std::string_view name);

    ActivationKind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }

    // Range of sigma; endpoints are open (may be +-inf).
    double range_lo() const noexcept { return range_lo_; }
    double range_hi() const noexcept { return range_hi_; }

    // Recommended box for normalized snapshot values.
    double safe_input_lo() const noexcept { return safe_lo_; }
    double safe_input_hi() const noexcept { return safe_hi_; }

    double clamp_margin() const noexcept { return clamp_margin_; }

    double eval(double x) const;
    double deriv1(double x) const;
    double deriv2(double x) const;

    // Throws OutOfRangeError if y is not strictly inside (range_lo, range_hi);
    // quadratic accepts y >= 0 and returns the nonnegative root.
    double inverse(double y) const;

    // Clips y into the interior of the range; idempotent, never throws.
    double clamp_to_range(double y) const;

private:
    ActivationKind kind_;
    std::string name_;
    double range_lo_, range_hi_;
    double safe_lo_, safe_hi_;
    double clamp_margin_;
};

}  // namespace grb
