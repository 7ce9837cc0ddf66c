#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace ipdb {

/// Natural logarithm of a probability; -infinity encodes probability zero.
class LogProbability {
  public:
    LogProbability() = default;
    explicit LogProbability(double value);

    static LogProbability zero() { return LogProbability(-std::numeric_limits<double>::infinity()); }

    double value() const noexcept { return value_; }
    double probability() const { return std::exp(value_); }
    bool is_zero() const noexcept { return std::isinf(value_); }

  private:
    double value_ = 0.0;
};

/// Closed enclosure [lo, hi] of a probability.
struct ProbabilityInterval {
    double lo = 0.0;
    double hi = 0.0;

    static ProbabilityInterval point(double p) { return {p, p}; }

    double width() const noexcept { return hi - lo; }
    double midpoint() const noexcept { return 0.5 * (lo + hi); }
    bool is_point() const noexcept { return lo == hi; }
    bool contains(double x, double slack = 0.0) const noexcept
    {
        return lo - slack <= x && x <= hi + slack;
    }
};

ProbabilityInterval scaled(const ProbabilityInterval& iv, double factor);

/// Neumaier's compensated summation.
class CompensatedSum {
  public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + compensation_; }

  private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

/// log of prod(1 - p) using log1p, summed in a fixed (sorted) order with
/// compensation so that the result does not depend on the input order.
/// Throws InvalidArgument for p outside [0, 1].
LogProbability log_product_one_minus(std::span<const double> ps);

/// exp(-(3/2) * tail_sum): a lower bound on prod(1 - p_i) for any sequence
/// with every p_i <= 1/2 and sum p_i <= tail_sum.
double euler_tail_lower_bound(double tail_sum);

/// Encloses prod_head(1 - p) * prod_tail(1 - p) for every tail whose mass is
/// at most tail_sum_bound and whose members are at most tail_max_p (which
/// must be <= 1/2 whenever the tail bound is positive).
ProbabilityInterval product_one_minus_enclosure(std::span<const double> head, double tail_sum_bound,
                                                double tail_max_p);

struct SubsetExpansion {
    double lhs = 0.0; // prod (1 + a_i)
    double rhs = 0.0; // sum over all subsets J of prod_{i in J} a_i
};

/// Both sides of the subset expansion of a finite product (length <= 20).
SubsetExpansion subset_expansion_check(std::span<const double> a);

} // namespace ipdb
