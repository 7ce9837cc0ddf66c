#include "ipdb/numerics.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "ipdb/errors.hpp"

namespace ipdb {

namespace {

void require_probability(double p)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "probability " + std::to_string(p) + " outside [0,1]");
}

} // namespace

LogProbability::LogProbability(double value) : value_(value)
{
    if (std::isnan(value) || value > 0.0)
        throw Error(ErrorKind::InvalidArgument, "log-probability must be <= 0");
}

ProbabilityInterval scaled(const ProbabilityInterval& iv, double factor)
{
    return {iv.lo * factor, iv.hi * factor};
}

void CompensatedSum::add(double x) noexcept
{
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
        compensation_ += (sum_ - t) + x;
    else
        compensation_ += (x - t) + sum_;
    sum_ = t;
}

LogProbability log_product_one_minus(std::span<const double> ps)
{
    std::vector<double> terms;
    terms.reserve(ps.size());
    for (double p : ps) {
        require_probability(p);
        if (p == 1.0)
            return LogProbability::zero();
        terms.push_back(std::log1p(-p));
    }
    std::sort(terms.begin(), terms.end());
    CompensatedSum sum;
    for (double t : terms)
        sum.add(t);
    return LogProbability(std::min(0.0, sum.value()));
}

double euler_tail_lower_bound(double tail_sum)
{
    if (!(tail_sum >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "tail sum must be non-negative");
    return std::exp(-1.5 * tail_sum);
}

ProbabilityInterval product_one_minus_enclosure(std::span<const double> head, double tail_sum_bound,
                                                double tail_max_p)
{
    if (!(tail_sum_bound >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "tail sum bound must be non-negative");
    if (tail_sum_bound > 0.0 && !(tail_max_p <= 0.5))
        throw Error(ErrorKind::InvalidArgument, "tail probabilities must be <= 1/2 for the tail bound");
    const LogProbability head_log = log_product_one_minus(head);
    if (head_log.is_zero())
        return {0.0, 0.0};
    const double hi = head_log.probability();
    if (tail_sum_bound == 0.0)
        return {hi, hi};
    return {std::exp(head_log.value() - 1.5 * tail_sum_bound), hi};
}

SubsetExpansion subset_expansion_check(std::span<const double> a)
{
    if (a.size() > 20)
        throw CapExceededError(a.size(), 20, "subset expansion limited to 20 terms");
    SubsetExpansion out{1.0, 0.0};
    for (double x : a)
        out.lhs *= 1.0 + x;
    const std::size_t n = a.size();
    CompensatedSum sum;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double term = 1.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i))
                term *= a[i];
        sum.add(term);
    }
    out.rhs = sum.value();
    return out;
}

} // namespace ipdb
