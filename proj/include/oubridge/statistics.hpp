#pragma once

#include <cstddef>
#include <span>

namespace oubridge {

/// Streaming mean/variance with fourth central moment (Terriberry update),
/// enough for standard errors of both the mean and the variance.
class MomentAccumulator {
public:
    void add(double x) noexcept;
    void merge(const MomentAccumulator& other) noexcept;

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    /// Unbiased sample variance.
    double variance() const noexcept;
    double mean_std_error() const noexcept;
    /// Asymptotic standard error of the sample variance, sqrt((m4 - m2^2) / n).
    double variance_std_error() const noexcept;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double m3_ = 0.0;
    double m4_ = 0.0;
};

/// Monte Carlo mean of exp(log_weights) evaluated with a log-sum-exp shift.
struct ExpMeanSummary {
    double value = 0.0;
    double std_error = 0.0;
    double min_log_weight = 0.0;
    double max_log_weight = 0.0;
    /// (sum w)^2 / sum w^2
    double effective_sample_size = 0.0;
};

ExpMeanSummary exp_mean(std::span<const double> log_weights);

}  // namespace oubridge
