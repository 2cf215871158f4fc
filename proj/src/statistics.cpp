#include "oubridge/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oubridge {

void MomentAccumulator::add(double x) noexcept {
    const double n1 = static_cast<double>(n_);
    ++n_;
    const double n = static_cast<double>(n_);
    const double delta = x - mean_;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean_ += delta_n;
    m4_ += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2_ - 4.0 * delta_n * m3_;
    m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
    m2_ += term1;
}

void MomentAccumulator::merge(const MomentAccumulator& other) noexcept {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    const double delta = other.mean_ - mean_;
    const double d2 = delta * delta;
    const double d3 = d2 * delta;
    const double d4 = d2 * d2;
    const double m2 = m2_ + other.m2_ + d2 * na * nb / n;
    const double m3 = m3_ + other.m3_ + d3 * na * nb * (na - nb) / (n * n) +
                      3.0 * delta * (na * other.m2_ - nb * m2_) / n;
    const double m4 = m4_ + other.m4_ + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                      6.0 * d2 * (na * na * other.m2_ + nb * nb * m2_) / (n * n) +
                      4.0 * delta * (na * other.m3_ - nb * m3_) / n;
    n_ += other.n_;
    mean_ += delta * nb / n;
    m2_ = m2;
    m3_ = m3;
    m4_ = m4;
}

double MomentAccumulator::variance() const noexcept {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double MomentAccumulator::mean_std_error() const noexcept {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

double MomentAccumulator::variance_std_error() const noexcept {
    if (n_ < 2) return 0.0;
    const double n = static_cast<double>(n_);
    const double central2 = m2_ / n;
    const double central4 = m4_ / n;
    return std::sqrt(std::max(central4 - central2 * central2, 0.0) / n);
}

ExpMeanSummary exp_mean(std::span<const double> log_weights) {
    if (log_weights.empty()) throw std::invalid_argument("exp_mean of an empty sample");
    ExpMeanSummary out;
    out.min_log_weight = *std::min_element(log_weights.begin(), log_weights.end());
    out.max_log_weight = *std::max_element(log_weights.begin(), log_weights.end());
    const double shift = out.max_log_weight;
    if (!std::isfinite(shift)) {
        out.value = std::numeric_limits<double>::quiet_NaN();
        out.std_error = out.value;
        return out;
    }
    const double n = static_cast<double>(log_weights.size());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double lw : log_weights) {
        const double w = std::exp(lw - shift);
        sum += w;
        sum_sq += w * w;
    }
    const double mean = sum / n;
    const double var = log_weights.size() > 1
                           ? std::max(sum_sq - n * mean * mean, 0.0) / (n - 1.0)
                           : 0.0;
    const double scale = std::exp(shift);
    out.value = scale * mean;
    out.std_error = scale * std::sqrt(var / n);
    out.effective_sample_size = sum * sum / sum_sq;
    return out;
}

}  // namespace oubridge
