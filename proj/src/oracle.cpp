#include "oubridge/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "oubridge/errors.hpp"

namespace oubridge {

double MeshDensity::operator()(double xi) const noexcept {
    if (nodes.empty() || xi < nodes.front() || xi > nodes.back()) return 0.0;
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), xi);
    if (it == nodes.end()) return values.back();
    const std::size_t i = static_cast<std::size_t>(it - nodes.begin());
    const double w = (xi - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
    return (1.0 - w) * values[i - 1] + w * values[i];
}

double MeshDensity::integrate(double a, double b) const {
    if (b < a) return -integrate(b, a);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double lo = std::max(a, nodes[i]);
        const double hi = std::min(b, nodes[i + 1]);
        if (hi <= lo) continue;
        total += 0.5 * ((*this)(lo) + (*this)(hi)) * (hi - lo);
    }
    return total;
}

std::pair<double, double> MeshDensity::central_interval(double fraction) const {
    if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("fraction must be in (0, 1)");
    std::vector<double> cdf(nodes.size(), 0.0);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        cdf[i] = cdf[i - 1] + 0.5 * (values[i] + values[i - 1]) * (nodes[i] - nodes[i - 1]);
    }
    const auto quantile = [&](double level) {
        const double target = level * cdf.back();
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
        if (it == cdf.begin()) return nodes.front();
        if (it == cdf.end()) return nodes.back();
        const std::size_t i = static_cast<std::size_t>(it - cdf.begin());
        const double w = (target - cdf[i - 1]) / (cdf[i] - cdf[i - 1]);
        return nodes[i - 1] + w * (nodes[i] - nodes[i - 1]);
    };
    return {quantile(0.5 * (1.0 - fraction)), quantile(0.5 * (1.0 + fraction))};
}

namespace {

/// Solves a tridiagonal system in place (Thomas algorithm); rhs becomes the solution.
void solve_tridiagonal(const std::vector<double>& lower, const std::vector<double>& diag,
                       const std::vector<double>& upper, std::vector<double>& rhs,
                       std::vector<double>& scratch) {
    const std::size_t n = diag.size();
    scratch.resize(n);
    double denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = i + 1 < n ? upper[i] / denom : 0.0;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

MeshDensity fokker_planck_1d(double alpha, double lambda, const std::function<double(double)>& g,
                             double x0, double T, FokkerPlanckOptions options) {
    if (!(alpha >= 0.0) || !(lambda > 0.0) || !(T > 0.0)) {
        throw std::invalid_argument("Fokker-Planck solve needs alpha >= 0, lambda > 0, T > 0");
    }
    if (options.cells < 16 || options.steps < 4) {
        throw std::invalid_argument("Fokker-Planck mesh too coarse");
    }
    const double sd = alpha > 0.0 ? std::sqrt(lambda / (2.0 * alpha)) : std::sqrt(lambda * T);
    const double L = std::abs(x0) + options.width_sd * sd;
    const std::size_t N = options.cells;
    const double h = 2.0 * L / static_cast<double>(N);
    const double D = 0.5 * lambda;
    const double sqrt_lambda = std::sqrt(lambda);

    // Face f sits between cells f and f + 1; flux F_f = a_f p_f + b_f p_{f+1}.
    std::vector<double> lower(N, 0.0), diag(N, 0.0), upper(N, 0.0);
    for (std::size_t f = 0; f + 1 < N; ++f) {
        const double xi = -L + static_cast<double>(f + 1) * h;
        const double v = -alpha * xi + sqrt_lambda * g(xi);
        if (std::abs(v) * h / D >= 2.0) {
            std::ostringstream msg;
            msg << "Fokker-Planck mesh too coarse: cell Peclet number " << std::abs(v) * h / D
                << " at xi = " << xi;
            throw NumericalError(msg.str());
        }
        const double a = 0.5 * v + D / h;
        const double b = 0.5 * v - D / h;
        diag[f] -= a / h;
        upper[f] -= b / h;
        lower[f + 1] += a / h;
        diag[f + 1] += b / h;
    }

    const double t0 = 16.0 * h * h / lambda;
    if (!(t0 < 0.1 * T)) {
        throw NumericalError("Fokker-Planck mesh too coarse for the horizon: start-up time " +
                             std::to_string(t0) + " is not small against T");
    }
    const double mu0 = x0 + (-alpha * x0 + sqrt_lambda * g(x0)) * t0;
    const double sigma0 = std::sqrt(lambda * t0);
    std::vector<double> p(N);
    double total = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double left = -L + static_cast<double>(i) * h;
        p[i] = (normal_cdf((left + h - mu0) / sigma0) - normal_cdf((left - mu0) / sigma0)) / h;
        total += p[i] * h;
    }
    for (double& v : p) v /= total;

    const double dt = (T - t0) / static_cast<double>(options.steps);
    std::vector<double> lo(N), di(N), up(N), rhs(N), scratch;
    const auto implicit_step = [&](double step, double theta) {
        // (I - theta step A) p' = (I + (1 - theta) step A) p
        for (std::size_t i = 0; i < N; ++i) {
            double r = p[i];
            if (theta < 1.0) {
                double ap = diag[i] * p[i];
                if (i > 0) ap += lower[i] * p[i - 1];
                if (i + 1 < N) ap += upper[i] * p[i + 1];
                r += (1.0 - theta) * step * ap;
            }
            rhs[i] = r;
            lo[i] = -theta * step * lower[i];
            di[i] = 1.0 - theta * step * diag[i];
            up[i] = -theta * step * upper[i];
        }
        solve_tridiagonal(lo, di, up, rhs, scratch);
        p.swap(rhs);
    };
    for (int i = 0; i < 4; ++i) implicit_step(0.5 * dt, 1.0);
    for (std::size_t k = 2; k < options.steps; ++k) implicit_step(dt, 0.5);

    MeshDensity out;
    out.nodes.resize(N);
    out.values.resize(N);
    double peak = 0.0;
    for (double v : p) peak = std::max(peak, std::abs(v));
    for (std::size_t i = 0; i < N; ++i) {
        out.nodes[i] = -L + (static_cast<double>(i) + 0.5) * h;
        if (p[i] < -1e-10 * peak) {
            throw NumericalError("Fokker-Planck solution lost positivity at xi = " +
                                 std::to_string(out.nodes[i]));
        }
        out.values[i] = std::max(p[i], 0.0);
    }
    double edge_mass = 0.0;
    for (std::size_t i = 0; i < 5; ++i) edge_mass += (out.values[i] + out.values[N - 1 - i]) * h;
    if (edge_mass > 1e-8) {
        throw NumericalError("Fokker-Planck mesh too narrow: mass " + std::to_string(edge_mass) +
                             " at the walls");
    }
    for (std::size_t i = 1; i < N; ++i) out.mass += 0.5 * (out.values[i] + out.values[i - 1]) * h;
    return out;
}

HistogramDensity mc_histogram_density(std::span<const double> samples, std::size_t bins,
                                      double lo, double hi) {
    if (bins == 0 || !(hi > lo)) throw std::invalid_argument("histogram needs bins > 0 and hi > lo");
    if (samples.empty()) throw std::invalid_argument("histogram of an empty sample");
    HistogramDensity out;
    out.n = samples.size();
    out.edges.resize(bins + 1);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) out.edges[i] = lo + width * static_cast<double>(i);
    out.counts.assign(bins, 0);
    for (double s : samples) {
        if (!(s >= lo && s < hi)) continue;
        const auto i = std::min(static_cast<std::size_t>((s - lo) / width), bins - 1);
        ++out.counts[i];
    }
    const double n = static_cast<double>(out.n);
    out.density.resize(bins);
    out.std_error.resize(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        const double c = static_cast<double>(out.counts[i]);
        out.density[i] = c / (n * width);
        out.std_error[i] = std::sqrt(c * (1.0 - c / n)) / (n * width);
    }
    return out;
}

HistogramDensity mc_histogram_density(const std::function<double(std::size_t)>& sampler,
                                      std::size_t n, std::size_t bins, double lo, double hi) {
    if (n < 10000) throw std::invalid_argument("histogram density needs at least 10^4 samples");
    std::vector<double> samples(n);
    for (std::size_t i = 0; i < n; ++i) samples[i] = sampler(i);
    return mc_histogram_density(samples, bins, lo, hi);
}

ChiSquareResult chi_square_test(const HistogramDensity& histogram, const MeshDensity& reference,
                                double min_expected) {
    const double n = static_cast<double>(histogram.n);
    std::vector<double> observed, expected;
    double o = 0.0, e = 0.0;
    for (std::size_t i = 0; i < histogram.bins(); ++i) {
        o += static_cast<double>(histogram.counts[i]);
        e += n * reference.integrate(histogram.edges[i], histogram.edges[i + 1]);
        if (e >= min_expected) {
            observed.push_back(o);
            expected.push_back(e);
            o = e = 0.0;
        }
    }
    if (e > 0.0 || o > 0.0) {
        if (expected.empty()) {
            observed.push_back(o);
            expected.push_back(e);
        } else {
            observed.back() += o;
            expected.back() += e;
        }
    }
    ChiSquareResult out;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] > 0.0) {
            out.statistic += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
        }
    }
    out.dof = observed.size() > 1 ? observed.size() - 1 : 1;
    const boost::math::chi_squared dist(static_cast<double>(out.dof));
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
    return out;
}

ScalarMoments scalar_bridge_moments(double alpha, double lambda, double x, double y, double T,
                                    double t) {
    if (!(T > 0.0) || !(t >= 0.0) || !(t <= T)) {
        throw std::invalid_argument("scalar bridge moments need 0 <= t <= T, T > 0");
    }
    if (t == T) return {y, 0.0};
    // Var Z_u = lambda int_0^u e^{-2 alpha (u - r)} dr; Cov(Z_t, Z_T) = e^{-alpha (T - t)} Var Z_t.
    const auto var = [&](double u) {
        const double a = 2.0 * alpha * u;
        return a > 1e-12 ? -lambda * std::expm1(-a) / (2.0 * alpha) : lambda * u * (1.0 - 0.5 * a);
    };
    const double var_t = var(t);
    const double var_T = var(T);
    const double cov = std::exp(-alpha * (T - t)) * var_t;
    const double mean_t = std::exp(-alpha * t) * x;
    const double mean_T = std::exp(-alpha * T) * x;
    return {mean_t + cov / var_T * (y - mean_T), var_t - cov * cov / var_T};
}

void write_mesh_csv(const MeshDensity& mesh, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << "xi,p\n" << std::setprecision(17);
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        out << mesh.nodes[i] << ',' << mesh.values[i] << '\n';
    }
}

}  // namespace oubridge
