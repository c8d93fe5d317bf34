#include "cavjt/berry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cavjt/errors.hpp"
#include "cavjt/parallel.hpp"

namespace cavjt {

AdiabaticAngles adiabatic_angles(const ModelParams& p, double rho, double varphi,
                                 std::optional<double> previous_mu) {
    const double cv = std::cos(varphi);
    const double sv = std::sin(varphi);
    const double factor = std::max(0.0, 1.0 + std::sin(2.0 * varphi) * std::cos(p.phi() - p.theta()));

    AdiabaticAngles a;
    if (p.omega_q() == 0.0) {
        a.nu = kPi / 4;
    } else {
        a.nu = 0.5 * std::atan2(4.0 * p.lambda() * rho * std::sqrt(factor), p.omega_q());
    }
    a.mu = std::atan2(cv * std::sin(p.phi()) + sv * std::sin(p.theta()),
                      cv * std::cos(p.phi()) + sv * std::cos(p.theta()));
    if (previous_mu) a.mu += kTwoPi * std::round((*previous_mu - a.mu) / kTwoPi);
    return a;
}

double wrap_phase(double gamma) {
    double r = std::remainder(gamma, kTwoPi);
    if (std::abs(r) < 1e-9) return 0.0;
    if (r > 0.0) r -= kTwoPi;
    return r;
}

namespace {

struct LoopSum {
    double value;
    double max_step;
};

bool is_node_flip(double dmu) { return std::abs(std::abs(dmu) - kPi) < 1e-6; }

// gamma = -sum_k [ cos^2(nu_k) dmu_k + df_k ] h, with dmu from a fourth-order
// central difference of the unwrapped samples and the periodic trapezoid rule.
//
// Where the coupling vector passes through zero (theta - phi = j pi), atan2 flips
// mu by pi; the flip is absorbed so that mu follows the smooth real eigenvector,
// and samples sitting on the node keep the previous mu.
LoopSum loop_sum(const ModelParams& p, double radius, int n, const std::function<double(double)>& gauge) {
    const double h = kTwoPi / n;
    // Samples k = -2 .. n+2, unwrapped continuously from k = -2.
    const int pad = 2;
    std::vector<double> mu(n + 2 * pad + 1);
    std::vector<double> c2(n + 2 * pad + 1);
    std::vector<double> f(n + 2 * pad + 1, 0.0);
    std::optional<double> prev;
    double max_step = 0.0;
    for (int k = -pad; k <= n + pad; ++k) {
        const double v = k * h;
        auto a = adiabatic_angles(p, radius, v, prev);
        const double coupling = std::abs(std::polar(1.0, p.phi()) * std::cos(v) + std::polar(1.0, p.theta()) * std::sin(v));
        if (prev) {
            if (coupling < 1e-12) a.mu = *prev;
            double step = a.mu - *prev;
            if (is_node_flip(step)) {
                a.mu -= std::copysign(kPi, step);
                step = a.mu - *prev;
            }
            max_step = std::max(max_step, std::abs(step));
        }
        const std::size_t idx = static_cast<std::size_t>(k + pad);
        mu[idx] = a.mu;
        const double c = std::cos(a.nu);
        c2[idx] = c * c;
        if (gauge) f[idx] = gauge(v);
        prev = a.mu;
    }

    auto d4 = [&](const std::vector<double>& s, std::size_t i) {
        return (-s[i + 2] + 8.0 * s[i + 1] - 8.0 * s[i - 1] + s[i - 2]) / 12.0;
    };
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const std::size_t i = static_cast<std::size_t>(k + pad);
        double term = c2[i] * d4(mu, i);
        if (gauge) term += d4(f, i);
        sum += term;
    }
    return {-sum, max_step};
}

} // namespace

double berry_phase_sum(const ModelParams& p, double radius, int n_samples, const std::function<double(double)>& gauge) {
    if (!(radius > 0.0)) throw std::invalid_argument("berry phase: radius must be > 0");
    if (n_samples < 8) throw std::invalid_argument("berry phase: too few samples");
    return loop_sum(p, radius, n_samples, gauge).value;
}

double berry_phase_numeric(const ModelParams& p, double radius, const BerryOptions& opt) {
    if (!(radius > 0.0)) throw std::invalid_argument("berry phase: radius must be > 0");
    if (opt.n_samples < 64) throw std::invalid_argument("berry phase: n_samples must be >= 64");

    int n = opt.n_samples;
    LoopSum previous = loop_sum(p, radius, n, opt.gauge);
    while (true) {
        const int n2 = 2 * n;
        const LoopSum next = loop_sum(p, radius, n2, opt.gauge);
        const double change = std::remainder(next.value - previous.value, kTwoPi);
        if (std::abs(change) < opt.tolerance && next.max_step < kPi / 2) return wrap_phase(next.value);
        if (n2 >= opt.max_samples) {
            std::ostringstream msg;
            msg << "berry phase did not converge at " << n2 << " samples (last " << next.value
                << ", previous " << previous.value << ")";
            throw ConvergenceError(msg.str(), next.value, previous.value);
        }
        previous = next;
        n = n2;
    }
}

double berry_phase_closed_form(const ModelParams& p, double radius) {
    if (!p.is_cylindrical())
        throw std::invalid_argument("closed-form berry phase needs |phi - theta| = (j + 1/2) pi");
    const double omega = p.omega_q();
    const double lam = p.lambda();
    const double s = std::sqrt(omega * omega + 16.0 * lam * lam * radius * radius);
    if (s == 0.0) return -kPi;
    // The loop winds mu backwards when theta = phi - pi/2, flipping the detuning term.
    const double winding = std::sin(p.theta() - p.phi()) > 0.0 ? 1.0 : -1.0;
    return -kPi * (1.0 + winding * omega / s);
}

PhaseMap phase_map(const ModelParams& base, const AxisRange& lambda_range, const AxisRange& theta_range,
                   const BerryOptions& opt, int threads) {
    if (lambda_range.count < 1 || theta_range.count < 1) throw std::invalid_argument("phase map: empty axis");
    PhaseMap map;
    map.lambda_axis.resize(lambda_range.count);
    map.theta_axis.resize(theta_range.count);
    for (int i = 0; i < lambda_range.count; ++i) map.lambda_axis[i] = lambda_range.at(i);
    for (int j = 0; j < theta_range.count; ++j) map.theta_axis[j] = theta_range.at(j);
    map.gamma.assign(map.lambda_axis.size() * map.theta_axis.size(), 0.0);

    std::vector<double> radius(map.lambda_axis.size());
    for (std::size_t i = 0; i < radius.size(); ++i) {
        const ModelParams cyl(map.lambda_axis[i], base.omega_q(), base.phi(), base.phi() + kPi / 2);
        radius[i] = surface_geometry(cyl).rho_min;
        if (!(radius[i] > 0.0)) {
            std::ostringstream msg;
            msg << "phase map: lambda = " << map.lambda_axis[i] << " has no sombrero ring (critical lambda "
                << surface_geometry(cyl).critical_lambda << ")";
            throw std::invalid_argument(msg.str());
        }
    }

    parallel_for(map.lambda_axis.size(), threads, [&](std::size_t i) {
        for (std::size_t j = 0; j < map.theta_axis.size(); ++j) {
            const ModelParams p(map.lambda_axis[i], base.omega_q(), base.phi(), map.theta_axis[j]);
            try {
                map.gamma[i * map.theta_axis.size() + j] = berry_phase_numeric(p, radius[i], opt);
            } catch (const ConvergenceError& e) {
                std::ostringstream msg;
                msg << e.what() << " at lambda = " << map.lambda_axis[i] << ", theta = " << map.theta_axis[j];
                throw ConvergenceError(msg.str(), e.last_estimate, e.previous_estimate);
            }
        }
    });
    return map;
}

} // namespace cavjt
