#include "cavjt/hermite.hpp"

#include <cmath>

#include "cavjt/model.hpp"

namespace cavjt {

namespace {

constexpr double kRescale = 1e150;

void fill(int count, double x, double* out, std::ptrdiff_t stride) {
    if (count <= 0) return;
    double log_scale = -0.5 * x * x;
    double prev = std::pow(kPi, -0.25);
    out[0] = prev * std::exp(log_scale);
    if (count == 1) return;
    double cur = std::sqrt(2.0) * x * prev;
    out[stride] = cur * std::exp(log_scale);
    for (int n = 1; n + 1 < count; ++n) {
        double next = std::sqrt(2.0 / (n + 1)) * x * cur - std::sqrt(static_cast<double>(n) / (n + 1)) * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > kRescale) {
            prev /= kRescale;
            cur /= kRescale;
            log_scale += std::log(kRescale);
        }
        out[(n + 1) * stride] = cur * std::exp(log_scale);
    }
}

} // namespace

std::vector<double> hermite_functions(int count, double x) {
    std::vector<double> out(count > 0 ? count : 0);
    fill(count, x, out.data(), 1);
    return out;
}

Eigen::MatrixXd hermite_table(int count, std::span<const double> xs) {
    Eigen::MatrixXd table(count, static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) fill(count, xs[i], table.col(static_cast<Eigen::Index>(i)).data(), 1);
    return table;
}

} // namespace cavjt
