#include "rdbounds/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rdbounds/errors.hpp"

namespace rdbounds {

QuadratureRule QuadratureRule::gauss_legendre(std::size_t n) {
    if (n == 0) throw InputError("quadrature needs at least one point");
    QuadratureRule rule;
    rule.points_.resize(n);
    rule.weights_.resize(n);
    // Newton iteration on P_n from the Chebyshev-like initial guess; nodes on [-1, 1].
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.points_[i] = 0.5 * (1.0 - z);
        rule.points_[n - 1 - i] = 0.5 * (1.0 + z);
        rule.weights_[i] = 0.5 * w;
        rule.weights_[n - 1 - i] = 0.5 * w;
    }
    if (n % 2 == 1) rule.points_[n / 2] = 0.5;
    return rule;
}

SpaceTimeQuadrature::SpaceTimeQuadrature(const SpaceTimeMesh& mesh, const QuadratureRule& rule)
    : mesh_(mesh), rule_(rule) {
    const auto xs = mesh.x_nodes();
    const auto ts = mesh.t_nodes();
    space_.reserve(mesh.nx() * rule.size());
    for (std::size_t i = 0; i < mesh.nx(); ++i) {
        const double h = mesh.hx(i);
        for (std::size_t q = 0; q < rule.size(); ++q)
            space_.push_back({xs[i] + h * rule.points()[q], h * rule.weights()[q], i, rule.points()[q]});
    }
    slices_.reserve(mesh.nt() * rule.size());
    for (std::size_t n = 0; n < mesh.nt(); ++n) {
        const double h = mesh.ht(n);
        for (std::size_t q = 0; q < rule.size(); ++q)
            slices_.push_back({ts[n] + h * rule.points()[q], h * rule.weights()[q], n, rule.points()[q]});
    }
}

double SpaceTimeQuadrature::integrate(std::span<const double> values) const {
    double sum = 0.0;
    for (std::size_t s = 0; s < slices_.size(); ++s) sum += slices_[s].weight * integrate_slice(s, values);
    return sum;
}

double SpaceTimeQuadrature::integrate_slice(std::size_t slice, std::span<const double> values) const {
    double sum = 0.0;
    const std::size_t base = slice * space_.size();
    for (std::size_t p = 0; p < space_.size(); ++p) sum += space_[p].weight * values[base + p];
    return sum;
}

std::vector<double> SpaceTimeQuadrature::integrate_per_time_cell(std::span<const double> values) const {
    std::vector<double> out(mesh_.nt(), 0.0);
    for (std::size_t s = 0; s < slices_.size(); ++s)
        out[slices_[s].cell] += slices_[s].weight * integrate_slice(s, values);
    return out;
}

std::vector<double> SpaceTimeQuadrature::integrate_slices_per_time_cell(std::span<const double> per_slice) const {
    std::vector<double> out(mesh_.nt(), 0.0);
    for (std::size_t s = 0; s < slices_.size(); ++s) out[slices_[s].cell] += slices_[s].weight * per_slice[s];
    return out;
}

namespace {

void check_finite(double v, const std::string& where) {
    if (!std::isfinite(v)) throw NumericalError("non-finite integrand in " + where);
}

}  // namespace

double integrate_spacetime(const std::function<double(double, double)>& field, const SpaceTimeMesh& mesh,
                           const QuadratureRule& rule) {
    double total = 0.0;
    const auto xs = mesh.x_nodes();
    const auto ts = mesh.t_nodes();
    for (std::size_t n = 0; n < mesh.nt(); ++n) {
        for (std::size_t i = 0; i < mesh.nx(); ++i) {
            double cell = 0.0;
            for (std::size_t a = 0; a < rule.size(); ++a) {
                const double t = ts[n] + mesh.ht(n) * rule.points()[a];
                for (std::size_t b = 0; b < rule.size(); ++b) {
                    const double x = xs[i] + mesh.hx(i) * rule.points()[b];
                    const double v = field(x, t);
                    check_finite(v, "space-time cell (" + std::to_string(i) + ", " + std::to_string(n) + ")");
                    cell += rule.weights()[a] * rule.weights()[b] * v;
                }
            }
            total += cell * mesh.hx(i) * mesh.ht(n);
        }
    }
    return total;
}

double integrate_space(const std::function<double(double)>& field, const SpaceTimeMesh& mesh,
                       const QuadratureRule& rule) {
    double total = 0.0;
    const auto xs = mesh.x_nodes();
    for (std::size_t i = 0; i < mesh.nx(); ++i) {
        double cell = 0.0;
        for (std::size_t b = 0; b < rule.size(); ++b) {
            const double v = field(xs[i] + mesh.hx(i) * rule.points()[b]);
            check_finite(v, "space cell " + std::to_string(i));
            cell += rule.weights()[b] * v;
        }
        total += cell * mesh.hx(i);
    }
    return total;
}

double integrate_time(const std::function<double(double)>& field, const SpaceTimeMesh& mesh,
                      const QuadratureRule& rule) {
    double total = 0.0;
    const auto ts = mesh.t_nodes();
    for (std::size_t n = 0; n < mesh.nt(); ++n) {
        double cell = 0.0;
        for (std::size_t a = 0; a < rule.size(); ++a) {
            const double v = field(ts[n] + mesh.ht(n) * rule.points()[a]);
            check_finite(v, "time cell " + std::to_string(n));
            cell += rule.weights()[a] * v;
        }
        total += cell * mesh.ht(n);
    }
    return total;
}

}  // namespace rdbounds
