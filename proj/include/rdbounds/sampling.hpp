#pragma once

#include <cstddef>
#include <vector>

#include "rdbounds/fe.hpp"
#include "rdbounds/problem.hpp"
#include "rdbounds/quadrature.hpp"

namespace rdbounds {

/// Robin endpoint data per time slice.
struct BoundarySamples {
    Side side;
    double x;
    double normal;
    std::vector<double> sigma;
    std::vector<double> g;
};

/// Problem data at the points of a space-time quadrature.
struct DataSamples {
    std::vector<double> A, lambda, f;  // per point
    std::vector<double> phi;           // per space point
    std::vector<BoundarySamples> robin;
};

/// Values of a primal field at the quadrature points. `boundary[k]` follows
/// DataSamples::robin[k] and holds one value per slice.
struct PrimalSamples {
    std::vector<double> value, dx, dt;
    std::vector<double> initial, terminal;
    std::vector<std::vector<double>> boundary;
};

struct FluxSamples {
    std::vector<double> value, dx;
    std::vector<std::vector<double>> boundary;
};

/// Quadrature plus sampled problem data; the common input of every estimate.
class EstimateContext {
public:
    EstimateContext(const ProblemCase& problem, const SpaceTimeMesh& mesh,
                    const QuadratureRule& rule = QuadratureRule::gauss_legendre(5));

    const ProblemCase& problem() const { return *problem_; }
    const Domain& domain() const { return problem_->domain(); }
    const SpaceTimeQuadrature& quad() const { return quad_; }
    const SpaceTimeMesh& mesh() const { return quad_.mesh(); }
    const DataSamples& data() const { return data_; }

    /// Fields must live on a mesh that this quadrature mesh refines.
    PrimalSamples sample(const NodalField& field) const;
    FluxSamples sample(const FluxFunction& y) const;
    PrimalSamples sample_exact() const;
    FluxSamples sample_exact_flux() const;

private:
    const ProblemCase* problem_;
    SpaceTimeQuadrature quad_;
    DataSamples data_;
};

}  // namespace rdbounds
