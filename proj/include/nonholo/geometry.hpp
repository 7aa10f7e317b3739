#pragma once
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nonholo/errors.hpp"

namespace nonholo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Rank-3 array of structure-coefficient size r x r x r.
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int r) : r_(r), v_(static_cast<size_t>(r) * r * r, 0.0) {}

    double& operator()(int i, int j, int k) { return v_[idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return v_[idx(i, j, k)]; }
    int dim() const { return r_; }

    double max_abs() const {
        double m = 0.0;
        for (double x : v_) m = std::max(m, std::abs(x));
        return m;
    }

private:
    size_t idx(int i, int j, int k) const {
        return (static_cast<size_t>(i) * r_ + j) * r_ + k;
    }
    int r_ = 0;
    std::vector<double> v_;
};

/// A vector field given by its coordinate coefficients. The jacobian
/// (d coeffs^i / d q^j) is optional; finite differences are used when absent.
struct VectorField {
    std::function<Vec(const Vec&)> coeffs;
    std::function<Mat(const Vec&)> jacobian; // may be empty
};

/// Riemannian metric as a coordinate coefficient matrix. `dg` returns the
/// partial derivative of the matrix with respect to q^i when available.
struct MetricField {
    std::function<Mat(const Vec&)> g;
    std::function<Mat(const Vec&, int)> dg; // may be empty
};

struct ChartDomain {
    std::function<bool(const Vec&)> contains; // empty means unrestricted
    bool ok(const Vec& q) const { return !contains || contains(q); }
};

/// A generator of a linear momentum function, expressed by its components in
/// the system frame: Z = coeffs_in_frame^alpha X_alpha.
struct GaugeGenerator {
    std::function<Vec(const Vec&)> coeffs_in_frame;
    std::function<Mat(const Vec&)> coeffs_jacobian; // optional
    bool tangent_to_orbit = false;
    std::string name;
};

/// Everything needed to pose the constrained mechanics problem on one chart.
struct MechanicalSystem {
    int n = 0; // chart dimension
    int r = 0; // rank of the constraint distribution
    std::string name;
    std::vector<std::string> coord_names;

    ChartDomain domain;
    MetricField metric;
    std::function<double(const Vec&)> potential;     // empty means V = 0
    std::function<Vec(const Vec&)> potential_grad;   // optional

    std::vector<VectorField> frame;       // r fields spanning D, gauge generators first
    std::vector<VectorField> complement;  // n-r fields spanning W; empty -> metric-orthogonal
    std::vector<VectorField> orbit_generators;
    int n_gauge = 0; // how many leading frame fields generate gauge momenta

    double frame_cond_bound = 1e8;
};

/// Frame-derived data at a chart point.
struct FrameData {
    Mat rho;      // n x r, columns are the frame fields
    Mat rho_bar;  // r x n, rows are the dual coframe
    Mat gram;     // r x r
    Mat gram_inv; // r x r
    Tensor3 c_down; // C_{alpha beta gamma} = <[X_a,X_b],X_c>
    Tensor3 c_up;   // C^{gamma}_{alpha beta}, gram-raised first index
};

/// Lie bracket [X,Y] at q, using analytic jacobians when both fields carry
/// them and central differences otherwise.
Vec lie_bracket(const VectorField& X, const VectorField& Y, const Vec& q,
                const ChartDomain* domain = nullptr);

/// Jacobian of a field at q (analytic if present, else central differences).
Mat field_jacobian(const VectorField& X, const Vec& q, const ChartDomain* domain = nullptr);

FrameData frame_at(const MechanicalSystem& sys, const Vec& q);

/// (Lie_Z G)(X_alpha, X_beta) for the system frame, as an r x r matrix.
Mat lie_derivative_metric_on_d(const MechanicalSystem& sys, const VectorField& Z, const Vec& q);

/// Metric derivative d g / d q^i (analytic if present, else central FD).
Mat metric_derivative(const MechanicalSystem& sys, const Vec& q, int i);

/// Potential value and gradient helpers (zero when no potential is set).
double potential_value(const MechanicalSystem& sys, const Vec& q);
Vec potential_gradient(const MechanicalSystem& sys, const Vec& q);

/// Columns spanning the metric-orthogonal complement D-perp at q.
Mat orthogonal_complement(const MechanicalSystem& sys, const Vec& q);

/// Coordinate components of a gauge generator: rho(q) * coeffs(q).
Vec generator_coords(const MechanicalSystem& sys, const GaugeGenerator& z, const Vec& q);

/// Realize a gauge generator as a plain vector field on the chart.
VectorField generator_field(const MechanicalSystem& sys, const GaugeGenerator& z);

/// Residual of Z(q) against the span of the declared orbit generators.
double orbit_tangency_residual(const MechanicalSystem& sys, const Vec& zq, const Vec& q);

void require_in_chart(const MechanicalSystem& sys, const Vec& q);

} // namespace nonholo
