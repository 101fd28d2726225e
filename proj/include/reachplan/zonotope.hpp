#pragma once

#include <Eigen/Dense>
#include <vector>

namespace reachplan {

// Centrally symmetric convex set: { c + G b | b_i in [-1, 1] }.
// Generators are the columns of G; r = 0 (a point) is allowed.
struct Zonotope {
    Eigen::VectorXd center;
    Eigen::MatrixXd generators;  // n x r

    Zonotope() = default;
    Zonotope(Eigen::VectorXd c, Eigen::MatrixXd g);

    int dim() const { return static_cast<int>(center.size()); }
    int num_generators() const { return static_cast<int>(generators.cols()); }

    static Zonotope point(Eigen::VectorXd c);
    // Axis-aligned box with the given per-axis half-widths.
    static Zonotope box(Eigen::VectorXd c, const Eigen::VectorXd& half_widths);

    // Per-axis half-widths of the tightest axis-aligned bounding box.
    Eigen::VectorXd interval_hull_radius() const;
};

// Gaussian with an uncertain mean confined to a zonotope.
struct ProbabilisticZonotope {
    Eigen::VectorXd center;
    Eigen::MatrixXd generators;   // n x r, bounded part
    Eigen::MatrixXd covariance;   // n x n, stochastic part

    ProbabilisticZonotope() = default;
    ProbabilisticZonotope(Eigen::VectorXd c, Eigen::MatrixXd g, Eigen::MatrixXd sigma);

    int dim() const { return static_cast<int>(center.size()); }
    int num_generators() const { return static_cast<int>(generators.cols()); }

    static ProbabilisticZonotope point(Eigen::VectorXd c);
    static ProbabilisticZonotope gaussian(Eigen::VectorXd c, Eigen::MatrixXd sigma);

    Zonotope bounded_part() const { return Zonotope(center, generators); }
};

struct ConfidenceConfig {
    double confidence = 0.0;  // in (0, 1)
    int dimension = 0;

    ConfidenceConfig(double conf, int dim);

    // Scaling of covariance eigenvector generators:
    // sqrt of the chi-square quantile at `confidence` with `dimension` dof.
    double alpha() const;
};

ProbabilisticZonotope minkowski_sum(const ProbabilisticZonotope& a,
                                    const ProbabilisticZonotope& b);

// (T c, T G, T Sigma T^T); output covariance re-symmetrized.
ProbabilisticZonotope linear_map(const Eigen::MatrixXd& t,
                                 const ProbabilisticZonotope& p);
Zonotope linear_map(const Eigen::MatrixXd& t, const Zonotope& z);

ProbabilisticZonotope translate(const ProbabilisticZonotope& p,
                                const Eigen::VectorXd& offset);

// Bounded set covering the stochastic part at the configured confidence:
// generators [G, alpha*sqrt(lambda_i)*v_i] over the covariance eigenpairs.
// Zero eigenvalues contribute no column.
Zonotope confidence_zonotope(const ProbabilisticZonotope& p,
                             const ConfidenceConfig& cfg);

// trace(G^T G): sum of squared generator entries.
double covariation(const Zonotope& z);

// Exact membership test. 2D and 3D use facet-normal support tests;
// higher dimensions fall back to a feasibility program over b in [-1,1]^r.
bool contains(const Zonotope& z, const Eigen::VectorXd& point,
              double tol = 1e-9);

// Precomputed halfspace form |d^T (x - c)| <= offset for batch point queries
// against one fixed zonotope (2D / 3D only).
struct ZonotopeHalfspaces {
    Eigen::VectorXd center;
    Eigen::MatrixXd directions;  // each row a test direction
    Eigen::VectorXd offsets;
    bool point_only = false;

    bool contains(const Eigen::VectorXd& point, double tol = 1e-9) const;
};
ZonotopeHalfspaces precompute_halfspaces(const Zonotope& z);

// Separating-axis test between a 2D zonotope and a convex polygon
// (vertices in order, either orientation). Touching counts as intersecting.
// Throws on non-convex input.
bool intersects_2d(const Zonotope& z,
                   const std::vector<Eigen::Vector2d>& polygon,
                   double tol = 1e-9);

// Exact intersection test between two zonotopes of equal dimension
// (0 in the Minkowski sum of a with the reflection of b).
bool zonotopes_intersect(const Zonotope& a, const Zonotope& b,
                         double tol = 1e-9);

// Over-approximating order reduction: the smallest-norm generators are
// replaced by their axis-aligned interval hull. No-op if r <= max_generators.
// Requires max_generators >= dim.
Zonotope reduce_order(const Zonotope& z, int max_generators);
ProbabilisticZonotope reduce_order(const ProbabilisticZonotope& p, int max_generators);

// Vertices of a 2D zonotope in counterclockwise order (for plotting/export).
std::vector<Eigen::Vector2d> zonogon_vertices(const Zonotope& z);

bool is_convex_polygon(const std::vector<Eigen::Vector2d>& polygon,
                       double tol = 1e-9);

}  // namespace reachplan
