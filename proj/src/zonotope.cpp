#include "reachplan/zonotope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "reachplan/stats.hpp"

namespace reachplan {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
    }
}

void require_covariance(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != sigma.cols()) {
        throw std::invalid_argument("covariance must be square");
    }
    const double scale = std::max(1.0, sigma.norm());
    if ((sigma - sigma.transpose()).norm() > 1e-9 * scale) {
        throw std::invalid_argument("covariance must be symmetric within 1e-9");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("covariance eigendecomposition failed");
    }
    if (es.eigenvalues().minCoeff() < -1e-9 * scale) {
        throw std::invalid_argument("covariance must be positive semidefinite");
    }
}

// Collects unit support-test directions that make the halfspace test exact
// for n = 2 or n = 3, covering degenerate generator ranks.
std::vector<Eigen::VectorXd> support_directions(const Zonotope& z) {
    const int n = z.dim();
    std::vector<Eigen::VectorXd> dirs;
    std::vector<Eigen::VectorXd> gens;
    for (int i = 0; i < z.num_generators(); ++i) {
        Eigen::VectorXd g = z.generators.col(i);
        if (g.norm() > 1e-14) {
            gens.push_back(g.normalized());
        }
    }
    auto push_unique = [&dirs](const Eigen::VectorXd& d) {
        for (const auto& e : dirs) {
            if ((e - d).norm() < 1e-12 || (e + d).norm() < 1e-12) {
                return;
            }
        }
        dirs.push_back(d);
    };

    if (n == 2) {
        for (const auto& g : gens) {
            push_unique(Eigen::Vector2d(-g(1), g(0)));
        }
        // Along-generator directions only constrain further; they make the
        // test exact for rank-deficient (segment) zonotopes.
        for (const auto& g : gens) {
            push_unique(g);
        }
        if (gens.empty()) {
            push_unique(Eigen::Vector2d(1, 0));
            push_unique(Eigen::Vector2d(0, 1));
        }
        return dirs;
    }
    if (n == 3) {
        bool full_rank = false;
        for (size_t i = 0; i < gens.size(); ++i) {
            for (size_t j = i + 1; j < gens.size(); ++j) {
                Eigen::Vector3d c = Eigen::Vector3d(gens[i]).cross(Eigen::Vector3d(gens[j]));
                if (c.norm() > 1e-12) {
                    push_unique(c.normalized());
                    full_rank = true;
                }
            }
        }
        if (full_rank) {
            // Rank may still be 2: all cross products share one direction.
            // Adding in-plane facet normals (m x g) covers that case and is
            // harmless for rank 3.
            Eigen::Vector3d m = dirs.front();
            bool coplanar = true;
            for (const auto& d : dirs) {
                if (std::fabs(std::fabs(m.dot(d)) - 1.0) > 1e-10) {
                    coplanar = false;
                    break;
                }
            }
            if (coplanar) {
                for (const auto& g : gens) {
                    Eigen::Vector3d t = m.cross(Eigen::Vector3d(g));
                    if (t.norm() > 1e-12) {
                        push_unique(t.normalized());
                    }
                }
            }
        } else if (!gens.empty()) {
            // Rank 1: segment. Bound along the axis and across it.
            Eigen::Vector3d u = gens.front();
            push_unique(u);
            Eigen::Vector3d a = std::fabs(u(0)) < 0.9 ? Eigen::Vector3d::UnitX()
                                                      : Eigen::Vector3d::UnitY();
            Eigen::Vector3d v = u.cross(a).normalized();
            push_unique(v);
            push_unique(u.cross(v).normalized());
        } else {
            push_unique(Eigen::Vector3d::UnitX());
            push_unique(Eigen::Vector3d::UnitY());
            push_unique(Eigen::Vector3d::UnitZ());
        }
        return dirs;
    }
    throw std::logic_error("support_directions: only 2D/3D");
}

// Phase-1 simplex feasibility for G b = y, b in [-1,1]^r.
// Substituting b = 2u - 1 and adding upper-bound slacks gives a standard-form
// LP whose phase-1 optimum is zero iff the system is feasible.
bool feasibility_program(const Eigen::MatrixXd& g, const Eigen::VectorXd& y,
                         double tol) {
    const int n = static_cast<int>(g.rows());
    const int r = static_cast<int>(g.cols());
    if (r == 0) {
        return y.lpNorm<Eigen::Infinity>() <= tol;
    }
    const int rows = n + r;            // equality rows + upper-bound rows
    const int cols = 2 * r + rows;     // u, v (bound slacks), artificials
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::VectorXd b(rows);

    a.topLeftCorner(n, r) = 2.0 * g;
    b.head(n) = y + g.rowwise().sum();
    a.block(n, 0, r, r).setIdentity();
    a.block(n, r, r, r).setIdentity();
    b.tail(r).setOnes();

    // Flip rows so b >= 0, then add artificial identity.
    for (int i = 0; i < rows; ++i) {
        if (b(i) < 0.0) {
            a.row(i) = -a.row(i);
            b(i) = -b(i);
        }
    }
    a.block(0, 2 * r, rows, rows).setIdentity();

    std::vector<int> basis(rows);
    for (int i = 0; i < rows; ++i) basis[i] = 2 * r + i;

    // Phase-1 objective: minimize the sum of artificials. Reduced costs are
    // maintained against the artificial cost vector.
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
    cost.tail(rows).setOnes();

    Eigen::MatrixXd tab(rows, cols);
    tab = a;
    Eigen::VectorXd rhs = b;

    const int max_iter = 50 * (rows + cols);
    for (int iter = 0; iter < max_iter; ++iter) {
        // Reduced costs: c_j - c_B^T B^{-1} A_j. The tableau is kept in
        // B^{-1}A form, so c_B^T rows of the tableau give the needed terms.
        Eigen::VectorXd lambda = Eigen::VectorXd::Zero(cols);
        for (int j = 0; j < cols; ++j) {
            double cb_term = 0.0;
            for (int i = 0; i < rows; ++i) {
                if (cost(basis[i]) != 0.0) {
                    cb_term += cost(basis[i]) * tab(i, j);
                }
            }
            lambda(j) = cost(j) - cb_term;
        }
        // Bland's rule: first improving column.
        int enter = -1;
        for (int j = 0; j < cols; ++j) {
            if (lambda(j) < -1e-11) {
                enter = j;
                break;
            }
        }
        if (enter < 0) {
            break;  // optimal
        }
        int leave = -1;
        double best_ratio = 0.0;
        for (int i = 0; i < rows; ++i) {
            if (tab(i, enter) > 1e-11) {
                double ratio = rhs(i) / tab(i, enter);
                if (leave < 0 || ratio < best_ratio - 1e-14 ||
                    (std::fabs(ratio - best_ratio) <= 1e-14 && basis[i] < basis[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
        }
        if (leave < 0) {
            break;  // unbounded phase-1 cannot happen; bail defensively
        }
        double piv = tab(leave, enter);
        tab.row(leave) /= piv;
        rhs(leave) /= piv;
        for (int i = 0; i < rows; ++i) {
            if (i != leave && std::fabs(tab(i, enter)) > 0.0) {
                double f = tab(i, enter);
                tab.row(i) -= f * tab.row(leave);
                rhs(i) -= f * rhs(leave);
            }
        }
        basis[leave] = enter;
    }

    double art_sum = 0.0;
    for (int i = 0; i < rows; ++i) {
        if (basis[i] >= 2 * r) {
            art_sum += rhs(i);
        }
    }
    const double scale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
    return art_sum <= tol * scale;
}

}  // namespace

Zonotope::Zonotope(Eigen::VectorXd c, Eigen::MatrixXd g)
    : center(std::move(c)), generators(std::move(g)) {
    require_finite(center, "zonotope center");
    require_finite(generators, "zonotope generators");
    if (generators.size() > 0 && generators.rows() != center.size()) {
        throw std::invalid_argument("zonotope: generator dimension mismatch");
    }
    if (generators.size() == 0) {
        generators.resize(center.size(), 0);
    }
}

Zonotope Zonotope::point(Eigen::VectorXd c) {
    const auto n = c.size();
    return Zonotope(std::move(c), Eigen::MatrixXd::Zero(n, 0));
}

Zonotope Zonotope::box(Eigen::VectorXd c, const Eigen::VectorXd& half_widths) {
    const auto n = c.size();
    if (half_widths.size() != n) {
        throw std::invalid_argument("zonotope box: size mismatch");
    }
    std::vector<int> nz;
    for (int i = 0; i < n; ++i) {
        if (half_widths(i) != 0.0) nz.push_back(i);
    }
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, static_cast<int>(nz.size()));
    for (size_t j = 0; j < nz.size(); ++j) {
        g(nz[j], static_cast<int>(j)) = half_widths(nz[j]);
    }
    return Zonotope(std::move(c), std::move(g));
}

Eigen::VectorXd Zonotope::interval_hull_radius() const {
    return generators.cwiseAbs().rowwise().sum();
}

ProbabilisticZonotope::ProbabilisticZonotope(Eigen::VectorXd c, Eigen::MatrixXd g,
                                             Eigen::MatrixXd sigma)
    : center(std::move(c)), generators(std::move(g)), covariance(std::move(sigma)) {
    require_finite(center, "probabilistic zonotope center");
    require_finite(generators, "probabilistic zonotope generators");
    require_finite(covariance, "probabilistic zonotope covariance");
    if (generators.size() == 0) {
        generators.resize(center.size(), 0);
    }
    if (generators.rows() != center.size() || covariance.rows() != center.size()) {
        throw std::invalid_argument("probabilistic zonotope: dimension mismatch");
    }
    require_covariance(covariance);
}

ProbabilisticZonotope ProbabilisticZonotope::point(Eigen::VectorXd c) {
    const auto n = c.size();
    return ProbabilisticZonotope(std::move(c), Eigen::MatrixXd::Zero(n, 0),
                                 Eigen::MatrixXd::Zero(n, n));
}

ProbabilisticZonotope ProbabilisticZonotope::gaussian(Eigen::VectorXd c,
                                                      Eigen::MatrixXd sigma) {
    const auto n = c.size();
    return ProbabilisticZonotope(std::move(c), Eigen::MatrixXd::Zero(n, 0),
                                 std::move(sigma));
}

ConfidenceConfig::ConfidenceConfig(double conf, int dim)
    : confidence(conf), dimension(dim) {
    if (!(conf > 0.0 && conf < 1.0)) {
        throw std::invalid_argument("confidence must lie strictly in (0,1)");
    }
    if (dim < 1) {
        throw std::invalid_argument("confidence dimension must be positive");
    }
}

double ConfidenceConfig::alpha() const {
    return std::sqrt(chi_square_quantile(confidence, dimension));
}

ProbabilisticZonotope minkowski_sum(const ProbabilisticZonotope& a,
                                    const ProbabilisticZonotope& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("minkowski_sum: dimension mismatch");
    }
    Eigen::MatrixXd g(a.dim(), a.num_generators() + b.num_generators());
    g << a.generators, b.generators;
    return ProbabilisticZonotope(a.center + b.center, std::move(g),
                                 a.covariance + b.covariance);
}

ProbabilisticZonotope linear_map(const Eigen::MatrixXd& t,
                                 const ProbabilisticZonotope& p) {
    if (t.cols() != p.dim()) {
        throw std::invalid_argument("linear_map: dimension mismatch");
    }
    Eigen::MatrixXd sigma = t * p.covariance * t.transpose();
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    return ProbabilisticZonotope(t * p.center, t * p.generators, std::move(sigma));
}

Zonotope linear_map(const Eigen::MatrixXd& t, const Zonotope& z) {
    if (t.cols() != z.dim()) {
        throw std::invalid_argument("linear_map: dimension mismatch");
    }
    return Zonotope(t * z.center, t * z.generators);
}

ProbabilisticZonotope translate(const ProbabilisticZonotope& p,
                                const Eigen::VectorXd& offset) {
    if (offset.size() != p.dim()) {
        throw std::invalid_argument("translate: dimension mismatch");
    }
    return ProbabilisticZonotope(p.center + offset, p.generators, p.covariance);
}

Zonotope confidence_zonotope(const ProbabilisticZonotope& p,
                             const ConfidenceConfig& cfg) {
    const int n = p.dim();
    const double scale = std::max(1.0, p.covariance.norm());
    if ((p.covariance - p.covariance.transpose()).norm() > 1e-9 * scale) {
        throw std::invalid_argument("confidence_zonotope: covariance not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.covariance);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("confidence_zonotope: eigendecomposition failed");
    }
    const double alpha = ConfidenceConfig(cfg.confidence, n).alpha();
    std::vector<int> keep;
    for (int i = 0; i < n; ++i) {
        if (es.eigenvalues()(i) > 1e-14 * scale) {
            keep.push_back(i);
        }
    }
    Eigen::MatrixXd g(n, p.num_generators() + static_cast<int>(keep.size()));
    g.leftCols(p.num_generators()) = p.generators;
    for (size_t j = 0; j < keep.size(); ++j) {
        g.col(p.num_generators() + static_cast<int>(j)) =
            alpha * std::sqrt(es.eigenvalues()(keep[j])) * es.eigenvectors().col(keep[j]);
    }
    return Zonotope(p.center, std::move(g));
}

double covariation(const Zonotope& z) {
    return z.generators.squaredNorm();
}

bool contains(const Zonotope& z, const Eigen::VectorXd& point, double tol) {
    if (point.size() != z.dim()) {
        throw std::invalid_argument("contains: dimension mismatch");
    }
    const Eigen::VectorXd y = point - z.center;
    const double eps = tol * (1.0 + y.norm());
    bool degenerate = true;
    for (int i = 0; i < z.num_generators(); ++i) {
        if (z.generators.col(i).norm() > 1e-14) {
            degenerate = false;
            break;
        }
    }
    if (degenerate) {
        return y.lpNorm<Eigen::Infinity>() <= eps;
    }
    if (z.dim() == 2 || z.dim() == 3) {
        for (const auto& d : support_directions(z)) {
            double bound = (z.generators.transpose() * d).cwiseAbs().sum();
            if (std::fabs(d.dot(y)) > bound + eps) {
                return false;
            }
        }
        return true;
    }
    return feasibility_program(z.generators, y, std::max(tol, 1e-9));
}

bool ZonotopeHalfspaces::contains(const Eigen::VectorXd& point, double tol) const {
    const Eigen::VectorXd y = point - center;
    const double eps = tol * (1.0 + y.norm());
    if (point_only) {
        return y.lpNorm<Eigen::Infinity>() <= eps;
    }
    for (int i = 0; i < directions.rows(); ++i) {
        if (std::fabs(directions.row(i).dot(y)) > offsets(i) + eps) {
            return false;
        }
    }
    return true;
}

ZonotopeHalfspaces precompute_halfspaces(const Zonotope& z) {
    ZonotopeHalfspaces hs;
    hs.center = z.center;
    bool degenerate = true;
    for (int i = 0; i < z.num_generators(); ++i) {
        if (z.generators.col(i).norm() > 1e-14) {
            degenerate = false;
            break;
        }
    }
    if (degenerate) {
        hs.point_only = true;
        return hs;
    }
    auto dirs = support_directions(z);
    hs.directions.resize(static_cast<int>(dirs.size()), z.dim());
    hs.offsets.resize(static_cast<int>(dirs.size()));
    for (size_t i = 0; i < dirs.size(); ++i) {
        hs.directions.row(static_cast<int>(i)) = dirs[i].transpose();
        hs.offsets(static_cast<int>(i)) =
            (z.generators.transpose() * dirs[i]).cwiseAbs().sum();
    }
    return hs;
}

bool is_convex_polygon(const std::vector<Eigen::Vector2d>& polygon, double tol) {
    const size_t n = polygon.size();
    if (n < 3) {
        return false;
    }
    double scale = 0.0;
    for (size_t i = 0; i < n; ++i) {
        scale = std::max(scale, (polygon[(i + 1) % n] - polygon[i]).norm());
    }
    int sign = 0;
    for (size_t i = 0; i < n; ++i) {
        Eigen::Vector2d e1 = polygon[(i + 1) % n] - polygon[i];
        Eigen::Vector2d e2 = polygon[(i + 2) % n] - polygon[(i + 1) % n];
        double cross = e1.x() * e2.y() - e1.y() * e2.x();
        if (std::fabs(cross) <= tol * scale * scale) {
            continue;  // collinear edge pair
        }
        int s = cross > 0.0 ? 1 : -1;
        if (sign == 0) {
            sign = s;
        } else if (s != sign) {
            return false;
        }
    }
    return true;
}

bool intersects_2d(const Zonotope& z, const std::vector<Eigen::Vector2d>& polygon,
                   double tol) {
    if (z.dim() != 2) {
        throw std::invalid_argument("intersects_2d: zonotope must be 2D");
    }
    if (polygon.size() < 3) {
        throw std::invalid_argument("intersects_2d: polygon needs >= 3 vertices");
    }
    if (!is_convex_polygon(polygon, tol)) {
        throw std::invalid_argument("intersects_2d: polygon must be convex");
    }

    std::vector<Eigen::Vector2d> axes;
    const size_t n = polygon.size();
    for (size_t i = 0; i < n; ++i) {
        Eigen::Vector2d e = polygon[(i + 1) % n] - polygon[i];
        if (e.norm() > 1e-14) {
            axes.emplace_back(Eigen::Vector2d(-e.y(), e.x()).normalized());
        }
    }
    for (int i = 0; i < z.num_generators(); ++i) {
        Eigen::Vector2d g = z.generators.col(i);
        if (g.norm() > 1e-14) {
            axes.emplace_back(Eigen::Vector2d(-g.y(), g.x()).normalized());
        }
    }

    for (const auto& d : axes) {
        double zc = d.dot(Eigen::Vector2d(z.center));
        double zr = 0.0;
        for (int i = 0; i < z.num_generators(); ++i) {
            zr += std::fabs(d.dot(Eigen::Vector2d(z.generators.col(i))));
        }
        double pmin = d.dot(polygon[0]);
        double pmax = pmin;
        for (const auto& v : polygon) {
            double p = d.dot(v);
            pmin = std::min(pmin, p);
            pmax = std::max(pmax, p);
        }
        const double eps = tol * (1.0 + std::fabs(zc) + zr);
        if (zc + zr < pmin - eps || zc - zr > pmax + eps) {
            return false;  // strict separation found
        }
    }
    return true;
}

bool zonotopes_intersect(const Zonotope& a, const Zonotope& b, double tol) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("zonotopes_intersect: dimension mismatch");
    }
    Eigen::MatrixXd g(a.dim(), a.num_generators() + b.num_generators());
    g << a.generators, b.generators;
    Zonotope diff(a.center - b.center, std::move(g));
    return contains(diff, Eigen::VectorXd::Zero(a.dim()), tol);
}

Zonotope reduce_order(const Zonotope& z, int max_generators) {
    const int n = z.dim();
    if (max_generators < n) {
        throw std::invalid_argument("reduce_order: max_generators must be >= dim");
    }
    const int r = z.num_generators();
    if (r <= max_generators) {
        return z;
    }
    std::vector<int> idx(r);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> norms(r);
    for (int i = 0; i < r; ++i) {
        norms[i] = z.generators.col(i).norm();
    }
    std::stable_sort(idx.begin(), idx.end(),
                     [&norms](int a, int b) { return norms[a] > norms[b]; });

    const int keep = max_generators - n;
    Eigen::MatrixXd g(n, max_generators);
    for (int i = 0; i < keep; ++i) {
        g.col(i) = z.generators.col(idx[i]);
    }
    Eigen::VectorXd hull = Eigen::VectorXd::Zero(n);
    for (int i = keep; i < r; ++i) {
        hull += z.generators.col(idx[i]).cwiseAbs();
    }
    g.rightCols(n) = hull.asDiagonal();
    return Zonotope(z.center, std::move(g));
}

ProbabilisticZonotope reduce_order(const ProbabilisticZonotope& p, int max_generators) {
    Zonotope reduced = reduce_order(p.bounded_part(), max_generators);
    return ProbabilisticZonotope(reduced.center, reduced.generators, p.covariance);
}

std::vector<Eigen::Vector2d> zonogon_vertices(const Zonotope& z) {
    if (z.dim() != 2) {
        throw std::invalid_argument("zonogon_vertices: zonotope must be 2D");
    }
    std::vector<Eigen::Vector2d> gens;
    for (int i = 0; i < z.num_generators(); ++i) {
        Eigen::Vector2d g = z.generators.col(i);
        if (g.norm() <= 1e-14) {
            continue;
        }
        if (g.y() < 0.0 || (g.y() == 0.0 && g.x() < 0.0)) {
            g = -g;  // canonical half-plane
        }
        gens.push_back(g);
    }
    if (gens.empty()) {
        return {Eigen::Vector2d(z.center)};
    }
    std::sort(gens.begin(), gens.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return std::atan2(a.y(), a.x()) < std::atan2(b.y(), b.x());
    });
    // Walk the boundary: start at the vertex minimizing all generators, then
    // add each generator twice around the loop.
    Eigen::Vector2d v = Eigen::Vector2d(z.center);
    for (const auto& g : gens) {
        v -= g;
    }
    std::vector<Eigen::Vector2d> verts;
    verts.push_back(v);
    for (const auto& g : gens) {
        v += 2.0 * g;
        verts.push_back(v);
    }
    for (const auto& g : gens) {
        v -= 2.0 * g;
        verts.push_back(v);
    }
    verts.pop_back();  // closes the loop
    return verts;
}

}  // namespace reachplan
