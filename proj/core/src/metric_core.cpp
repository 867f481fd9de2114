#include "rfpca/metric_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rfpca {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

void require_size(const MetricSpace& space, const Point& p, const char* what) {
    if (p.size() != space.coord_size()) {
        std::ostringstream os;
        os << what << ": expected " << space.coord_size() << " coordinates for "
           << to_string(space.kind) << " space, got " << p.size();
        throw InvalidInput(os.str());
    }
}

void require_nonempty(std::span<const Point> points) {
    if (points.empty()) throw InvalidInput("Fréchet center of an empty point set");
}

// Upper-triangle (i <= j) index layout shared by the half-vectorization helpers.
Eigen::VectorXd half_vec(int p, const Point& full) {
    Eigen::VectorXd h(p * (p + 1) / 2);
    Eigen::Index c = 0;
    for (int i = 0; i < p; ++i)
        for (int j = i; j < p; ++j) h(c++) = full(i * p + j);
    return h;
}

Point full_from_half(int p, const Eigen::VectorXd& h) {
    Point full(p * p);
    Eigen::Index c = 0;
    for (int i = 0; i < p; ++i)
        for (int j = i; j < p; ++j) {
            full(i * p + j) = h(c);
            full(j * p + i) = h(c);
            ++c;
        }
    return full;
}

// Frobenius weights on the half-vectorization: 1 on the diagonal, 2 off it.
Eigen::VectorXd half_vec_weights(int p) {
    Eigen::VectorXd w(p * (p + 1) / 2);
    Eigen::Index c = 0;
    for (int i = 0; i < p; ++i)
        for (int j = i; j < p; ++j) w(c++) = (i == j) ? 1.0 : 2.0;
    return w;
}

Eigen::VectorXd coordinatewise_median(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.cols();
    Eigen::VectorXd out(x.rows());
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index i = 0; i < n; ++i) row[static_cast<std::size_t>(i)] = x(r, i);
        const auto mid = row.begin() + n / 2;
        std::nth_element(row.begin(), mid, row.end());
        double m = *mid;
        if (n % 2 == 0) m = 0.5 * (m + *std::max_element(row.begin(), mid));
        out(r) = m;
    }
    return out;
}

// Linear-space Weiszfeld under the weighted norm ||v||_w = sqrt(sum_c w_c v_c^2).
// Columns of x are the data points. Returns the fit plus the index of a data
// point the solution coincides with (or -1).
struct LinearFit {
    FrechetFit fit;
    Eigen::Index anchor = -1;
};

LinearFit weiszfeld(const Eigen::MatrixXd& x, const Eigen::VectorXd* metric_weights,
                    Eigen::VectorXd y, const MedianSolverConfig& cfg) {
    const Eigen::Index n = x.cols();
    auto wnorm = [&](const auto& v) {
        return metric_weights ? std::sqrt((v.array().square() * metric_weights->array()).sum())
                              : v.norm();
    };
    auto distances = [&](const Eigen::VectorXd& at) {
        Eigen::VectorXd d(n);
        for (Eigen::Index i = 0; i < n; ++i) d(i) = wnorm(x.col(i) - at);
        return d;
    };
    // Optimality test for data point j: ||sum_{i not at j} (x_i - x_j)/d_ij||_w <= multiplicity.
    auto anchor_is_optimal = [&](Eigen::Index j) {
        const Eigen::VectorXd d = distances(x.col(j));
        Eigen::VectorXd pull = Eigen::VectorXd::Zero(x.rows());
        double multiplicity = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d(i) < cfg.anchor_eps)
                multiplicity += 1.0;
            else
                pull += (x.col(i) - x.col(j)) / d(i);
        }
        return wnorm(pull) <= multiplicity;
    };

    LinearFit out;
    FrechetFit& fit = out.fit;
    Eigen::VectorXd d = distances(y);
    double cost = d.sum();
    if (cfg.record_costs) fit.cost_trace.push_back(cost);
    double prev_step = std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        Eigen::Index nearest = 0;
        const double nearest_d = d.minCoeff(&nearest);
        if (nearest_d >= cfg.anchor_eps && nearest_d <= 10.0 * prev_step &&
            anchor_is_optimal(nearest)) {
            // Iterate is creeping toward an optimal data point; finish there.
            const Eigen::VectorXd anchor_d = distances(x.col(nearest));
            const double anchor_cost = anchor_d.sum();
            if (anchor_cost <= cost) {
                if (cfg.record_costs) fit.cost_trace.push_back(anchor_cost);
                fit.iterations = iter;
                fit.final_step = nearest_d;
                fit.point = x.col(nearest);
                fit.cost = anchor_cost;
                out.anchor = nearest;
                return out;
            }
        }

        Eigen::VectorXd num = Eigen::VectorXd::Zero(x.rows());
        double den = 0.0;
        double eta = 0.0;
        Eigen::Index coincident = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d(i) < cfg.anchor_eps) {
                eta += 1.0;
                coincident = i;
            } else {
                num += x.col(i) / d(i);
                den += 1.0 / d(i);
            }
        }
        if (den == 0.0) {  // every point coincides with y
            fit.iterations = iter;
            fit.final_step = 0.0;
            out.anchor = coincident;
            break;
        }
        const Eigen::VectorXd target = num / den;
        Eigen::VectorXd next;
        if (eta == 0.0) {
            next = target;
        } else {
            // Vardi-Zhang: shrink the Weiszfeld step by the anchored mass.
            const double r = wnorm(num - den * y);
            if (r <= eta) {
                fit.iterations = iter;
                fit.final_step = 0.0;
                out.anchor = coincident;
                break;
            }
            const double beta = eta / r;
            next = (1.0 - beta) * target + beta * y;
        }
        const double step = wnorm(next - y);
        y = std::move(next);
        d = distances(y);
        cost = d.sum();
        if (cfg.record_costs) fit.cost_trace.push_back(cost);
        fit.iterations = iter;
        fit.final_step = step;
        prev_step = step;
        if (step < cfg.tol) break;
        if (iter == cfg.max_iter) {
            std::ostringstream os;
            os << "Weiszfeld did not converge in " << cfg.max_iter << " iterations (last step "
               << step << ")";
            throw ConvergenceError(os.str(), y, step);
        }
    }
    if (out.anchor < 0) {
        Eigen::Index j = 0;
        if (d.minCoeff(&j) < cfg.anchor_eps) out.anchor = j;
    }
    fit.point = std::move(y);
    fit.cost = cost;
    return out;
}

void require_concentrated(std::span<const Point> points) {
    double max_d = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            max_d = std::max(max_d, distance(MetricSpace::sphere(), points[i], points[j]));
    if (!(max_d < kHalfPi)) {
        std::ostringstream os;
        os << "sphere points not concentrated: max pairwise distance " << max_d
           << " >= pi/2";
        throw ConcentrationError(os.str());
    }
}

Eigen::Vector3d sphere_start(std::span<const Point> points) {
    Eigen::MatrixXd x(3, static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = points[i];
    Eigen::Vector3d y = coordinatewise_median(x);
    if (y.norm() < 1e-12) y = points.front();
    return y.normalized();
}

FrechetFit sphere_weiszfeld(std::span<const Point> points, const MedianSolverConfig& cfg,
                            const std::optional<Point>& init) {
    require_concentrated(points);
    Eigen::Vector3d y = init ? Eigen::Vector3d(init->normalized()) : sphere_start(points);
    const std::size_t n = points.size();
    std::vector<Eigen::Vector3d> logs(n);
    Eigen::VectorXd d(static_cast<Eigen::Index>(n));
    auto evaluate = [&](const Eigen::Vector3d& at) {
        for (std::size_t i = 0; i < n; ++i) {
            logs[i] = sphere_log(at, points[i]);
            d(static_cast<Eigen::Index>(i)) = logs[i].norm();
        }
        return d.sum();
    };

    FrechetFit fit;
    double cost = evaluate(y);
    if (cfg.record_costs) fit.cost_trace.push_back(cost);
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        Eigen::Vector3d g = Eigen::Vector3d::Zero();
        double den = 0.0;
        double eta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double di = d(static_cast<Eigen::Index>(i));
            if (di < cfg.anchor_eps) {
                eta += 1.0;
            } else {
                g += logs[i] / di;
                den += 1.0 / di;
            }
        }
        fit.iterations = iter;
        if (den == 0.0) {
            fit.final_step = 0.0;
            break;
        }
        Eigen::Vector3d v = g / den;
        if (eta > 0.0) {
            const double r = g.norm();
            if (r <= eta) {
                fit.final_step = 0.0;
                break;
            }
            v *= 1.0 - eta / r;
        }
        const double step = v.norm();
        y = sphere_exp(y, v);
        cost = evaluate(y);
        if (cfg.record_costs) fit.cost_trace.push_back(cost);
        fit.final_step = step;
        if (step < cfg.tol) break;
        if (iter == cfg.max_iter) {
            std::ostringstream os;
            os << "Riemannian Weiszfeld did not converge in " << cfg.max_iter
               << " iterations (last step " << step << ")";
            throw ConvergenceError(os.str(), y, step);
        }
    }
    // Return the data point itself when the solution sits on one.
    Eigen::Index j = 0;
    if (d.minCoeff(&j) < cfg.anchor_eps) y = points[static_cast<std::size_t>(j)];
    fit.point = y;
    fit.cost = cost;
    return fit;
}

FrechetFit sphere_karcher_mean(std::span<const Point> points, const MedianSolverConfig& cfg,
                               const std::optional<Point>& init) {
    require_concentrated(points);
    Eigen::Vector3d y;
    if (init) {
        y = init->normalized();
    } else {
        y.setZero();
        for (const auto& p : points) y += p;
        y = y.norm() < 1e-12 ? Eigen::Vector3d(points.front()) : y.normalized();
    }
    const double n = static_cast<double>(points.size());
    FrechetFit fit;
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        Eigen::Vector3d g = Eigen::Vector3d::Zero();
        for (const auto& p : points) g += sphere_log(y, p);
        g /= n;
        const double step = g.norm();
        y = sphere_exp(y, g);
        if (cfg.record_costs) fit.cost_trace.push_back(mean_cost(MetricSpace::sphere(), y, points));
        fit.iterations = iter;
        fit.final_step = step;
        if (step < cfg.tol) break;
        if (iter == cfg.max_iter) {
            std::ostringstream os;
            os << "Karcher mean did not converge in " << cfg.max_iter << " iterations (last step "
               << step << ")";
            throw ConvergenceError(os.str(), y, step);
        }
    }
    fit.point = y;
    fit.cost = mean_cost(MetricSpace::sphere(), y, points);
    return fit;
}

}  // namespace

std::string_view to_string(SpaceKind kind) {
    switch (kind) {
        case SpaceKind::Laplacian: return "laplacian";
        case SpaceKind::Sphere: return "sphere";
        case SpaceKind::Euclidean: return "euclidean";
    }
    return "unknown";
}

SpaceKind space_kind_from_string(std::string_view name) {
    if (name == "laplacian") return SpaceKind::Laplacian;
    if (name == "sphere") return SpaceKind::Sphere;
    if (name == "euclidean") return SpaceKind::Euclidean;
    throw InvalidInput("unknown space kind '" + std::string(name) + "'");
}

void MedianSolverConfig::validate() const {
    if (max_iter < 1) throw ConfigError("max_iter must be positive");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    if (!(anchor_eps > 0.0)) throw ConfigError("anchor_eps must be positive");
}

bool ValidityReport::has(std::string_view code) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.code == code; });
}

double distance(const MetricSpace& space, const Point& a, const Point& b) {
    require_size(space, a, "distance");
    require_size(space, b, "distance");
    if (space.kind == SpaceKind::Sphere) {
        const Eigen::Vector3d u = a, v = b;
        // atan2 form of arccos(clamp(u.v)) that stays accurate near 0 and pi.
        const double c = std::clamp(u.dot(v), -1.0, 1.0);
        return std::atan2(u.cross(v).norm(), c);
    }
    return (a - b).norm();
}

double median_cost(const MetricSpace& space, const Point& omega, std::span<const Point> points) {
    double s = 0.0;
    for (const auto& p : points) s += distance(space, omega, p);
    return s;
}

double mean_cost(const MetricSpace& space, const Point& omega, std::span<const Point> points) {
    double s = 0.0;
    for (const auto& p : points) {
        const double d = distance(space, omega, p);
        s += d * d;
    }
    return s;
}

FrechetFit frechet_median_fit(const MetricSpace& space, std::span<const Point> points,
                              const MedianSolverConfig& config, const std::optional<Point>& init) {
    config.validate();
    require_nonempty(points);
    for (const auto& p : points) require_size(space, p, "frechet_median");
    if (init) require_size(space, *init, "frechet_median init");

    if (space.kind == SpaceKind::Sphere) return sphere_weiszfeld(points, config, init);

    const auto n = static_cast<Eigen::Index>(points.size());
    if (space.kind == SpaceKind::Laplacian) {
        const int p = space.dim;
        const Eigen::VectorXd w = half_vec_weights(p);
        Eigen::MatrixXd x(p * (p + 1) / 2, n);
        for (Eigen::Index i = 0; i < n; ++i) x.col(i) = half_vec(p, points[static_cast<std::size_t>(i)]);
        Eigen::VectorXd start = init ? half_vec(p, *init) : coordinatewise_median(x);
        LinearFit lf = weiszfeld(x, &w, std::move(start), config);
        lf.fit.point = lf.anchor >= 0 ? points[static_cast<std::size_t>(lf.anchor)]
                                      : full_from_half(p, lf.fit.point);
        return lf.fit;
    }

    Eigen::MatrixXd x(space.dim, n);
    for (Eigen::Index i = 0; i < n; ++i) x.col(i) = points[static_cast<std::size_t>(i)];
    Eigen::VectorXd start = init ? *init : coordinatewise_median(x);
    LinearFit lf = weiszfeld(x, nullptr, std::move(start), config);
    if (lf.anchor >= 0) lf.fit.point = points[static_cast<std::size_t>(lf.anchor)];
    return lf.fit;
}

Point frechet_median(const MetricSpace& space, std::span<const Point> points,
                     const MedianSolverConfig& config) {
    return frechet_median_fit(space, points, config).point;
}

FrechetFit frechet_mean_fit(const MetricSpace& space, std::span<const Point> points,
                            const MedianSolverConfig& config, const std::optional<Point>& init) {
    config.validate();
    require_nonempty(points);
    for (const auto& p : points) require_size(space, p, "frechet_mean");
    if (space.kind == SpaceKind::Sphere) return sphere_karcher_mean(points, config, init);

    FrechetFit fit;
    if (points.size() == 1) {
        fit.point = points.front();
    } else {
        fit.point = Point::Zero(space.coord_size());
        for (const auto& p : points) fit.point += p;
        fit.point /= static_cast<double>(points.size());
    }
    fit.iterations = 1;
    fit.cost = mean_cost(space, fit.point, points);
    if (config.record_costs) fit.cost_trace.push_back(fit.cost);
    return fit;
}

Point frechet_mean(const MetricSpace& space, std::span<const Point> points,
                   const MedianSolverConfig& config) {
    return frechet_mean_fit(space, points, config).point;
}

Eigen::Vector3d sphere_log(const Eigen::Vector3d& base, const Eigen::Vector3d& q) {
    const double c = std::clamp(base.dot(q), -1.0, 1.0);
    const Eigen::Vector3d perp = q - c * base;
    const double s = perp.norm();
    const double theta = std::atan2(s, c);
    if (theta < 1e-15) return Eigen::Vector3d::Zero();
    if (std::numbers::pi - theta < 1e-12)
        throw SingularityError("sphere_log: antipodal points have no unique geodesic");
    return (theta / s) * perp;
}

Eigen::Vector3d sphere_exp(const Eigen::Vector3d& base, const Eigen::Vector3d& v) {
    const double theta = v.norm();
    if (theta < 1e-300) return base;
    const Eigen::Vector3d out = std::cos(theta) * base + (std::sin(theta) / theta) * v;
    return out.normalized();
}

ValidityReport validate_point(const MetricSpace& space, const Point& candidate) {
    ValidityReport report;
    auto add = [&](std::string code, std::string msg) {
        report.violations.push_back({std::move(code), std::move(msg)});
    };
    if (candidate.size() != space.coord_size()) {
        add("dimension", "expected " + std::to_string(space.coord_size()) + " coordinates, got " +
                             std::to_string(candidate.size()));
        return report;
    }
    if (!candidate.allFinite()) add("non_finite", "point has non-finite coordinates");

    switch (space.kind) {
        case SpaceKind::Euclidean:
            break;
        case SpaceKind::Sphere: {
            const double norm = candidate.norm();
            if (!(std::abs(norm - 1.0) <= 1e-9))
                add("unit_norm", "norm " + std::to_string(norm) + " differs from 1");
            break;
        }
        case SpaceKind::Laplacian: {
            const int p = space.dim;
            const auto at = [&](int i, int j) { return candidate(i * p + j); };
            for (int i = 0; i < p; ++i) {
                double row = 0.0;
                for (int j = 0; j < p; ++j) {
                    row += at(i, j);
                    if (j > i && at(i, j) != at(j, i))
                        add("symmetry", "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                            ") differs from its transpose");
                    if (j != i && at(i, j) > 1e-12)
                        add("off_diagonal_sign", "entry (" + std::to_string(i) + "," +
                                                     std::to_string(j) + ") is positive");
                }
                if (!(std::abs(row) <= 1e-9))
                    add("row_sum", "row " + std::to_string(i) + " sums to " + std::to_string(row));
                if (at(i, i) < 0.0)
                    add("diagonal_sign", "diagonal entry " + std::to_string(i) + " is negative");
            }
            break;
        }
    }
    return report;
}

Eigen::MatrixXd as_matrix(const MetricSpace& space, const Point& laplacian) {
    require_size(space, laplacian, "as_matrix");
    const int p = space.dim;
    Eigen::MatrixXd m(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) m(i, j) = laplacian(i * p + j);
    return m;
}

Point from_matrix(const Eigen::MatrixXd& m) {
    const auto p = m.rows();
    Point out(p * p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) out(i * p + j) = m(i, j);
    return out;
}

Point laplacian_from_adjacency(const Eigen::MatrixXd& adjacency) {
    const auto p = adjacency.rows();
    if (adjacency.cols() != p) throw InvalidInput("adjacency matrix must be square");
    Point out(p * p);
    for (Eigen::Index i = 0; i < p; ++i) {
        double degree = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (j == i) continue;
            degree += adjacency(i, j);
            out(i * p + j) = -adjacency(i, j);
        }
        out(i * p + i) = degree;
    }
    return out;
}

Eigen::MatrixXd adjacency_from_laplacian(const MetricSpace& space, const Point& laplacian) {
    Eigen::MatrixXd a = -as_matrix(space, laplacian);
    a.diagonal().setZero();
    return a;
}

Eigen::VectorXd scaled_half_vec(int nodes, const Point& laplacian) {
    Eigen::VectorXd h = half_vec(nodes, laplacian);
    h.array() *= half_vec_weights(nodes).array().sqrt();
    return h;
}

Point from_scaled_half_vec(int nodes, const Eigen::VectorXd& h) {
    Eigen::VectorXd raw = h.array() / half_vec_weights(nodes).array().sqrt();
    return full_from_half(nodes, raw);
}

}  // namespace rfpca
