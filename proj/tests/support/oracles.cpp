#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace rfpca::testing {

double naive_row_distance(const Eigen::MatrixXd& values, int a, int b, const Eigen::VectorXd& w) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
        const double d = values(a, k) - values(b, k);
        s += w(k) * d * d;
    }
    return std::sqrt(s);
}

namespace {

double pair_weight(double r, double q) {
    if (q == 0.0) return r == 0.0 ? 0.0 : 1.0 / (r * r);
    if (r <= q) return 1.0;
    return (q / r) * (q / r);
}

Eigen::MatrixXd pair_sum(const Eigen::MatrixXd& values, const Eigen::VectorXd& w, double q, bool ordered) {
    const auto n = static_cast<int>(values.rows());
    const auto t = values.cols();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(t, t);
    for (int j = 0; j < n; ++j)
        for (int k = ordered ? 0 : j + 1; k < n; ++k) {
            const double wt = pair_weight(naive_row_distance(values, j, k, w), q);
            for (Eigen::Index s = 0; s < t; ++s)
                for (Eigen::Index u = 0; u < t; ++u)
                    c(s, u) += wt * (values(j, s) - values(k, s)) * (values(j, u) - values(k, u));
        }
    return c;
}

}  // namespace

Eigen::MatrixXd naive_pairwise_covariance(const Eigen::MatrixXd& values, const Eigen::VectorXd& w, double q) {
    const double n = static_cast<double>(values.rows());
    return pair_sum(values, w, q, false) * (2.0 / (n * (n - 1.0)));
}

Eigen::MatrixXd naive_pairwise_v_statistic(const Eigen::MatrixXd& values, const Eigen::VectorXd& w, double q) {
    const double n = static_cast<double>(values.rows());
    return pair_sum(values, w, q, true) / (n * n);
}

Eigen::MatrixXd naive_classical_covariance(const Eigen::MatrixXd& values) {
    const auto n = values.rows();
    const auto t = values.cols();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(t);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < t; ++k) mean(k) += values(i, k) / static_cast<double>(n);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(t, t);
    for (Eigen::Index s = 0; s < t; ++s)
        for (Eigen::Index u = 0; u < t; ++u) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) acc += values(i, s) * values(i, u);
            c(s, u) = acc / static_cast<double>(n) - mean(s) * mean(u);
        }
    return c;
}

Eigen::MatrixXd naive_scores(const Eigen::MatrixXd& values, const Eigen::VectorXd& nu, const Eigen::MatrixXd& phi,
                             const Eigen::VectorXd& w) {
    Eigen::MatrixXd out(values.rows(), phi.rows());
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < phi.rows(); ++j) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < values.cols(); ++k) acc += w(k) * (values(i, k) - nu(k)) * phi(j, k);
            out(i, j) = acc;
        }
    return out;
}

double abs_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w) {
    const double ab = (a.array() * b.array() * w.array()).sum();
    const double aa = (a.array() * a.array() * w.array()).sum();
    const double bb = (b.array() * b.array() * w.array()).sum();
    return std::acos(std::clamp(std::abs(ab) / std::sqrt(aa * bb), 0.0, 1.0));
}

std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, int restarts, Rng& rng) {
    const auto n = static_cast<int>(points.rows());
    std::vector<int> best;
    double best_wss = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Eigen::MatrixXd centers(k, points.cols());
        centers.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
        for (int c = 1; c < k; ++c) {
            Eigen::VectorXd d2(n);
            for (int i = 0; i < n; ++i) {
                double m = std::numeric_limits<double>::infinity();
                for (int e = 0; e < c; ++e) m = std::min(m, (points.row(i) - centers.row(e)).squaredNorm());
                d2(i) = m;
            }
            double u = rng.uniform() * d2.sum();
            int pick = n - 1;
            for (int i = 0; i < n; ++i) {
                u -= d2(i);
                if (u <= 0.0) {
                    pick = i;
                    break;
                }
            }
            centers.row(c) = points.row(pick);
        }
        std::vector<int> labels(static_cast<std::size_t>(n), -1);
        for (int iter = 0; iter < 100; ++iter) {
            bool changed = false;
            for (int i = 0; i < n; ++i) {
                int arg = 0;
                double m = std::numeric_limits<double>::infinity();
                for (int c = 0; c < k; ++c) {
                    const double d = (points.row(i) - centers.row(c)).squaredNorm();
                    if (d < m) {
                        m = d;
                        arg = c;
                    }
                }
                if (labels[static_cast<std::size_t>(i)] != arg) {
                    labels[static_cast<std::size_t>(i)] = arg;
                    changed = true;
                }
            }
            if (!changed) break;
            Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, points.cols());
            Eigen::VectorXd count = Eigen::VectorXd::Zero(k);
            for (int i = 0; i < n; ++i) {
                sum.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
                count(labels[static_cast<std::size_t>(i)]) += 1.0;
            }
            for (int c = 0; c < k; ++c)
                if (count(c) > 0) centers.row(c) = sum.row(c) / count(c);
        }
        double wss = 0.0;
        for (int i = 0; i < n; ++i) wss += (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
        if (wss < best_wss) {
            best_wss = wss;
            best = labels;
        }
    }
    return best;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0;
        ra[a[i]] += 1.0;
        rb[b[i]] += 1.0;
    }
    auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, v] : joint) sum_joint += choose2(v);
    for (const auto& [key, v] : ra) sum_a += choose2(v);
    for (const auto& [key, v] : rb) sum_b += choose2(v);
    const double expected = sum_a * sum_b / choose2(static_cast<double>(a.size()));
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (sum_joint - expected) / (max_index - expected);
}

double normal_quantile(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * (1.0 + std::erf(mid / std::sqrt(2.0))) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace rfpca::testing
