#pragma once

// C-SVC trained by SMO with second-order working-set selection (the LIBSVM
// scheme, without shrinking), plus Platt scaling on out-of-fold decision
// values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <list>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "plagdet/classifiers/feature_matrix.hpp"
#include "plagdet/common.hpp"
#include "plagdet/rng.hpp"

namespace plagdet::classifiers {

enum class KernelType { linear, poly, rbf };

inline KernelType parse_kernel(const std::string& s)
{
    if (s == "linear")
        return KernelType::linear;
    if (s == "poly")
        return KernelType::poly;
    if (s == "rbf")
        return KernelType::rbf;
    throw Error("unknown kernel '" + s + "'");
}

inline std::string kernel_name(KernelType k)
{
    switch (k) {
    case KernelType::linear: return "linear";
    case KernelType::poly: return "poly";
    case KernelType::rbf: return "rbf";
    }
    return "?";
}

struct Kernel {
    KernelType type = KernelType::poly;
    int degree = 2;
    double gamma = 1.0;
    double coef0 = 0.0;

    /// Kernel value from the inner product and, for rbf, the squared norms.
    double from_dot(double xy, double xx, double yy) const
    {
        switch (type) {
        case KernelType::linear: return xy;
        case KernelType::poly: return std::pow(gamma * xy + coef0, degree);
        case KernelType::rbf: return std::exp(-gamma * std::max(0.0, xx + yy - 2.0 * xy));
        }
        return 0.0;
    }

    double operator()(std::span<const double> a, std::span<const double> b) const
    {
        const double xy = dot(a, b);
        if (type != KernelType::rbf)
            return from_dot(xy, 0.0, 0.0);
        return from_dot(xy, dot(a, a), dot(b, b));
    }

    bool operator==(const Kernel&) const = default;
};

/// gamma = 1 / (d * Var(X)) over all matrix entries; 1 when X is constant.
inline double gamma_scale(const FeatureMatrix& data)
{
    double sum = 0.0, sum2 = 0.0;
    const double count = static_cast<double>(data.size() * data.dim());
    for (const auto& r : data.rows)
        for (double v : r) {
            sum += v;
            sum2 += v * v;
        }
    const double mean = sum / count;
    const double var = std::max(0.0, sum2 / count - mean * mean);
    return var > 0.0 ? 1.0 / (static_cast<double>(data.dim()) * var) : 1.0;
}

struct SvmModel {
    Kernel kernel;
    std::vector<Vector> support;
    Vector coef; ///< y_i * alpha_i per support vector
    double rho = 0.0;
    double platt_a = -1.0;
    double platt_b = 0.0;

    double decision(std::span<const double> x) const
    {
        double f = -rho;
        for (size_t i = 0; i < support.size(); ++i)
            f += coef[i] * kernel(support[i], x);
        return f;
    }

    double predict_proba(std::span<const double> x) const
    {
        return sigmoid(-(platt_a * decision(x) + platt_b));
    }

    bool operator==(const SvmModel&) const = default;
};

struct SmoOptions {
    double C = 1.0;
    double tol = 1e-3;
    long long max_iter = -1; ///< <= 0: no cap
    size_t cache_bytes = size_t{512} << 20;
};

struct SmoResult {
    Vector alpha;
    double rho = 0.0;
    size_t iterations = 0;
    bool hit_max_iter = false;
};

namespace detail {

// Kernel rows on demand with LRU eviction.
class KernelCache {
public:
    KernelCache(const FeatureMatrix& data, const Kernel& kernel, size_t budget_bytes) : kernel_(kernel)
    {
        const auto n = static_cast<Eigen::Index>(data.size());
        const auto d = static_cast<Eigen::Index>(data.dim());
        x_.resize(n, d);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                x_(i, j) = data.rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
        sq_ = x_.rowwise().squaredNorm();
        const size_t row_bytes = std::max<size_t>(1, data.size() * sizeof(double));
        capacity_ = std::max<size_t>(2, budget_bytes / row_bytes);
        rows_.resize(data.size());
        where_.resize(data.size(), lru_.end());
        diag_.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i)
            diag_[i] = kernel_.from_dot(sq_(static_cast<Eigen::Index>(i)), sq_(static_cast<Eigen::Index>(i)),
                                        sq_(static_cast<Eigen::Index>(i)));
    }

    double diag(size_t i) const { return diag_[i]; }

    const Vector& row(size_t i)
    {
        if (!rows_[i].empty()) {
            lru_.erase(where_[i]);
            lru_.push_front(i);
            where_[i] = lru_.begin();
            return rows_[i];
        }
        if (lru_.size() >= capacity_) {
            const size_t victim = lru_.back();
            lru_.pop_back();
            Vector().swap(rows_[victim]);
            where_[victim] = lru_.end();
        }
        const Eigen::VectorXd dots = x_ * x_.row(static_cast<Eigen::Index>(i)).transpose();
        Vector r(static_cast<size_t>(dots.size()));
        const double sqi = sq_(static_cast<Eigen::Index>(i));
        for (Eigen::Index t = 0; t < dots.size(); ++t)
            r[static_cast<size_t>(t)] = kernel_.from_dot(dots(t), sqi, sq_(t));
        rows_[i] = std::move(r);
        lru_.push_front(i);
        where_[i] = lru_.begin();
        return rows_[i];
    }

private:
    Kernel kernel_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x_;
    Eigen::VectorXd sq_;
    std::vector<Vector> rows_;
    std::list<size_t> lru_;
    std::vector<std::list<size_t>::iterator> where_;
    Vector diag_;
    size_t capacity_ = 2;
};

} // namespace detail

/// Solves min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0, Q_ij = y_i y_j K_ij.
inline SmoResult solve_smo(const FeatureMatrix& data, const Kernel& kernel, const SmoOptions& opt)
{
    constexpr double tau = 1e-12;
    const size_t n = data.size();
    std::vector<double> y(n);
    for (size_t i = 0; i < n; ++i)
        y[i] = data.labels[i] == 1 ? 1.0 : -1.0;
    const double C = opt.C;

    detail::KernelCache cache(data, kernel, opt.cache_bytes);
    Vector alpha(n, 0.0), grad(n, -1.0);
    const long long cap = opt.max_iter > 0 ? opt.max_iter : 10'000'000LL;

    SmoResult res;
    while (true) {
        // working set selection (second order)
        double gmax = -std::numeric_limits<double>::infinity();
        double gmax2 = -std::numeric_limits<double>::infinity();
        long long i_sel = -1, j_sel = -1;
        double obj_min = std::numeric_limits<double>::infinity();
        for (size_t t = 0; t < n; ++t) {
            if (y[t] > 0) {
                if (alpha[t] < C && -grad[t] >= gmax) {
                    gmax = -grad[t];
                    i_sel = static_cast<long long>(t);
                }
            } else if (alpha[t] > 0 && grad[t] >= gmax) {
                gmax = grad[t];
                i_sel = static_cast<long long>(t);
            }
        }
        if (i_sel < 0)
            break;
        const auto i = static_cast<size_t>(i_sel);
        const Vector& ki = cache.row(i);
        for (size_t t = 0; t < n; ++t) {
            const double qit = y[i] * y[t] * ki[t];
            if (y[t] > 0) {
                if (alpha[t] > 0) {
                    const double gd = gmax + grad[t];
                    gmax2 = std::max(gmax2, grad[t]);
                    if (gd > 0) {
                        double quad = cache.diag(i) + cache.diag(t) - 2.0 * y[i] * qit;
                        const double obj = -(gd * gd) / (quad > 0 ? quad : tau);
                        if (obj <= obj_min) {
                            obj_min = obj;
                            j_sel = static_cast<long long>(t);
                        }
                    }
                }
            } else if (alpha[t] < C) {
                const double gd = gmax - grad[t];
                gmax2 = std::max(gmax2, -grad[t]);
                if (gd > 0) {
                    double quad = cache.diag(i) + cache.diag(t) + 2.0 * y[i] * qit;
                    const double obj = -(gd * gd) / (quad > 0 ? quad : tau);
                    if (obj <= obj_min) {
                        obj_min = obj;
                        j_sel = static_cast<long long>(t);
                    }
                }
            }
        }
        if (gmax + gmax2 < opt.tol || j_sel < 0)
            break;
        if (static_cast<long long>(res.iterations) >= cap) {
            res.hit_max_iter = true;
            break;
        }
        ++res.iterations;

        const auto j = static_cast<size_t>(j_sel);
        const Vector kj = cache.row(j);
        const Vector& kir = cache.row(i);
        const double qij = y[i] * y[j] * kir[j];
        const double old_ai = alpha[i], old_aj = alpha[j];

        if (y[i] != y[j]) {
            double quad = cache.diag(i) + cache.diag(j) + 2.0 * qij;
            if (quad <= 0)
                quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = -diff;
            }
            if (diff > 0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = cache.diag(i) + cache.diag(j) - 2.0 * qij;
            if (quad <= 0)
                quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
        }

        const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
        for (size_t t = 0; t < n; ++t)
            grad[t] += y[t] * (y[i] * kir[t] * dai + y[j] * kj[t] * daj);
    }

    // rho: mean over free vectors, else midpoint of the feasible interval
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    size_t n_free = 0;
    for (size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= C) {
            if (y[t] < 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else if (alpha[t] <= 0) {
            if (y[t] > 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    res.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    res.alpha = std::move(alpha);
    return res;
}

/// Decision function from solved duals; keeps only alpha > 0.
inline SvmModel build_svm(const FeatureMatrix& data, const Kernel& kernel, const SmoResult& smo)
{
    SvmModel m;
    m.kernel = kernel;
    m.rho = smo.rho;
    for (size_t i = 0; i < data.size(); ++i) {
        if (smo.alpha[i] > 0) {
            m.support.push_back(data.rows[i]);
            m.coef.push_back((data.labels[i] == 1 ? 1.0 : -1.0) * smo.alpha[i]);
        }
    }
    return m;
}

/// Fits P(y = 1 | f) = 1 / (1 + exp(A f + B)) by Newton's method with
/// backtracking, using Platt's smoothed targets.
inline std::pair<double, double> fit_platt(const Vector& dec, const std::vector<int>& labels)
{
    double prior1 = 0, prior0 = 0;
    for (int l : labels)
        (l == 1 ? prior1 : prior0) += 1;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);
    const size_t n = dec.size();
    Vector t(n);
    for (size_t i = 0; i < n; ++i)
        t[i] = labels[i] == 1 ? hi : lo;

    auto objective = [&](double a, double b) {
        double f = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double z = dec[i] * a + b;
            f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return f;
    };

    double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
    double fval = objective(a, b);
    constexpr double sigma = 1e-12, eps = 1e-5, min_step = 1e-10;
    for (int it = 0; it < 100; ++it) {
        double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double z = dec[i] * a + b;
            double p, q;
            if (z >= 0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            const double d2 = p * q;
            h11 += dec[i] * dec[i] * d2;
            h22 += d2;
            h21 += dec[i] * d2;
            const double d1 = t[i] - p;
            g1 += dec[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps)
            break;
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double step = 1.0;
        while (step >= min_step) {
            const double na = a + step * da, nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < min_step)
            break;
    }
    return {a, b};
}

struct SvcOptions {
    SmoOptions smo;
    Kernel kernel; ///< gamma already resolved
    size_t platt_folds = 3;
};

struct SvcFit {
    SvmModel model;
    std::vector<std::string> warnings;
};

/// Trains on all rows, then calibrates A, B on stratified out-of-fold
/// decision values.
inline SvcFit fit_svc(const FeatureMatrix& data, const SvcOptions& opt, std::uint64_t seed)
{
    constexpr size_t kMaxRows = 20000;
    if (data.size() > kMaxRows)
        throw Error("svc: " + std::to_string(data.size()) + " rows exceeds the SMO limit of " +
                    std::to_string(kMaxRows));
    require(opt.smo.C > 0.0, "svc: C must be positive");

    SvcFit out;
    const SmoResult full = solve_smo(data, opt.kernel, opt.smo);
    if (full.hit_max_iter)
        out.warnings.push_back("svc: SMO stopped at max_iter=" + std::to_string(opt.smo.max_iter) +
                               " before reaching tol");
    out.model = build_svm(data, opt.kernel, full);

    const size_t k = opt.platt_folds;
    Vector dec(data.size(), 0.0);
    if (data.positives() < k || data.negatives() < k) {
        out.warnings.push_back("svc: too few rows per class for out-of-fold Platt scaling; using in-sample values");
        for (size_t i = 0; i < data.size(); ++i)
            dec[i] = out.model.decision(data.rows[i]);
    } else {
        Rng rng(seed);
        std::vector<size_t> fold(data.size());
        for (int c = 0; c < 2; ++c) {
            std::vector<size_t> members;
            for (size_t i = 0; i < data.size(); ++i)
                if (data.labels[i] == c)
                    members.push_back(i);
            rng.shuffle(std::span<size_t>(members));
            for (size_t r = 0; r < members.size(); ++r)
                fold[members[r]] = r % k;
        }
        for (size_t f = 0; f < k; ++f) {
            FeatureMatrix train;
            for (size_t i = 0; i < data.size(); ++i)
                if (fold[i] != f)
                    train.add(data.rows[i], data.labels[i]);
            const SvmModel part = build_svm(train, opt.kernel, solve_smo(train, opt.kernel, opt.smo));
            for (size_t i = 0; i < data.size(); ++i)
                if (fold[i] == f)
                    dec[i] = part.decision(data.rows[i]);
        }
    }
    std::tie(out.model.platt_a, out.model.platt_b) = fit_platt(dec, data.labels);
    return out;
}

} // namespace plagdet::classifiers
