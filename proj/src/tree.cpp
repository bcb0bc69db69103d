#include "distfor/tree.hpp"

#include <algorithm>
#include <cmath>

#include "distfor/math.hpp"

namespace distfor {

namespace {

constexpr double kEigenTolerance = 1e-10;  // relative cut for pseudo-inverse spectra

// Moments of the permutation distribution of t = vec(sum g_i h_i'): with
// G = sum g g', the covariance is kron(V, W) where V is the score covariance
// and W = n/(n-1) G - 1/(n-1) (sum g)(sum g)'. vec stacks the p x k matrix
// column-wise, so component (j*p + a) pairs score column j with g component a.
struct PermutationMoments {
    Eigen::VectorXd t;
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    // magnitude of sigma's ingredients before cancellation; rank decisions
    // measure eigenvalues against this so an exactly-degenerate column (e.g. a
    // constant g) is not resurrected by rounding residue
    double scale_hint = 0.0;
};

PermutationMoments permutation_moments(const Eigen::MatrixXd& g, const Eigen::MatrixXd& h) {
    const int n = static_cast<int>(g.rows());
    const int p = static_cast<int>(g.cols());
    const int k = static_cast<int>(h.cols());

    PermutationMoments m;
    const Eigen::MatrixXd cross = g.transpose() * h;  // p x k
    const Eigen::VectorXd g_sum = g.colwise().sum();
    const Eigen::RowVectorXd h_mean = h.colwise().mean();

    m.t.resize(p * k);
    m.mu.resize(p * k);
    for (int j = 0; j < k; ++j)
        for (int a = 0; a < p; ++a) {
            m.t(j * p + a) = cross(a, j);
            m.mu(j * p + a) = g_sum(a) * h_mean(j);
        }

    const Eigen::MatrixXd hc = h.rowwise() - h_mean;
    const Eigen::MatrixXd v = (hc.transpose() * hc) / n;  // k x k
    const Eigen::MatrixXd w =
        (static_cast<double>(n) / (n - 1)) * (g.transpose() * g) - (g_sum * g_sum.transpose()) / (n - 1);

    m.sigma.resize(p * k, p * k);
    for (int j = 0; j < k; ++j)
        for (int j2 = 0; j2 < k; ++j2)
            m.sigma.block(j * p, j2 * p, p, p) = v(j, j2) * w;
    m.scale_hint = (static_cast<double>(n) / (n - 1)) * (g.transpose() * g).diagonal().maxCoeff() *
                   v.diagonal().maxCoeff();
    return m;
}

// x' M^+ x via the eigendecomposition; eigenvalues below the relative cut are
// treated as zero and df counts the retained ones.
struct QuadForm {
    double value = 0.0;
    int df = 0;
};

QuadForm quad_form(const Eigen::MatrixXd& m, const Eigen::VectorXd& x, double scale_hint = 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double cut = kEigenTolerance * std::fmax(scale_hint, ev.maxCoeff());
    QuadForm q;
    if (!(cut > 0.0)) return q;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) > cut) {
            const double proj = eig.eigenvectors().col(i).dot(x);
            q.value += proj * proj / ev(i);
            ++q.df;
        }
    }
    return q;
}

Eigen::MatrixXd pinv_psd(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double cut = kEigenTolerance * std::fmax(0.0, ev.maxCoeff());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
    if (!(cut > 0.0)) return out;
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) > cut) out += eig.eigenvectors().col(i) * eig.eigenvectors().col(i).transpose() / ev(i);
    return out;
}

}  // namespace

AssociationTest test_association(const Eigen::MatrixXd& scores, const Covariate& column, std::span<const int> rows,
                                 TestStatistic statistic) {
    AssociationTest out;
    std::vector<int> keep;  // local indices with a non-missing covariate value
    keep.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!column.is_missing(rows[i])) keep.push_back(static_cast<int>(i));
    if (keep.size() < 2) return out;

    const int n = static_cast<int>(keep.size());
    const int k = static_cast<int>(scores.cols());
    Eigen::MatrixXd h(n, k);
    for (int i = 0; i < n; ++i) h.row(i) = scores.row(keep[static_cast<std::size_t>(i)]);

    Eigen::MatrixXd g;
    if (column.kind == ColumnKind::numeric) {
        g.resize(n, 1);
        for (int i = 0; i < n; ++i)
            g(i, 0) = column.numeric[static_cast<std::size_t>(rows[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])])];
    } else {
        g = Eigen::MatrixXd::Zero(n, column.level_count());
        for (int i = 0; i < n; ++i) {
            const int code = column.codes[static_cast<std::size_t>(rows[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])])];
            g(i, code) = 1.0;
        }
    }

    const PermutationMoments m = permutation_moments(g, h);
    out.linear_statistic = m.t;
    out.mu = m.mu;
    out.sigma = m.sigma;

    const Eigen::VectorXd x = m.t - m.mu;
    if (statistic == TestStatistic::quad) {
        const QuadForm q = quad_form(m.sigma, x, m.scale_hint);
        if (q.df == 0) return out;
        out.df = q.df;
        out.statistic = q.value;
        out.p_value = chisq_sf(q.value, q.df);
    } else {
        // maximum absolute standardized component; p-value under the
        // independence approximation of the joint normal tail
        double c = 0.0;
        int df = 0;
        const double cut = kEigenTolerance * std::fmax(m.scale_hint, m.sigma.diagonal().maxCoeff());
        if (!(cut > 0.0)) return out;
        for (int i = 0; i < x.size(); ++i) {
            if (m.sigma(i, i) > cut) {
                c = std::fmax(c, std::fabs(x(i)) / std::sqrt(m.sigma(i, i)));
                ++df;
            }
        }
        out.df = df;
        out.statistic = c;
        out.p_value = 1.0 - std::pow(2.0 * norm_cdf(c) - 1.0, df);
    }
    out.degenerate = false;
    return out;
}

std::optional<int> select_variable(const std::vector<AssociationTest>& tests, double alpha) {
    int m_tested = 0;
    for (const AssociationTest& t : tests)
        if (!t.degenerate) ++m_tested;
    if (m_tested == 0) return std::nullopt;

    int best = -1;
    double best_adj = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < tests.size(); ++l) {
        if (tests[l].degenerate) continue;
        const double adj = std::fmin(1.0, m_tested * tests[l].p_value);
        if (adj < best_adj) {  // strict: ties go to the lowest variable index
            best_adj = adj;
            best = static_cast<int>(l);
        }
    }
    // alpha = 1 disables pre-pruning: any testable variable qualifies even
    // when its adjusted p-value caps at exactly 1.
    if (alpha >= 1.0 || best_adj < alpha) return best;
    return std::nullopt;
}

// ------------------------------- split search -------------------------------

namespace {

struct CandidateScan {
    Eigen::MatrixXd v_pinv;   // pseudo-inverse of the score covariance
    Eigen::VectorXd v_diag;   // diagonal of the score covariance
    Eigen::VectorXd h_mean;
    int n = 0;
    TestStatistic statistic = TestStatistic::quad;

    // Standardized statistic of the two-group score-sum statistic for a
    // candidate left group. With a binary indicator transformation the
    // permutation covariance is w * V with w = n_left (n - n_left) / (n - 1).
    double evaluate(const Eigen::VectorXd& left_sum, int n_left) const {
        const double w = static_cast<double>(n_left) * (n - n_left) / (n - 1.0);
        if (!(w > 0.0)) return 0.0;
        const Eigen::VectorXd x = left_sum - static_cast<double>(n_left) * h_mean;
        if (statistic == TestStatistic::quad) return x.dot(v_pinv * x) / w;
        double c = 0.0;
        const double cut = kEigenTolerance * std::fmax(0.0, v_diag.maxCoeff());
        for (int j = 0; j < x.size(); ++j)
            if (v_diag(j) > cut) c = std::fmax(c, std::fabs(x(j)) / std::sqrt(w * v_diag(j)));
        return c;
    }
};

bool improves(double cand, double best, bool have_best, SplitObjective objective) {
    if (!have_best) return true;
    return objective == SplitObjective::max_statistic ? cand > best : cand < best;
}

}  // namespace

std::optional<SplitRecord> select_split(const Eigen::MatrixXd& scores, const Covariate& column,
                                        std::span<const int> rows, std::span<const std::uint8_t> uncensored,
                                        const TreeConfig& config) {
    const int k = static_cast<int>(scores.cols());
    const int minb = std::max(1, config.minbucket);
    const int min_unc = std::max(0, config.min_uncensored_per_child);

    std::vector<int> keep;
    keep.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!column.is_missing(rows[i])) keep.push_back(static_cast<int>(i));
    const int n = static_cast<int>(keep.size());
    if (n < 2 * minb) return std::nullopt;

    Eigen::MatrixXd h(n, k);
    int total_unc = 0;
    for (int i = 0; i < n; ++i) {
        h.row(i) = scores.row(keep[static_cast<std::size_t>(i)]);
        total_unc += uncensored[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])] ? 1 : 0;
    }
    CandidateScan scan;
    scan.h_mean = h.colwise().mean();
    const Eigen::MatrixXd hc = h.rowwise() - scan.h_mean.transpose();
    const Eigen::MatrixXd v = (hc.transpose() * hc) / n;
    scan.v_pinv = pinv_psd(v);
    scan.v_diag = v.diagonal();
    scan.n = n;
    scan.statistic = config.statistic;

    SplitRecord best;
    double best_stat = 0.0;
    bool found = false;

    const auto value_at = [&](int local) {
        return column.numeric[static_cast<std::size_t>(rows[static_cast<std::size_t>(local)])];
    };
    const auto code_at = [&](int local) {
        return column.codes[static_cast<std::size_t>(rows[static_cast<std::size_t>(local)])];
    };

    if (column.kind == ColumnKind::numeric) {
        std::vector<int> order(keep);  // local indices, sorted by (value, row id)
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double va = value_at(a), vb = value_at(b);
            if (va != vb) return va < vb;
            return rows[static_cast<std::size_t>(a)] < rows[static_cast<std::size_t>(b)];
        });

        // prefix score sums / uncensored counts over the sorted order
        Eigen::MatrixXd prefix(n, k);
        std::vector<int> prefix_unc(static_cast<std::size_t>(n));
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(k);
        int acc_unc = 0;
        for (int i = 0; i < n; ++i) {
            const int local = order[static_cast<std::size_t>(i)];
            const auto it = std::lower_bound(keep.begin(), keep.end(), local);
            acc += h.row(static_cast<int>(it - keep.begin()));
            acc_unc += uncensored[static_cast<std::size_t>(local)] ? 1 : 0;
            prefix.row(i) = acc;
            prefix_unc[static_cast<std::size_t>(i)] = acc_unc;
        }

        std::vector<int> boundaries;  // left block ends at sorted position i
        for (int i = 0; i + 1 < n; ++i)
            if (value_at(order[static_cast<std::size_t>(i)]) != value_at(order[static_cast<std::size_t>(i + 1)]))
                boundaries.push_back(i);
        if (boundaries.empty()) return std::nullopt;

        // admissible boundaries form a contiguous index range: minbucket bounds
        // n_left on both sides and the uncensored prefix counts are monotone
        int first_ok = -1, last_ok = -1;
        for (std::size_t b = 0; b < boundaries.size(); ++b) {
            const int i = boundaries[b];
            const int n_left = i + 1;
            const int left_unc = prefix_unc[static_cast<std::size_t>(i)];
            const bool ok = n_left >= minb && n - n_left >= minb && left_unc >= min_unc &&
                            total_unc - left_unc >= min_unc;
            if (ok && first_ok < 0) first_ok = static_cast<int>(b);
            if (ok) last_ok = static_cast<int>(b);
        }
        if (first_ok < 0) return std::nullopt;

        const auto stat_at = [&](int b) {
            const int i = boundaries[static_cast<std::size_t>(b)];
            return scan.evaluate(prefix.row(i).transpose(), i + 1);
        };
        const auto record = [&](int b, double stat) {
            if (improves(stat, best_stat, found, config.split_objective)) {
                const int i = boundaries[static_cast<std::size_t>(b)];
                best.threshold = 0.5 * (value_at(order[static_cast<std::size_t>(i)]) +
                                        value_at(order[static_cast<std::size_t>(i + 1)]));
                best.statistic = stat;
                best_stat = stat;
                found = true;
            }
        };

        // staged search: at most max_split_candidates statistic evaluations per
        // stage, drilling into the winning gap until the grid is exact
        int lo = first_ok, hi = last_ok;
        while (true) {
            const int count = hi - lo + 1;
            if (count <= config.max_split_candidates) {
                for (int b = lo; b <= hi; ++b) record(b, stat_at(b));
                break;
            }
            const int q = config.max_split_candidates;
            double stage_best = 0.0;
            bool stage_found = false;
            int prev = -1;
            int below = lo, above = hi;
            for (int j = 0; j < q; ++j) {
                const int b = lo + static_cast<int>(static_cast<std::int64_t>(j) * (count - 1) / (q - 1));
                if (b == prev) continue;
                prev = b;
                const double stat = stat_at(b);
                record(b, stat);
                if (improves(stat, stage_best, stage_found, config.split_objective)) {
                    stage_best = stat;
                    stage_found = true;
                    below = std::max(lo, b - static_cast<int>((count - 1) / (q - 1)) - 1);
                    above = std::min(hi, b + static_cast<int>((count - 1) / (q - 1)) + 1);
                }
            }
            if (below == lo && above == hi) break;  // no shrink; accept the grid best
            lo = below;
            hi = above;
        }
    } else {
        const int n_levels = column.level_count();
        if (n_levels > 64) return std::nullopt;  // level masks are 64-bit
        std::vector<int> count(static_cast<std::size_t>(n_levels), 0);
        std::vector<int> unc(static_cast<std::size_t>(n_levels), 0);
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n_levels, k);
        for (int i = 0; i < n; ++i) {
            const int local = keep[static_cast<std::size_t>(i)];
            const int code = code_at(local);
            count[static_cast<std::size_t>(code)] += 1;
            unc[static_cast<std::size_t>(code)] += uncensored[static_cast<std::size_t>(local)] ? 1 : 0;
            sums.row(code) += h.row(i);
        }
        std::vector<int> observed;
        for (int l = 0; l < n_levels; ++l)
            if (count[static_cast<std::size_t>(l)] > 0) observed.push_back(l);
        const int n_obs = static_cast<int>(observed.size());
        if (n_obs < 2) return std::nullopt;

        const auto try_mask = [&](std::uint64_t mask) {
            int n_left = 0, left_unc = 0;
            Eigen::VectorXd left_sum = Eigen::VectorXd::Zero(k);
            for (int l : observed) {
                if ((mask >> l) & 1u) {
                    n_left += count[static_cast<std::size_t>(l)];
                    left_unc += unc[static_cast<std::size_t>(l)];
                    left_sum += sums.row(l).transpose();
                }
            }
            const int n_right = n - n_left;
            if (n_left < minb || n_right < minb) return;
            if (left_unc < min_unc || total_unc - left_unc < min_unc) return;
            const double stat = scan.evaluate(left_sum, n_left);
            if (improves(stat, best_stat, found, config.split_objective)) {
                best.left_levels = mask;
                best.statistic = stat;
                best_stat = stat;
                found = true;
            }
        };

        if (n_obs <= config.max_exhaustive_levels) {
            // all 2^(H-1) - 1 binary partitions of the observed levels; the
            // first observed level is pinned left so each partition appears once
            const std::uint64_t first_bit = 1ULL << observed[0];
            const int rest = n_obs - 1;
            for (std::uint64_t sub = 0; sub < (1ULL << rest); ++sub) {
                std::uint64_t mask = first_bit;
                for (int b = 0; b < rest; ++b)
                    if ((sub >> b) & 1u) mask |= 1ULL << observed[static_cast<std::size_t>(b + 1)];
                try_mask(mask);
            }
        } else {
            // too many levels: order by mean location-score and cut the order
            std::vector<std::pair<double, int>> ordered;
            ordered.reserve(static_cast<std::size_t>(n_obs));
            for (int l : observed)
                ordered.emplace_back(sums(l, 0) / count[static_cast<std::size_t>(l)], l);
            std::sort(ordered.begin(), ordered.end());
            std::uint64_t mask = 0;
            for (int j = 0; j + 1 < n_obs; ++j) {
                mask |= 1ULL << ordered[static_cast<std::size_t>(j)].second;
                try_mask(mask);
            }
        }
    }

    if (!found) return std::nullopt;
    return best;
}

// --------------------------------- growing ---------------------------------

namespace {

struct Grower {
    const Dataset& data;
    const DistributionFamily& family;
    const TreeConfig& config;
    Rng& rng;
    DistTree& tree;
    std::vector<std::uint8_t> uncensored_row;  // per training row

    int build(std::vector<int> rows, int depth, const ParamVector* parent_params) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(id)].size = static_cast<int>(rows.size());
        tree.nodes[static_cast<std::size_t>(id)].depth = depth;

        // step 1: refit the node MLE (never inherited from the parent)
        std::vector<double> ys(rows.size()), ws(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            ys[i] = data.y[static_cast<std::size_t>(rows[i])];
            ws[i] = data.weight(rows[i]);
        }
        FitResult fr;
        bool ok = true;
        try {
            fr = fit(family, WeightedSample{ys, ws});
        } catch (const NonConvergence& e) {
            fr = e.best;
            ok = false;
        } catch (const DegenerateSampleError&) {
            // a degenerate root has no usable parameters; deeper nodes fall
            // back to the parent estimate and stop
            if (parent_params == nullptr) throw;
            fr.theta = *parent_params;
            ok = false;
        }
        tree.nodes[static_cast<std::size_t>(id)].params = fr.theta;
        tree.nodes[static_cast<std::size_t>(id)].fit_converged = ok;

        const auto leaf = [&] {
            tree.nodes[static_cast<std::size_t>(id)].members = std::move(rows);
            return id;
        };
        if (!ok) return leaf();  // scores from an unconverged fit are unreliable
        if (static_cast<int>(rows.size()) < config.minsplit) return leaf();

        // step 2: score matrix at the node estimate
        const int k = family.param_count();
        Eigen::MatrixXd scores(static_cast<int>(rows.size()), k);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::vector<double> s = family.score(fr.theta, ys[i]);
            for (int j = 0; j < k; ++j) scores(static_cast<int>(i), j) = s[static_cast<std::size_t>(j)];
        }

        // candidate variables: fresh mtry draw per node
        std::vector<int> candidates;
        const int m = data.m();
        if (config.mtry > 0 && config.mtry < m) {
            candidates = rng.sample_without_replacement(m, config.mtry);
            std::sort(candidates.begin(), candidates.end());
        } else {
            candidates.resize(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j) candidates[static_cast<std::size_t>(j)] = j;
        }
        if (candidates.empty()) return leaf();

        // step 3: association tests and Bonferroni selection
        std::vector<AssociationTest> tests;
        tests.reserve(candidates.size());
        for (int var : candidates)
            tests.push_back(test_association(scores, data.covariate(var), rows, config.statistic));
        const std::optional<int> pick = select_variable(tests, config.alpha);
        if (!pick) return leaf();
        const int winner = candidates[static_cast<std::size_t>(*pick)];
        int m_tested = 0;
        for (const AssociationTest& t : tests) m_tested += t.degenerate ? 0 : 1;
        tree.nodes[static_cast<std::size_t>(id)].p_value =
            std::fmin(1.0, m_tested * tests[static_cast<std::size_t>(*pick)].p_value);

        // step 4: most discrepant admissible split point on the winner
        std::vector<std::uint8_t> unc(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) unc[i] = uncensored_row[static_cast<std::size_t>(rows[i])];
        std::optional<SplitRecord> split = select_split(scores, data.covariate(winner), rows, unc, config);
        if (!split) return leaf();
        split->variable = winner;

        // partition rows; missing values follow the larger non-missing side
        const Covariate& col = data.covariate(winner);
        const auto side_of = [&](int row) -> int {  // 0 left, 1 right, -1 missing
            if (col.is_missing(row)) return -1;
            if (col.kind == ColumnKind::numeric)
                return col.numeric[static_cast<std::size_t>(row)] <= split->threshold ? 0 : 1;
            return ((split->left_levels >> col.codes[static_cast<std::size_t>(row)]) & 1u) ? 0 : 1;
        };
        int n_left = 0, n_right = 0;
        for (int row : rows) {
            const int s = side_of(row);
            n_left += s == 0;
            n_right += s == 1;
        }
        split->missing_left = n_left >= n_right;

        std::vector<int> left_rows, right_rows;
        left_rows.reserve(static_cast<std::size_t>(n_left));
        right_rows.reserve(static_cast<std::size_t>(n_right));
        for (int row : rows) {
            const int s = side_of(row);
            if (s == 0 || (s < 0 && split->missing_left))
                left_rows.push_back(row);
            else
                right_rows.push_back(row);
        }
        tree.nodes[static_cast<std::size_t>(id)].split = *split;

        const ParamVector node_params = fr.theta;
        const int lid = build(std::move(left_rows), depth + 1, &node_params);
        const int rid = build(std::move(right_rows), depth + 1, &node_params);
        tree.nodes[static_cast<std::size_t>(id)].left = lid;
        tree.nodes[static_cast<std::size_t>(id)].right = rid;
        return id;
    }
};

}  // namespace

DistTree grow_on_rows(const Dataset& data, const DistributionFamily& family, const TreeConfig& config,
                      std::vector<int> rows, Rng& rng) {
    if (config.minbucket < 1) throw ConfigError("minbucket must be at least 1");
    if (config.minsplit < 2 * config.minbucket)
        throw ConfigError("minsplit must be at least twice minbucket");
    if (!(config.alpha > 0.0 && config.alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
    if (rows.empty()) throw DataError("cannot grow a tree on an empty sample");

    DistTree tree;
    tree.config = config;
    tree.n_training = data.n();
    std::sort(rows.begin(), rows.end());
    tree.root_rows = rows;

    Grower grower{data, family, config, rng, tree, {}};
    grower.uncensored_row.assign(static_cast<std::size_t>(data.n()), 0);
    const double censor = family.censoring_point();
    for (int i = 0; i < data.n(); ++i)
        grower.uncensored_row[static_cast<std::size_t>(i)] = data.y[static_cast<std::size_t>(i)] > censor ? 1 : 0;

    grower.build(std::move(rows), 0, nullptr);
    return tree;
}

DistTree grow(const Dataset& data, const DistributionFamily& family, const TreeConfig& config) {
    std::vector<int> rows(static_cast<std::size_t>(data.n()));
    for (int i = 0; i < data.n(); ++i) rows[static_cast<std::size_t>(i)] = i;
    Rng rng(config.seed);
    return grow_on_rows(data, family, config, std::move(rows), rng);
}

// --------------------------------- routing ---------------------------------

int DistTree::route(const Dataset& data, int row) const {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const SplitRecord& s = nodes[static_cast<std::size_t>(node)].split;
        const Covariate& col = data.covariate(s.variable);
        bool go_left;
        if (col.is_missing(row)) {
            go_left = s.missing_left;
        } else if (col.kind == ColumnKind::numeric) {
            go_left = col.numeric[static_cast<std::size_t>(row)] <= s.threshold;
        } else {
            go_left = (s.left_levels >> col.codes[static_cast<std::size_t>(row)]) & 1u;
        }
        node = go_left ? nodes[static_cast<std::size_t>(node)].left : nodes[static_cast<std::size_t>(node)].right;
    }
    return node;
}

std::vector<double> DistTree::weights_for(const Dataset& data, int row) const {
    std::vector<double> w(static_cast<std::size_t>(n_training), 0.0);
    const TreeNode& leaf = nodes[static_cast<std::size_t>(route(data, row))];
    for (int i : leaf.members) w[static_cast<std::size_t>(i)] = 1.0;
    return w;
}

int DistTree::depth() const {
    int d = 0;
    for (const TreeNode& n : nodes) d = std::max(d, n.depth);
    return d;
}

int DistTree::leaf_count() const {
    int c = 0;
    for (const TreeNode& n : nodes) c += n.is_leaf() ? 1 : 0;
    return c;
}

}  // namespace distfor
