#include "btfp/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "btfp/error.hpp"
#include "btfp/kernels.hpp"

namespace btfp {

namespace {

// Uniform integer in [0, bound) by rejection; mt19937_64 output is fixed by
// the standard, so splits are identical across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

} // namespace

std::vector<std::string> LabeledDataset::labels() const {
    std::set<std::string> s;
    for (const auto& r : rows) s.insert(r.label);
    return {s.begin(), s.end()};
}

void LabeledDataset::validate() const {
    const std::size_t dim = dimension();
    for (const auto& r : rows) {
        if (r.features.size() != dim) throw ParameterError("dataset rows have different feature counts");
        for (double v : r.features)
            if (!std::isfinite(v)) throw ParameterError("dataset contains a non-finite feature value");
    }
}

TrainTestSplit split_stratified(const LabeledDataset& data, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw ParameterError("test fraction must lie in [0, 1)");
    data.validate();
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < data.rows.size(); ++i) by_label[data.rows[i].label].push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<bool> to_test(data.rows.size(), false);
    for (auto& [label, idx] : by_label) {
        const auto ntest = static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * test_fraction));
        if (ntest >= idx.size())
            throw ParameterError("class '" + label + "' would have no training rows");
        for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[bounded(rng, i + 1)]);
        for (std::size_t j = 0; j < ntest; ++j) to_test[idx[j]] = true;
    }

    TrainTestSplit out;
    for (std::size_t i = 0; i < data.rows.size(); ++i)
        (to_test[i] ? out.test : out.train).rows.push_back(data.rows[i]);
    return out;
}

KnnModel KnnModel::fit(const LabeledDataset& train, int k) {
    train.validate();
    if (train.empty()) throw ParameterError("cannot fit kNN on an empty training set");
    if (k < 1 || static_cast<std::size_t>(k) > train.size())
        throw ParameterError("k = " + std::to_string(k) + " is invalid for " + std::to_string(train.size()) +
                             " training rows");
    KnnModel m;
    m.train_ = train;
    m.k_ = k;
    m.labels_ = train.labels();

    const std::size_t n = train.size(), dim = train.dimension();
    m.scales_.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        double sum = 0.0;
        for (const auto& r : train.rows) sum += r.features[d];
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (const auto& r : train.rows) ss += (r.features[d] - mean) * (r.features[d] - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        auto& s = m.scales_[d];
        s.mean = mean;
        s.constant = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
        s.stddev = s.constant ? 1.0 : sd;
    }

    m.columns_.assign(dim, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto z = m.normalize(train.rows[i].features);
        for (std::size_t d = 0; d < dim; ++d) m.columns_[d][i] = z[d];
    }
    m.label_ids_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        m.label_ids_[i] = static_cast<int>(
            std::lower_bound(m.labels_.begin(), m.labels_.end(), train.rows[i].label) - m.labels_.begin());
    return m;
}

std::vector<double> KnnModel::normalize(const std::vector<double>& features) const {
    if (features.size() != scales_.size())
        throw ParameterError("query has " + std::to_string(features.size()) + " features, model expects " +
                             std::to_string(scales_.size()));
    std::vector<double> z(features.size());
    for (std::size_t d = 0; d < z.size(); ++d)
        z[d] = scales_[d].constant ? 0.0 : (features[d] - scales_[d].mean) / scales_[d].stddev;
    return z;
}

std::string KnnModel::predict(const std::vector<double>& features) const {
    const auto q = normalize(features);
    const std::size_t n = train_.size();
    std::vector<double> dist(n, 0.0);
    if (q.size() == 2) {
        kernels::active().sq_dist2(columns_[0], columns_[1], q[0], q[1], dist);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t d = 0; d < q.size(); ++d) {
                const double diff = columns_[d][i] - q[d];
                acc += diff * diff;
            }
            dist[i] = acc;
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto closer = [&](std::size_t a, std::size_t b) {
        return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    };
    const auto kk = static_cast<std::size_t>(k_);
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kk - 1), order.end(), closer);

    std::vector<int> votes(labels_.size(), 0);
    for (std::size_t j = 0; j < kk; ++j) ++votes[static_cast<std::size_t>(label_ids_[order[j]])];
    const auto best = std::max_element(votes.begin(), votes.end());  // first max = smallest label
    return labels_[static_cast<std::size_t>(best - votes.begin())];
}

EvalReport metrics_from_confusion(const std::vector<std::string>& labels,
                                  const std::vector<std::vector<std::int64_t>>& confusion,
                                  Averaging averaging) {
    const std::size_t L = labels.size();
    if (confusion.size() != L) throw ParameterError("confusion matrix size does not match the label count");
    for (const auto& row : confusion)
        if (row.size() != L) throw ParameterError("confusion matrix is not square");

    EvalReport rep;
    rep.labels = labels;
    rep.confusion = confusion;
    rep.averaging = averaging;

    std::int64_t total = 0, trace = 0;
    std::vector<std::int64_t> row_sum(L, 0), col_sum(L, 0);
    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = 0; j < L; ++j) {
            if (confusion[i][j] < 0) throw ParameterError("negative confusion count");
            row_sum[i] += confusion[i][j];
            col_sum[j] += confusion[i][j];
            total += confusion[i][j];
        }
        trace += confusion[i][i];
    }
    if (total == 0) throw ParameterError("confusion matrix is empty");
    const double tot = static_cast<double>(total);
    rep.accuracy = static_cast<double>(trace) / tot;

    double wp = 0.0, wr = 0.0, wf = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        ClassMetrics c;
        c.label = labels[i];
        c.support = row_sum[i];
        const double tp = static_cast<double>(confusion[i][i]);
        c.precision = col_sum[i] > 0 ? tp / static_cast<double>(col_sum[i]) : 0.0;
        c.recall = row_sum[i] > 0 ? tp / static_cast<double>(row_sum[i]) : 0.0;
        c.f1 = c.precision + c.recall > 0.0 ? 2.0 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
        const double w = averaging == Averaging::weighted ? static_cast<double>(row_sum[i]) : 1.0;
        wp += w * c.precision;
        // Support-weighted recall is trace / total; adding tp keeps it exactly equal to accuracy.
        wr += averaging == Averaging::weighted ? tp : c.recall;
        wf += w * c.f1;
        rep.per_class.push_back(c);
    }
    const double norm = averaging == Averaging::weighted ? tot : static_cast<double>(L);
    rep.precision = wp / norm;
    rep.recall = wr / norm;
    rep.f1 = wf / norm;
    return rep;
}

EvalReport evaluate(const KnnModel& model, const LabeledDataset& test, Averaging averaging) {
    if (test.empty()) throw ParameterError("test set is empty");
    std::set<std::string> all(model.labels().begin(), model.labels().end());
    for (const auto& r : test.rows) all.insert(r.label);
    const std::vector<std::string> labels(all.begin(), all.end());
    const auto index = [&](const std::string& l) {
        return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), l) - labels.begin());
    };

    std::vector<std::vector<std::int64_t>> confusion(labels.size(), std::vector<std::int64_t>(labels.size(), 0));
    for (const auto& r : test.rows) ++confusion[index(r.label)][index(model.predict(r.features))];
    return metrics_from_confusion(labels, confusion, averaging);
}

NormalizedConfusion confusion_normalize(const std::vector<std::vector<std::int64_t>>& confusion) {
    NormalizedConfusion out;
    for (const auto& row : confusion) {
        const std::int64_t sum = std::accumulate(row.begin(), row.end(), std::int64_t{0});
        std::vector<double> r(row.size(), 0.0);
        if (sum > 0)
            for (std::size_t j = 0; j < row.size(); ++j)
                r[j] = static_cast<double>(row[j]) / static_cast<double>(sum);
        out.zero_rows.push_back(sum <= 0);
        out.matrix.push_back(std::move(r));
    }
    return out;
}

} // namespace btfp
