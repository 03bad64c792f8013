#pragma once

// kNN device classification and the evaluation metrics reported for it.

#include <cstdint>
#include <string>
#include <vector>

namespace btfp {

struct LabeledRow {
    std::vector<double> features;  // [cfo_hz, scaling_factor]
    std::string label;
};

struct LabeledDataset {
    std::vector<LabeledRow> rows;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
    std::size_t dimension() const { return rows.empty() ? 0 : rows.front().features.size(); }
    std::vector<std::string> labels() const;  // sorted, distinct

    // Throws ParameterError on non-finite values or ragged dimensions.
    void validate() const;
};

struct TrainTestSplit {
    LabeledDataset train;
    LabeledDataset test;
};

/// Per class, round(count * test_fraction) rows go to the test set, chosen by
/// a seeded shuffle. Row order within each output follows the input order.
TrainTestSplit split_stratified(const LabeledDataset& data, double test_fraction, std::uint64_t seed);

struct FeatureScale {
    double mean = 0.0;
    double stddev = 1.0;
    bool constant = false;  // excluded from the distance
};

class KnnModel {
public:
    static KnnModel fit(const LabeledDataset& train, int k);

    /// Majority label of the k nearest training rows in z-scored feature
    /// space. Distance ties at rank k go to the lower training index; vote
    /// ties go to the lexicographically smallest label.
    std::string predict(const std::vector<double>& features) const;

    int k() const { return k_; }
    const std::vector<FeatureScale>& scales() const { return scales_; }
    const LabeledDataset& training() const { return train_; }
    const std::vector<std::string>& labels() const { return labels_; }

    // Training row i in normalised space, column-major: normalized()[d][i].
    const std::vector<std::vector<double>>& normalized() const { return columns_; }
    std::vector<double> normalize(const std::vector<double>& features) const;

private:
    LabeledDataset train_;
    int k_ = 1;
    std::vector<FeatureScale> scales_;
    std::vector<std::vector<double>> columns_;
    std::vector<std::string> labels_;
    std::vector<int> label_ids_;
};

enum class Averaging { weighted, macro };

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

struct EvalReport {
    std::vector<std::string> labels;                 // sorted; matrix order
    std::vector<std::vector<std::int64_t>> confusion;  // rows true, columns predicted
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    Averaging averaging = Averaging::weighted;
    std::vector<ClassMetrics> per_class;
};

/// Metrics from a square confusion matrix. Classes never predicted get
/// precision 0; averages are support-weighted unless `averaging` is macro.
EvalReport metrics_from_confusion(const std::vector<std::string>& labels,
                                  const std::vector<std::vector<std::int64_t>>& confusion,
                                  Averaging averaging = Averaging::weighted);

EvalReport evaluate(const KnnModel& model, const LabeledDataset& test,
                    Averaging averaging = Averaging::weighted);

struct NormalizedConfusion {
    std::vector<std::vector<double>> matrix;
    std::vector<bool> zero_rows;  // row had no samples; emitted as zeros
};

NormalizedConfusion confusion_normalize(const std::vector<std::vector<std::int64_t>>& confusion);

} // namespace btfp
