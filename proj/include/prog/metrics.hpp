#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace prog::metrics {

// Score/label pair; higher score = more failure-likely.
struct ScoredLabel {
    double score = 0.0;
    int label = 0;
};

struct CurvePoint {
    double x = 0.0;  // FPR (ROC) or recall (PR)
    double y = 0.0;  // TPR (ROC) or precision (PR)
    double threshold = 0.0;
};

struct Curve {
    std::vector<CurvePoint> points;
    double area = 0.0;
};

double rmse(const std::vector<double>& predictions, const std::vector<double>& targets);

// Trapezoidal area over the (FPR, TPR) step curve; tied scores form one
// threshold group.
Curve roc_auc(const std::vector<ScoredLabel>& items);

// Average-precision form: sum of precision * recall increments over the
// descending-threshold sweep. Trapezoids over PR are known-biased.
Curve pr_auc(const std::vector<ScoredLabel>& items);

// Pearson correlation of average ranks (ties get the mean rank).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct ConfusionMatrix {
    std::vector<double> edges;        // strictly increasing, size bins + 1
    std::vector<std::vector<std::size_t>> counts;  // rows = true bin, cols = predicted bin
    std::size_t clipped = 0;          // values pushed into a boundary bin
};

ConfusionMatrix rul_confusion(const std::vector<double>& pred,
                              const std::vector<double>& truth,
                              const std::vector<double>& edges);

struct EvalReport {
    bool has_rul = false;
    double rmse = 0.0;
    double auc_roc = 0.0;
    double auc_pr = 0.0;
    bool has_spearman = false;
    double spearman_consistency = 0.0;
    ConfusionMatrix confusion;
};

std::string to_json(const EvalReport& report);

}  // namespace prog::metrics
