#include "prog/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace prog::metrics {

double rmse(const std::vector<double>& predictions, const std::vector<double>& targets) {
    if (predictions.size() != targets.size()) {
        throw std::invalid_argument("rmse: size mismatch");
    }
    if (predictions.empty()) {
        throw std::invalid_argument("rmse: empty input");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(predictions.size()));
}

namespace {

// Sort descending by score and validate labels; returns positive/negative counts.
std::pair<std::size_t, std::size_t> prepare(std::vector<ScoredLabel>& items) {
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (const auto& it : items) {
        if (it.label != 0 && it.label != 1) {
            throw std::invalid_argument("auc: labels must be 0 or 1");
        }
        if (!std::isfinite(it.score)) {
            throw std::invalid_argument("auc: non-finite score");
        }
        if (it.label == 1) {
            ++pos;
        } else {
            ++neg;
        }
    }
    if (pos == 0 || neg == 0) {
        throw std::invalid_argument("auc: need at least one positive and one negative");
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });
    return {pos, neg};
}

}  // namespace

Curve roc_auc(const std::vector<ScoredLabel>& items) {
    std::vector<ScoredLabel> sorted = items;
    const auto [pos, neg] = prepare(sorted);

    Curve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    double tp = 0.0;
    double fp = 0.0;
    double prev_tp = 0.0;
    double prev_fp = 0.0;
    double area = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        // Consume one tie group: all items sharing this score move together.
        const double s = sorted[i].score;
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].score == s) {
            if (sorted[j].label == 1) {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            ++j;
        }
        // Trapezoid between consecutive group corners handles the tie
        // diagonal exactly (all-ties degenerates to area 0.5).
        area += (fp - prev_fp) * (tp + prev_tp) * 0.5;
        curve.points.push_back({fp / static_cast<double>(neg), tp / static_cast<double>(pos), s});
        prev_tp = tp;
        prev_fp = fp;
        i = j;
    }
    curve.area = area / (static_cast<double>(pos) * static_cast<double>(neg));
    return curve;
}

Curve pr_auc(const std::vector<ScoredLabel>& items) {
    std::vector<ScoredLabel> sorted = items;
    const auto [pos, neg] = prepare(sorted);
    (void)neg;

    Curve curve;
    double tp = 0.0;
    double fp = 0.0;
    double prev_recall = 0.0;
    double area = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double s = sorted[i].score;
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].score == s) {
            if (sorted[j].label == 1) {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            ++j;
        }
        const double recall = tp / static_cast<double>(pos);
        const double precision = tp / (tp + fp);
        area += (recall - prev_recall) * precision;
        curve.points.push_back({recall, precision, s});
        prev_recall = recall;
        i = j;
    }
    curve.area = area;
    return curve;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && v[order[j]] == v[order[i]]) {
            ++j;
        }
        // Ranks are 1-based; a tie group shares the mean of its positions.
        const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            ranks[order[k]] = mean_rank;
        }
        i = j;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("spearman: size mismatch");
    }
    if (x.size() < 2) {
        throw std::invalid_argument("spearman: need at least two samples");
    }
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw std::invalid_argument("spearman: constant input has no rank correlation");
    }
    return sxy / std::sqrt(sxx * syy);
}

ConfusionMatrix rul_confusion(const std::vector<double>& pred,
                              const std::vector<double>& truth,
                              const std::vector<double>& edges) {
    if (pred.size() != truth.size()) {
        throw std::invalid_argument("rul_confusion: size mismatch");
    }
    if (edges.size() < 2) {
        throw std::invalid_argument("rul_confusion: need at least one bin");
    }
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) {
            throw std::invalid_argument("rul_confusion: edges must be strictly increasing");
        }
    }
    const std::size_t bins = edges.size() - 1;
    ConfusionMatrix cm;
    cm.edges = edges;
    cm.counts.assign(bins, std::vector<std::size_t>(bins, 0));
    auto bin_of = [&](double v, bool& clipped) -> std::size_t {
        if (v < edges.front()) {
            clipped = true;
            return 0;
        }
        if (v >= edges.back()) {
            // The top edge itself belongs to the last bin; beyond it clips.
            clipped = v > edges.back();
            return bins - 1;
        }
        const auto it = std::upper_bound(edges.begin(), edges.end(), v);
        return static_cast<std::size_t>(it - edges.begin()) - 1;
    };
    for (std::size_t i = 0; i < pred.size(); ++i) {
        bool clip_t = false;
        bool clip_p = false;
        const std::size_t bt = bin_of(truth[i], clip_t);
        const std::size_t bp = bin_of(pred[i], clip_p);
        if (clip_t || clip_p) {
            ++cm.clipped;
        }
        ++cm.counts[bt][bp];
    }
    return cm;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::string to_json(const EvalReport& report) {
    std::ostringstream os;
    os << "{\n";
    if (report.has_rul) {
        os << "  \"rmse\": " << fmt(report.rmse) << ",\n";
    }
    os << "  \"auc_roc\": " << fmt(report.auc_roc) << ",\n";
    os << "  \"auc_pr\": " << fmt(report.auc_pr);
    if (report.has_spearman) {
        os << ",\n  \"spearman_consistency\": " << fmt(report.spearman_consistency);
    }
    if (!report.confusion.counts.empty()) {
        os << ",\n  \"confusion\": {\n    \"edges\": [";
        for (std::size_t i = 0; i < report.confusion.edges.size(); ++i) {
            os << (i ? ", " : "") << fmt(report.confusion.edges[i]);
        }
        os << "],\n    \"counts\": [";
        for (std::size_t r = 0; r < report.confusion.counts.size(); ++r) {
            os << (r ? ", [" : "[");
            for (std::size_t c = 0; c < report.confusion.counts[r].size(); ++c) {
                os << (c ? ", " : "") << report.confusion.counts[r][c];
            }
            os << "]";
        }
        os << "],\n    \"clipped\": " << report.confusion.clipped << "\n  }";
    }
    os << "\n}\n";
    return os.str();
}

}  // namespace prog::metrics
