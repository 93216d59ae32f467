#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "vitalsel/core/error.hpp"

namespace vitalsel {

// Fraction of positions where prediction and truth agree.
inline double accuracy(std::span<const int> pred, std::span<const int> truth)
{
    if (pred.size() != truth.size()) {
        throw InvalidArgument("accuracy: prediction and truth lengths differ");
    }
    if (pred.empty()) {
        throw InvalidArgument("accuracy: empty input");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        hits += pred[i] == truth[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

// Rows are indexed by truth, columns by prediction.
struct ConfusionMatrix {
    std::vector<int> labels;
    std::vector<std::vector<long long>> counts;

    [[nodiscard]] long long total() const
    {
        long long t = 0;
        for (const auto& r : counts) {
            for (auto c : r) {
                t += c;
            }
        }
        return t;
    }

    [[nodiscard]] long long trace() const
    {
        long long t = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            t += counts[i][i];
        }
        return t;
    }

    [[nodiscard]] double accuracy() const
    {
        const auto t = total();
        return t == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(t);
    }

    ConfusionMatrix& operator+=(const ConfusionMatrix& other)
    {
        if (other.labels != labels) {
            throw InvalidArgument("ConfusionMatrix: label sets differ");
        }
        for (std::size_t i = 0; i < counts.size(); ++i) {
            for (std::size_t j = 0; j < counts.size(); ++j) {
                counts[i][j] += other.counts[i][j];
            }
        }
        return *this;
    }

    // Each row divided by its sum; empty rows stay zero.
    [[nodiscard]] std::vector<std::vector<double>> row_normalized() const
    {
        std::vector<std::vector<double>> out(counts.size(), std::vector<double>(counts.size(), 0.0));
        for (std::size_t i = 0; i < counts.size(); ++i) {
            long long s = 0;
            for (auto c : counts[i]) {
                s += c;
            }
            if (s > 0) {
                for (std::size_t j = 0; j < counts.size(); ++j) {
                    out[i][j] = static_cast<double>(counts[i][j]) / static_cast<double>(s);
                }
            }
        }
        return out;
    }
};

inline ConfusionMatrix empty_confusion(std::vector<int> labels)
{
    ConfusionMatrix cm;
    cm.labels = std::move(labels);
    cm.counts.assign(cm.labels.size(), std::vector<long long>(cm.labels.size(), 0));
    return cm;
}

inline ConfusionMatrix confusion(std::span<const int> pred, std::span<const int> truth, std::vector<int> labels)
{
    if (pred.size() != truth.size()) {
        throw InvalidArgument("confusion: prediction and truth lengths differ");
    }
    if (pred.empty()) {
        throw InvalidArgument("confusion: empty input");
    }
    auto cm = empty_confusion(std::move(labels));
    auto index_of = [&](int label) {
        const auto it = std::find(cm.labels.begin(), cm.labels.end(), label);
        if (it == cm.labels.end()) {
            throw InvalidArgument("confusion: label " + std::to_string(label) + " not in label list");
        }
        return static_cast<std::size_t>(it - cm.labels.begin());
    };
    for (std::size_t i = 0; i < pred.size(); ++i) {
        cm.counts[index_of(truth[i])][index_of(pred[i])]++;
    }
    return cm;
}

// CSV with a header row of predicted labels and one row per true label.
template <typename LabelName>
std::string confusion_csv(const ConfusionMatrix& cm, LabelName&& name)
{
    std::string out = "truth\\pred";
    for (int l : cm.labels) {
        out += "," + name(l);
    }
    out += "\n";
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        out += name(cm.labels[i]);
        for (auto c : cm.counts[i]) {
            out += "," + std::to_string(c);
        }
        out += "\n";
    }
    return out;
}

inline std::string confusion_csv(const ConfusionMatrix& cm)
{
    return confusion_csv(cm, [](int l) { return std::to_string(l); });
}

} // namespace vitalsel
