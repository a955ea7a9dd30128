#ifndef ARC_PREDICTOR_HPP
#define ARC_PREDICTOR_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "arc/engine.hpp"

namespace arc {

// Hardware-counter features, each a rate per 1M profiled instructions except
// the two bus utilizations, which are ratios in [0, 1].
namespace features {
inline constexpr const char* kL1dHits = "l1d_hits";
inline constexpr const char* kL1dReadAccesses = "l1d_read_accesses";
inline constexpr const char* kL1dReadMisses = "l1d_read_misses";
inline constexpr const char* kL1dTotalMisses = "l1d_total_misses";
inline constexpr const char* kL1iTotalMisses = "l1i_total_misses";
inline constexpr const char* kMemIdleTime = "mem_idle_time";
inline constexpr const char* kMemReadHits = "mem_read_hits";
inline constexpr const char* kMemBusUtilRead = "mem_bus_util_read";
inline constexpr const char* kMemBusUtilWrite = "mem_bus_util_write";

std::vector<std::string> universe();
// Feature set each constraint's model is trained on.
std::vector<std::string> for_constraint(Constraint c);
}  // namespace features

class FeatureVector {
public:
    void set(const std::string& name, double value) { values_[name] = value; }
    bool has(const std::string& name) const { return values_.contains(name); }
    // Throws std::invalid_argument if absent.
    double at(const std::string& name) const;
    const std::map<std::string, double>& values() const { return values_; }
    // Values in the order of `names`.
    std::vector<double> row(std::span<const std::string> names) const;

private:
    std::map<std::string, double> values_;
};

FeatureVector extract_features(const RunResult& window);

struct TrainingSet {
    std::vector<std::string> feature_names;
    std::vector<std::string> labels;  // class names, in core order
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> targets;  // index into labels
    std::string provenance;

    void add(const FeatureVector& fv, const std::string& label);
    std::size_t size() const { return rows.size(); }
    void validate() const;
};

double gini(std::span<const std::uint64_t> class_counts);

struct TreeParams {
    int max_depth = 5;
    std::size_t min_samples_leaf = 1;
};

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int parent = -1;
    int depth = 0;
    std::vector<std::uint64_t> class_counts;

    bool is_leaf() const { return feature < 0; }
    std::uint64_t samples() const;
    // Most frequent class; ties go to the lower index.
    std::size_t majority() const;
};

/// CART classifier over named numeric features. Nodes are stored in pre-order;
/// `value <= threshold` descends left.
class DecisionTree {
public:
    DecisionTree() = default;

    const std::vector<std::string>& feature_names() const { return features_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeParams& params() const { return params_; }
    std::map<std::string, std::string>& metadata() { return metadata_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }

    const std::string& predict(const FeatureVector& fv) const;
    std::size_t predict_row(std::span<const double> row) const;
    std::size_t leaf_for(std::span<const double> row) const;

    // Every label, best first: leaf class mass, then class mass of the
    // nearest ancestors' other branches, then label order.
    std::vector<std::string> rank(const FeatureVector& fv) const;

    int depth() const;
    std::size_t leaf_count() const;
    // Total weighted Gini decrease per feature, normalized to sum to 1 (all
    // zero for a leaf-only tree).
    std::vector<double> feature_importance() const;

    std::string serialize() const;
    static DecisionTree deserialize(const std::string& text);
    void save(const std::string& path) const;
    static DecisionTree load(const std::string& path);

    bool operator==(const DecisionTree&) const;

private:
    friend DecisionTree train_tree(const TrainingSet& data, const TreeParams& params);

    std::vector<std::string> features_;
    std::vector<std::string> labels_;
    std::vector<TreeNode> nodes_;
    TreeParams params_;
    std::map<std::string, std::string> metadata_;
};

// Greedy CART with Gini splitting. Candidate thresholds are midpoints between
// consecutive distinct values; ties keep the lower feature index, then the
// lower threshold.
DecisionTree train_tree(const TrainingSet& data, const TreeParams& params = {});

std::string predict(const DecisionTree& tree, const FeatureVector& fv);
std::vector<std::string> rank_labels(const DecisionTree& tree, const FeatureVector& fv);

struct FeatureSelection {
    std::vector<std::string> features;
    std::vector<double> importance;  // aligned with `features`
    bool clamped = false;            // k exceeded the available features
};

FeatureSelection select_features(const TrainingSet& data, std::size_t k, const TreeParams& params = {});

// Ground-truth label: the best core from an exhaustive sweep.
std::string label_oracle(std::span<const TraceEvent> events, const ArcSystem& system, const PowerModel& power,
                         Constraint constraint);

}  // namespace arc

#endif  // ARC_PREDICTOR_HPP
