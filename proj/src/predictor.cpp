#include "arc/predictor.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace arc {

namespace features {

std::vector<std::string> universe() {
    return {kL1dHits,     kL1dReadAccesses, kL1dReadMisses,   kL1dTotalMisses, kL1iTotalMisses,
            kMemIdleTime, kMemReadHits,     kMemBusUtilRead, kMemBusUtilWrite};
}

std::vector<std::string> for_constraint(Constraint c) {
    switch (c.kind) {
        case ConstraintKind::None:
            return {kL1dHits, kL1dReadMisses, kL1dTotalMisses, kL1iTotalMisses, kMemBusUtilRead};
        case ConstraintKind::Slack10:
        case ConstraintKind::BestPerformance:
            return {kL1dReadMisses, kMemIdleTime, kMemReadHits};
        case ConstraintKind::Slack20:
            return {kL1dHits, kL1dReadAccesses, kL1dReadMisses, kMemIdleTime, kMemBusUtilWrite};
    }
    return {};
}

}  // namespace features

double FeatureVector::at(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) {
        throw std::invalid_argument("feature '" + name + "' is missing");
    }
    return it->second;
}

std::vector<double> FeatureVector::row(std::span<const std::string> names) const {
    std::vector<double> out;
    out.reserve(names.size());
    for (const auto& n : names) {
        out.push_back(at(n));
    }
    return out;
}

FeatureVector extract_features(const RunResult& w) {
    if (w.instructions == 0) {
        throw std::invalid_argument("cannot extract features from an empty profiling window");
    }
    const double per_m = 1.0e6 / static_cast<double>(w.instructions);
    const auto& s = w.stats;
    const double cycles = std::max<double>(1.0, static_cast<double>(w.cycles));
    auto util = [&](std::uint64_t busy) { return std::min(1.0, static_cast<double>(busy) / cycles); };

    FeatureVector fv;
    fv.set(features::kL1dHits, static_cast<double>(s.hits()) * per_m);
    fv.set(features::kL1dReadAccesses, static_cast<double>(s.read_accesses()) * per_m);
    fv.set(features::kL1dReadMisses, static_cast<double>(s.read_misses) * per_m);
    fv.set(features::kL1dTotalMisses, static_cast<double>(s.misses()) * per_m);
    fv.set(features::kL1iTotalMisses, 0.0);  // instruction fetches are not traced
    fv.set(features::kMemIdleTime, static_cast<double>(s.mem_idle_cycles) * per_m);
    fv.set(features::kMemReadHits, static_cast<double>(s.mem_read_hits) * per_m);
    fv.set(features::kMemBusUtilRead, util(s.mem_busy_read_cycles));
    fv.set(features::kMemBusUtilWrite, util(s.mem_busy_write_cycles));
    return fv;
}

void TrainingSet::add(const FeatureVector& fv, const std::string& label) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
        throw std::invalid_argument("label '" + label + "' is not one of the system's cores");
    }
    rows.push_back(fv.row(feature_names));
    targets.push_back(static_cast<std::size_t>(it - labels.begin()));
}

void TrainingSet::validate() const {
    if (rows.empty()) throw std::invalid_argument("training set is empty");
    if (feature_names.empty()) throw std::invalid_argument("training set has no features");
    if (labels.empty()) throw std::invalid_argument("training set has no labels");
    if (rows.size() != targets.size()) throw std::invalid_argument("rows and targets differ in length");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != feature_names.size())
            throw std::invalid_argument("row " + std::to_string(i) + " has the wrong number of features");
        if (targets[i] >= labels.size()) throw std::invalid_argument("row " + std::to_string(i) + " has a bad label");
    }
}

double gini(std::span<const std::uint64_t> class_counts) {
    std::uint64_t total = 0;
    for (auto c : class_counts) total += c;
    if (total == 0) {
        throw std::invalid_argument("gini: class counts sum to zero");
    }
    double sum_sq = 0.0;
    for (auto c : class_counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

std::uint64_t TreeNode::samples() const { return std::accumulate(class_counts.begin(), class_counts.end(), std::uint64_t{0}); }

std::size_t TreeNode::majority() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < class_counts.size(); ++i) {
        if (class_counts[i] > class_counts[best]) best = i;
    }
    return best;
}

namespace {

constexpr double kTieEps = 1e-12;

struct Builder {
    const TrainingSet& data;
    const TreeParams& params;
    std::vector<TreeNode>& nodes;

    std::vector<std::uint64_t> counts(std::span<const std::size_t> idx) const {
        std::vector<std::uint64_t> c(data.labels.size(), 0);
        for (auto i : idx) ++c[data.targets[i]];
        return c;
    }

    int build(std::vector<std::size_t> idx, int depth, int parent) {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[id].parent = parent;
        nodes[id].depth = depth;
        nodes[id].class_counts = counts(idx);

        const auto n = idx.size();
        const double node_gini = gini(nodes[id].class_counts);
        if (node_gini == 0.0 || depth >= params.max_depth || n < 2 * params.min_samples_leaf) {
            return id;
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = node_gini;
        const auto k = data.labels.size();
        std::vector<std::size_t> order = idx;
        for (std::size_t f = 0; f < data.feature_names.size(); ++f) {
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return data.rows[a][f] < data.rows[b][f]; });
            std::vector<std::uint64_t> left(k, 0);
            std::vector<std::uint64_t> right = nodes[id].class_counts;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const auto cls = data.targets[order[i]];
                ++left[cls];
                --right[cls];
                const double a = data.rows[order[i]][f];
                const double b = data.rows[order[i + 1]][f];
                if (!(a < b)) continue;
                const auto nl = i + 1;
                const auto nr = n - nl;
                if (nl < params.min_samples_leaf || nr < params.min_samples_leaf) continue;
                const double impurity = (static_cast<double>(nl) * gini(left) + static_cast<double>(nr) * gini(right)) /
                                        static_cast<double>(n);
                if (impurity < best_impurity - kTieEps) {
                    double thr = a + (b - a) / 2.0;
                    if (!(thr < b)) thr = a;
                    best_impurity = impurity;
                    best_feature = static_cast<int>(f);
                    best_threshold = thr;
                }
            }
        }
        if (best_feature < 0) {
            return id;
        }

        std::vector<std::size_t> lo, hi;
        for (auto i : idx) {
            (data.rows[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? lo : hi).push_back(i);
        }
        nodes[id].feature = best_feature;
        nodes[id].threshold = best_threshold;
        const int l = build(std::move(lo), depth + 1, id);
        nodes[id].left = l;
        const int r = build(std::move(hi), depth + 1, id);
        nodes[id].right = r;
        return id;
    }
};

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("bad number '" + s + "' in model file");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("bad integer '" + s + "' in model file");
    }
    return v;
}

}  // namespace

DecisionTree train_tree(const TrainingSet& data, const TreeParams& params) {
    data.validate();
    if (params.max_depth < 0) throw std::invalid_argument("max_depth must be >= 0");
    if (params.min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
    DecisionTree t;
    t.features_ = data.feature_names;
    t.labels_ = data.labels;
    t.params_ = params;
    if (!data.provenance.empty()) t.metadata_["provenance"] = data.provenance;
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    Builder b{data, params, t.nodes_};
    b.build(std::move(idx), 0, -1);
    return t;
}

std::size_t DecisionTree::leaf_for(std::span<const double> row) const {
    if (nodes_.empty()) throw std::logic_error("decision tree is empty");
    if (row.size() != features_.size()) throw std::invalid_argument("feature row has the wrong width");
    std::size_t n = 0;
    while (!nodes_[n].is_leaf()) {
        const auto& node = nodes_[n];
        n = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                       : node.right);
    }
    return n;
}

std::size_t DecisionTree::predict_row(std::span<const double> row) const { return nodes_[leaf_for(row)].majority(); }

const std::string& DecisionTree::predict(const FeatureVector& fv) const {
    return labels_[predict_row(fv.row(features_))];
}

std::vector<std::string> DecisionTree::rank(const FeatureVector& fv) const {
    const auto leaf = leaf_for(fv.row(features_));
    std::vector<bool> taken(labels_.size(), false);
    std::vector<std::string> out;

    auto take_by_mass = [&](const std::vector<std::uint64_t>& counts) {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] > 0 && !taken[i]) order.push_back(i);
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
        for (auto i : order) {
            taken[i] = true;
            out.push_back(labels_[i]);
        }
    };

    take_by_mass(nodes_[leaf].class_counts);
    int child = static_cast<int>(leaf);
    int parent = nodes_[leaf].parent;
    while (parent >= 0) {
        const auto& p = nodes_[static_cast<std::size_t>(parent)];
        const int sibling = p.left == child ? p.right : p.left;
        take_by_mass(nodes_[static_cast<std::size_t>(sibling)].class_counts);
        child = parent;
        parent = p.parent;
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (!taken[i]) out.push_back(labels_[i]);
    }
    return out;
}

int DecisionTree::depth() const {
    int d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.depth);
    return d;
}

std::size_t DecisionTree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::vector<double> DecisionTree::feature_importance() const {
    std::vector<double> imp(features_.size(), 0.0);
    for (const auto& n : nodes_) {
        if (n.is_leaf()) continue;
        const auto& l = nodes_[static_cast<std::size_t>(n.left)];
        const auto& r = nodes_[static_cast<std::size_t>(n.right)];
        const double dec = static_cast<double>(n.samples()) * gini(n.class_counts) -
                           static_cast<double>(l.samples()) * gini(l.class_counts) -
                           static_cast<double>(r.samples()) * gini(r.class_counts);
        imp[static_cast<std::size_t>(n.feature)] += std::max(0.0, dec);
    }
    const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (total > 0.0) {
        for (auto& v : imp) v /= total;
    }
    return imp;
}

std::string DecisionTree::serialize() const {
    std::ostringstream out;
    out << "arc-decision-tree 1\n";
    out << "features " << features_.size();
    for (const auto& f : features_) out << ' ' << f;
    out << "\nlabels " << labels_.size();
    for (const auto& l : labels_) out << ' ' << l;
    out << "\nparams max_depth=" << params_.max_depth << " min_samples_leaf=" << params_.min_samples_leaf << '\n';
    for (const auto& [k, v] : metadata_) out << "meta " << k << ' ' << v << '\n';
    out << "nodes " << nodes_.size() << '\n';
    for (const auto& n : nodes_) {
        if (n.is_leaf()) {
            out << "leaf " << n.majority();
        } else {
            out << "split " << n.feature << ' ' << format_double(n.threshold);
        }
        out << " |";
        for (auto c : n.class_counts) out << ' ' << c;
        out << '\n';
    }
    out << "end\n";
    return out.str();
}

namespace {

struct LineReader {
    std::istringstream in;
    std::size_t lineno = 0;

    std::vector<std::string> next(const std::string& expect) {
        std::string line;
        if (!std::getline(in, line)) {
            throw std::invalid_argument("model file ends early; expected '" + expect + "'");
        }
        ++lineno;
        std::istringstream ls(line);
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) toks.push_back(t);
        if (toks.empty() || toks[0] != expect) {
            throw std::invalid_argument("model file line " + std::to_string(lineno) + ": expected '" + expect + "'");
        }
        return toks;
    }
};

}  // namespace

DecisionTree DecisionTree::deserialize(const std::string& text) {
    LineReader r{std::istringstream(text)};
    auto head = r.next("arc-decision-tree");
    if (head.size() != 2 || head[1] != "1") throw std::invalid_argument("unsupported model file version");

    DecisionTree t;
    auto f = r.next("features");
    if (f.size() < 2 || parse_u64(f[1]) != f.size() - 2) throw std::invalid_argument("bad features line");
    t.features_.assign(f.begin() + 2, f.end());
    auto l = r.next("labels");
    if (l.size() < 2 || parse_u64(l[1]) != l.size() - 2) throw std::invalid_argument("bad labels line");
    t.labels_.assign(l.begin() + 2, l.end());

    auto p = r.next("params");
    for (std::size_t i = 1; i < p.size(); ++i) {
        const auto eq = p[i].find('=');
        const auto key = p[i].substr(0, eq);
        const auto val = eq == std::string::npos ? std::string{} : p[i].substr(eq + 1);
        if (key == "max_depth") t.params_.max_depth = static_cast<int>(parse_u64(val));
        else if (key == "min_samples_leaf") t.params_.min_samples_leaf = parse_u64(val);
        else throw std::invalid_argument("unknown model parameter '" + key + "'");
    }

    std::string line;
    std::size_t node_count = 0;
    while (true) {
        if (!std::getline(r.in, line)) throw std::invalid_argument("model file ends before the node list");
        ++r.lineno;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "meta") {
            std::string key;
            ls >> key;
            std::string value;
            std::getline(ls, value);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            t.metadata_[key] = value;
        } else if (tag == "nodes") {
            std::string n;
            ls >> n;
            node_count = parse_u64(n);
            break;
        } else {
            throw std::invalid_argument("model file line " + std::to_string(r.lineno) + ": unexpected '" + tag + "'");
        }
    }

    // Pre-order: rebuild children links with an explicit stack of open splits.
    std::vector<int> open;
    for (std::size_t i = 0; i < node_count; ++i) {
        std::getline(r.in, line);
        ++r.lineno;
        std::istringstream ls(line);
        std::vector<std::string> toks;
        for (std::string tok; ls >> tok;) toks.push_back(tok);
        auto bar = std::find(toks.begin(), toks.end(), "|");
        if (toks.empty() || bar == toks.end()) {
            throw std::invalid_argument("model file line " + std::to_string(r.lineno) + ": malformed node");
        }
        TreeNode node;
        for (auto it = bar + 1; it != toks.end(); ++it) node.class_counts.push_back(parse_u64(*it));
        if (node.class_counts.size() != t.labels_.size()) {
            throw std::invalid_argument("model file line " + std::to_string(r.lineno) + ": wrong class count width");
        }
        if (toks[0] == "split") {
            if (bar - toks.begin() != 3) throw std::invalid_argument("malformed split node");
            node.feature = static_cast<int>(parse_u64(toks[1]));
            if (static_cast<std::size_t>(node.feature) >= t.features_.size())
                throw std::invalid_argument("split references an unknown feature");
            node.threshold = parse_double(toks[2]);
        } else if (toks[0] != "leaf" || bar - toks.begin() != 2) {
            throw std::invalid_argument("model file line " + std::to_string(r.lineno) + ": unknown node kind");
        }
        const int id = static_cast<int>(t.nodes_.size());
        if (!open.empty()) {
            auto& parent = t.nodes_[static_cast<std::size_t>(open.back())];
            node.parent = open.back();
            node.depth = parent.depth + 1;
            if (parent.left < 0) {
                parent.left = id;
            } else {
                parent.right = id;
                open.pop_back();
            }
        } else if (id != 0) {
            throw std::invalid_argument("model file has nodes after a complete tree");
        }
        t.nodes_.push_back(node);
        if (!t.nodes_.back().is_leaf()) open.push_back(id);
    }
    if (!open.empty() || t.nodes_.empty()) throw std::invalid_argument("model file tree is incomplete");
    r.next("end");
    return t;
}

void DecisionTree::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model '" + path + "'");
    out << serialize();
}

DecisionTree DecisionTree::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return deserialize(s.str());
}

bool DecisionTree::operator==(const DecisionTree& o) const { return serialize() == o.serialize(); }

std::string predict(const DecisionTree& tree, const FeatureVector& fv) { return tree.predict(fv); }

std::vector<std::string> rank_labels(const DecisionTree& tree, const FeatureVector& fv) { return tree.rank(fv); }

FeatureSelection select_features(const TrainingSet& data, std::size_t k, const TreeParams& params) {
    if (k < 1) throw std::invalid_argument("select_features: k must be >= 1");
    FeatureSelection sel;
    if (k > data.feature_names.size()) {
        std::cerr << "warning: requested " << k << " features but only " << data.feature_names.size()
                  << " exist; clamping\n";
        k = data.feature_names.size();
        sel.clamped = true;
    }
    const auto tree = train_tree(data, params);
    const auto imp = tree.feature_importance();
    std::vector<std::size_t> order(imp.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
    for (std::size_t i = 0; i < k; ++i) {
        sel.features.push_back(data.feature_names[order[i]]);
        sel.importance.push_back(imp[order[i]]);
    }
    return sel;
}

std::string label_oracle(std::span<const TraceEvent> events, const ArcSystem& system, const PowerModel& power,
                         Constraint constraint) {
    const auto sweep = exhaustive_sweep(events, system, power, constraint);
    return sweep.best().core_id;
}

}  // namespace arc
