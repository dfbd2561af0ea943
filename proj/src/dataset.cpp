#include "bflsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bflsim/rng.hpp"

namespace bflsim::fl {

Dataset make_synthetic_dataset(std::size_t feature_dim, std::size_t num_classes,
                               std::size_t per_class, double cluster_spread, std::uint64_t seed) {
    if (feature_dim < 1) throw std::invalid_argument("make_synthetic_dataset: feature_dim >= 1 required");
    if (num_classes < 2) throw std::invalid_argument("make_synthetic_dataset: num_classes >= 2 required");

    // Class means live on an integer lattice with spacing 4: class c maps to
    // lattice coordinates (c mod q, c/q mod q, ...) over the first three
    // feature dimensions, remaining dimensions zero.
    const std::size_t lattice_dims = std::min<std::size_t>(feature_dim, 3);
    std::size_t q = 1;
    while (q * q * (lattice_dims >= 3 ? q : 1) < num_classes && lattice_dims >= 2) ++q;
    if (lattice_dims == 1) q = num_classes;
    const double spacing = 4.0;

    Dataset ds;
    ds.points.reserve(num_classes * per_class);
    for (std::size_t c = 0; c < num_classes; ++c) {
        Vec mean(feature_dim, 0.0);
        std::size_t rem = c;
        for (std::size_t dmn = 0; dmn < lattice_dims; ++dmn) {
            mean[dmn] = spacing * static_cast<double>(rem % q);
            rem /= q;
        }
        Rng rng = Rng::stream(seed, c, 0, "synthetic-dataset");
        for (std::size_t i = 0; i < per_class; ++i) {
            DataPoint p;
            p.label = static_cast<int>(c);
            p.features.resize(feature_dim);
            for (std::size_t f = 0; f < feature_dim; ++f)
                p.features[f] = mean[f] + cluster_spread * rng.normal();
            ds.points.push_back(std::move(p));
        }
    }
    return ds;
}

std::size_t count_classes(const Dataset& ds) {
    int mx = -1;
    for (const auto& p : ds.points) mx = std::max(mx, p.label);
    return static_cast<std::size_t>(mx + 1);
}

std::vector<Dataset> partition_noniid(const Dataset& ds, std::size_t num_shards,
                                      std::size_t labels_per_node, std::uint64_t seed) {
    const std::size_t num_classes = count_classes(ds);
    if (labels_per_node == 0 || labels_per_node > num_classes)
        throw std::invalid_argument("partition_noniid: labels_per_node must be in [1, C]");
    if (num_shards == 0) throw std::invalid_argument("partition_noniid: num_shards >= 1 required");

    // Round-robin label assignment: shard i takes labels
    // {(i*labels_per_node + j) mod C}.  Every class must be claimed by at
    // least one shard, otherwise the split silently drops data the caller
    // believes is trained on.
    std::vector<std::vector<std::size_t>> shard_labels(num_shards);
    std::vector<bool> covered(num_classes, false);
    for (std::size_t i = 0; i < num_shards; ++i) {
        for (std::size_t j = 0; j < labels_per_node; ++j) {
            std::size_t lbl = (i * labels_per_node + j) % num_classes;
            shard_labels[i].push_back(lbl);
            covered[lbl] = true;
        }
    }
    if (num_shards * labels_per_node < num_classes)
        throw std::invalid_argument("partition_noniid: shards cannot cover all labels");
    for (bool c : covered)
        if (!c) throw std::invalid_argument("partition_noniid: label assignment leaves a class unused");

    // Per class: shuffle its point indices and deal them round-robin to the
    // shards that claim the class.
    std::vector<std::vector<std::size_t>> by_class(num_classes);
    for (std::size_t i = 0; i < ds.points.size(); ++i)
        by_class[static_cast<std::size_t>(ds.points[i].label)].push_back(i);

    std::vector<std::vector<std::size_t>> claimants(num_classes);
    for (std::size_t i = 0; i < num_shards; ++i)
        for (std::size_t lbl : shard_labels[i]) claimants[lbl].push_back(i);

    std::vector<Dataset> shards(num_shards);
    for (std::size_t c = 0; c < num_classes; ++c) {
        auto idx = by_class[c];
        Rng rng = Rng::stream(seed, c, 0, "noniid-partition");
        rng.shuffle(idx);
        const auto& takers = claimants[c];
        for (std::size_t i = 0; i < idx.size(); ++i)
            shards[takers[i % takers.size()]].points.push_back(ds.points[idx[i]]);
    }
    return shards;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed) {
    if (test_fraction < 0.0 || test_fraction >= 1.0)
        throw std::invalid_argument("split_train_test: test_fraction in [0, 1) required");
    std::vector<std::size_t> idx(ds.points.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng = Rng::stream(seed, 0, 0, "train-test-split");
    rng.shuffle(idx);
    const std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * ds.points.size()));
    Dataset train, test;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i < n_test)
            test.points.push_back(ds.points[idx[i]]);
        else
            train.points.push_back(ds.points[idx[i]]);
    }
    return {train, test};
}

void save_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_dataset_csv: cannot open " + path);
    out.precision(17);
    for (const auto& p : ds.points) {
        for (double f : p.features) out << f << ',';
        out << p.label << '\n';
    }
}

Dataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_dataset_csv: cannot open " + path);
    Dataset ds;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        DataPoint p;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 2) throw std::runtime_error("load_dataset_csv: malformed record");
        for (std::size_t i = 0; i + 1 < cells.size(); ++i) p.features.push_back(std::stod(cells[i]));
        p.label = std::stoi(cells.back());
        if (!ds.points.empty() && p.features.size() != ds.feature_dim())
            throw std::runtime_error("load_dataset_csv: inconsistent feature dimension");
        ds.points.push_back(std::move(p));
    }
    return ds;
}

double feature_variance(const Dataset& ds) {
    const std::size_t n = ds.points.size();
    if (n < 2) return 0.0;
    Vec mean(ds.feature_dim(), 0.0);
    for (const auto& p : ds.points) axpy(1.0 / static_cast<double>(n), p.features, mean);
    double ss = 0.0;
    for (const auto& p : ds.points) ss += norm2_sq(sub(p.features, mean));
    return ss / static_cast<double>(n - 1);
}

Dataset pool(const std::vector<Dataset>& shards) {
    Dataset out;
    for (const auto& s : shards)
        out.points.insert(out.points.end(), s.points.begin(), s.points.end());
    return out;
}

}  // namespace bflsim::fl
