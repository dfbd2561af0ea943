#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bflsim/vec.hpp"

namespace bflsim::fl {

struct DataPoint {
    Vec features;
    int label = 0;
};

struct Dataset {
    std::vector<DataPoint> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    std::size_t feature_dim() const { return points.empty() ? 0 : points.front().features.size(); }
};

// C Gaussian clusters with class means on a fixed lattice; identical
// (args, seed) produce bit-identical datasets.
Dataset make_synthetic_dataset(std::size_t feature_dim, std::size_t num_classes,
                               std::size_t per_class, double cluster_spread, std::uint64_t seed);

// Label-restricted shards: shard i draws only from its assigned
// labels_per_node labels (round-robin assignment), shards disjoint.
std::vector<Dataset> partition_noniid(const Dataset& ds, std::size_t num_shards,
                                      std::size_t labels_per_node, std::uint64_t seed);

// Held-out split, fixed at creation time: returns {train, test}.
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed);

// Fixture format: one record per line, comma-separated features then the
// integer label.
void save_dataset_csv(const Dataset& ds, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

// Scalar variance of the feature vectors (sum over dimensions, 1/(D-1)
// normalization); the sigma^2 consumed by the mini-batch variance bound.
double feature_variance(const Dataset& ds);

// Pool several shards into one dataset (order preserved).
Dataset pool(const std::vector<Dataset>& shards);

std::size_t count_classes(const Dataset& ds);

}  // namespace bflsim::fl
