#ifndef LASSOPV_NETHARNESS_HPP
#define LASSOPV_NETHARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lassopv/dataset.hpp"

namespace lassopv {

struct ScoredEdge {
  std::string source;
  std::string target;
  double score = 0.0;
};

// Directed edges with finite scores; self-loops and duplicate (source, target)
// pairs are rejected on construction.
struct ScoredEdgeList {
  std::vector<ScoredEdge> edges;
};

ScoredEdgeList make_edge_list(std::vector<ScoredEdge> edges);

// TSV (source, target, score) with header.
ScoredEdgeList read_edge_list(const std::string& path);

struct Dag {
  std::vector<std::string> nodes;
  std::vector<std::vector<Eigen::Index>> predecessors;  // per node, in acceptance order
  std::size_t edge_count = 0;

  Eigen::Index node_index(const std::string& name) const;
};

// Adds edges one at a time in descending score order (ties broken by
// lexicographic (source, target)); an edge is kept iff it closes no directed
// cycle among the edges kept so far. The result is maximal for that order.
Dag greedy_max_dag(const ScoredEdgeList& e);

// Complete DAG over a seeded random permutation of `names`: every node gets
// all earlier nodes in the permutation as predecessors.
Dag random_complete_dag(const std::vector<std::string>& names, std::uint64_t seed);

// TSV (source, target) in acceptance order, with header.
void write_dag(const Dag& d, const std::string& path);
Dag read_dag(const std::string& path);

struct RegressionTask {
  std::string target;
  Eigen::Index target_column = -1;
  std::vector<Eigen::Index> predictor_columns;
};

// One task per DAG node with at least one predecessor: the node is regressed
// on its predecessors. DAG nodes must all exist in the matrix.
std::vector<RegressionTask> batches_from_dag(const Dag& d, const DataMatrix& m);

// Keeps the k nodes of highest degree (in + out, ties by name) and induces the
// sub-DAG and sub-matrix on them.
std::pair<Dag, DataMatrix> reduce_dataset(const Dag& d, const DataMatrix& m,
                                          std::size_t k);

// n_samples x n_vars of iid standard normal entries, then centered per column.
// Deterministic in the seed. Variables are named V001, V002, ...
DataMatrix generate_null(Eigen::Index n_samples, Eigen::Index n_vars,
                         std::uint64_t seed);

}  // namespace lassopv

#endif
