#pragma once

#include <optional>
#include <vector>

#include "conlab/graphs.hpp"

namespace conlab {

// A partition of {0..count-1} in normal form: blocks are sorted internally
// and ordered by their smallest element.
class Partition {
public:
    Partition(int element_count, std::vector<int> block_of);
    static Partition singletons(int element_count);
    static Partition single_block(int element_count);
    static Partition from_blocks(int element_count, const std::vector<std::vector<int>>& blocks);

    int element_count() const { return static_cast<int>(block_of_.size()); }
    int block_count() const { return static_cast<int>(blocks_.size()); }
    int block_of(int element) const { return block_of_.at(element); }
    bool together(int a, int b) const { return block_of(a) == block_of(b); }
    const std::vector<std::vector<int>>& blocks() const { return blocks_; }
    // Every block of this partition lies inside one block of `coarser`.
    bool refines(const Partition& coarser) const;

    bool operator==(const Partition&) const = default;

private:
    std::vector<int> block_of_;
    std::vector<std::vector<int>> blocks_;
};

// Two graphs are related through witness K when they give identical
// in-neighborhoods to every root of K. `witnesses` lists every such K.
struct AlphaWitness {
    int g;
    int h;
    std::vector<int> witnesses;
    bool related() const { return !witnesses.empty(); }
};

AlphaWitness alpha_related(const NetworkModel& model, int g, int h);

// Transitive closure of the union of the witness relations.
Partition alpha_star(const NetworkModel& model);

// Coarsest equivalence inside alpha_star whose blocks are chain-closed:
// within a block, any two members are joined by witness edges whose
// witnesses and intermediate graphs stay inside the block. Computed by
// splitting blocks into components until a fixed point.
Partition beta_classes(const NetworkModel& model);

// Same relation by brute force: enumerate every partition of the model,
// keep the ones whose blocks are chain-closed, return the coarsest.
// Guarded to models of at most 8 graphs.
Partition beta_oracle(const NetworkModel& model);

// No agent is a root of every graph in the set.
bool is_source_incompatible(const NetworkModel& model, const std::vector<int>& members);

// Exact consensus is solvable iff no beta class is source-incompatible.
bool consensus_solvable(const NetworkModel& model);

// Asymptotic consensus is solvable iff every graph is rooted.
bool asymptotic_solvable(const NetworkModel& model);

// Eccentricity bound of the witness-edge graph on model members: the
// largest pairwise distance, nullopt when some pair is unreachable.
// A single-member model has diameter 1 by convention.
std::optional<int> alpha_diameter(const NetworkModel& model);

// Minimum alpha diameter among sub-models on which exact consensus is
// unsolvable; nullopt if every sub-model is solvable or only infinite
// diameters remain. Enumerates subsets, so the model size is capped.
std::optional<int> min_alpha_diameter_unsolvable(const NetworkModel& model, int subset_cap = 12);

struct ModelReport {
    int n = 0;
    std::vector<bool> rooted;
    std::vector<std::vector<int>> root_sets;
    std::vector<bool> nonsplit;
    bool asymptotic;
    Partition alpha_blocks;
    Partition beta_blocks;
    bool solvable;
    std::optional<int> diameter;
};

ModelReport analyze(const NetworkModel& model);

}  // namespace conlab
