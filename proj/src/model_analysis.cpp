#include "conlab/model_analysis.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "conlab/errors.hpp"

namespace conlab {

namespace {

struct Dsu {
    std::vector<int> parent;
    explicit Dsu(int count) : parent(count) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

// In-neighborhoods restricted to `rows` coincide.
bool agrees_on(const CommGraph& g, const CommGraph& h, AgentSet rows) {
    for (int j = 0; rows != 0; ++j, rows >>= 1)
        if ((rows & 1) && g.in_mask(j) != h.in_mask(j)) return false;
    return true;
}

std::vector<AgentSet> model_root_masks(const NetworkModel& model) {
    std::vector<AgentSet> masks;
    masks.reserve(model.size());
    for (const auto& g : model.graphs()) masks.push_back(roots_mask(g));
    return masks;
}

}  // namespace

Partition::Partition(int element_count, std::vector<int> block_of) : block_of_(std::move(block_of)) {
    if (static_cast<int>(block_of_.size()) != element_count)
        throw validation_error("partition labels do not match the element count");
    // Renumber labels in order of first appearance, then collect blocks.
    std::map<int, int> renumber;
    for (int& label : block_of_) {
        auto [it, fresh] = renumber.try_emplace(label, static_cast<int>(renumber.size()));
        label = it->second;
        (void)fresh;
    }
    blocks_.resize(renumber.size());
    for (int e = 0; e < element_count; ++e) blocks_[block_of_[e]].push_back(e);
}

Partition Partition::singletons(int element_count) {
    std::vector<int> labels(element_count);
    std::iota(labels.begin(), labels.end(), 0);
    return Partition(element_count, std::move(labels));
}

Partition Partition::single_block(int element_count) {
    return Partition(element_count, std::vector<int>(element_count, 0));
}

Partition Partition::from_blocks(int element_count, const std::vector<std::vector<int>>& blocks) {
    std::vector<int> labels(element_count, -1);
    int next = 0;
    for (const auto& block : blocks) {
        for (int e : block) {
            if (e < 0 || e >= element_count || labels[e] != -1)
                throw validation_error("blocks must partition the element range");
            labels[e] = next;
        }
        ++next;
    }
    for (int label : labels)
        if (label == -1) throw validation_error("blocks must cover every element");
    return Partition(element_count, std::move(labels));
}

bool Partition::refines(const Partition& coarser) const {
    if (coarser.element_count() != element_count())
        throw validation_error("partitions compare only over one element range");
    for (const auto& block : blocks_)
        for (std::size_t k = 1; k < block.size(); ++k)
            if (!coarser.together(block[0], block[k])) return false;
    return true;
}

AlphaWitness alpha_related(const NetworkModel& model, int g, int h) {
    const int m = static_cast<int>(model.size());
    if (g < 0 || g >= m || h < 0 || h >= m)
        throw validation_error("graph index out of range for this model");
    AlphaWitness w{g, h, {}};
    for (int k = 0; k < m; ++k)
        if (agrees_on(model[g], model[h], roots_mask(model[k]))) w.witnesses.push_back(k);
    return w;
}

Partition alpha_star(const NetworkModel& model) {
    const int m = static_cast<int>(model.size());
    Dsu dsu(m);
    // For each witness K, graphs agreeing on K's roots form buckets; all
    // members of a bucket are pairwise related through K.
    for (AgentSet rows : model_root_masks(model)) {
        std::map<std::vector<AgentSet>, int> buckets;
        for (int g = 0; g < m; ++g) {
            std::vector<AgentSet> key;
            for (int j = 0; j < model.agent_count(); ++j)
                if (rows >> j & 1) key.push_back(model[g].in_mask(j));
            auto [it, fresh] = buckets.try_emplace(std::move(key), g);
            if (!fresh) dsu.unite(g, it->second);
        }
    }
    std::vector<int> labels(m);
    for (int g = 0; g < m; ++g) labels[g] = dsu.find(g);
    return Partition(m, std::move(labels));
}

namespace {

// Split one block into connected components under edges witnessed inside
// the block itself.
std::vector<std::vector<int>> split_block(const NetworkModel& model,
                                          const std::vector<AgentSet>& root_masks,
                                          const std::vector<int>& block) {
    const int size = static_cast<int>(block.size());
    Dsu dsu(size);
    for (int witness : block)
        for (int a = 0; a < size; ++a)
            for (int b = a + 1; b < size; ++b)
                if (agrees_on(model[block[a]], model[block[b]], root_masks[witness]))
                    dsu.unite(a, b);
    std::map<int, std::vector<int>> components;
    for (int a = 0; a < size; ++a) components[dsu.find(a)].push_back(block[a]);
    std::vector<std::vector<int>> out;
    for (auto& [root, members] : components) out.push_back(std::move(members));
    return out;
}

bool block_chain_closed(const NetworkModel& model, const std::vector<AgentSet>& root_masks,
                        const std::vector<int>& block) {
    return split_block(model, root_masks, block).size() == 1;
}

}  // namespace

Partition beta_classes(const NetworkModel& model) {
    const int m = static_cast<int>(model.size());
    auto root_masks = model_root_masks(model);
    std::vector<std::vector<int>> blocks = alpha_star(model).blocks();
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<std::vector<int>> next;
        for (const auto& block : blocks) {
            auto parts = split_block(model, root_masks, block);
            if (parts.size() > 1) changed = true;
            for (auto& part : parts) next.push_back(std::move(part));
        }
        blocks = std::move(next);
    }
    return Partition::from_blocks(m, blocks);
}

Partition beta_oracle(const NetworkModel& model) {
    const int m = static_cast<int>(model.size());
    if (m > 8)
        throw resource_error("beta oracle enumerates all partitions, refusing a model of " +
                             std::to_string(m) + " graphs (limit 8)");
    auto root_masks = model_root_masks(model);

    std::vector<Partition> valid;
    // Enumerate partitions as restricted growth strings.
    std::vector<int> labels(m, 0);
    while (true) {
        Partition p(m, labels);
        bool ok = true;
        for (const auto& block : p.blocks())
            if (!block_chain_closed(model, root_masks, block)) {
                ok = false;
                break;
            }
        if (ok) valid.push_back(std::move(p));

        int i = m - 1;
        for (; i > 0; --i) {
            int cap = *std::max_element(labels.begin(), labels.begin() + i) + 1;
            if (labels[i] < cap) {
                ++labels[i];
                std::fill(labels.begin() + i + 1, labels.end(), 0);
                break;
            }
            labels[i] = 0;
        }
        if (i == 0) break;
    }

    const Partition* coarsest = nullptr;
    for (const auto& p : valid) {
        bool all_refine = true;
        for (const auto& q : valid)
            if (!q.refines(p)) {
                all_refine = false;
                break;
            }
        if (all_refine) {
            if (coarsest != nullptr && !(*coarsest == p))
                throw std::logic_error("two distinct coarsest chain-closed partitions");
            coarsest = &p;
        }
    }
    if (coarsest == nullptr)
        throw std::logic_error("no coarsest chain-closed partition; the relation is broken");
    return *coarsest;
}

bool is_source_incompatible(const NetworkModel& model, const std::vector<int>& members) {
    if (members.empty()) throw validation_error("source compatibility needs at least one graph");
    AgentSet common = ~AgentSet{0};
    for (int g : members) common &= roots_mask(model[g]);
    return common == 0;
}

bool consensus_solvable(const NetworkModel& model) {
    Partition beta = beta_classes(model);
    for (const auto& block : beta.blocks())
        if (is_source_incompatible(model, block)) return false;
    return true;
}

bool asymptotic_solvable(const NetworkModel& model) {
    return std::all_of(model.graphs().begin(), model.graphs().end(),
                       [](const CommGraph& g) { return is_rooted(g); });
}

std::optional<int> alpha_diameter(const NetworkModel& model) {
    const int m = static_cast<int>(model.size());
    if (m == 1) return 1;

    // Bucket the graphs once per distinct root set: two graphs are adjacent
    // iff they share a bucket for some root set. BFS then expands buckets
    // instead of scanning all pairs, which keeps large models tractable.
    std::vector<AgentSet> root_sets = model_root_masks(model);
    std::sort(root_sets.begin(), root_sets.end());
    root_sets.erase(std::unique(root_sets.begin(), root_sets.end()), root_sets.end());

    const int families = static_cast<int>(root_sets.size());
    std::vector<std::vector<int>> bucket_of(families, std::vector<int>(m));
    std::vector<std::vector<std::vector<int>>> members(families);
    for (int r = 0; r < families; ++r) {
        std::map<std::vector<AgentSet>, int> ids;
        for (int g = 0; g < m; ++g) {
            std::vector<AgentSet> key;
            for (int j = 0; j < model.agent_count(); ++j)
                if (root_sets[r] >> j & 1) key.push_back(model[g].in_mask(j));
            auto [it, fresh] = ids.try_emplace(std::move(key), static_cast<int>(members[r].size()));
            if (fresh) members[r].emplace_back();
            bucket_of[r][g] = it->second;
            members[r][it->second].push_back(g);
        }
    }

    int diameter = 0;
    std::vector<int> dist(m);
    std::vector<std::vector<char>> expanded(families);
    for (int source = 0; source < m; ++source) {
        std::fill(dist.begin(), dist.end(), -1);
        for (int r = 0; r < families; ++r)
            expanded[r].assign(members[r].size(), 0);
        std::queue<int> queue;
        dist[source] = 0;
        queue.push(source);
        int reached = 1;
        while (!queue.empty()) {
            int g = queue.front();
            queue.pop();
            for (int r = 0; r < families; ++r) {
                int b = bucket_of[r][g];
                if (expanded[r][b]) continue;
                expanded[r][b] = 1;
                for (int h : members[r][b])
                    if (dist[h] == -1) {
                        dist[h] = dist[g] + 1;
                        diameter = std::max(diameter, dist[h]);
                        queue.push(h);
                        ++reached;
                    }
            }
        }
        if (reached < m) return std::nullopt;
    }
    return std::max(diameter, 1);
}

std::optional<int> min_alpha_diameter_unsolvable(const NetworkModel& model, int subset_cap) {
    const int m = static_cast<int>(model.size());
    if (m > subset_cap)
        throw resource_error("sub-model sweep enumerates 2^" + std::to_string(m) +
                             " subsets, above the cap of 2^" + std::to_string(subset_cap));
    std::optional<int> best;
    for (std::uint64_t bits = 1; bits < (std::uint64_t{1} << m); ++bits) {
        std::vector<CommGraph> graphs;
        for (int g = 0; g < m; ++g)
            if (bits >> g & 1) graphs.push_back(model[g]);
        NetworkModel sub(std::move(graphs));
        if (consensus_solvable(sub)) continue;
        auto d = alpha_diameter(sub);
        if (d && (!best || *d < *best)) best = *d;
    }
    return best;
}

ModelReport analyze(const NetworkModel& model) {
    ModelReport report{.n = model.agent_count(),
                       .rooted = {},
                       .root_sets = {},
                       .nonsplit = {},
                       .asymptotic = asymptotic_solvable(model),
                       .alpha_blocks = alpha_star(model),
                       .beta_blocks = beta_classes(model),
                       .solvable = consensus_solvable(model),
                       .diameter = alpha_diameter(model)};
    for (const auto& g : model.graphs()) {
        report.rooted.push_back(is_rooted(g));
        report.root_sets.push_back(roots(g));
        report.nonsplit.push_back(is_nonsplit(g));
    }
    return report;
}

}  // namespace conlab
