#include "conlab/graphs.hpp"

#include <algorithm>
#include <bit>

#include "conlab/errors.hpp"
#include "json.hpp"

namespace conlab {

int popcount(AgentSet s) { return std::popcount(s); }

std::vector<int> set_to_list(AgentSet s) {
    std::vector<int> out;
    for (int i = 0; s != 0; ++i, s >>= 1)
        if (s & 1) out.push_back(i);
    return out;
}

AgentSet list_to_set(const std::vector<int>& agents, int n) {
    AgentSet s = 0;
    for (int a : agents) {
        if (a < 0 || a >= n)
            throw validation_error("agent index " + std::to_string(a + 1) +
                                   " out of range 1.." + std::to_string(n));
        s |= AgentSet{1} << a;
    }
    return s;
}

static AgentSet full_set(int n) { return (AgentSet{1} << n) - 1; }

CommGraph::CommGraph(int n, std::vector<AgentSet> in_masks) : n_(n), in_(std::move(in_masks)) {
    if (n < 1 || n > max_agents)
        throw validation_error("agent count must be in 1.." + std::to_string(max_agents) +
                               ", got " + std::to_string(n));
    if (static_cast<int>(in_.size()) != n)
        throw validation_error("expected " + std::to_string(n) + " in-neighborhoods, got " +
                               std::to_string(in_.size()));
    for (int j = 0; j < n; ++j) {
        if (in_[j] & ~full_set(n))
            throw validation_error("in-neighborhood of agent " + std::to_string(j + 1) +
                                   " mentions an agent beyond " + std::to_string(n));
        if (!(in_[j] >> j & 1))
            throw validation_error("self-loop missing for agent " + std::to_string(j + 1));
    }
}

CommGraph CommGraph::from_in_lists(int n, const std::vector<std::vector<int>>& in_lists) {
    std::vector<AgentSet> masks;
    masks.reserve(in_lists.size());
    for (const auto& list : in_lists) masks.push_back(list_to_set(list, n));
    return CommGraph(n, std::move(masks));
}

CommGraph CommGraph::complete(int n) {
    return CommGraph(n, std::vector<AgentSet>(n, full_set(n)));
}

CommGraph CommGraph::identity(int n) {
    std::vector<AgentSet> masks(n);
    for (int j = 0; j < n; ++j) masks[j] = AgentSet{1} << j;
    return CommGraph(n, std::move(masks));
}

AgentSet CommGraph::in_mask(int agent) const { return in_.at(agent); }

std::vector<int> CommGraph::in_neighbors(int agent) const { return set_to_list(in_mask(agent)); }

int CommGraph::in_degree(int agent) const { return std::popcount(in_mask(agent)); }

bool CommGraph::has_edge(int from, int to) const { return in_mask(to) >> from & 1; }

AgentSet CommGraph::out_mask(int agent) const {
    if (agent < 0 || agent >= n_) throw validation_error("agent index out of range");
    AgentSet s = 0;
    for (int j = 0; j < n_; ++j)
        if (in_[j] >> agent & 1) s |= AgentSet{1} << j;
    return s;
}

std::vector<int> CommGraph::out_neighbors(int agent) const { return set_to_list(out_mask(agent)); }

int CommGraph::out_degree(int agent) const { return std::popcount(out_mask(agent)); }

CommGraph product(const CommGraph& g, const CommGraph& h) {
    if (g.agent_count() != h.agent_count())
        throw validation_error("product requires graphs on the same agent count");
    const int n = g.agent_count();
    // In the product, j hears i iff some k with k in In_h(j) has i in In_g(k).
    std::vector<AgentSet> masks(n, 0);
    for (int j = 0; j < n; ++j) {
        AgentSet via = h.in_mask(j);
        for (int k = 0; via != 0; ++k, via >>= 1)
            if (via & 1) masks[j] |= g.in_mask(k);
    }
    return CommGraph(n, std::move(masks));
}

AgentSet roots_mask(const CommGraph& g) {
    const int n = g.agent_count();
    // reach[i] = agents reachable from i; grow rows until the fixed point.
    std::vector<AgentSet> reach(n);
    for (int i = 0; i < n; ++i) reach[i] = g.out_mask(i);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < n; ++i) {
            AgentSet next = reach[i];
            AgentSet frontier = reach[i];
            for (int k = 0; frontier != 0; ++k, frontier >>= 1)
                if (frontier & 1) next |= reach[k];
            if (next != reach[i]) {
                reach[i] = next;
                changed = true;
            }
        }
    }
    AgentSet out = 0;
    for (int i = 0; i < n; ++i)
        if (reach[i] == full_set(n)) out |= AgentSet{1} << i;
    return out;
}

std::vector<int> roots(const CommGraph& g) { return set_to_list(roots_mask(g)); }

bool is_rooted(const CommGraph& g) { return roots_mask(g) != 0; }

bool is_nonsplit(const CommGraph& g) {
    const int n = g.agent_count();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if ((g.in_mask(i) & g.in_mask(j)) == 0) return false;
    return true;
}

bool is_deaf(const CommGraph& g, int agent) { return g.in_mask(agent) == AgentSet{1} << agent; }

std::optional<int> sole_deaf_root(const CommGraph& g) {
    AgentSet r = roots_mask(g);
    if (std::popcount(r) != 1) return std::nullopt;
    int agent = std::countr_zero(r);
    if (!is_deaf(g, agent)) return std::nullopt;
    return agent;
}

NetworkModel::NetworkModel(std::vector<CommGraph> graphs) : graphs_(std::move(graphs)) {
    if (graphs_.empty()) throw validation_error("a network model must contain at least one graph");
    n_ = graphs_.front().agent_count();
    for (const auto& g : graphs_)
        if (g.agent_count() != n_)
            throw validation_error("all graphs in a model must share one agent count");
    std::sort(graphs_.begin(), graphs_.end());
    graphs_.erase(std::unique(graphs_.begin(), graphs_.end()), graphs_.end());
}

std::optional<std::size_t> NetworkModel::index_of(const CommGraph& g) const {
    auto it = std::lower_bound(graphs_.begin(), graphs_.end(), g);
    if (it == graphs_.end() || !(*it == g)) return std::nullopt;
    return static_cast<std::size_t>(it - graphs_.begin());
}

bool NetworkModel::contains(const CommGraph& g) const { return index_of(g).has_value(); }

NetworkModel deaf_family(const CommGraph& g) {
    const int n = g.agent_count();
    std::vector<CommGraph> members;
    members.reserve(n);
    for (int i = 0; i < n; ++i) {
        std::vector<AgentSet> masks;
        masks.reserve(n);
        for (int j = 0; j < n; ++j) masks.push_back(j == i ? AgentSet{1} << i : g.in_mask(j));
        members.emplace_back(n, std::move(masks));
    }
    return NetworkModel(std::move(members));
}

NetworkModel two_agent_graphs() {
    std::vector<CommGraph> gs;
    gs.push_back(CommGraph::complete(2));
    gs.push_back(CommGraph::from_in_lists(2, {{0}, {0, 1}}));  // only 0 -> 1
    gs.push_back(CommGraph::from_in_lists(2, {{0, 1}, {1}}));  // only 1 -> 0
    return NetworkModel(std::move(gs));
}

CommGraph psi_graph(int n, int i) {
    if (n < 4) throw validation_error("psi graphs need at least 4 agents");
    if (i < 0 || i > 2) throw validation_error("psi graph index must be 0, 1 or 2");
    std::vector<AgentSet> masks(n);
    for (int j = 0; j < n; ++j) masks[j] = AgentSet{1} << j;
    for (int j = 4; j <= n - 1; ++j) masks[j] |= AgentSet{1} << (j - 1);  // path 3 -> ... -> n-1
    for (int l = 0; l < 3; ++l) {
        if (l == i) continue;
        masks[l] |= AgentSet{1} << (n - 1);  // n-1 -> l
        masks[3] |= AgentSet{1} << l;        // l -> 3
    }
    masks[3] |= AgentSet{1} << i;  // i -> 3; agent i itself hears nobody
    return CommGraph(n, std::move(masks));
}

NetworkModel psi_model(int n) {
    return NetworkModel({psi_graph(n, 0), psi_graph(n, 1), psi_graph(n, 2)});
}

std::uint64_t async_model_size(int n, int f) {
    // Per agent: any in-neighborhood containing itself with degree >= n-f.
    std::uint64_t options = 0;
    for (int extra = std::max(0, n - f - 1); extra <= n - 1; ++extra) {
        // choose(n-1, extra) ways to pick the other in-neighbors
        std::uint64_t c = 1;
        for (int k = 1; k <= extra; ++k) c = c * (n - extra + k - 1) / k;
        options += c;
    }
    std::uint64_t total = 1;
    for (int j = 0; j < n; ++j) {
        if (options != 0 && total > UINT64_MAX / options) return UINT64_MAX;
        total *= options;
    }
    return total;
}

NetworkModel async_model(int n, int f, std::uint64_t cap) {
    if (n < 1 || n > CommGraph::max_agents) throw validation_error("bad agent count");
    if (f < 0 || f >= n) throw validation_error("fault bound must satisfy 0 <= f < n");
    std::uint64_t size = async_model_size(n, f);
    if (size > cap)
        throw resource_error("async model on n=" + std::to_string(n) + ", f=" + std::to_string(f) +
                             " has " + std::to_string(size) + " graphs, above the cap of " +
                             std::to_string(cap));

    // Per-agent option lists (self-loop already included), then cross product.
    std::vector<std::vector<AgentSet>> options(n);
    for (int j = 0; j < n; ++j)
        for (AgentSet m = 0; m <= full_set(n); ++m)
            if ((m >> j & 1) && std::popcount(m) >= n - f) options[j].push_back(m);

    std::vector<CommGraph> graphs;
    graphs.reserve(size);
    std::vector<std::size_t> pick(n, 0);
    while (true) {
        std::vector<AgentSet> masks(n);
        for (int j = 0; j < n; ++j) masks[j] = options[j][pick[j]];
        graphs.emplace_back(n, std::move(masks));
        int j = n - 1;
        while (j >= 0 && ++pick[j] == options[j].size()) pick[j--] = 0;
        if (j < 0) break;
    }
    return NetworkModel(std::move(graphs));
}

namespace {

using nlohmann::json;

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw validation_error(std::string("invalid JSON: ") + e.what());
    }
}

CommGraph graph_from_json(const json& doc, int n) {
    if (!doc.is_object() || !doc.contains("in") || !doc["in"].is_object())
        throw validation_error("graph document needs an \"in\" object");
    std::vector<std::vector<int>> lists(n);
    std::vector<bool> seen(n, false);
    for (const auto& [key, value] : doc["in"].items()) {
        int agent;
        try {
            agent = std::stoi(key);
        } catch (const std::exception&) {
            throw validation_error("agent key \"" + key + "\" is not a number");
        }
        if (agent < 1 || agent > n)
            throw validation_error("agent key " + key + " out of range 1.." + std::to_string(n));
        if (seen[agent - 1]) throw validation_error("agent " + key + " listed twice");
        seen[agent - 1] = true;
        if (!value.is_array())
            throw validation_error("in-neighborhood of agent " + key + " must be an array");
        for (const auto& v : value) {
            if (!v.is_number_integer())
                throw validation_error("in-neighborhood of agent " + key +
                                       " must contain integers");
            lists[agent - 1].push_back(v.get<int>() - 1);
        }
    }
    for (int j = 0; j < n; ++j)
        if (!seen[j])
            throw validation_error("no in-neighborhood given for agent " + std::to_string(j + 1));
    return CommGraph::from_in_lists(n, lists);
}

int agent_count_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("n") || !doc["n"].is_number_integer())
        throw validation_error("document needs an integer \"n\"");
    return doc["n"].get<int>();
}

json graph_to_json(const CommGraph& g) {
    json in = json::object();
    for (int j = 0; j < g.agent_count(); ++j) {
        json list = json::array();
        for (int i : g.in_neighbors(j)) list.push_back(i + 1);
        in[std::to_string(j + 1)] = list;
    }
    return json{{"in", in}};
}

}  // namespace

CommGraph parse_graph(const std::string& text) {
    json doc = parse_text(text);
    return graph_from_json(doc, agent_count_from_json(doc));
}

NetworkModel parse_model(const std::string& text) {
    json doc = parse_text(text);
    int n = agent_count_from_json(doc);
    if (!doc.contains("graphs") || !doc["graphs"].is_array())
        throw validation_error("model document needs a \"graphs\" array");
    std::vector<CommGraph> graphs;
    for (const auto& g : doc["graphs"]) {
        if (g.contains("n") && agent_count_from_json(g) != n)
            throw validation_error("graph agent count disagrees with the model's");
        graphs.push_back(graph_from_json(g, n));
    }
    return NetworkModel(std::move(graphs));
}

std::string serialize_graph(const CommGraph& g) {
    json doc = graph_to_json(g);
    doc["n"] = g.agent_count();
    return doc.dump(2);
}

std::string serialize_model(const NetworkModel& m) {
    json graphs = json::array();
    for (const auto& g : m.graphs()) graphs.push_back(graph_to_json(g));
    json doc{{"n", m.agent_count()}, {"graphs", graphs}};
    return doc.dump(2);
}

}  // namespace conlab
