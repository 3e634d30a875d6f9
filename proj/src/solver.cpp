#include "loosepack/solver.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

namespace loosepack {
namespace {

// Local relabeling: v0 becomes 0, the rest of the vertex set 1..L-1.
struct Local {
    std::vector<Vertex> label;  // local -> original
    std::vector<std::vector<std::uint32_t>> edge;  // local vertex lists
    std::vector<std::uint8_t> tags;
};

Local relabel(const AuxInstance& inst) {
    Local loc;
    std::unordered_map<Vertex, std::uint32_t> index;
    loc.label.push_back(inst.v0);
    index[inst.v0] = 0;
    for (Vertex v : inst.vertices) {
        if (v == inst.v0) continue;
        index[v] = static_cast<std::uint32_t>(loc.label.size());
        loc.label.push_back(v);
    }
    for (const auto& ae : inst.edges) {
        std::vector<std::uint32_t> e;
        for (auto v : ae.edge) e.push_back(index.at(v));
        loc.edge.push_back(std::move(e));
        loc.tags.push_back(ae.tags);
    }
    return loc;
}

bool feasible_size(const AuxInstance& inst) {
    const std::size_t L = inst.vertices.size();
    return L % (inst.k - 1) == 0 && L / (inst.k - 1) >= 3;
}

class Search {
public:
    Search(const AuxInstance& inst, std::mt19937_64& rng)
        : inst_(inst), loc_(relabel(inst)), rng_(rng), k_(inst.k), L_(loc_.label.size()) {
        incident_.resize(L_);
        for (std::uint32_t e = 0; e < loc_.edge.size(); ++e) {
            for (auto v : loc_.edge[e]) incident_[v].push_back(e);
        }
        used_.assign(L_, 0);
    }

    SolverResult run() {
        SolverResult res;
        if (feasible_size(inst_)) {
            used_[0] = 1;
            unused_ = L_ - 1;
            auto starts = incident_[0];
            std::shuffle(starts.begin(), starts.end(), rng_);
            for (auto e : starts) {
                if (!(loc_.tags[e] & kTagA)) continue;
                if (try_edge(e, 0, 0)) {
                    a_edge_ = e;
                    break;
                }
                if (capped_) break;
            }
        }
        res.nodes = nodes_;
        if (a_edge_ >= 0) {
            res.outcome = SolverOutcome::Found;
            res.cycle.k = k_;
            for (auto v : order_) res.cycle.order.push_back(loc_.label[v]);
            res.a_edge = to_tuple(static_cast<std::uint32_t>(a_edge_));
            res.b_edge = to_tuple(static_cast<std::uint32_t>(b_edge_));
        } else {
            res.outcome = capped_ ? SolverOutcome::CapExceeded : SolverOutcome::NoCycle;
        }
        return res;
    }

private:
    KTuple to_tuple(std::uint32_t e) const {
        std::array<Vertex, kMaxUniformity> buf{};
        for (unsigned t = 0; t < k_; ++t) buf[t] = loc_.label[loc_.edge[e][t]];
        return KTuple(std::span<const Vertex>(buf.data(), k_));
    }

    // Places edge e after vertex `cur`, trying each remaining vertex as the
    // next link.
    bool try_edge(std::uint32_t e, std::uint32_t cur, unsigned depth) {
        std::vector<std::uint32_t> others;
        for (auto v : loc_.edge[e]) {
            if (v == cur) continue;
            if (used_[v]) return false;
            others.push_back(v);
        }
        if (others.size() != k_ - 1) return false;
        std::shuffle(others.begin(), others.end(), rng_);
        if (order_.empty()) order_.push_back(cur);
        const std::size_t mark = order_.size();
        for (auto v : others) used_[v] = 1;
        unused_ -= k_ - 1;
        for (std::size_t i = 0; i < others.size(); ++i) {
            const auto link = others[i];
            for (auto v : others) {
                if (v != link) order_.push_back(v);
            }
            order_.push_back(link);
            if (extend(link, depth + 1)) return true;
            order_.resize(mark);
            if (capped_) break;
        }
        for (auto v : others) used_[v] = 0;
        unused_ += k_ - 1;
        order_.resize(mark);
        return false;
    }

    bool extend(std::uint32_t cur, unsigned depth) {
        if (inst_.node_cap != 0 && nodes_ >= inst_.node_cap) {
            capped_ = true;
            return false;
        }
        ++nodes_;
        if (unused_ == k_ - 2) return close(cur);
        if (depth % 4 == 0 && !reachable(cur)) return false;
        std::vector<std::uint32_t> cands;
        for (auto e : incident_[cur]) {
            bool ok = true;
            for (auto v : loc_.edge[e]) ok = ok && (v == cur || !used_[v]);
            if (ok) cands.push_back(e);
        }
        std::shuffle(cands.begin(), cands.end(), rng_);
        for (auto e : cands) {
            if (try_edge(e, cur, depth)) return true;
            if (capped_) return false;
        }
        return false;
    }

    bool close(std::uint32_t cur) {
        for (auto e : incident_[cur]) {
            if (!(loc_.tags[e] & kTagB)) continue;
            bool has_v0 = false, ok = true;
            for (auto v : loc_.edge[e]) {
                if (v == 0) {
                    has_v0 = true;
                } else if (v != cur && used_[v]) {
                    ok = false;
                }
            }
            if (!ok || !has_v0) continue;
            for (auto v : loc_.edge[e]) {
                if (v != 0 && v != cur) order_.push_back(v);
            }
            b_edge_ = e;
            return true;
        }
        return false;
    }

    // Every unused vertex must still lie in an edge drawn from the unused
    // vertices, the current end and v0.
    bool reachable(std::uint32_t cur) const {
        for (std::uint32_t u = 1; u < L_; ++u) {
            if (used_[u]) continue;
            bool any = false;
            for (auto e : incident_[u]) {
                bool ok = true;
                for (auto v : loc_.edge[e]) ok = ok && (!used_[v] || v == cur || v == 0);
                if (ok) {
                    any = true;
                    break;
                }
            }
            if (!any) return false;
        }
        return true;
    }

    const AuxInstance& inst_;
    Local loc_;
    std::mt19937_64& rng_;
    unsigned k_;
    std::size_t L_;
    std::vector<std::vector<std::uint32_t>> incident_;
    std::vector<char> used_;
    std::size_t unused_ = 0;
    std::vector<std::uint32_t> order_;
    std::uint64_t nodes_ = 0;
    bool capped_ = false;
    long a_edge_ = -1;
    long b_edge_ = -1;
};

void assert_found(const AuxInstance& inst, const SolverResult& r) {
    const auto v = validate_loose_cycle_on(r.cycle, inst.vertices);
    if (!v) throw Error("solver produced an invalid cycle: " + v.detail);
    const auto edges = r.cycle.edges();
    if (r.cycle.order.front() != inst.v0 || !(edges.front() == r.a_edge) || !(edges.back() == r.b_edge)) {
        throw Error("solver cycle does not start and end at v0");
    }
    std::uint8_t ta = 0, tb = 0;
    for (const auto& ae : inst.edges) {
        if (ae.edge == r.a_edge) ta |= ae.tags;
        if (ae.edge == r.b_edge) tb |= ae.tags;
    }
    if (!(ta & kTagA) || !(tb & kTagB)) throw Error("solver cycle violates inheritance constraints");
}

}  // namespace

std::string_view to_string(SolverOutcome o) noexcept {
    switch (o) {
        case SolverOutcome::Found: return "FOUND";
        case SolverOutcome::NoCycle: return "NO_CYCLE";
        case SolverOutcome::CapExceeded: return "SOLVER_CAP";
    }
    return "?";
}

void AuxInstance::validate() const {
    if (k < 3 || k > kMaxUniformity) throw Error("aux instance: k out of range");
    std::vector<Vertex> vs = vertices;
    std::sort(vs.begin(), vs.end());
    if (std::adjacent_find(vs.begin(), vs.end()) != vs.end()) throw Error("aux instance: duplicate vertex");
    if (!std::binary_search(vs.begin(), vs.end(), v0)) throw Error("aux instance: v0 missing from vertex set");
    std::set<KTuple> seen;
    for (const auto& ae : edges) {
        if (ae.edge.size() != k) throw Error("aux instance: edge " + ae.edge.to_string() + " has wrong size");
        for (auto v : ae.edge) {
            if (!std::binary_search(vs.begin(), vs.end(), v)) {
                throw Error("aux instance: edge " + ae.edge.to_string() + " leaves the vertex set");
            }
        }
        if (!seen.insert(ae.edge).second) throw Error("aux instance: duplicate edge " + ae.edge.to_string());
        if (ae.edge.contains(v0) && !(ae.tags & (kTagA | kTagB))) {
            throw Error("aux instance: v0-edge " + ae.edge.to_string() + " has no side tag");
        }
        if (ae.tags == 0) throw Error("aux instance: untagged edge " + ae.edge.to_string());
    }
}

SolverResult find_constrained_hc(const AuxInstance& inst, std::mt19937_64& rng) {
    inst.validate();
    Search search(inst, rng);
    SolverResult r = search.run();
    if (r.found()) assert_found(inst, r);
    return r;
}

BruteForceResult brute_force_hc(const AuxInstance& inst) {
    inst.validate();
    if (inst.vertices.size() > kBruteForceLimit) {
        throw Error("brute force limited to " + std::to_string(kBruteForceLimit) + " vertices");
    }
    BruteForceResult out;
    if (!feasible_size(inst)) return out;

    std::map<KTuple, std::uint8_t> tags;
    for (const auto& ae : inst.edges) tags[ae.edge] |= ae.tags;

    const unsigned k = inst.k;
    std::vector<Vertex> rest;
    for (Vertex v : inst.vertices) {
        if (v != inst.v0) rest.push_back(v);
    }
    std::sort(rest.begin(), rest.end());
    std::set<std::vector<KTuple>> cycles;
    LooseCycle c{{}, k};
    c.order.resize(inst.vertices.size());
    c.order[0] = inst.v0;
    do {
        std::copy(rest.begin(), rest.end(), c.order.begin() + 1);
        ++out.result.nodes;
        auto edges = c.edges();
        bool ok = true;
        for (const auto& e : edges) {
            if (!tags.count(e)) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        const auto first = tags[edges.front()];
        const auto last = tags[edges.back()];
        const bool forward = (first & kTagA) && (last & kTagB);
        const bool backward = (first & kTagB) && (last & kTagA);
        if (!forward && !backward) continue;
        if (out.count == 0) {
            SolverResult& r = out.result;
            r.outcome = SolverOutcome::Found;
            r.cycle = c;
            if (!forward) std::reverse(r.cycle.order.begin() + 1, r.cycle.order.end());
            const auto oriented = r.cycle.edges();
            r.a_edge = oriented.front();
            r.b_edge = oriented.back();
        }
        std::sort(edges.begin(), edges.end());
        if (cycles.insert(std::move(edges)).second) ++out.count;
    } while (std::next_permutation(rest.begin(), rest.end()));
    return out;
}

nlohmann::json to_json(const AuxInstance& inst) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& ae : inst.edges) {
        nlohmann::json tags = nlohmann::json::array();
        if (ae.tags & kTagA) tags.push_back("a");
        if (ae.tags & kTagB) tags.push_back("b");
        if (ae.tags & kTagPlain) tags.push_back("plain");
        edges.push_back({{"edge", tuple_to_json(ae.edge)}, {"tags", tags}});
    }
    return {{"k", inst.k}, {"v0", inst.v0}, {"vertices", inst.vertices}, {"edges", edges}, {"node_cap", inst.node_cap}};
}

AuxInstance aux_from_json(const nlohmann::json& j) {
    AuxInstance inst;
    inst.k = j.at("k").get<unsigned>();
    inst.v0 = j.at("v0").get<Vertex>();
    inst.vertices = j.at("vertices").get<std::vector<Vertex>>();
    if (j.contains("node_cap")) inst.node_cap = j.at("node_cap").get<std::uint64_t>();
    for (const auto& e : j.at("edges")) {
        AuxEdge ae;
        ae.edge = tuple_from_json(e.at("edge"));
        for (const auto& t : e.at("tags")) {
            const auto s = t.get<std::string>();
            if (s == "a") {
                ae.tags |= kTagA;
            } else if (s == "b") {
                ae.tags |= kTagB;
            } else if (s == "plain") {
                ae.tags |= kTagPlain;
            } else {
                throw Error("aux instance: unknown tag " + s);
            }
        }
        inst.edges.push_back(ae);
    }
    inst.validate();
    return inst;
}

nlohmann::json to_json(const SolverResult& r) {
    nlohmann::json j = {{"outcome", std::string(to_string(r.outcome))}, {"nodes", r.nodes}};
    if (r.found()) {
        j["cycle"] = cycle_to_json(r.cycle);
        j["a_edge"] = tuple_to_json(r.a_edge);
        j["b_edge"] = tuple_to_json(r.b_edge);
    }
    return j;
}

}  // namespace loosepack
