#pragma once

// Brute-force reference implementations. They share no code with the
// library beyond its data types and public accessors.

#include "soma/activity_model.hpp"
#include "soma/activity_parser.hpp"
#include "soma/interval_algebra.hpp"
#include "soma/ontology.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using soma::BaseRelation;
using soma::ConcreteInterval;

// -- point relations --------------------------------------------------------

inline bool same(double x, double y, double eps) { return std::fabs(x - y) <= eps; }
inline bool less(double x, double y, double eps) { return x < y && !same(x, y, eps); }

/// Textbook endpoint definition of each base relation of `a` to `b`.
inline bool holds(BaseRelation r, ConcreteInterval a, ConcreteInterval b, double eps = 0.0) {
    const double as = a.start, ae = a.end, bs = b.start, be = b.end;
    switch (r) {
        case BaseRelation::Before: return less(ae, bs, eps);
        case BaseRelation::After: return less(be, as, eps);
        case BaseRelation::Meets: return same(ae, bs, eps);
        case BaseRelation::MetBy: return same(be, as, eps);
        case BaseRelation::Overlaps: return less(as, bs, eps) && less(bs, ae, eps) && less(ae, be, eps);
        case BaseRelation::OverlappedBy: return less(bs, as, eps) && less(as, be, eps) && less(be, ae, eps);
        case BaseRelation::Starts: return same(as, bs, eps) && less(ae, be, eps);
        case BaseRelation::StartedBy: return same(as, bs, eps) && less(be, ae, eps);
        case BaseRelation::During: return less(bs, as, eps) && less(ae, be, eps);
        case BaseRelation::Contains: return less(as, bs, eps) && less(be, ae, eps);
        case BaseRelation::Finishes: return less(bs, as, eps) && same(ae, be, eps);
        case BaseRelation::FinishedBy: return less(as, bs, eps) && same(ae, be, eps);
        case BaseRelation::Equals: return same(as, bs, eps) && same(ae, be, eps);
    }
    return false;
}

/// Every base relation whose definition holds.
inline std::vector<BaseRelation> holding(ConcreteInterval a, ConcreteInterval b, double eps = 0.0) {
    std::vector<BaseRelation> out;
    for (auto r : soma::kAllBaseRelations) {
        if (holds(r, a, b, eps)) out.push_back(r);
    }
    return out;
}

// -- composition ------------------------------------------------------------

using Table = std::array<std::array<std::uint16_t, 13>, 13>;

inline std::uint16_t bit(BaseRelation r) { return static_cast<std::uint16_t>(1U << static_cast<unsigned>(r)); }

/// Enumerates every placement of three intervals on six ranks (ties
/// allowed) and records which A-C relations occur for each (A-B, B-C) pair.
inline Table composition_table() {
    Table table{};
    constexpr int kRanks = 6;
    for (int a0 = 0; a0 < kRanks; ++a0)
        for (int a1 = a0 + 1; a1 < kRanks; ++a1)
            for (int b0 = 0; b0 < kRanks; ++b0)
                for (int b1 = b0 + 1; b1 < kRanks; ++b1)
                    for (int c0 = 0; c0 < kRanks; ++c0)
                        for (int c1 = c0 + 1; c1 < kRanks; ++c1) {
                            const ConcreteInterval a{double(a0), double(a1)};
                            const ConcreteInterval b{double(b0), double(b1)};
                            const ConcreteInterval c{double(c0), double(c1)};
                            const auto ab = holding(a, b).front();
                            const auto bc = holding(b, c).front();
                            const auto ac = holding(a, c).front();
                            table[static_cast<int>(ab)][static_cast<int>(bc)] |= bit(ac);
                        }
    return table;
}

// -- network realizability --------------------------------------------------

/// Labels as bitmasks, labels[i][j] relating variable i to j.
using Labels = std::vector<std::vector<std::uint16_t>>;

/// Backtracking search for integer intervals on ranks [0, 2n) satisfying
/// every label. 2n ranks suffice since n intervals have at most 2n
/// distinct endpoints.
inline bool realizable(const Labels& labels) {
    const int n = static_cast<int>(labels.size());
    const int ranks = 2 * n;
    std::vector<ConcreteInterval> slots;
    for (int s = 0; s < ranks; ++s)
        for (int e = s + 1; e < ranks; ++e) slots.push_back({double(s), double(e)});
    const std::size_t m = slots.size();
    std::vector<std::uint16_t> rel(m * m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) rel[a * m + b] = bit(holding(slots[a], slots[b]).front());

    std::vector<std::size_t> placed(n);
    std::function<bool(int)> place = [&](int v) {
        if (v == n) return true;
        for (std::size_t k = 0; k < m; ++k) {
            bool ok = true;
            for (int u = 0; u < v && ok; ++u) ok = (labels[u][v] & rel[placed[u] * m + k]) != 0;
            if (!ok) continue;
            placed[v] = k;
            if (place(v + 1)) return true;
        }
        return false;
    };
    return place(0);
}

/// Labels of a network as asserted, before any propagation.
inline Labels labels_of(const soma::ConstraintNetwork& net) {
    const auto n = net.size();
    Labels out(n, std::vector<std::uint16_t>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i][j] = net.label(i, j).bits();
    return out;
}

// -- ontology ---------------------------------------------------------------

inline bool subsumed(const soma::OntologyStore& store, const std::string& a, const std::string& b) {
    std::deque<std::string> todo{a};
    std::set<std::string> seen;
    while (!todo.empty()) {
        const std::string c = todo.front();
        todo.pop_front();
        if (c == b) return true;
        if (!seen.insert(c).second) continue;
        for (const auto& p : store.concept_by_id(c).parents) todo.push_back(p);
    }
    return false;
}

inline bool value_in(const std::optional<soma::Quantity>& q, const soma::RegionWithin& r) {
    return q && q->units == r.units && q->value >= r.lo && q->value <= r.hi;
}

/// Restriction evaluation by scanning the entity's quality set.
inline bool satisfies(const soma::OntologyStore& store, const soma::Entity& e, const soma::Restriction& r) {
    if (const auto* k = std::get_if<soma::KindIs>(&r.node)) return e.kind == k->kind;
    if (const auto* t = std::get_if<soma::TypeTagIn>(&r.node)) {
        for (const auto& tag : t->tags)
            if (tag == e.type_tag) return true;
        return false;
    }
    if (const auto* d = std::get_if<soma::HasDisposition>(&r.node)) {
        for (const auto& q : e.qualities) {
            const auto* disp = store.disposition(q);
            if (disp != nullptr && disp->disposition_type == d->disposition_type) return true;
        }
        return false;
    }
    if (const auto* g = std::get_if<soma::RegionWithin>(&r.node)) {
        if (value_in(e.value, *g)) return true;
        if (e.kind != soma::EntityKind::Object) return false;
        for (const auto& q : e.qualities)
            if (value_in(store.entity(q).value, *g)) return true;
        return false;
    }
    if (const auto* all = std::get_if<soma::AllOf>(&r.node)) {
        for (const auto& term : all->terms)
            if (!satisfies(store, e, term)) return false;
        return true;
    }
    const auto& any = std::get<soma::AnyOf>(r.node);
    for (const auto& term : any.terms)
        if (satisfies(store, e, term)) return true;
    return false;
}

/// A role may classify an object that meets its restriction, if any.
inline bool role_accepts(const soma::OntologyStore& store, const std::string& role, const std::string& entity_id) {
    if (!store.has_entity(entity_id)) return false;
    const auto& e = store.entity(entity_id);
    if (e.kind != soma::EntityKind::Object) return false;
    const auto& c = store.concept_by_id(role);
    return !c.restriction || satisfies(store, e, *c.restriction);
}

// -- selection --------------------------------------------------------------

inline std::map<std::string, std::set<std::string>> select(const soma::EventTypeRef& task,
                                                           const std::vector<std::string>& scene,
                                                           const soma::OntologyStore& store) {
    std::map<std::string, std::set<std::string>> out;
    for (const auto& role : task.uses_roles) {
        auto& bucket = out[role];
        for (const auto& obj : scene)
            if (role_accepts(store, role, obj)) bucket.insert(obj);
    }
    return out;
}

// -- parsing ----------------------------------------------------------------

inline bool type_matches(const soma::OntologyStore& store, const std::string& tag, const std::string& concept_id) {
    for (const auto& [id, c] : store.concepts()) {
        if ((id == tag || c.name == tag) && subsumed(store, id, concept_id)) return true;
    }
    return false;
}

/// Positional slot grounding closed over bindings with union-find.
/// Returns false when two grounded slots of one class disagree.
inline bool close_grounding(const soma::Description& d, std::map<soma::Slot, std::string>& grounding) {
    std::vector<soma::Slot> slots;
    auto index = [&](const soma::Slot& s) {
        for (std::size_t i = 0; i < slots.size(); ++i)
            if (slots[i].phase == s.phase && slots[i].role == s.role) return i;
        slots.push_back(s);
        return slots.size() - 1;
    };
    for (const auto& [s, e] : grounding) index(s);
    for (const auto& b : d.bindings())
        for (const auto& s : b.slots) index(s);
    std::vector<std::size_t> parent(slots.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (const auto& b : d.bindings())
        for (std::size_t k = 1; k < b.slots.size(); ++k) parent[find(index(b.slots[k]))] = find(index(b.slots[0]));

    std::map<std::size_t, std::string> value;
    for (const auto& [s, e] : grounding) {
        const auto root = find(index(s));
        auto [it, fresh] = value.emplace(root, e);
        if (!fresh && it->second != e) return false;
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
        auto it = value.find(find(i));
        if (it != value.end()) grounding[slots[i]] = it->second;
    }
    return true;
}

/// Every injective phase -> token map of every plan and process flow,
/// filtered by event type, temporal labels (phases against each other and
/// against their hull as the defined event), bindings and role restrictions.
inline std::vector<soma::Interpretation> parse(const soma::Episode& episode,
                                               const std::vector<soma::Description>& library,
                                               const soma::OntologyStore& store, double eps) {
    std::vector<soma::Interpretation> out;
    const auto& tokens = episode.tokens;
    for (const auto& d : library) {
        if (d.kind() == soma::DescriptionKind::Configuration) continue;
        const auto phases = d.phases();
        const std::size_t np = phases.size();
        if (np == 0 || np > tokens.size()) continue;
        const auto net = soma::compile_constraints(d);
        const std::size_t whole = *net.index_of(d.defined_event().id);

        std::vector<std::size_t> choice(np, 0);
        std::function<void(std::size_t)> enumerate = [&](std::size_t p) {
            if (p < np) {
                for (std::size_t t = 0; t < tokens.size(); ++t) {
                    choice[p] = t;
                    enumerate(p + 1);
                }
                return;
            }
            std::set<std::size_t> distinct(choice.begin(), choice.end());
            if (distinct.size() != np) return;

            ConcreteInterval hull{tokens[choice[0]].interval};
            for (std::size_t q = 0; q < np; ++q) {
                const auto& tok = tokens[choice[q]];
                if (!(tok.interval.end - tok.interval.start > 2 * eps)) return;
                if (!type_matches(store, tok.type_tag, phases[q].concept_id)) return;
                if (tok.participants.size() < phases[q].uses_roles.size()) return;
                hull.start = std::min(hull.start, tok.interval.start);
                hull.end = std::max(hull.end, tok.interval.end);
            }
            auto unique_relation = [&](ConcreteInterval a, ConcreteInterval b) {
                const auto rs = holding(a, b, eps);
                return rs.size() == 1 ? std::optional<BaseRelation>(rs.front()) : std::nullopt;
            };
            for (std::size_t q = 0; q < np; ++q) {
                const auto vq = *net.index_of(phases[q].id);
                const auto iq = tokens[choice[q]].interval;
                const auto to_whole = unique_relation(iq, hull);
                if (!to_whole || !net.label(vq, whole).contains(*to_whole)) return;
                for (std::size_t r = 0; r < np; ++r) {
                    if (r == q) continue;
                    const auto rel = unique_relation(iq, tokens[choice[r]].interval);
                    if (!rel || !net.label(vq, *net.index_of(phases[r].id)).contains(*rel)) return;
                }
            }

            std::map<soma::Slot, std::string> grounding;
            for (std::size_t q = 0; q < np; ++q) {
                for (std::size_t k = 0; k < phases[q].uses_roles.size(); ++k) {
                    grounding[{phases[q].id, phases[q].uses_roles[k]}] = tokens[choice[q]].participants[k];
                }
            }
            if (!close_grounding(d, grounding)) return;
            for (const auto& [slot, entity] : grounding)
                if (!role_accepts(store, slot.role, entity)) return;

            soma::Interpretation i;
            i.plan = d.id;
            for (std::size_t q = 0; q < np; ++q) i.phase_grounding[phases[q].id] = tokens[choice[q]].id;
            i.role_grounding = std::move(grounding);
            i.coverage = double(np) / double(tokens.size());
            i.earliest_start = hull.start;
            out.push_back(std::move(i));
        };
        enumerate(0);
    }
    return out;
}

/// Order-insensitive comparison key.
inline std::set<std::string> fingerprint(const std::vector<soma::Interpretation>& interps) {
    std::set<std::string> out;
    for (const auto& i : interps) {
        std::string key = i.plan + "|";
        for (const auto& [p, t] : i.phase_grounding) key += p + "=" + t + ";";
        key += "|";
        for (const auto& [s, e] : i.role_grounding) key += s.phase + "." + s.role + "=" + e + ";";
        key += "|" + std::to_string(i.coverage) + "|" + std::to_string(i.earliest_start);
        out.insert(key);
    }
    return out;
}

}  // namespace oracle
