#include "soma/activity_parser.hpp"

#include "soma/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <tuple>

namespace soma {

namespace {

struct StateKey {
    std::string type;
    std::vector<std::string> participants;
    friend auto operator<=>(const StateKey&, const StateKey&) = default;
};

struct Marker {
    double time;
    bool holds;
};

ConcreteInterval hull(std::span<const ConcreteInterval> intervals) {
    ConcreteInterval h = intervals.front();
    for (const auto& iv : intervals) {
        h.start = std::min(h.start, iv.start);
        h.end = std::max(h.end, iv.end);
    }
    return h;
}

/// Extends a slot grounding through bindings until nothing changes. Returns
/// false if a binding's slots disagree.
bool close_over_bindings(std::span<const Binding> bindings, std::map<Slot, std::string>& grounding) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& b : bindings) {
            const std::string* value = nullptr;
            for (const auto& slot : b.slots) {
                auto it = grounding.find(slot);
                if (it == grounding.end()) continue;
                if (value == nullptr) value = &it->second;
                else if (*value != it->second) return false;
            }
            if (value == nullptr) continue;
            const std::string v = *value;
            for (const auto& slot : b.slots) {
                if (grounding.emplace(slot, v).second) changed = true;
            }
        }
    }
    return true;
}

bool bindings_agree(std::span<const Binding> bindings, const std::map<Slot, std::string>& grounding) {
    for (const auto& b : bindings) {
        const std::string* value = nullptr;
        for (const auto& slot : b.slots) {
            auto it = grounding.find(slot);
            if (it == grounding.end()) continue;
            if (value == nullptr) value = &it->second;
            else if (*value != it->second) return false;
        }
    }
    return true;
}

bool slot_accepts(const OntologyStore& store, const std::string& role, const std::string& entity) {
    return store.has_entity(entity) && store.check_classification(role, entity).accepted;
}

std::size_t count_phase_tokens(const std::map<std::string, std::string>& phase_grounding) {
    std::set<std::string> distinct;
    for (const auto& [phase, token] : phase_grounding) distinct.insert(token);
    return distinct.size();
}

bool is_parsable(const Description& d) { return d.kind() != DescriptionKind::Configuration; }

}  // namespace

std::string_view to_string(TokenClass c) {
    switch (c) {
        case TokenClass::ContactEvent: return "contact";
        case TokenClass::MotionEvent: return "motion";
        case TokenClass::StateChange: return "state";
    }
    return "?";
}

std::optional<TokenClass> parse_token_class(std::string_view text) {
    for (auto c : {TokenClass::ContactEvent, TokenClass::MotionEvent, TokenClass::StateChange}) {
        if (to_string(c) == text) return c;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// tokenizer

std::vector<Token> tokenize(std::span<const RawEvent> raw, double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw Error(ErrorCode::InvalidArgument, "eps must be finite and >= 0");

    std::map<StateKey, std::vector<Marker>> markers;
    std::vector<const RawEvent*> state_intervals;
    std::vector<const RawEvent*> state_points;
    std::vector<Token> tokens;

    for (const auto& ev : raw) {
        if (!std::isfinite(ev.start) || !std::isfinite(ev.end)) {
            throw Error(ErrorCode::InvalidArgument, "non-finite timestamp for " + ev.type);
        }
        if (ev.end < ev.start) {
            throw Error(ErrorCode::NegativeDuration, ev.type + " ends before it starts");
        }
        if (ev.participants.empty()) {
            throw Error(ErrorCode::InvalidArgument, ev.type + " has no participants");
        }
        if (ev.token_class == TokenClass::StateChange) {
            const StateKey key{ev.type, ev.participants};
            if (!ev.holds) {
                markers[key].push_back({ev.start, false});
            } else if (ev.end > ev.start) {
                state_intervals.push_back(&ev);
            } else {
                state_points.push_back(&ev);
                markers[key].push_back({ev.start, true});
            }
            continue;
        }
        tokens.push_back({"", ev.token_class, ev.type, ev.participants, {ev.start, ev.end}});
    }

    std::set<const RawEvent*> consumed_points;
    for (const auto* ev : state_intervals) {
        const StateKey key{ev->type, ev->participants};
        std::vector<Marker> inside;
        for (const auto& m : markers[key]) {
            if (m.time > ev->start && m.time < ev->end) inside.push_back(m);
        }
        for (const auto* p : state_points) {
            if (p->type == ev->type && p->participants == ev->participants && p->start > ev->start &&
                p->start < ev->end) {
                consumed_points.insert(p);
            }
        }
        // Ends before starts at equal times.
        std::sort(inside.begin(), inside.end(), [](const Marker& a, const Marker& b) {
            return std::tie(a.time, a.holds) < std::tie(b.time, b.holds);
        });
        bool holding = true;
        double segment_start = ev->start;
        auto emit = [&](double from, double to) {
            if (to > from) tokens.push_back({"", TokenClass::StateChange, ev->type, ev->participants, {from, to}});
        };
        for (const auto& m : inside) {
            if (holding && !m.holds) {
                emit(segment_start, m.time);
                holding = false;
            } else if (!holding && m.holds) {
                segment_start = m.time;
                holding = true;
            }
        }
        if (holding) emit(segment_start, ev->end);
    }
    for (const auto* p : state_points) {
        if (consumed_points.count(p) == 0) {
            tokens.push_back({"", TokenClass::StateChange, p->type, p->participants, {p->start, p->end}});
        }
    }

    for (auto& t : tokens) {
        if (t.interval.end == t.interval.start) {
            if (eps <= 0.0) throw Error(ErrorCode::InvalidArgument, "point event " + t.type_tag + " needs eps > 0");
            t.interval.end = t.interval.start + eps;
        }
    }
    std::stable_sort(tokens.begin(), tokens.end(), [](const Token& a, const Token& b) {
        return std::tie(a.interval.start, a.interval.end, a.token_class, a.type_tag, a.participants) <
               std::tie(b.interval.start, b.interval.end, b.token_class, b.type_tag, b.participants);
    });
    for (std::size_t i = 0; i < tokens.size(); ++i) tokens[i].id = "tok" + std::to_string(i);
    return tokens;
}

// ---------------------------------------------------------------------------
// ranking

RankKey score(const Interpretation& i) {
    return {i.coverage, i.phase_grounding.size(), i.earliest_start, i.plan};
}

bool ranks_before(const RankKey& a, const RankKey& b) {
    if (a.coverage != b.coverage) return a.coverage > b.coverage;
    if (a.phase_count != b.phase_count) return a.phase_count > b.phase_count;
    if (a.earliest_start != b.earliest_start) return a.earliest_start < b.earliest_start;
    return a.plan < b.plan;
}

std::vector<Interpretation> rank(std::vector<Interpretation> interps) {
    std::stable_sort(interps.begin(), interps.end(), [](const Interpretation& a, const Interpretation& b) {
        return ranks_before(score(a), score(b));
    });
    return interps;
}

bool tag_classified_by(const OntologyStore& store, std::string_view tag, std::string_view concept_id) {
    for (const auto& [id, c] : store.concepts()) {
        if ((id == tag || c.name == tag) && store.is_subsumed_by(id, concept_id)) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// parser

ActivityParser::ActivityParser(std::span<const Description> library, const OntologyStore& store, double eps)
    : store_(&store), eps_(eps) {
    if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be >= 0");
    for (const auto& d : library) {
        if (!is_parsable(d)) continue;
        CompiledPlan plan{&d, compile_constraints(d), 0, {}};
        plan.whole_var = *plan.network.index_of(d.defined_event().id);
        for (const auto& phase : d.phases()) plan.phase_vars.push_back(*plan.network.index_of(phase.id));
        plans_.push_back(std::move(plan));
    }
}

std::vector<Interpretation> ActivityParser::parse(const Episode& episode) const {
    const OntologyStore grounded = ground_scene(*store_, episode.scene);
    return parse_grounded(episode, grounded);
}

std::vector<Interpretation> ActivityParser::parse_grounded(const Episode& episode, const OntologyStore& grounded) const {
    std::vector<Interpretation> out;
    for (const auto& plan : plans_) match_plan(plan, episode, grounded, out);
    return rank(std::move(out));
}

void ActivityParser::match_plan(const CompiledPlan& plan, const Episode& episode, const OntologyStore& store,
                                std::vector<Interpretation>& out) const {
    const Description& d = *plan.description;
    const auto phases = d.phases();
    const auto& tokens = episode.tokens;
    const std::size_t n_phases = phases.size();
    const std::size_t n_tokens = tokens.size();
    if (n_phases == 0 || n_phases > n_tokens) return;

    // Forward pruning: event type, arity and role restrictions per phase.
    std::vector<std::vector<std::size_t>> candidates(n_phases);
    for (std::size_t p = 0; p < n_phases; ++p) {
        const auto& phase = phases[p];
        for (std::size_t t = 0; t < n_tokens; ++t) {
            const Token& tok = tokens[t];
            if (!resolvable(tok.interval, eps_)) continue;
            if (tok.participants.size() < phase.uses_roles.size()) continue;
            if (!tag_classified_by(store, tok.type_tag, phase.concept_id)) continue;
            bool roles_ok = true;
            for (std::size_t r = 0; r < phase.uses_roles.size() && roles_ok; ++r) {
                roles_ok = slot_accepts(store, phase.uses_roles[r], tok.participants[r]);
            }
            if (roles_ok) candidates[p].push_back(t);
        }
        if (candidates[p].empty()) return;
    }

    // Pairwise qualitative relations between resolvable tokens.
    std::vector<std::optional<BaseRelation>> relation(n_tokens * n_tokens);
    for (std::size_t a = 0; a < n_tokens; ++a) {
        if (!resolvable(tokens[a].interval, eps_)) continue;
        for (std::size_t b = 0; b < n_tokens; ++b) {
            if (a != b && resolvable(tokens[b].interval, eps_)) {
                relation[a * n_tokens + b] = relation_from_endpoints(tokens[a].interval, tokens[b].interval, eps_);
            }
        }
    }

    std::vector<std::size_t> chosen(n_phases);
    std::vector<char> used(n_tokens, 0);
    std::map<Slot, std::string> grounding;

    std::function<void(std::size_t)> search = [&](std::size_t depth) {
        if (depth == n_phases) {
            std::vector<ConcreteInterval> intervals;
            for (auto t : chosen) intervals.push_back(tokens[t].interval);
            const ConcreteInterval whole = hull(intervals);
            for (std::size_t p = 0; p < n_phases; ++p) {
                const auto rel = relation_from_endpoints(intervals[p], whole, eps_);
                if (!plan.network.label(plan.phase_vars[p], plan.whole_var).contains(rel)) return;
            }
            std::map<Slot, std::string> closed = grounding;
            if (!close_over_bindings(d.bindings(), closed)) return;
            for (const auto& [slot, entity] : closed) {
                if (grounding.count(slot) == 0 && !slot_accepts(store, slot.role, entity)) return;
            }
            Interpretation interp;
            interp.plan = d.id;
            interp.earliest_start = whole.start;
            for (std::size_t p = 0; p < n_phases; ++p) interp.phase_grounding[phases[p].id] = tokens[chosen[p]].id;
            interp.role_grounding = std::move(closed);
            interp.coverage = static_cast<double>(count_phase_tokens(interp.phase_grounding)) /
                              static_cast<double>(n_tokens);
            out.push_back(std::move(interp));
            return;
        }
        const auto& phase = phases[depth];
        for (auto t : candidates[depth]) {
            if (used[t]) continue;
            bool temporal_ok = true;
            for (std::size_t j = 0; j < depth && temporal_ok; ++j) {
                const auto rel = *relation[t * n_tokens + chosen[j]];
                temporal_ok = plan.network.label(plan.phase_vars[depth], plan.phase_vars[j]).contains(rel);
            }
            if (!temporal_ok) continue;

            for (std::size_t r = 0; r < phase.uses_roles.size(); ++r) {
                grounding[{phase.id, phase.uses_roles[r]}] = tokens[t].participants[r];
            }
            if (bindings_agree(d.bindings(), grounding)) {
                used[t] = 1;
                chosen[depth] = t;
                search(depth + 1);
                used[t] = 0;
            }
            for (const auto& role : phase.uses_roles) grounding.erase({phase.id, role});
        }
    };
    search(0);
}

std::vector<Interpretation> parse(const Episode& episode, std::span<const Description> library,
                                  const OntologyStore& store, double eps) {
    return ActivityParser(library, store, eps).parse(episode);
}

// ---------------------------------------------------------------------------
// verification

bool verify_interpretation(const Interpretation& i, const Episode& episode, std::span<const Description> library,
                           const OntologyStore& store, double eps) {
    const OntologyStore grounded = ground_scene(store, episode.scene);
    return verify_interpretation_grounded(i, episode, library, grounded, eps);
}

bool verify_interpretation_grounded(const Interpretation& i, const Episode& episode,
                                    std::span<const Description> library, const OntologyStore& grounded,
                                    double eps) {
    const auto plan_it = std::find_if(library.begin(), library.end(), [&](const Description& d) { return d.id == i.plan; });
    if (plan_it == library.end()) throw Error(ErrorCode::DanglingReference, "plan " + i.plan);
    const Description& d = *plan_it;
    if (!is_parsable(d)) return false;

    std::map<std::string, const Token*> token_by_id;
    for (const auto& t : episode.tokens) token_by_id.emplace(t.id, &t);
    for (const auto& [phase, token] : i.phase_grounding) {
        if (token_by_id.count(token) == 0) throw Error(ErrorCode::DanglingReference, "token " + token);
    }
    for (const auto& [slot, entity] : i.role_grounding) {
        if (!grounded.has_entity(entity)) throw Error(ErrorCode::DanglingReference, "entity " + entity);
    }

    // Every phase grounded exactly once, by distinct tokens.
    const auto phases = d.phases();
    if (phases.empty() || i.phase_grounding.size() != phases.size()) return false;
    std::set<std::string> tokens_used;
    for (const auto& phase : phases) {
        auto it = i.phase_grounding.find(phase.id);
        if (it == i.phase_grounding.end()) return false;
        if (!tokens_used.insert(it->second).second) return false;
    }

    // (a) event types
    for (const auto& phase : phases) {
        const Token& tok = *token_by_id.at(i.phase_grounding.at(phase.id));
        if (!tag_classified_by(grounded, tok.type_tag, phase.concept_id)) return false;
    }

    // (b) temporal labels, with the defined event as the hull of its phases
    ConstraintNetwork net;
    try {
        net = compile_constraints(d);
    } catch (const Error&) {
        return false;
    }
    std::map<std::string, ConcreteInterval> where;
    std::vector<ConcreteInterval> phase_intervals;
    for (const auto& phase : phases) {
        const auto iv = token_by_id.at(i.phase_grounding.at(phase.id))->interval;
        if (!resolvable(iv, eps)) return false;
        where[phase.id] = iv;
        phase_intervals.push_back(iv);
    }
    where[d.defined_event().id] = hull(phase_intervals);
    for (const auto& [a, ia] : where) {
        for (const auto& [b, ib] : where) {
            if (a == b) continue;
            if (!net.query(a, b).contains(relation_from_endpoints(ia, ib, eps))) return false;
        }
    }

    // (c) role grounding is positional per phase, closed over bindings, and
    // every binding holds
    std::map<Slot, std::string> expected;
    for (const auto& phase : phases) {
        const Token& tok = *token_by_id.at(i.phase_grounding.at(phase.id));
        if (tok.participants.size() < phase.uses_roles.size()) return false;
        for (std::size_t r = 0; r < phase.uses_roles.size(); ++r) {
            expected[{phase.id, phase.uses_roles[r]}] = tok.participants[r];
        }
    }
    if (!close_over_bindings(d.bindings(), expected)) return false;
    if (expected != i.role_grounding) return false;

    // (d) role restrictions
    for (const auto& [slot, entity] : i.role_grounding) {
        if (!grounded.check_classification(slot.role, entity)) return false;
    }

    const double coverage = episode.tokens.empty()
                                ? 0.0
                                : static_cast<double>(tokens_used.size()) / static_cast<double>(episode.tokens.size());
    return coverage == i.coverage;
}

}  // namespace soma
