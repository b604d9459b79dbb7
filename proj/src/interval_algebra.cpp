#include "soma/interval_algebra.hpp"

#include "soma/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace soma {

namespace {

constexpr std::array<std::string_view, kBaseRelationCount> kCodes = {
    "b", "bi", "m", "mi", "o", "oi", "s", "si", "d", "di", "f", "fi", "eq"};

constexpr std::array<std::string_view, kBaseRelationCount> kNames = {
    "before",   "after",    "meets",      "metBy",    "overlaps", "overlappedBy", "starts",
    "startedBy", "during", "contains", "finishes", "finishedBy", "equals"};

// Point algebra over {<, =, >} as a 3-bit set.
using PointRel = std::uint8_t;
constexpr PointRel kLt = 1;
constexpr PointRel kEq = 2;
constexpr PointRel kGt = 4;

constexpr PointRel point_converse(PointRel p) {
    PointRel out = p & kEq;
    if (p & kLt) out |= kGt;
    if (p & kGt) out |= kLt;
    return out;
}

// Endpoint signature of a base relation between A and B:
// (A.start ? B.start, A.start ? B.end, A.end ? B.start, A.end ? B.end).
using Signature = std::array<PointRel, 4>;

constexpr std::array<Signature, kBaseRelationCount> kSignatures = {{
    {kLt, kLt, kLt, kLt},  // b
    {kGt, kGt, kGt, kGt},  // bi
    {kLt, kLt, kEq, kLt},  // m
    {kGt, kEq, kGt, kGt},  // mi
    {kLt, kLt, kGt, kLt},  // o
    {kGt, kLt, kGt, kGt},  // oi
    {kEq, kLt, kGt, kLt},  // s
    {kEq, kLt, kGt, kGt},  // si
    {kGt, kLt, kGt, kLt},  // d
    {kLt, kLt, kGt, kGt},  // di
    {kGt, kLt, kGt, kEq},  // f
    {kLt, kLt, kGt, kEq},  // fi
    {kEq, kLt, kGt, kEq},  // eq
}};

// Six endpoints: A.start, A.end, B.start, B.end, C.start, C.end. Each
// asserted base relation contributes four point constraints, all of them
// <, = or >.
struct PointConstraints {
    std::array<std::array<PointRel, 6>, 6> rel{};

    constexpr void require(int p, int q, PointRel r) {
        rel[p][q] |= r;
        rel[q][p] |= point_converse(r);
    }

    constexpr void assert_pair(int x, int y, BaseRelation r) {
        const auto& sig = kSignatures[static_cast<std::size_t>(r)];
        const int xs = 2 * x;
        const int xe = 2 * x + 1;
        const int ys = 2 * y;
        const int ye = 2 * y + 1;
        require(xs, ys, sig[0]);
        require(xs, ye, sig[1]);
        require(xe, ys, sig[2]);
        require(xe, ye, sig[3]);
    }

    // Satisfiable iff no two constraints on one pair conflict, and after
    // merging the = classes the < edges form no cycle.
    [[nodiscard]] constexpr bool satisfiable() const {
        std::array<int, 6> cls{0, 1, 2, 3, 4, 5};
        auto find = [&cls](int x) {
            while (cls[x] != x) x = cls[x];
            return x;
        };
        for (int p = 0; p < 6; ++p) {
            for (int q = 0; q < 6; ++q) {
                const PointRel r = rel[p][q];
                if ((r & kEq) && (r & (kLt | kGt))) return false;
                if ((r & kLt) && (r & kGt)) return false;
                if (r == kEq) cls[find(p)] = find(q);
            }
        }
        std::array<std::array<bool, 6>, 6> before{};
        for (int p = 0; p < 6; ++p) {
            for (int q = 0; q < 6; ++q) {
                if (rel[p][q] != kLt) continue;
                if (find(p) == find(q)) return false;
                before[find(p)][find(q)] = true;
            }
        }
        std::array<bool, 6> removed{};
        for (bool progress = true; progress;) {
            progress = false;
            for (int v = 0; v < 6; ++v) {
                if (removed[v] || find(v) != v) continue;
                bool has_pred = false;
                for (int u = 0; u < 6; ++u) has_pred = has_pred || (!removed[u] && before[u][v]);
                if (!has_pred) {
                    removed[v] = true;
                    progress = true;
                }
            }
        }
        for (int v = 0; v < 6; ++v) {
            if (find(v) == v && !removed[v]) return false;
        }
        return true;
    }
};

using CompositionTable = std::array<std::array<RelationSet::Bits, kBaseRelationCount>, kBaseRelationCount>;

constexpr CompositionTable generate_composition_table() {
    CompositionTable table{};
    PointConstraints base{};
    for (int x = 0; x < 3; ++x) base.require(2 * x, 2 * x + 1, kLt);
    for (auto r1 : kAllBaseRelations) {
        for (auto r2 : kAllBaseRelations) {
            PointConstraints m = base;
            m.assert_pair(0, 1, r1);
            m.assert_pair(1, 2, r2);
            RelationSet::Bits bits = 0;
            for (auto r3 : kAllBaseRelations) {
                PointConstraints candidate = m;
                candidate.assert_pair(0, 2, r3);
                if (candidate.satisfiable()) {
                    bits |= static_cast<RelationSet::Bits>(1U << static_cast<unsigned>(r3));
                }
            }
            table[static_cast<std::size_t>(r1)][static_cast<std::size_t>(r2)] = bits;
        }
    }
    return table;
}

constexpr CompositionTable kComposition = generate_composition_table();

static_assert(kComposition[static_cast<std::size_t>(BaseRelation::Before)]
                          [static_cast<std::size_t>(BaseRelation::Before)] ==
              RelationSet{BaseRelation::Before}.bits());

PointRel compare_eps(double x, double y, double eps) {
    if (std::fabs(x - y) <= eps) return kEq;
    return x < y ? kLt : kGt;
}

}  // namespace

std::string_view code(BaseRelation r) { return kCodes[static_cast<std::size_t>(r)]; }

std::string_view name(BaseRelation r) { return kNames[static_cast<std::size_t>(r)]; }

std::optional<BaseRelation> parse_base_relation(std::string_view text) {
    for (auto r : kAllBaseRelations) {
        if (text == code(r) || text == name(r)) {
            return r;
        }
    }
    return std::nullopt;
}

std::vector<BaseRelation> RelationSet::members() const {
    std::vector<BaseRelation> out;
    for (auto r : kAllBaseRelations) {
        if (contains(r)) out.push_back(r);
    }
    return out;
}

std::string to_string(RelationSet s) {
    std::string out;
    for (auto r : s.members()) {
        if (!out.empty()) out += ',';
        out += code(r);
    }
    return out;
}

std::optional<RelationSet> parse_relation_term(std::string_view text) {
    if (auto r = parse_base_relation(text)) {
        return RelationSet::single(*r);
    }
    if (text == "overlapsWith") {
        return RelationSet{BaseRelation::Overlaps};
    }
    return std::nullopt;
}

RelationSet compose(BaseRelation r1, BaseRelation r2) {
    return RelationSet::from_bits(kComposition[static_cast<std::size_t>(r1)][static_cast<std::size_t>(r2)]);
}

RelationSet compose(RelationSet r1, RelationSet r2) {
    if (r1.is_full() || r2.is_full()) {
        return r1.empty() || r2.empty() ? RelationSet{} : RelationSet::full();
    }
    RelationSet::Bits bits = 0;
    for (auto a : kAllBaseRelations) {
        if (!r1.contains(a)) continue;
        for (auto b : kAllBaseRelations) {
            if (r2.contains(b)) {
                bits |= kComposition[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            }
        }
    }
    return RelationSet::from_bits(bits);
}

bool resolvable(ConcreteInterval a, double eps) { return a.end - a.start > 2.0 * eps; }

BaseRelation relation_from_endpoints(ConcreteInterval a, ConcreteInterval b, double eps) {
    if (!(eps >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "eps must be non-negative");
    }
    if (!resolvable(a, eps) || !resolvable(b, eps)) {
        throw Error(ErrorCode::DegenerateInterval, "interval collapses under eps-coarsening");
    }
    const Signature sig = {compare_eps(a.start, b.start, eps), compare_eps(a.start, b.end, eps),
                           compare_eps(a.end, b.start, eps), compare_eps(a.end, b.end, eps)};
    for (auto r : kAllBaseRelations) {
        if (kSignatures[static_cast<std::size_t>(r)] == sig) {
            return r;
        }
    }
    // Unreachable for intervals longer than 2*eps.
    throw Error(ErrorCode::DegenerateInterval, "endpoint signature matches no base relation");
}

std::size_t ConstraintNetwork::add_variable(const std::string& id) {
    if (auto i = index_of(id)) {
        return *i;
    }
    const std::size_t n = size();
    std::vector<RelationSet> grown((n + 1) * (n + 1), RelationSet::full());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            grown[i * (n + 1) + j] = labels_[i * n + j];
        }
    }
    grown[n * (n + 1) + n] = RelationSet{BaseRelation::Equals};
    labels_ = std::move(grown);
    ids_.push_back(id);
    propagated_ = false;
    return n;
}

std::optional<std::size_t> ConstraintNetwork::index_of(std::string_view id) const {
    auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - ids_.begin());
}

std::size_t ConstraintNetwork::require(std::string_view id) const {
    if (auto i = index_of(id)) return *i;
    throw Error(ErrorCode::UnknownVariable, std::string(id));
}

void ConstraintNetwork::constrain(const std::string& a, const std::string& b, RelationSet rel) {
    const std::size_t i = add_variable(a);
    const std::size_t j = add_variable(b);
    at(i, j) = at(i, j) & (i == j ? rel & RelationSet{BaseRelation::Equals} : rel);
    at(j, i) = at(i, j).converse();
    propagated_ = false;
}

PropagationResult ConstraintNetwork::propagate() {
    const std::size_t n = size();
    PropagationResult result;
    propagated_ = true;
    consistent_ = true;

    auto fail = [&](std::size_t i, std::size_t j) {
        consistent_ = false;
        result.consistent = false;
        result.witness = std::make_pair(ids_[i], ids_[j]);
        return result;
    };

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (at(i, j).empty()) return fail(i, j);
        }
    }

    std::deque<std::pair<std::size_t, std::size_t>> queue;
    std::vector<char> queued(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            queue.emplace_back(i, j);
            queued[i * n + j] = 1;
        }
    }

    // Revises label(x, y) against label(x, z) o label(z, y); returns false on
    // an emptied label.
    auto revise = [&](std::size_t x, std::size_t z, std::size_t y) {
        const RelationSet narrowed = at(x, y) & compose(at(x, z), at(z, y));
        if (narrowed == at(x, y)) return true;
        at(x, y) = narrowed;
        at(y, x) = narrowed.converse();
        if (narrowed.empty()) return false;
        const auto lo = std::min(x, y);
        const auto hi = std::max(x, y);
        if (!queued[lo * n + hi]) {
            queued[lo * n + hi] = 1;
            queue.emplace_back(lo, hi);
        }
        return true;
    };

    while (!queue.empty()) {
        auto [i, j] = queue.front();
        queue.pop_front();
        queued[i * n + j] = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i || k == j) continue;
            if (!revise(i, j, k)) return fail(i, k);
            if (!revise(k, i, j)) return fail(k, j);
        }
    }
    return result;
}

RelationSet ConstraintNetwork::query(const std::string& a, const std::string& b) const {
    const std::size_t i = require(a);
    const std::size_t j = require(b);
    if (!propagated_) {
        throw Error(ErrorCode::StaleNetwork, "network mutated since last propagation");
    }
    return label(i, j);
}

std::pair<ConstraintNetwork, PropagationResult> propagate(ConstraintNetwork net) {
    auto result = net.propagate();
    return {std::move(net), result};
}

RelationSet query_relation(const ConstraintNetwork& net, const std::string& a, const std::string& b) {
    return net.query(a, b);
}

}  // namespace soma
