#include "generators.hpp"
#include "oracles.hpp"
#include "pouring.hpp"

#include "soma/activity_parser.hpp"
#include "soma/error.hpp"

#include <doctest.h>

using namespace soma;
using R = BaseRelation;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidArgument;
}

RawEvent motion(const std::string& type, std::vector<std::string> who, double s, double e) {
    return {TokenClass::MotionEvent, type, std::move(who), s, e, true};
}

RawEvent state(const std::string& type, std::vector<std::string> who, double s, double e, bool holds = true) {
    return {TokenClass::StateChange, type, std::move(who), s, e, holds};
}

Scene pouring_scene() {
    Scene scene;
    scene.objects = {fixture::container("pot", "Pot"), fixture::container("bowl", "Bowl"),
                     fixture::plain("water", "Water"), fixture::plain("knife", "Knife")};
    return scene;
}

Episode episode(std::vector<RawEvent> raw, Scene scene = pouring_scene()) {
    return {"ep", tokenize(raw, kDefaultEps), std::move(scene)};
}

}  // namespace

TEST_CASE("tokenize examples") {
    const auto point = tokenize(std::vector{RawEvent{TokenClass::ContactEvent, "Contact", {"hand", "cup"}, 2.0, 2.0}}, 0.01);
    REQUIRE(point.size() == 1);
    CHECK(point[0].interval.start == 2.0);
    CHECK(point[0].interval.end == doctest::Approx(2.01));
    CHECK(point[0].id == "tok0");

    const auto pass = tokenize(std::vector{motion("Approaching", {"pot"}, 0, 4)});
    REQUIRE(pass.size() == 1);
    CHECK(pass[0].token_class == TokenClass::MotionEvent);
    CHECK(pass[0].interval == ConcreteInterval{0, 4});

    const auto split = tokenize(std::vector{state("Contact", {"hand", "cup"}, 0, 5),
                                            state("Contact", {"hand", "cup"}, 2, 2, false),
                                            state("Contact", {"hand", "cup"}, 3, 3)});
    REQUIRE(split.size() == 2);
    CHECK(split[0].interval == ConcreteInterval{0, 2});
    CHECK(split[1].interval == ConcreteInterval{3, 5});
    CHECK(split[1].type_tag == "Contact");

    CHECK(tokenize(std::vector<RawEvent>{}).empty());
}

TEST_CASE("tokenize errors") {
    CHECK(code_of([] { (void)tokenize(std::vector{motion("A", {"x"}, 4, 3)}); }) == ErrorCode::NegativeDuration);
    CHECK(code_of([] { (void)tokenize(std::vector{motion("A", {}, 0, 3)}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { (void)tokenize(std::vector{motion("A", {"x"}, 0, INFINITY)}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { (void)tokenize(std::vector{motion("A", {"x"}, 1, 1)}, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("tokens are sorted and state tokens never span a transition") {
    gen::Rng rng(81);
    for (int round = 0; round < 200; ++round) {
        std::vector<RawEvent> raw;
        const int n = gen::uniform(rng, 0, 10);
        for (int i = 0; i < n; ++i) {
            const double s = gen::uniform(rng, 0, 10);
            const double e = s + gen::uniform(rng, 0, 5);
            const int kind = gen::uniform(rng, 0, 3);
            const std::vector<std::string> who{gen::chance(rng, 0.5) ? "a" : "b"};
            if (kind == 0) raw.push_back(motion("Moving", who, s, e));
            else if (kind == 1) raw.push_back(state("Contact", who, s, e));
            else if (kind == 2) raw.push_back(state("Contact", who, s, s, false));
            else raw.push_back(state("Contact", who, s, s));
        }
        const auto tokens = tokenize(raw, 0.01);
        std::set<std::string> ids;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            CHECK(tokens[i].interval.end > tokens[i].interval.start);
            CHECK(ids.insert(tokens[i].id).second);
            if (i > 0) CHECK(tokens[i - 1].interval.start <= tokens[i].interval.start);
        }
        // No interrupting marker of the same state lies strictly inside a state token.
        for (const auto& t : tokens) {
            if (t.token_class != TokenClass::StateChange) continue;
            for (const auto& ev : raw) {
                if (ev.token_class == TokenClass::StateChange && !ev.holds && ev.participants == t.participants) {
                    CHECK_FALSE((ev.start > t.interval.start && ev.start < t.interval.end));
                }
            }
        }
        CHECK(tokenize(raw, 0.01) == tokens);
    }
}

TEST_CASE("pouring episode parses once") {
    const std::vector<Description> library{fixture::pouring_plan()};
    const auto store = fixture::pouring_store();
    const auto ep = episode({motion("Approaching", {"bowl", "pot"}, 0, 4), motion("Tilting", {"pot"}, 2, 6),
                             RawEvent{TokenClass::ContactEvent, "Contact", {"water", "bowl"}, 5, 5}});
    const auto got = parse(ep, library, store);
    REQUIRE(got.size() == 1);
    const auto& i = got[0];
    CHECK(i.plan == "PouringPlan");
    const auto& a = ep.tokens[std::stoul(i.phase_grounding.at("Approaching").substr(3))];
    const auto& t = ep.tokens[std::stoul(i.phase_grounding.at("Tilting").substr(3))];
    CHECK(a.type_tag == "Approaching");
    CHECK(t.type_tag == "Tilting");
    CHECK(relation_from_endpoints(a.interval, t.interval, kDefaultEps) == R::Overlaps);
    CHECK(i.role_grounding.at({"Pouring", "Source"}) == "pot");
    CHECK(i.role_grounding.at({"Approaching", "Destination"}) == "bowl");
    CHECK(i.coverage == doctest::Approx(2.0 / 3.0));
    CHECK(i.earliest_start == 0.0);
    CHECK(verify_interpretation(i, ep, library, store));
    CHECK(oracle::fingerprint(got) == oracle::fingerprint(oracle::parse(ep, library, ground_scene(store, ep.scene), kDefaultEps)));
}

TEST_CASE("either approach can ground the phase") {
    const std::vector<Description> library{fixture::pouring_plan()};
    const auto store = fixture::pouring_store();
    const auto ep = episode({motion("Approaching", {"bowl", "pot"}, 0, 4), motion("Approaching", {"bowl", "pot"}, 1, 5),
                             motion("Tilting", {"pot"}, 2, 6)});
    const auto got = parse(ep, library, store);
    REQUIRE(got.size() == 2);
    CHECK(got[0].earliest_start == 0.0);
    CHECK(got[1].earliest_start == 1.0);
    for (const auto& i : got) CHECK(verify_interpretation(i, ep, library, store));
}

TEST_CASE("parse rejects what the plan forbids") {
    const std::vector<Description> library{fixture::pouring_plan()};
    const auto store = fixture::pouring_store();
    SUBCASE("empty episode") { CHECK(parse(episode({}), library, store).empty()); }
    SUBCASE("tilting first") {
        CHECK(parse(episode({motion("Approaching", {"bowl", "pot"}, 2, 6), motion("Tilting", {"pot"}, 0, 4)}), library,
                    store)
                  .empty());
    }
    SUBCASE("tilted object cannot contain") {
        CHECK(parse(episode({motion("Approaching", {"bowl"}, 0, 4), motion("Tilting", {"knife"}, 2, 6)}), library, store)
                  .empty());
    }
    SUBCASE("destination cannot contain") {
        CHECK(parse(episode({motion("Approaching", {"water"}, 0, 4), motion("Tilting", {"pot"}, 2, 6)}), library, store)
                  .empty());
    }
    SUBCASE("unknown event type") {
        CHECK(parse(episode({motion("Approaching", {"bowl"}, 0, 4), motion("Stirring", {"pot"}, 2, 6)}), library, store)
                  .empty());
    }
}

TEST_CASE("verify_interpretation catches tampering") {
    const std::vector<Description> library{fixture::pouring_plan()};
    const auto store = fixture::pouring_store();
    const auto ep = episode({motion("Approaching", {"bowl", "pot"}, 0, 4), motion("Tilting", {"pot"}, 2, 6),
                             motion("Approaching", {"knife"}, 3, 7)});
    const auto got = parse(ep, library, store);
    REQUIRE(got.size() == 1);
    const auto good = got[0];

    auto swapped = good;
    std::swap(swapped.phase_grounding.at("Approaching"), swapped.phase_grounding.at("Tilting"));
    CHECK_FALSE(verify_interpretation(swapped, ep, library, store));

    auto late = good;
    late.phase_grounding.at("Approaching") = "tok2";
    CHECK_FALSE(verify_interpretation(late, ep, library, store));

    auto bad_role = good;
    bad_role.role_grounding.at({"Approaching", "Destination"}) = "knife";
    CHECK_FALSE(verify_interpretation(bad_role, ep, library, store));

    auto bad_binding = good;
    bad_binding.role_grounding.at({"Pouring", "Source"}) = "bowl";
    CHECK_FALSE(verify_interpretation(bad_binding, ep, library, store));

    auto bad_cover = good;
    bad_cover.coverage = 1.0;
    CHECK_FALSE(verify_interpretation(bad_cover, ep, library, store));

    auto ghost_plan = good;
    ghost_plan.plan = "Nope";
    CHECK(code_of([&] { (void)verify_interpretation(ghost_plan, ep, library, store); }) == ErrorCode::DanglingReference);
    auto ghost_token = good;
    ghost_token.phase_grounding.at("Tilting") = "tok99";
    CHECK(code_of([&] { (void)verify_interpretation(ghost_token, ep, library, store); }) == ErrorCode::DanglingReference);
    auto ghost_entity = good;
    ghost_entity.role_grounding.at({"Pouring", "Source"}) = "ghost";
    CHECK(code_of([&] { (void)verify_interpretation(ghost_entity, ep, library, store); }) == ErrorCode::DanglingReference);
}

TEST_CASE("ranking order") {
    auto mk = [](std::string plan, double cov, std::size_t phases, double start) {
        Interpretation i;
        i.plan = std::move(plan);
        i.coverage = cov;
        i.earliest_start = start;
        for (std::size_t k = 0; k < phases; ++k) i.phase_grounding["p" + std::to_string(k)] = "tok" + std::to_string(k);
        return i;
    };
    CHECK(rank({mk("A", 0.5, 2, 0), mk("B", 0.8, 2, 0)})[0].plan == "B");
    CHECK(rank({mk("A", 0.5, 2, 0), mk("B", 0.5, 3, 0)})[0].plan == "B");
    CHECK(rank({mk("A", 0.5, 2, 1), mk("B", 0.5, 2, 0)})[0].plan == "B");
    CHECK(rank({mk("B", 0.5, 2, 0), mk("A", 0.5, 2, 0)})[0].plan == "A");
    auto tied = rank({mk("A", 0.5, 2, 0), mk("A", 0.5, 2, 0)});
    CHECK(tied[0] == tied[1]);
}

TEST_CASE("parser agrees with exhaustive enumeration") {
    gen::Rng rng(91);
    const auto store = gen::parser_store();
    int nonempty = 0;
    for (int round = 0; round < 80; ++round) {
        const auto c = gen::parser_case(rng, store, 4, 8);
        const auto grounded = ground_scene(store, c.episode.scene);
        const ActivityParser parser(c.library, store);
        const auto got = parser.parse_grounded(c.episode, grounded);
        CHECK(oracle::fingerprint(got) == oracle::fingerprint(oracle::parse(c.episode, c.library, grounded, kDefaultEps)));
        for (const auto& i : got) CHECK(verify_interpretation_grounded(i, c.episode, c.library, grounded));
        CHECK(parser.parse(c.episode) == got);
        CHECK(rank(got) == got);
        nonempty += got.empty() ? 0 : 1;
    }
    CHECK(nonempty > 5);
}

TEST_CASE("adding a plan never removes interpretations") {
    gen::Rng rng(93);
    const auto store = gen::parser_store();
    for (int round = 0; round < 40; ++round) {
        auto c = gen::parser_case(rng, store, 3, 7);
        const auto before = oracle::fingerprint(parse(c.episode, c.library, store));
        c.library.push_back(gen::plan(rng, store, "Extra", 3));
        const auto after = oracle::fingerprint(parse(c.episode, c.library, store));
        CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
    }
}

TEST_CASE("type tags match by concept id or name under subsumption") {
    const auto store = gen::parser_store();
    CHECK(tag_classified_by(store, "QuickReaching", "Motion"));
    CHECK(tag_classified_by(store, "Reaching", "Reaching"));
    CHECK_FALSE(tag_classified_by(store, "Motion", "Reaching"));
    CHECK_FALSE(tag_classified_by(store, "Noise", "Motion"));
}

TEST_CASE("process flows are parsed, configurations are not") {
    ProcessFlow flow;
    flow.defines_process = {"Pour", "Motion", {}, {}};
    flow.phases = {{"Move", "Approaching", {}, {}}, {"Tip", "Tilting", {"Patient"}, {}}};
    flow.constraints = {{"Move", {R::Overlaps}, "Tip"}};
    Configuration config;
    config.describes_state = {"Touching", "Contact", {"Patient"}, {}};
    const std::vector<Description> library{fixture::pouring_plan(), {"TiltFlow", flow}, {"Touching", config}};
    const auto store = fixture::pouring_store();
    for (const auto& d : library) CHECK(validate_description(d, store).empty());
    const auto ep = episode({motion("Approaching", {"bowl", "pot"}, 0, 4), motion("Tilting", {"pot"}, 2, 6)});
    const auto got = parse(ep, library, store);
    REQUIRE(got.size() == 2);
    CHECK(got[0].plan == "PouringPlan");
    CHECK(got[1].plan == "TiltFlow");
    CHECK(got[1].role_grounding.at({"Tip", "Patient"}) == "pot");
    for (const auto& i : got) CHECK(verify_interpretation(i, ep, library, store));
    CHECK(oracle::fingerprint(got) == oracle::fingerprint(oracle::parse(ep, library, ground_scene(store, ep.scene), kDefaultEps)));
}
