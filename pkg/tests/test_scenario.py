import pytest

from linkgames import ScenarioError, parse_scenario, serialize_scenario
from linkgames.scenario import load_scenario

CASE1 = "scenarios/paper-example-case1.scn"


def minimal_text(extra=""):
    return (
        "[graph]\n"
        "nodes = 3\n"
        "edge = 0 1 3.0\n"
        "edge = 1 2 2.0\n"
        "edge = 0 2 1.0\n"
        "[state]\n"
        "x = 1.0 2.0 3.0\n"
        "[game]\n"
        "horizon = 1e-3\n"
        "budget = 1\n"
        "boost = 1.0\n" + extra
    )


class TestParse:
    def test_shipped_strong_boost_example(self):
        s = load_scenario(CASE1)
        assert s.graph.node_count == 3
        assert s.graph.weights() == {(0, 1): 3.0, (1, 2): 2.0, (0, 2): 1.0}
        assert s.x0 == (1.0, 2.0, 3.0)
        assert s.config.budget == 1
        assert s.config.boost == 1.0
        assert s.nu_override is not None
        assert s.nu_override.score((0, 1)) == -1.0
        assert s.nu_override.score((1, 2)) == -2.0
        assert s.nu_override.score((0, 2)) == -5.0

    def test_empty_input_fails_at_line_one(self):
        with pytest.raises(ScenarioError) as err:
            parse_scenario("")
        assert err.value.diagnostic == "E_SYNTAX"
        assert err.value.line == 1

    def test_dangling_override_edge(self):
        text = minimal_text("[override]\nnu = 1 5 -1.0\n")
        with pytest.raises(ScenarioError) as err:
            parse_scenario(text)
        assert err.value.diagnostic == "E_DANGLING_EDGE"
        assert "(1, 5)" in str(err.value)

    def test_unknown_key_diagnostic(self):
        with pytest.raises(ScenarioError) as err:
            parse_scenario(minimal_text("speed = 9\n"))
        assert err.value.diagnostic == "E_UNKNOWN_KEY"

    def test_unknown_section_diagnostic(self):
        with pytest.raises(ScenarioError) as err:
            parse_scenario(minimal_text("[players]\n"))
        assert err.value.diagnostic == "E_UNKNOWN_KEY"

    def test_invariant_positive_override(self):
        with pytest.raises(ScenarioError) as err:
            parse_scenario(
                minimal_text("[override]\nnu = 0 1 0.5\nnu = 1 2 -1.0\nnu = 0 2 -2.0\n")
            )
        assert err.value.diagnostic == "E_INVARIANT"

    def test_invariant_budget_exceeds_links(self):
        text = minimal_text().replace("budget = 1", "budget = 7")
        with pytest.raises(ScenarioError) as err:
            parse_scenario(text)
        assert err.value.diagnostic == "E_INVARIANT"

    def test_syntax_error_reports_line(self):
        text = minimal_text().replace("x = 1.0 2.0 3.0", "x = 1.0 two 3.0")
        with pytest.raises(ScenarioError) as err:
            parse_scenario(text)
        assert err.value.diagnostic == "E_SYNTAX"
        assert err.value.line == 7

    def test_disconnected_graph_rejected(self):
        text = (
            "[graph]\nnodes = 4\nedge = 0 1 1.0\nedge = 2 3 1.0\n"
            "[state]\nx = 1 2 3 4\n[game]\nhorizon = 1\nbudget = 1\nboost = 0.5\n"
        )
        with pytest.raises(ScenarioError) as err:
            parse_scenario(text)
        assert err.value.diagnostic == "E_INVARIANT"

    def test_schedule_section(self):
        text = minimal_text("[schedule]\nu = 0-2\nv = 1-2\n")
        s = parse_scenario(text)
        assert s.schedule_u == (((0, 2),),)
        assert s.schedule_v == (((1, 2),),)
        sched = s.fixed_schedule()
        assert sched.interval_count == 1
        assert sched.actions[0][0].broken == frozenset({(0, 2)})

    def test_schedule_interval_count_must_match(self):
        text = minimal_text("rho = 5e-4\ndwell = 5e-4\n[schedule]\nu = 0-2\nv = 1-2\n")
        with pytest.raises(ScenarioError) as err:
            parse_scenario(text)
        assert err.value.diagnostic == "E_INVARIANT"

    def test_comments_and_blank_lines_ignored(self):
        text = "# header\n\n" + minimal_text("# trailing comment\n")
        assert parse_scenario(text).graph.edge_count == 3


class TestRoundTrip:
    @pytest.mark.parametrize(
        "path",
        [
            "scenarios/paper-example-case1.scn",
            "scenarios/paper-example-case2.scn",
            "scenarios/single-edge.scn",
            "scenarios/path-horizon.scn",
        ],
    )
    def test_shipped_scenarios_round_trip(self, path):
        s = load_scenario(path)
        assert parse_scenario(serialize_scenario(s)) == s

    def test_round_trip_with_schedule(self):
        s = parse_scenario(minimal_text("[schedule]\nu = 0-1\nv =\n"))
        assert parse_scenario(serialize_scenario(s)) == s
