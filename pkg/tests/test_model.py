import random

import pytest

from wfplace.errors import ValidationError
from wfplace.generate import generate_workflow
from wfplace.model import (
    CostMatrix,
    Service,
    Workflow,
    missing_locations,
    predecessors,
    sinks,
    topological_order,
    validate_workflow,
)


def wf(edges, ids=None):
    if ids is None:
        ids = sorted({x for e in edges for x in e})
    return Workflow(
        tuple(Service(i, f"loc_{i}", 1, 1) for i in ids),
        tuple(edges),
    )


class TestServiceConstruction:
    def test_rejects_bad_tokens(self):
        for bad in ("", "a b", "a'b", "a:b"):
            with pytest.raises(ValueError):
                Service(bad, "loc", 1, 1)
            with pytest.raises(ValueError):
                Service("ok", bad, 1, 1)

    def test_rejects_negative_sizes(self):
        with pytest.raises(ValueError):
            Service("s", "loc", -1, 1)
        with pytest.raises(ValueError):
            Service("s", "loc", 1, -1)

    def test_rejects_floats(self):
        with pytest.raises(TypeError):
            Service("s", "loc", 1.5, 1)


class TestValidateWorkflow:
    def test_valid_chain(self):
        assert validate_workflow(wf([("s1", "s2"), ("s2", "s3")])) == []

    def test_two_cycle(self):
        violations = validate_workflow(wf([("s1", "s2"), ("s2", "s1")]))
        cycle = [v for v in violations if v.code == "cycle"]
        assert len(cycle) == 1
        assert "s1" in cycle[0].message and "s2" in cycle[0].message

    def test_dangling_edge(self):
        w = wf([("s1", "s9")], ids=["s1"])
        codes = [v.code for v in validate_workflow(w)]
        assert "unknown-service" in codes

    def test_self_edge(self):
        codes = [v.code for v in validate_workflow(wf([("s1", "s1")]))]
        assert "self-edge" in codes

    def test_duplicate_service(self):
        w = Workflow(
            (Service("s1", "a", 1, 1), Service("s1", "b", 1, 1)), ()
        )
        codes = [v.code for v in validate_workflow(w)]
        assert "duplicate-service" in codes

    def test_empty_workflow(self):
        codes = [v.code for v in validate_workflow(Workflow((), ()))]
        assert codes == ["no-services"]

    def test_generated_workflows_are_valid(self):
        for seed in range(50):
            w = generate_workflow(seed, 1 + seed % 9, 1 + seed % 4)
            assert validate_workflow(w) == []
            assert len(topological_order(w)) == len(w.services)


class TestPredecessorsAndSinks:
    def test_chain(self):
        w = wf([("s1", "s2")])
        assert predecessors(w, "s2") == {"s1"}
        assert predecessors(w, "s1") == set()

    def test_fan_in(self):
        w = wf([("s1", "s3"), ("s2", "s3")])
        assert predecessors(w, "s3") == {"s1", "s2"}

    def test_unknown_service(self):
        with pytest.raises(KeyError, match="s9"):
            predecessors(wf([("s1", "s2")]), "s9")

    def test_sinks_of_chain(self):
        assert sinks(wf([("s1", "s2"), ("s2", "s3")])) == {"s3"}

    def test_sinks_of_disjoint_chains(self):
        assert sinks(wf([("s1", "s2"), ("s3", "s4")])) == {"s2", "s4"}

    def test_isolated_service_is_its_own_sink(self):
        assert sinks(wf([], ids=["s1"])) == {"s1"}

    def test_sink_iff_never_a_producer(self):
        rng = random.Random(7)
        for seed in range(30):
            w = generate_workflow(seed, rng.randint(1, 8), 2)
            producers = {p for p, _ in w.edges}
            for sid in w.service_ids():
                assert (sid in sinks(w)) == (sid not in producers)


class TestTopologicalOrder:
    def test_keeps_declaration_order_when_topological(self):
        w = wf([("s1", "s2"), ("s2", "s3")], ids=["s1", "s2", "s3"])
        assert topological_order(w) == ["s1", "s2", "s3"]

    def test_reorders_when_declared_backwards(self):
        w = wf([("s1", "s2")], ids=["s2", "s1"])
        assert topological_order(w) == ["s1", "s2"]

    def test_cycle_raises(self):
        with pytest.raises(ValidationError, match="cycle"):
            topological_order(wf([("s1", "s2"), ("s2", "s1")]))


class TestCostMatrix:
    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(ValueError, match="diagonal"):
            CostMatrix.from_rows(["a", "b"], [[1, 2], [2, 0]])

    def test_negative_entry_rejected(self):
        with pytest.raises(ValueError):
            CostMatrix.from_rows(["a", "b"], [[0, -1], [1, 0]])

    def test_missing_entry_rejected(self):
        with pytest.raises(ValueError, match="missing"):
            CostMatrix(("a", "b"), {("a", "a"): 0, ("b", "b"): 0, ("a", "b"): 1})

    def test_asymmetry_permitted(self):
        m = CostMatrix.from_rows(["a", "b"], [[0, 5], [7, 0]])
        assert m.cost("a", "b") == 5
        assert m.cost("b", "a") == 7

    def test_unknown_location_named_in_error(self):
        m = CostMatrix.from_rows(["a"], [[0]])
        with pytest.raises(KeyError, match="nowhere"):
            m.cost("a", "nowhere")

    def test_duplicate_location_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            CostMatrix.from_rows(["a", "a"], [[0, 0], [0, 0]])


def test_missing_locations_cross_check():
    w = Workflow((Service("s1", "elsewhere", 1, 1),), ())
    m = CostMatrix.from_rows(["a"], [[0]])
    problems = missing_locations(w, m)
    assert len(problems) == 1
    assert "elsewhere" in problems[0].message
