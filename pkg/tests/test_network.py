import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pathpay import (
    LinkCostFn,
    NetworkError,
    PathCountError,
    enumerate_paths,
    eval_cost,
    eval_marginal,
    parse_network,
)


def make_net(links, nodes, origin, destination, total=10.0, subscribers=5.0):
    return parse_network(
        json.dumps(
            {
                "nodes": nodes,
                "links": links,
                "demand": {
                    "origin": origin,
                    "destination": destination,
                    "total": total,
                    "subscribers": subscribers,
                },
            }
        )
    )


LINEAR = {"kind": "linear", "params": [1.0, 0.1]}


class TestParse:
    def test_demo_fixture(self, demo_network):
        assert len(demo_network.links) == 4
        assert demo_network.demand == 1000.0
        assert demo_network.subscriber_demand == 800.0
        assert demo_network.outsider_demand == 200.0

    def test_single_link_zero_demand(self):
        net = make_net(
            [{"id": 1, "from": "A", "to": "B", "cost": LINEAR}],
            ["A", "B"],
            "A",
            "B",
            total=0.0,
            subscribers=0.0,
        )
        assert net.demand == 0.0

    def test_origin_equals_destination(self):
        with pytest.raises(NetworkError):
            make_net(
                [{"id": 1, "from": "A", "to": "B", "cost": LINEAR}],
                ["A", "B"],
                "A",
                "A",
            )

    def test_malformed_json(self):
        with pytest.raises(NetworkError):
            parse_network("{not json")

    def test_unknown_cost_kind(self):
        with pytest.raises(NetworkError):
            make_net(
                [{"id": 1, "from": "A", "to": "B",
                  "cost": {"kind": "cubic", "params": [1.0]}}],
                ["A", "B"],
                "A",
                "B",
            )

    def test_negative_demand(self):
        with pytest.raises(NetworkError):
            make_net(
                [{"id": 1, "from": "A", "to": "B", "cost": LINEAR}],
                ["A", "B"],
                "A",
                "B",
                total=-1.0,
                subscribers=0.0,
            )

    def test_disconnected(self):
        with pytest.raises(NetworkError):
            make_net(
                [{"id": 1, "from": "A", "to": "B", "cost": LINEAR}],
                ["A", "B", "C"],
                "A",
                "C",
            )

    def test_duplicate_link_ids(self):
        with pytest.raises(NetworkError):
            make_net(
                [
                    {"id": 1, "from": "A", "to": "B", "cost": LINEAR},
                    {"id": 1, "from": "A", "to": "B", "cost": LINEAR},
                ],
                ["A", "B"],
                "A",
                "B",
            )

    def test_subscribers_above_total(self):
        with pytest.raises(NetworkError):
            make_net(
                [{"id": 1, "from": "A", "to": "B", "cost": LINEAR}],
                ["A", "B"],
                "A",
                "B",
                total=10.0,
                subscribers=11.0,
            )


class TestEnumerate:
    def test_demo_paths(self, demo_network):
        ps = enumerate_paths(demo_network)
        assert ps.paths == ((1, 3), (1, 4), (2, 3), (2, 4))

    def test_serial_chain(self):
        net = make_net(
            [
                {"id": 1, "from": "A", "to": "B", "cost": LINEAR},
                {"id": 2, "from": "B", "to": "C", "cost": LINEAR},
                {"id": 3, "from": "C", "to": "D", "cost": LINEAR},
            ],
            ["A", "B", "C", "D"],
            "A",
            "D",
        )
        ps = enumerate_paths(net)
        assert ps.paths == ((1, 2, 3),)

    def test_complete_digraph_exceeds_budget(self):
        nodes = [f"n{i}" for i in range(5)]
        links = []
        lid = 1
        for a in nodes:
            for b in nodes:
                if a != b:
                    links.append({"id": lid, "from": a, "to": b, "cost": LINEAR})
                    lid += 1
        net = make_net(links, nodes, "n0", "n4")

        # independent count of simple paths by a separate recursive search
        adj = {n: [] for n in nodes}
        for e in links:
            adj[e["from"]].append(e["to"])

        def count(node, seen):
            if node == "n4":
                return 1
            total = 0
            for nxt in adj[node]:
                if nxt not in seen:
                    total += count(nxt, seen | {nxt})
            return total

        n_simple = count("n0", {"n0"})
        assert n_simple > 2
        with pytest.raises(PathCountError):
            enumerate_paths(net, max_paths=2)
        assert len(enumerate_paths(net, max_paths=n_simple)) == n_simple

    def test_deterministic(self, demo_network):
        a = enumerate_paths(demo_network)
        b = enumerate_paths(demo_network)
        assert a.paths == b.paths
        assert np.array_equal(a.incidence, b.incidence)

    def test_incidence_column_sums(self, demo_network):
        ps = enumerate_paths(demo_network)
        lengths = ps.incidence.sum(axis=0)
        assert lengths.tolist() == [len(p) for p in ps.paths]


class TestCostFns:
    def test_table_value(self):
        fn = LinkCostFn.linear(10.0, 0.05)
        assert eval_cost(fn, 250.0) == pytest.approx(22.5, abs=1e-12)

    def test_zero_flow_marginal_equals_cost(self):
        fns = [
            LinkCostFn.linear(7.0, 0.3),
            LinkCostFn.polynomial([2.0, 0.1, 0.01]),
            LinkCostFn.bpr(5.0, 100.0, 0.15, 4.0),
        ]
        for fn in fns:
            assert eval_cost(fn, 0.0) == pytest.approx(fn.params[0], rel=1e-12)
            assert eval_marginal(fn, 0.0) == pytest.approx(eval_cost(fn, 0.0))

    def test_hand_marginal(self):
        fn = LinkCostFn.linear(5.0, 0.02)
        assert eval_cost(fn, 750.0) == pytest.approx(20.0)
        assert eval_marginal(fn, 750.0) == pytest.approx(35.0)

    def test_negative_flow_rejected(self):
        with pytest.raises(NetworkError):
            eval_cost(LinkCostFn.linear(1.0, 1.0), -0.5)

    def test_bad_params(self):
        with pytest.raises(NetworkError):
            LinkCostFn.linear(-1.0, 0.0)
        with pytest.raises(NetworkError):
            LinkCostFn.bpr(1.0, 10.0, 0.15, 0.5)
        with pytest.raises(NetworkError):
            LinkCostFn.polynomial([1.0, -2.0])

    def test_bpr_shape(self):
        fn = LinkCostFn.bpr(10.0, 500.0, 0.15, 4.0)
        assert eval_cost(fn, 500.0) == pytest.approx(11.5)
        assert eval_cost(fn, 0.0) == pytest.approx(10.0)


def cost_fn_strategy():
    linear = st.tuples(
        st.floats(0.0, 100.0), st.floats(0.0, 10.0)
    ).map(lambda p: LinkCostFn.linear(*p))
    poly = st.lists(st.floats(0.0, 5.0), min_size=1, max_size=4).map(
        LinkCostFn.polynomial
    )
    bpr = st.tuples(
        st.floats(0.1, 50.0),
        st.floats(10.0, 1000.0),
        st.floats(0.0, 2.0),
        st.floats(1.0, 6.0),
    ).map(lambda p: LinkCostFn.bpr(*p))
    return st.one_of(linear, poly, bpr)


@given(fn=cost_fn_strategy(), q1=st.floats(0.0, 1000.0), q2=st.floats(0.0, 1000.0))
def test_cost_monotone(fn, q1, q2):
    lo, hi = sorted((q1, q2))
    assert fn.cost(hi) >= fn.cost(lo) - 1e-9 * (1.0 + abs(fn.cost(hi)))


@given(fn=cost_fn_strategy(), q=st.floats(0.01, 1000.0))
def test_derivative_matches_finite_difference(fn, q):
    h = 1e-4 * (1.0 + q)
    if q - h < 0:
        h = q / 2
    numeric = (fn.cost(q + h) - fn.cost(q - h)) / (2 * h)
    exact = fn.derivative(q)
    assert abs(exact - numeric) <= 1e-6 * (1.0 + abs(exact))


@given(fn=cost_fn_strategy(), q=st.floats(0.0, 1000.0))
def test_marginal_at_least_cost(fn, q):
    assert fn.marginal(q) >= fn.cost(q) - 1e-12
