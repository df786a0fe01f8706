"""Road network model: links with congestion cost functions, a single
origin-destination demand record, and exhaustive simple-path enumeration.

Networks are loaded from JSON (see :func:`parse_network` for the schema) and
are immutable once built, so they can be shared freely between solvers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

DEFAULT_MAX_PATHS = 10_000

COST_KINDS = ("linear", "polynomial", "bpr")


class NetworkError(ValueError):
    """Malformed or inconsistent network input."""


class PathCountError(NetworkError):
    """Simple-path enumeration exceeded the configured path budget."""


@dataclass(frozen=True)
class LinkCostFn:
    """Congestion cost (travel time, minutes) as a function of link flow.

    Supported kinds:

    * ``linear``      params ``(a0, a1)``: ``t(q) = a0 + a1*q``
    * ``polynomial``  params ``(c0, .., cn)``: ``t(q) = sum c_k q^k``
    * ``bpr``         params ``(t0, cap, alpha, power)``:
      ``t(q) = t0 * (1 + alpha * (q/cap)**power)``

    All parameter choices accepted here give a non-negative, convex,
    differentiable and (weakly) increasing ``t`` on ``q >= 0``, with a
    closed-form marginal cost ``t(q) + q * t'(q)``.
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.kind not in COST_KINDS:
            raise NetworkError(f"unknown cost function kind: {self.kind!r}")
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        if not all(np.isfinite(p)):
            raise NetworkError("cost function parameters must be finite")
        if self.kind == "linear":
            if len(p) != 2:
                raise NetworkError("linear cost needs params (a0, a1)")
            if p[0] < 0 or p[1] < 0:
                raise NetworkError("linear cost needs a0 >= 0 and a1 >= 0")
        elif self.kind == "polynomial":
            if not p:
                raise NetworkError("polynomial cost needs at least one coefficient")
            if any(c < 0 for c in p):
                raise NetworkError("polynomial coefficients must be non-negative")
        else:  # bpr
            if len(p) != 4:
                raise NetworkError("bpr cost needs params (t0, cap, alpha, power)")
            t0, cap, alpha, power = p
            if t0 <= 0 or cap <= 0 or alpha < 0 or power < 1:
                raise NetworkError(
                    "bpr cost needs t0 > 0, cap > 0, alpha >= 0 and power >= 1"
                )

    @classmethod
    def linear(cls, a0: float, a1: float) -> LinkCostFn:
        return cls("linear", (a0, a1))

    @classmethod
    def polynomial(cls, coeffs) -> LinkCostFn:
        return cls("polynomial", tuple(coeffs))

    @classmethod
    def bpr(cls, t0: float, cap: float, alpha: float, power: float) -> LinkCostFn:
        return cls("bpr", (t0, cap, alpha, power))

    def cost(self, flow):
        """Travel time t(q) at the given flow (scalar or array, flow >= 0)."""
        q = _check_flow(flow)
        if self.kind == "linear":
            a0, a1 = self.params
            return a0 + a1 * q
        if self.kind == "polynomial":
            # highest-order coefficient first for polyval
            return np.polyval(self.params[::-1], q)
        t0, cap, alpha, power = self.params
        return t0 * (1.0 + alpha * (q / cap) ** power)

    def derivative(self, flow):
        """dt/dq at the given flow."""
        q = _check_flow(flow)
        scalar = not isinstance(q, np.ndarray)
        if self.kind == "linear":
            return self.params[1] if scalar else np.full_like(q, self.params[1])
        if self.kind == "polynomial":
            deriv = [k * c for k, c in enumerate(self.params)][1:]
            if not deriv:
                return 0.0 if scalar else np.zeros_like(q)
            return np.polyval(deriv[::-1], q)
        t0, cap, alpha, power = self.params
        return t0 * alpha * power * q ** (power - 1.0) / cap**power

    def marginal(self, flow):
        """Marginal (system) cost t(q) + q * t'(q); always >= t(q)."""
        q = _check_flow(flow)
        return self.cost(q) + q * self.derivative(q)

    def cost_integral(self, flow):
        """Closed-form integral of t over [0, q]."""
        q = _check_flow(flow)
        if self.kind == "linear":
            a0, a1 = self.params
            return a0 * q + 0.5 * a1 * q * q
        if self.kind == "polynomial":
            anti = [c / (k + 1) for k, c in enumerate(self.params)]
            return np.polyval(anti[::-1] + [0.0], q)
        t0, cap, alpha, power = self.params
        return t0 * (q + alpha * q * (q / cap) ** power / (power + 1.0))


def _check_flow(flow):
    q = np.asarray(flow, dtype=float)
    if np.any(q < 0):
        raise NetworkError("link flow must be non-negative")
    return q if q.ndim else float(q)


def eval_cost(fn: LinkCostFn, flow: float) -> float:
    """Functional form of :meth:`LinkCostFn.cost`."""
    return float(fn.cost(flow))


def eval_marginal(fn: LinkCostFn, flow: float) -> float:
    """Functional form of :meth:`LinkCostFn.marginal`."""
    return float(fn.marginal(flow))


@dataclass(frozen=True)
class Link:
    id: int
    tail: str
    head: str
    cost_fn: LinkCostFn

    def __post_init__(self) -> None:
        if self.tail == self.head:
            raise NetworkError(f"link {self.id}: self-loops are not allowed")


@dataclass(frozen=True)
class Network:
    """Directed network with one origin-destination demand record.

    ``demand`` is the total trip rate; ``subscriber_demand`` is the share of
    it enrolled in the payment scheme (the rest are outsiders).
    """

    nodes: tuple[str, ...]
    links: tuple[Link, ...]
    origin: str
    destination: str
    demand: float
    subscriber_demand: float

    def __post_init__(self) -> None:
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise NetworkError("duplicate node names")
        if self.origin == self.destination:
            raise NetworkError("origin and destination must differ")
        for endpoint in (self.origin, self.destination):
            if endpoint not in node_set:
                raise NetworkError(f"unknown endpoint node {endpoint!r}")
        ids = [ln.id for ln in self.links]
        if len(set(ids)) != len(ids):
            raise NetworkError("duplicate link ids")
        for ln in self.links:
            if ln.tail not in node_set or ln.head not in node_set:
                raise NetworkError(f"link {ln.id} references unknown nodes")
        if self.demand < 0:
            raise NetworkError("demand must be non-negative")
        if not 0 <= self.subscriber_demand <= self.demand:
            raise NetworkError("subscriber demand must lie in [0, demand]")
        if not self._destination_reachable():
            raise NetworkError(
                f"no path from {self.origin!r} to {self.destination!r}"
            )

    def _destination_reachable(self) -> bool:
        adj: dict[str, list[str]] = {}
        for ln in self.links:
            adj.setdefault(ln.tail, []).append(ln.head)
        seen = {self.origin}
        stack = [self.origin]
        while stack:
            node = stack.pop()
            if node == self.destination:
                return True
            for nxt in adj.get(node, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    @property
    def outsider_demand(self) -> float:
        return self.demand - self.subscriber_demand

    def link_index(self) -> dict[int, int]:
        """Map link id -> position in ``self.links``."""
        return {ln.id: pos for pos, ln in enumerate(self.links)}

    def link_times(self, link_flows) -> np.ndarray:
        """Per-link travel times at the given flow vector."""
        q = np.asarray(link_flows, dtype=float)
        return np.array([ln.cost_fn.cost(q[i]) for i, ln in enumerate(self.links)])

    def link_marginals(self, link_flows) -> np.ndarray:
        """Per-link marginal costs at the given flow vector."""
        q = np.asarray(link_flows, dtype=float)
        return np.array(
            [ln.cost_fn.marginal(q[i]) for i, ln in enumerate(self.links)]
        )


@dataclass(frozen=True, eq=False)
class PathSet:
    """All simple origin-destination paths, in a fixed deterministic order.

    ``paths[r]`` is the link-id sequence of path r; ``incidence[a, r]`` is 1
    when path r uses the link at position a of ``Network.links``.
    """

    paths: tuple[tuple[int, ...], ...]
    incidence: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.incidence.setflags(write=False)

    def __len__(self) -> int:
        return len(self.paths)

    def labels(self) -> list[str]:
        """Human-readable path names like ``(1)+(3)``."""
        return ["+".join(f"({lid})" for lid in p) for p in self.paths]


def enumerate_paths(net: Network, max_paths: int = DEFAULT_MAX_PATHS) -> PathSet:
    """Enumerate every simple origin->destination path by depth-first search.

    Paths are ordered lexicographically by their link-id sequence, which makes
    the result reproducible across runs. Raises :class:`PathCountError` as
    soon as more than ``max_paths`` paths exist; this toolkit targets small
    networks where exhaustive enumeration is practical.
    """
    if max_paths < 1:
        raise NetworkError("max_paths must be >= 1")
    by_tail: dict[str, list[Link]] = {}
    for ln in net.links:
        by_tail.setdefault(ln.tail, []).append(ln)
    for outgoing in by_tail.values():
        outgoing.sort(key=lambda ln: ln.id)

    found: list[tuple[int, ...]] = []
    trail: list[int] = []
    visited = {net.origin}

    def walk(node: str) -> None:
        if node == net.destination:
            if len(found) >= max_paths:
                raise PathCountError(
                    f"more than {max_paths} simple paths; raise max_paths "
                    "or reduce the network"
                )
            found.append(tuple(trail))
            return
        for ln in by_tail.get(node, ()):
            if ln.head in visited:
                continue
            visited.add(ln.head)
            trail.append(ln.id)
            walk(ln.head)
            trail.pop()
            visited.remove(ln.head)

    walk(net.origin)
    if not found:
        raise NetworkError("no origin-destination path exists")

    index = net.link_index()
    incidence = np.zeros((len(net.links), len(found)))
    for r, path in enumerate(found):
        for lid in path:
            incidence[index[lid], r] = 1.0
    return PathSet(paths=tuple(found), incidence=incidence)


def parse_network(text: str) -> Network:
    """Build a validated :class:`Network` from its JSON description.

    Schema::

        {
          "nodes": ["A", "B", ...],
          "links": [{"id": 1, "from": "A", "to": "B",
                     "cost": {"kind": "linear", "params": [10.0, 0.05]}}, ...],
          "demand": {"origin": "A", "destination": "C",
                     "total": 1000.0, "subscribers": 800.0}
        }
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise NetworkError("top-level JSON value must be an object")

    for key in ("nodes", "links", "demand"):
        if key not in raw:
            raise NetworkError(f"missing required key {key!r}")

    nodes = raw["nodes"]
    if not isinstance(nodes, list) or not all(isinstance(n, str) for n in nodes):
        raise NetworkError("'nodes' must be a list of strings")

    links = []
    if not isinstance(raw["links"], list):
        raise NetworkError("'links' must be a list")
    for entry in raw["links"]:
        if not isinstance(entry, dict):
            raise NetworkError("each link must be an object")
        try:
            cost_entry = entry["cost"]
            cost = LinkCostFn(str(cost_entry["kind"]), tuple(cost_entry["params"]))
            links.append(
                Link(
                    id=int(entry["id"]),
                    tail=str(entry["from"]),
                    head=str(entry["to"]),
                    cost_fn=cost,
                )
            )
        except KeyError as exc:
            raise NetworkError(f"link entry missing key {exc}") from exc
        except (TypeError, ValueError) as exc:
            if isinstance(exc, NetworkError):
                raise
            raise NetworkError(f"bad link entry: {exc}") from exc

    dem = raw["demand"]
    if not isinstance(dem, dict):
        raise NetworkError("'demand' must be an object")
    try:
        origin = str(dem["origin"])
        destination = str(dem["destination"])
        total = float(dem["total"])
        subscribers = float(dem.get("subscribers", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkError(f"bad demand record: {exc}") from exc

    return Network(
        nodes=tuple(nodes),
        links=tuple(links),
        origin=origin,
        destination=destination,
        demand=total,
        subscriber_demand=subscribers,
    )
