"""Topology analysis and DC-flow sensitivity machinery.

Everything here works on a :class:`Topology` (a case plus the set of active
branches).  Susceptance solves share one sparse symmetric factorization per
topology; sensitivity objects are immutable after construction and safe to
query from multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .case_io import Branch, GridCase

__all__ = [
    "Topology",
    "FlowState",
    "SensitivityMatrices",
    "TopologyError",
    "identify_radial_branches",
    "solve_dc_flow",
    "compute_ptdf",
    "compute_lodf",
    "check_connectivity_after",
    "default_slack_bus",
]

INJECTION_BALANCE_TOL = 1e-6  # MW


class TopologyError(ValueError):
    """Disconnected network, islanding outage, or similar topology breach."""


@dataclass(frozen=True, eq=False)
class Topology:
    """A case restricted to a set of in-service branches."""

    case: GridCase
    active_branches: frozenset[int]

    @classmethod
    def from_case(cls, case: GridCase, removed: Iterable[int] = ()) -> "Topology":
        removed = frozenset(removed)
        all_ids = frozenset(br.id for br in case.branches)
        if not removed <= all_ids:
            raise TopologyError(f"unknown branch ids removed: {sorted(removed - all_ids)}")
        return cls(case=case, active_branches=all_ids - removed)

    def without(self, removed: Iterable[int]) -> "Topology":
        removed = frozenset(removed)
        if not removed <= self.active_branches:
            raise TopologyError(f"branches not active: {sorted(removed - self.active_branches)}")
        return Topology(case=self.case, active_branches=self.active_branches - removed)

    @cached_property
    def branches(self) -> tuple[Branch, ...]:
        return tuple(br for br in self.case.branches if br.id in self.active_branches)

    @cached_property
    def bus_count(self) -> int:
        return self.case.n_buses

    @cached_property
    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per bus position: list of (neighbor position, branch id)."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.bus_count)]
        pos = self.case.bus_pos
        for br in self.branches:
            u, v = pos(br.from_bus), pos(br.to_bus)
            adj[u].append((v, br.id))
            adj[v].append((u, br.id))
        return adj

    def is_connected(self) -> bool:
        return len(_component_of(self.adjacency, 0)) == self.bus_count

    def require_connected(self):
        if not self.is_connected():
            raise TopologyError("topology is disconnected")


def _component_of(adj: list[list[tuple[int, int]]], start: int, skip: frozenset[int] = frozenset()) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v, bid in adj[u]:
            if bid in skip or v in seen:
                continue
            seen.add(v)
            stack.append(v)
    return seen


def identify_radial_branches(topology: Topology) -> frozenset[int]:
    """Bridges of the active graph: branches whose removal disconnects it.

    Iterative lowpoint pass (linear time); parallel circuits are tracked per
    branch id, so a doubled line is never a bridge.
    """
    topology.require_connected()
    adj = topology.adjacency
    n = topology.bus_count
    disc = [-1] * n
    low = [0] * n
    bridges: set[int] = set()
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        # stack frames: (node, incoming branch id, iterator over adjacency)
        stack = [(root, -1, iter(adj[root]))]
        disc[root] = low[root] = timer
        timer += 1
        while stack:
            u, in_bid, it = stack[-1]
            advanced = False
            for v, bid in it:
                if bid == in_bid:
                    continue
                if disc[v] == -1:
                    disc[v] = low[v] = timer
                    timer += 1
                    stack.append((v, bid, iter(adj[v])))
                    advanced = True
                    break
                low[u] = min(low[u], disc[v])
            if not advanced:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[u])
                    if low[u] > disc[parent]:
                        bridges.add(in_bid)
    return frozenset(bridges)


def check_connectivity_after(topology: Topology, removed: Iterable[int]) -> bool:
    """True iff every bus with load or generation stays in one component.

    Zero-injection leaf buses may be stranded without invalidating the
    topology; that matches the operational meaning of system separation.
    """
    removed = frozenset(removed)
    if not removed <= topology.active_branches:
        raise TopologyError(f"branches not active: {sorted(removed - topology.active_branches)}")
    case = topology.case
    significant = np.zeros(case.n_buses, dtype=bool)
    significant |= case.load_profile.max(axis=1) > 0
    for g in case.generators:
        if g.p_max > 0:
            significant[case.bus_pos(g.bus)] = True
    anchors = np.flatnonzero(significant)
    if len(anchors) == 0:
        return True
    comp = _component_of(topology.adjacency, int(anchors[0]), skip=removed)
    return all(int(b) in comp for b in anchors)


def default_slack_bus(case: GridCase) -> int:
    """Lowest-id bus hosting a generator; deterministic across cases."""
    return min(g.bus for g in case.generators)


@dataclass(frozen=True, eq=False)
class FlowState:
    flows: dict[int, float]  # branch id -> MW, positive from->to
    angles: np.ndarray  # radians per bus position
    injections: np.ndarray  # MW per bus position


class SensitivityMatrices:
    """DC susceptance factorization plus PTDF/LODF queries for one topology.

    The reduced susceptance matrix (slack row/column deleted) is factorized
    once; every solve against it reuses the factorization.  All caches are
    filled under construction-or-first-use semantics and never mutated
    afterwards, so instances can be shared across threads.
    """

    def __init__(self, topology: Topology, slack_bus: Optional[int] = None):
        topology.require_connected()
        self.topology = topology
        case = topology.case
        self.slack_bus = default_slack_bus(case) if slack_bus is None else slack_bus
        if self.slack_bus not in case.bus_index:
            raise TopologyError(f"slack bus {self.slack_bus} is not a bus")
        self.slack_pos = case.bus_pos(self.slack_bus)
        n = case.n_buses
        branches = topology.branches
        self._branch_ids = [br.id for br in branches]
        self._branch_row = {br.id: i for i, br in enumerate(branches)}
        m = len(branches)

        b_series = np.array([case.base_mva / br.reactance for br in branches])
        rows = np.repeat(np.arange(m), 2)
        cols = np.empty(2 * m, dtype=int)
        vals = np.empty(2 * m)
        for i, br in enumerate(branches):
            cols[2 * i] = case.bus_pos(br.from_bus)
            cols[2 * i + 1] = case.bus_pos(br.to_bus)
            vals[2 * i] = b_series[i]
            vals[2 * i + 1] = -b_series[i]
        # branch flow = Bf @ theta (MW when theta is in radians)
        self._bf = sp.csr_matrix((vals, (rows, cols)), shape=(m, n))
        incidence = sp.csr_matrix(
            (np.where(vals > 0, 1.0, -1.0), (rows, cols)), shape=(m, n)
        )
        bbus = (incidence.T @ self._bf).tocsc()
        keep = np.array([i for i in range(n) if i != self.slack_pos])
        self._keep = keep
        self._lu = splu(bbus[keep][:, keep].tocsc())
        self._b_series = b_series
        self._transfer_cache: dict[int, np.ndarray] = {}
        self._isf_cache: dict[int, np.ndarray] = {}

    # -- core solves -------------------------------------------------------

    def angles_for(self, injections: np.ndarray) -> np.ndarray:
        """Solve B theta = P with the slack angle pinned at zero."""
        theta = np.zeros(self.topology.bus_count)
        theta[self._keep] = self._lu.solve(np.ascontiguousarray(injections[self._keep]))
        return theta

    def flows_for(self, injections: np.ndarray) -> np.ndarray:
        return self._bf @ self.angles_for(injections)

    def branch_row(self, branch_id: int) -> int:
        return self._branch_row[branch_id]

    @property
    def branch_ids(self) -> list[int]:
        return list(self._branch_ids)

    # -- sensitivities -----------------------------------------------------

    @cached_property
    def ptdf(self) -> np.ndarray:
        """Dense branch x bus matrix; column of the slack bus is zero."""
        n = self.topology.bus_count
        rhs = np.eye(len(self._keep))
        theta_red = self._lu.solve(rhs)
        theta = np.zeros((n, len(self._keep)))
        theta[self._keep, :] = theta_red
        full = np.zeros((self._bf.shape[0], n))
        full[:, self._keep] = (self._bf @ theta)[:, : len(self._keep)]
        return full

    def transfer_sensitivity(self, branch_id: int) -> np.ndarray:
        """Flow response on every branch to a 1 MW from->to transfer on ``branch_id``."""
        cached = self._transfer_cache.get(branch_id)
        if cached is not None:
            return cached
        br = self.topology.case.branch_by_id(branch_id)
        pos = self.topology.case.bus_pos
        inj = np.zeros(self.topology.bus_count)
        inj[pos(br.from_bus)] += 1.0
        inj[pos(br.to_bus)] -= 1.0
        phi = self.flows_for(inj)
        phi.setflags(write=False)
        self._transfer_cache[branch_id] = phi
        return phi

    def isf_row(self, branch_id: int) -> np.ndarray:
        """Injection shift factors of one branch: d flow / d injection per bus."""
        cached = self._isf_cache.get(branch_id)
        if cached is not None:
            return cached
        i = self._branch_row[branch_id]
        rhs = np.asarray(self._bf.getrow(i).todense()).ravel()[self._keep]
        lam_red = self._lu.solve(rhs, trans="T")
        row = np.zeros(self.topology.bus_count)
        row[self._keep] = lam_red
        row.setflags(write=False)
        self._isf_cache[branch_id] = row
        return row


def solve_dc_flow(topology: Topology, injections: np.ndarray,
                  sens: Optional[SensitivityMatrices] = None) -> FlowState:
    """Lossless DC power flow for balanced injections (MW)."""
    injections = np.asarray(injections, dtype=float)
    if injections.shape != (topology.bus_count,):
        raise ValueError(f"injections must have shape ({topology.bus_count},)")
    imbalance = float(injections.sum())
    if abs(imbalance) > INJECTION_BALANCE_TOL:
        raise ValueError(f"injections unbalanced by {imbalance:.3e} MW")
    if sens is None:
        sens = SensitivityMatrices(topology)
    theta = sens.angles_for(injections)
    flows_vec = sens._bf @ theta
    flows = {bid: float(flows_vec[i]) for i, bid in enumerate(sens.branch_ids)}
    return FlowState(flows=flows, angles=theta, injections=injections)


def compute_ptdf(topology: Topology, slack: Optional[int] = None) -> SensitivityMatrices:
    """Sensitivity bundle for a connected topology, slack-referenced."""
    return SensitivityMatrices(topology, slack_bus=slack)


def compute_lodf(sens: SensitivityMatrices, outaged: int) -> dict[int, float]:
    """Redistribution factors of one branch outage onto surviving branches.

    Post-outage flow estimate on branch m is ``f_m + lodf[m] * f_outaged``.
    The outaged branch maps to -1.  Raises on bridge outages (islanding).
    """
    phi = sens.transfer_sensitivity(outaged)
    self_phi = phi[sens.branch_row(outaged)]
    denom = 1.0 - self_phi
    if abs(denom) < 1e-8:
        raise TopologyError(f"branch {outaged} is a bridge; its outage islands the network")
    factors = {}
    for i, bid in enumerate(sens.branch_ids):
        factors[bid] = -1.0 if bid == outaged else float(phi[i] / denom)
    return factors
