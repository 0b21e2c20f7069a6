"""Nonuniform 1-D meshes on [0, 1].

A mesh stores the node coordinates plus the derived quantities every stencil
needs: cell spacings, cell midpoints, and the interior control-volume widths
``(x[i+1] - x[i-1]) / 2``.  Grid functions are plain float arrays aligned
with ``mesh.nodes``; nothing here is mutated after construction, so meshes
are safe to share across concurrent runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Three-node one-sided boundary stencils need 3 nodes per side.
MIN_NODES = 4

_ENDPOINT_TOL = 1e-12


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray
    spacings: np.ndarray
    midpoints: np.ndarray
    interior_widths: np.ndarray

    @property
    def n(self):
        return self.nodes.shape[0]

    def is_uniform(self, rtol=1e-12):
        dx = self.spacings
        return bool(np.all(np.abs(dx - dx[0]) <= rtol * dx[0]))


def _make_mesh(nodes):
    nodes = np.ascontiguousarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.shape[0] < MIN_NODES:
        raise ValueError(f"mesh needs at least {MIN_NODES} nodes, got {nodes.shape}")
    if abs(nodes[0]) > _ENDPOINT_TOL or abs(nodes[-1] - 1.0) > _ENDPOINT_TOL:
        raise ValueError("mesh must span [0, 1]")
    nodes[0], nodes[-1] = 0.0, 1.0
    spacings = np.diff(nodes)
    if np.any(spacings <= 0.0):
        raise ValueError("mesh nodes must be strictly increasing")
    mesh = Mesh(
        nodes=nodes,
        spacings=spacings,
        midpoints=0.5 * (nodes[:-1] + nodes[1:]),
        interior_widths=0.5 * (nodes[2:] - nodes[:-2]),
    )
    for arr in (mesh.nodes, mesh.spacings, mesh.midpoints, mesh.interior_widths):
        arr.flags.writeable = False
    return mesh


def build_uniform(n):
    """Uniform mesh with ``n`` nodes, x_i = (i-1)/(n-1)."""
    if n < MIN_NODES:
        raise ValueError(f"need n >= {MIN_NODES}, got {n}")
    return _make_mesh(np.linspace(0.0, 1.0, n))


def build_piecewise_uniform(breakpoints, counts):
    """Piecewise-uniform mesh: region k of [0, b_1, ..., b_m, 1] gets
    ``counts[k]`` equal cells.  Shared endpoints are not duplicated.
    """
    breakpoints = [float(b) for b in breakpoints]
    counts = [int(c) for c in counts]
    if len(counts) != len(breakpoints) + 1:
        raise ValueError("need one cell count per region (len(breakpoints)+1)")
    if any(c < 1 for c in counts):
        raise ValueError("cell counts must be positive")
    edges = [0.0, *breakpoints, 1.0]
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError("breakpoints must be strictly increasing inside (0, 1)")
    pieces = [np.linspace(a, b, c + 1)[:-1] for a, b, c in zip(edges, edges[1:], counts)]
    nodes = np.concatenate([*pieces, [1.0]])
    return _make_mesh(nodes)


def build_logistic(gamma, n):
    """Logistic mesh: interior nodes at 1/(1 + exp(-gamma (s - 1/2))) for
    s = (i-1)/(n-1), endpoints pinned to 0 and 1.

    Larger gamma concentrates nodes near the endpoints.  Raises ValueError
    when the map is too flat (gamma near 0, interior nodes collapse onto 0.5
    within float64) or too steep (interior nodes underflow against the
    endpoints); the usable gamma window depends on n.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if n < MIN_NODES:
        raise ValueError(f"need n >= {MIN_NODES}, got {n}")
    s = np.arange(1, n - 1) / (n - 1)
    nodes = np.empty(n)
    nodes[0] = 0.0
    nodes[-1] = 1.0
    nodes[1:-1] = 1.0 / (1.0 + np.exp(-gamma * (s - 0.5)))
    if np.any(np.diff(nodes) <= 0.0):
        raise ValueError(
            f"logistic mesh with gamma={gamma:g}, n={n} has colliding nodes"
        )
    return _make_mesh(nodes)


def mesh_from_config(spec):
    """Build a mesh from a config mapping: {"kind": ..., parameters...}."""
    kind = spec.get("kind")
    if kind == "uniform":
        return build_uniform(int(spec["n"]))
    if kind == "piecewise":
        return build_piecewise_uniform(spec["breakpoints"], spec["counts"])
    if kind == "logistic":
        return build_logistic(float(spec["gamma"]), int(spec["n"]))
    raise ValueError(f"unknown mesh kind: {kind!r}")
