"""Explicit finite-difference oxygen field on a square node grid.

Nodes sit at ``origin + k * spacing`` for ``k = 0..n-1`` along each axis;
the outermost ring is held at ``boundary_value`` (Dirichlet).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from novabot import kernels
from novabot.errors import ConfigError


@dataclass
class OxygenField:
    grid: np.ndarray
    spacing: float
    diffusion_coeff: float
    decay_rate: float
    boundary_value: float
    origin: float

    @classmethod
    def uniform(cls, config, value=None) -> "OxygenField":
        ny, nx = config.grid_shape
        v = config.o2_boundary if value is None else value
        return cls(
            grid=np.full((ny, nx), float(v)),
            spacing=config.o2_spacing,
            diffusion_coeff=config.o2_diffusion,
            decay_rate=config.o2_decay,
            boundary_value=config.o2_boundary,
            origin=-config.half_width,
        )

    @property
    def shape(self):
        return self.grid.shape

    @property
    def dt_limit(self) -> float:
        if self.diffusion_coeff <= 0:
            return np.inf
        return self.spacing**2 / (4.0 * self.diffusion_coeff)

    def copy(self) -> "OxygenField":
        return OxygenField(self.grid.copy(), self.spacing, self.diffusion_coeff,
                           self.decay_rate, self.boundary_value, self.origin)

    def node_coords(self):
        ny, nx = self.grid.shape
        xs = self.origin + self.spacing * np.arange(nx)
        ys = self.origin + self.spacing * np.arange(ny)
        return xs, ys

    def uptake_grid(self, positions, rate_area, mask=None) -> np.ndarray:
        """Per-node first-order uptake coefficient (1/min).

        Each source removes ``rate_area * c`` (mmHg·µm²/min) at its nearest
        node; dividing by the node's area gives the local coefficient.
        """
        positions = np.ascontiguousarray(positions, dtype=float).reshape(-1, 2)
        rate_area = np.ascontiguousarray(rate_area, dtype=float).reshape(-1)
        if mask is None:
            mask = np.ones(len(rate_area), dtype=np.uint8)
        mask = np.ascontiguousarray(mask, dtype=np.uint8)
        ny, nx = self.grid.shape
        dep = kernels.deposit_nearest(positions, rate_area, mask, self.origin,
                                      self.spacing, nx, ny)
        return dep / (self.spacing * self.spacing)

    def advance(self, uptake, dt, nsteps=1) -> "OxygenField":
        """In-place ``nsteps`` explicit steps with a fixed uptake grid."""
        if dt <= 0:
            raise ConfigError(f"oxygen dt must be > 0, got {dt}")
        if dt > self.dt_limit * (1 + 1e-12):
            raise ConfigError(f"oxygen dt={dt} exceeds stability limit {self.dt_limit:.6g}")
        kernels.diffuse(self.grid, np.ascontiguousarray(uptake, dtype=float),
                        self.diffusion_coeff, self.decay_rate, self.spacing, dt,
                        int(nsteps), self.boundary_value)
        return self

    def sample(self, points) -> np.ndarray:
        """Bilinear interpolation at ``points`` (n, 2)."""
        g = self.grid
        i0, j0, tx, ty = self._locate(points)
        return ((1 - tx) * (1 - ty) * g[j0, i0] + tx * (1 - ty) * g[j0, i0 + 1]
                + (1 - tx) * ty * g[j0 + 1, i0] + tx * ty * g[j0 + 1, i0 + 1])

    def gradient(self, points) -> np.ndarray:
        """Gradient of the bilinear interpolant at ``points`` (mmHg/µm)."""
        g = self.grid
        i0, j0, tx, ty = self._locate(points)
        gx = ((1 - ty) * (g[j0, i0 + 1] - g[j0, i0]) + ty * (g[j0 + 1, i0 + 1] - g[j0 + 1, i0]))
        gy = ((1 - tx) * (g[j0 + 1, i0] - g[j0, i0]) + tx * (g[j0 + 1, i0 + 1] - g[j0, i0 + 1]))
        return np.stack([gx, gy], axis=-1) / self.spacing

    def _locate(self, points):
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        ny, nx = self.grid.shape
        fx = (p[:, 0] - self.origin) / self.spacing
        fy = (p[:, 1] - self.origin) / self.spacing
        # ufunc min/max: np.clip's wrapper dominates for small arrays
        i0 = np.minimum(np.maximum(np.floor(fx), 0), nx - 2).astype(np.intp)
        j0 = np.minimum(np.maximum(np.floor(fy), 0), ny - 2).astype(np.intp)
        tx = np.minimum(np.maximum(fx - i0, 0.0), 1.0)
        ty = np.minimum(np.maximum(fy - j0, 0.0), 1.0)
        return i0, j0, tx, ty


def step_oxygen(field: OxygenField, uptake_sources, dt: float) -> OxygenField:
    """One diffusion-decay-uptake step.

    ``uptake_sources`` is a sequence of ``((x, y), rate_times_area)`` pairs or
    a ``(positions, rates)`` tuple of arrays. Returns a new field.
    """
    positions, rates = _as_sources(uptake_sources)
    out = field.copy()
    return out.advance(out.uptake_grid(positions, rates), dt, 1)


def _as_sources(uptake_sources):
    if isinstance(uptake_sources, tuple) and len(uptake_sources) == 2 and \
            isinstance(uptake_sources[0], np.ndarray):
        return uptake_sources
    items = list(uptake_sources)
    if not items:
        return np.zeros((0, 2)), np.zeros(0)
    positions = np.array([p for p, _ in items], dtype=float).reshape(-1, 2)
    rates = np.array([r for _, r in items], dtype=float)
    return positions, rates


def relax_to_steady(field: OxygenField, uptake, dt, tol=1e-10, check_every=500,
                    max_steps=10_000_000) -> int:
    """Step until the max per-step change falls below ``tol``; returns steps taken."""
    taken = 0
    while taken < max_steps:
        field.advance(uptake, dt, check_every - 1)
        prev = field.grid.copy()
        field.advance(uptake, dt, 1)
        taken += check_every
        if np.max(np.abs(field.grid - prev)) < tol:
            return taken
    return taken
