"""Pure NumPy/SciPy versions of the simulator's inner loops.

These are the reference implementations; ``_ckernels`` must agree with them
to floating-point summation order.
"""
import numpy as np
from scipy.spatial import cKDTree


def diffuse(grid, uptake, diffusion, decay, spacing, dt, nsteps, boundary):
    """Advance ``grid`` in place by ``nsteps`` forward-Euler steps.

    Edge nodes are Dirichlet and never written. Interior values are clamped
    to ``[0, boundary]`` after every step.
    """
    r = diffusion * dt / (spacing * spacing)
    inner = grid[1:-1, 1:-1]
    keep = 1.0 - 4.0 * r - dt * (decay + uptake[1:-1, 1:-1])
    for _ in range(int(nsteps)):
        c = inner.copy()
        new = keep * c + r * (grid[:-2, 1:-1] + grid[2:, 1:-1] + grid[1:-1, :-2] + grid[1:-1, 2:])
        np.clip(new, 0.0, boundary, out=new)
        inner[...] = new
    return grid


def deposit_nearest(pos, weight, mask, origin, spacing, nx, ny):
    out = np.zeros((ny, nx))
    sel = np.asarray(mask, dtype=bool)
    if not sel.any():
        return out
    p = pos[sel]
    i = np.clip(np.floor((p[:, 0] - origin) / spacing + 0.5).astype(np.intp), 0, nx - 1)
    j = np.clip(np.floor((p[:, 1] - origin) / spacing + 0.5).astype(np.intp), 0, ny - 1)
    np.add.at(out, (j, i), weight[sel])
    return out


def pair_velocities(pos, radius, rep, adh, active, max_rel_adhesion, half_width):
    n = pos.shape[0]
    vel = np.zeros((n, 2))
    idx = np.flatnonzero(np.asarray(active, dtype=bool))
    if idx.size < 2:
        return vel
    rmax = radius[idx].max()
    reach = max(max_rel_adhesion, 1.0) * 2.0 * rmax
    pairs = cKDTree(pos[idx]).query_pairs(reach, output_type="ndarray")
    if pairs.size == 0:
        return vel
    i = idx[pairs[:, 0]]
    j = idx[pairs[:, 1]]
    delta = pos[i] - pos[j]
    d = np.hypot(delta[:, 0], delta[:, 1])
    rsum = radius[i] + radius[j]
    ra = max_rel_adhesion * rsum
    close = d < 1e-9
    unit = np.empty_like(delta)
    unit[~close] = delta[~close] / d[~close, None]
    unit[close] = (1.0, 0.0)
    d = np.where(close, 1e-9, d)
    srep, sadh = np.sqrt(rep), np.sqrt(adh)
    f = np.where(d < rsum, srep[i] * srep[j] * (1.0 - d / rsum) ** 2, 0.0)
    f -= np.where(d < ra, sadh[i] * sadh[j] * (1.0 - d / ra) ** 2, 0.0)
    fv = f[:, None] * unit
    np.add.at(vel, i, fv)
    np.add.at(vel, j, -fv)
    return vel
