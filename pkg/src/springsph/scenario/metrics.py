"""Crack-path analytics computed from the broken-bond record.

Everything derives from (break_time, midpoint) tuples, so metrics can be
recomputed offline from a run directory's crack_segments.csv.
"""

from __future__ import annotations

import numpy as np

from springsph.bonds import find_pairs


def cluster_1d(values: np.ndarray, gap: float, min_size: int = 1) -> list[np.ndarray]:
    """Single-linkage clusters of scalars: split where consecutive gaps exceed ``gap``."""
    if len(values) == 0:
        return []
    order = np.argsort(values)
    v = values[order]
    splits = np.nonzero(np.diff(v) > gap)[0] + 1
    groups = np.split(order, splits)
    return [g for g in groups if len(g) >= min_size]


def connected_clusters(points: np.ndarray, gap: float) -> np.ndarray:
    """Single-linkage component labels via union-find over the pair graph."""
    n = len(points)
    parent = np.arange(n)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    i, j, _ = find_pairs(points, gap)
    for a, b in zip(i, j):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
    return np.array([find(k) for k in range(n)])


def largest_cluster(points: np.ndarray, gap: float) -> np.ndarray:
    labels = connected_clusters(points, gap)
    vals, counts = np.unique(labels, return_counts=True)
    return np.nonzero(labels == vals[np.argmax(counts)])[0]


def tip_history(times, mids, analysis, n_samples: int = 200):
    """Running maximum of the axial crack extent from the notch root.

    Returns (t_grid, tip_positions); tip is nondecreasing by construction.
    """
    axis = analysis["axis"]
    root = analysis["notch_tip"][axis]
    if len(times) == 0:
        return np.zeros(0), np.zeros(0)
    order = np.argsort(times)
    t = np.asarray(times)[order]
    pos = np.maximum.accumulate(np.asarray(mids)[order][:, axis] - root)
    t_grid = np.linspace(0.0, t[-1], n_samples)
    tip = np.zeros(n_samples)
    idx = np.searchsorted(t, t_grid, side="right") - 1
    has = idx >= 0
    tip[has] = np.maximum(pos[idx[has]], 0.0)
    return t_grid, tip


def crack_tip_speed(t_grid: np.ndarray, tip: np.ndarray, window: int = 5):
    """Central finite difference of tip position over a smoothing window."""
    if len(t_grid) < 2:
        return np.zeros(0)
    k = np.ones(window) / window
    smooth = np.convolve(tip, k, mode="same")
    # repair the convolution ends (partial windows)
    for edge in range(window // 2):
        smooth[edge] = tip[: edge + window // 2 + 1].mean()
        smooth[-(edge + 1)] = tip[-(edge + window // 2 + 1):].mean()
    speed = np.gradient(smooth, t_grid)
    return np.maximum(speed, 0.0)


def branching_analysis(times, mids, analysis, t_end: float, n_slices: int = 50):
    """Frontier clustering per time slice.

    For each slice, bonds broken in that window whose axial coordinate lies
    within 3 dp of the slice's own leading edge form the frontier; their
    transverse coordinates are single-linkage clustered with gap 3 dp.
    Branch onset = first slice with >= 2 clusters (clusters of >= 2 bonds);
    branch count = cluster count in the last active slice.
    """
    axis, trans = analysis["axis"], analysis["transverse"]
    gap = 3.0 * analysis["dp"]
    times = np.asarray(times)
    mids = np.asarray(mids)
    onset = None
    count = 0
    if len(times) == 0:
        return onset, count
    edges = np.linspace(0.0, t_end, n_slices + 1)
    for k in range(n_slices):
        sel = (times > edges[k]) & (times <= edges[k + 1])
        if not np.any(sel):
            continue
        ax = mids[sel][:, axis]
        frontier = ax >= ax.max() - gap
        tr = mids[sel][:, trans][frontier]
        clusters = cluster_1d(tr, gap, min_size=2)
        n_cl = len(clusters) if clusters else (1 if len(tr) else 0)
        if n_cl >= 1:
            count = n_cl
        if onset is None and n_cl >= 2:
            onset = 0.5 * (edges[k] + edges[k + 1])
    return onset, count


def boundary_arrival(times, mids, analysis, margin_dp: float = 2.0):
    axis = analysis["axis"]
    limit = analysis["edge_coord"] - margin_dp * analysis["dp"]
    times = np.asarray(times)
    mids = np.asarray(mids)
    hit = mids[:, axis] >= limit
    if not np.any(hit):
        return None
    return float(times[hit].min())


def crack_angle(mids, analysis, min_points: int = 10):
    """Angle between the notch direction and the primary crack cluster axis.

    The primary cluster is the connected component (gap 3 dp) closest to the
    notch tip; its in-plane principal direction comes from a least-squares
    (PCA) fit. Returns degrees in [0, 90], or None below ``min_points``.
    """
    mids = np.asarray(mids)
    if len(mids) < min_points:
        return None
    tip = np.asarray(analysis["notch_tip"])
    direction = np.asarray(analysis["notch_dir"])
    gap = 3.0 * analysis["dp"]
    pts = mids[:, :2]
    labels = connected_clusters(pts, gap)
    dist_tip = np.linalg.norm(pts - tip[:2], axis=1)
    seed = labels[np.argmin(dist_tip)]
    cluster = pts[labels == seed]
    if len(cluster) < min_points:
        return None
    centered = cluster - cluster.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    principal = vt[0]
    cosang = abs(float(principal @ direction[:2]) / np.linalg.norm(direction[:2]))
    return float(np.degrees(np.arccos(np.clip(cosang, 0.0, 1.0))))


def hole_distance(mids, analysis):
    """Minimum distance from the crack cloud to the hole centre, and contact."""
    cx, cy, r = analysis["hole"]
    mids = np.asarray(mids)
    if len(mids) == 0:
        return None, False
    d = np.sqrt((mids[:, 0] - cx) ** 2 + (mids[:, 1] - cy) ** 2)
    dmin = float(d.min())
    return dmin, bool(dmin <= r + 1.5 * analysis["dp"])


def fracture_surface_stats(mids, analysis):
    """Chalk: largest broken-bond cluster centroid and plane-normal angle.

    The normal is the smallest principal axis of the cluster; the returned
    angle is measured against the bar axis in degrees.
    """
    mids = np.asarray(mids)
    if len(mids) < 10:
        return None
    gap = 3.0 * analysis["dp"]
    sel = largest_cluster(mids, gap)
    cluster = mids[sel]
    centered = cluster - cluster.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    normal = vt[-1]
    axis_vec = np.zeros(mids.shape[1])
    axis_vec[analysis["axis"]] = 1.0
    cosang = abs(float(normal @ axis_vec))
    return {
        "centroid": cluster.mean(axis=0).tolist(),
        "normal_axis_angle_deg": float(np.degrees(np.arccos(np.clip(cosang, 0, 1)))),
        "cluster_size": int(len(cluster)),
        "total_broken": int(len(mids)),
    }


def compute_metrics(times, mids, analysis, t_end: float, n_slices: int = 50) -> dict:
    """Scenario-aware metric bundle written to metrics.json."""
    times = np.asarray(times)
    mids = np.atleast_2d(np.asarray(mids)) if len(times) else np.zeros((0, 3))
    out: dict = {
        "n_broken_bonds": int(len(times)),
        "initiation_time": float(times.min()) if len(times) else None,
    }
    kind = analysis.get("kind", "none")
    if kind == "planar_crack":
        t_grid, tip = tip_history(times, mids, analysis)
        speed = crack_tip_speed(t_grid, tip)
        onset, count = branching_analysis(times, mids, analysis, t_end, n_slices)
        out.update(
            {
                "tip_time": t_grid.tolist(),
                "tip_position": tip.tolist(),
                "tip_speed": speed.tolist(),
                "peak_speed": float(speed.max()) if len(speed) else 0.0,
                "branch_onset": onset,
                "branch_count": count,
                "boundary_arrival": boundary_arrival(times, mids, analysis),
            }
        )
        if "hole" in analysis:
            dmin, touched = hole_distance(mids, analysis)
            out["hole_min_distance"] = dmin
            out["hole_contact"] = touched
    elif kind == "kalthoff":
        out["crack_angle_deg"] = crack_angle(mids, analysis)
    elif kind == "chalk":
        out["surface"] = fracture_surface_stats(mids, analysis)
    elif kind == "taylor":
        out["broken_extent"] = (
            {
                "min_axial": float(mids[:, analysis["axis"]].min()),
                "max_axial": float(mids[:, analysis["axis"]].max()),
            }
            if len(times)
            else None
        )
    return out
