"""Families of Bishop discs over the (r, c) parameter box.

``sweep`` solves one disc per lattice node, walking outward from the box
centre in deterministic rings; every node warm-starts from its assigned
neighbour in the previous ring, so results do not depend on how many
workers run the ring.  The geometric claims are then checked at lattice
resolution: the parametrising map has full rank, boundary curves are
pairwise disjoint (symmetric Hausdorff distance), and sampled points of
the attached manifold lie within epsilon of some boundary curve.
"""

from __future__ import annotations

import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ConvergenceError
from .manifolds import SubmanifoldSpec
from .solver import BishopDisc, SolverConfig, continuation_solve, \
    _EllipticProblem, _SeriesEvaluator
from .structures import AlmostComplexStructure

__all__ = [
    "DiscFamily",
    "sweep",
    "rank_report",
    "foliation_report",
    "sample_attached_points",
    "boundary_point_cloud",
]


def worker_count(n_tasks: int) -> int:
    cap = os.environ.get("BISHOP_THREADS")
    cap = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(cap, n_tasks))


class DiscFamily:
    """Solved discs on a rectangular (r, c) lattice at fixed delta."""

    def __init__(self, spec, structure, delta, r_values, c_values, cfg,
                 provenance=""):
        self.spec = spec
        self.structure = structure
        self.delta = float(delta)
        self.r_values = [float(r) for r in r_values]
        self.c_values = [tuple(float(v) for v in c) for c in c_values]
        self.cfg = cfg
        self.provenance = provenance
        self.discs: dict = {}
        self.failures: dict = {}

    def keys(self):
        return [
            (i, j)
            for i in range(len(self.r_values))
            for j in range(len(self.c_values))
        ]

    def node_parameters(self, key):
        return self.r_values[key[0]], self.c_values[key[1]]

    def solved_keys(self):
        return sorted(self.discs)

    def success_fraction(self) -> float:
        return len(self.discs) / max(1, len(self.keys()))

    def boundary_curves(self, keys=None) -> dict:
        """Real-embedded boundary curves {key: (n_theta, 2n)}."""
        out = {}
        for key in keys or self.solved_keys():
            curve = self.discs[key].boundary_curve()
            out[key] = np.concatenate([curve.real, curve.imag], axis=-1)
        return out

    # -- checkpointing -----------------------------------------------------

    def checkpoint_payload(self) -> dict:
        return {
            "provenance": self.provenance,
            "delta": self.delta,
            "r_values": self.r_values,
            "c_values": [list(c) for c in self.c_values],
            "solved": {
                f"{i},{j}": self.discs[(i, j)].to_payload()
                for (i, j) in self.solved_keys()
            },
            "failures": {
                f"{i},{j}": msg for (i, j), msg in sorted(self.failures.items())
            },
        }

    def save_checkpoint(self, path: str):
        atomic_write_json(path, self.checkpoint_payload())

    def diagnostics_report(self) -> dict:
        report = {
            "delta": self.delta,
            "provenance": self.provenance,
            "lattice": {
                "r_values": self.r_values,
                "c_values": [list(c) for c in self.c_values],
            },
            "success_fraction": self.success_fraction(),
            "nodes": {},
            "failures": {
                f"{i},{j}": msg for (i, j), msg in sorted(self.failures.items())
            },
        }
        for key in self.solved_keys():
            d = self.discs[key].diagnostics
            report["nodes"][f"{key[0]},{key[1]}"] = {
                "boundary_residual": d["boundary_residual"],
                "holomorphy_residual": d["holomorphy_residual"],
                "newton_iterations": d["newton_iterations"],
                "rungs": len(d.get("continuation_path", [])),
            }
        return report


def _spiral_rings(n_r, n_c):
    """Lattice keys grouped by Chebyshev ring around the centre node."""
    ci, cj = (n_r - 1) // 2, (n_c - 1) // 2
    rings: dict = {}
    for i in range(n_r):
        for j in range(n_c):
            rings.setdefault(max(abs(i - ci), abs(j - cj)), []).append((i, j))
    return [sorted(rings[k]) for k in sorted(rings)]


def _nearest_solved(key, candidates):
    """Deterministic warm-start source: closest by lattice metric, then
    lexicographic."""
    i, j = key
    return min(
        candidates,
        key=lambda k: (max(abs(k[0] - i), abs(k[1] - j)), abs(k[0] - i), k),
    )


def sweep(spec: SubmanifoldSpec, structure: AlmostComplexStructure,
          delta: float, r_values, c_values=None,
          cfg: SolverConfig = None, checkpoint_path: str = None,
          provenance: str = "", max_failure_fraction: float = 0.2
          ) -> DiscFamily:
    """Solve the disc family over the lattice r_values x c_values.

    Node failures are recorded, not fatal, unless more than
    ``max_failure_fraction`` of the lattice fails.  With a checkpoint path
    the sweep resumes from any compatible previous state and rewrites the
    file after every ring (write-then-rename, crash safe).
    """
    cfg = cfg or SolverConfig()
    if c_values is None:
        c_values = [()] if spec.n == 2 else [(0.0,) * (spec.n - 2)]
    family = DiscFamily(spec, structure, delta, r_values, c_values, cfg,
                        provenance)
    resumed = {}
    if checkpoint_path and os.path.exists(checkpoint_path):
        with open(checkpoint_path) as fh:
            previous = json.load(fh)
        if previous.get("provenance") == provenance:
            resumed = previous.get("solved", {})

    grid = cfg.grid()
    evaluator = _SeriesEvaluator(grid, cfg.n_coef)
    problems: dict = {}

    def solve_node(key, warm):
        r, c = family.node_parameters(key)
        tag = f"{key[0]},{key[1]}"
        if tag in resumed:
            return key, _revive(resumed[tag], spec, structure, delta, r, c,
                                cfg, grid, evaluator), None
        try:
            disc = continuation_solve(
                spec, structure, delta, r, c, cfg=cfg,
                initial_coefficients=warm,
            )
            return key, disc, None
        except ConvergenceError as exc:
            return key, None, str(exc)

    rings = _spiral_rings(len(family.r_values), len(family.c_values))
    for ring in rings:
        warm_sources = {}
        solved = family.solved_keys()
        for key in ring:
            if solved:
                src = _nearest_solved(key, solved)
                warm_sources[key] = family.discs[src].coefficients
            else:
                warm_sources[key] = None
        workers = worker_count(len(ring))
        if workers > 1 and len(ring) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(
                    pool.map(lambda k: solve_node(k, warm_sources[k]), ring)
                )
        else:
            results = [solve_node(k, warm_sources[k]) for k in ring]
        for key, disc, err in results:
            if disc is not None:
                family.discs[key] = disc
            else:
                family.failures[key] = err
        if checkpoint_path:
            family.save_checkpoint(checkpoint_path)
    if family.success_fraction() < 1.0 - max_failure_fraction:
        raise ConvergenceError(
            f"sweep failed on {len(family.failures)} of "
            f"{len(family.keys())} nodes",
            {"failures": {str(k): v for k, v in family.failures.items()}},
        )
    return family


def _revive(payload, spec, structure, delta, r, c, cfg, grid, evaluator):
    """Rebuild a BishopDisc from checkpointed coefficients."""
    coeffs = np.array(
        [[complex(a, b) for a, b in row] for row in payload["coefficients"]]
    )
    prob = _EllipticProblem(spec, structure, delta, cfg, grid=grid,
                            evaluator=evaluator)
    _, Z = prob.residual(coeffs)
    return BishopDisc(
        spec, prob.structure_delta, coeffs, Z, r, c, delta,
        payload["diagnostics"],
    )


def rank_report(family: DiscFamily, zeta_samples=(0.35 + 0.1j, 0.55 - 0.3j,
                                                  0.75 + 0.45j),
                threshold: float = 1e-4) -> dict:
    """Smallest singular value of the parametrising map at sampled points.

    The Jacobian columns are lattice finite differences in (r, c) plus a
    complex-step pair in zeta; the map is full-rank when sigma_{n+1}
    exceeds the threshold at every sample.
    """
    n_r, n_c = len(family.r_values), len(family.c_values)
    sigmas = []
    h_z = 1e-5
    interior_js = [0] if n_c == 1 else list(range(1, n_c - 1))
    for i in range(1, n_r - 1):
        for j in interior_js:
            key = (i, j)
            rp, rm = (i + 1, j), (i - 1, j)
            needed = [key, rp, rm]
            if n_c > 1:
                needed += [(i, j + 1), (i, j - 1)]
            if any(k not in family.discs for k in needed):
                continue
            disc = family.discs[key]
            dr = family.r_values[i + 1] - family.r_values[i - 1]
            for zeta in zeta_samples:
                cols = [
                    (family.discs[rp].evaluate(zeta)
                     - family.discs[rm].evaluate(zeta)) / dr
                ]
                if n_c > 1:
                    dc = family.c_values[j + 1][0] - family.c_values[j - 1][0]
                    cols.append(
                        (family.discs[(i, j + 1)].evaluate(zeta)
                         - family.discs[(i, j - 1)].evaluate(zeta)) / dc
                    )
                zx = (disc.evaluate(zeta + h_z)
                      - disc.evaluate(zeta - h_z)) / (2 * h_z)
                zy = (disc.evaluate(zeta + 1j * h_z)
                      - disc.evaluate(zeta - 1j * h_z)) / (2 * h_z)
                cols += [zx, zy]
                jac = np.stack(
                    [np.concatenate([c.real, c.imag]) for c in cols], axis=1
                )
                sigmas.append(
                    {"key": list(key), "zeta": [zeta.real, zeta.imag],
                     "sigma_min": float(np.linalg.svd(jac, compute_uv=False)[-1])}
                )
    values = [s["sigma_min"] for s in sigmas]
    return {
        "samples": sigmas,
        "sigma_min": min(values) if values else float("nan"),
        "threshold": threshold,
        "pass": bool(values) and min(values) > threshold,
    }


def _hausdorff(a, b) -> float:
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def sample_attached_points(spec: SubmanifoldSpec, delta: float, w_points,
                           y_points=None, max_iterations: int = 60) -> np.ndarray:
    """Points of the attached manifold E_delta over given (w, Im z) data.

    Solves r_delta(Z) = 0 for z_2 and Re z_j by Picard (the corrections
    are O(sqrt(delta)) at fixture scales); exact for the model at delta 0.
    """
    w_points = np.asarray(w_points, dtype=complex)
    count = len(w_points)
    if y_points is None:
        y_points = np.zeros((count, spec.n - 2))
    y_points = np.asarray(y_points, dtype=float).reshape(count, spec.n - 2)
    defining = (
        spec.model_quadric() if delta == 0.0
        else spec.defining_function("dilated", delta)
    )
    Z = np.zeros((count, spec.n), dtype=complex)
    Z[:, 0] = w_points
    Z[:, 2:] = 1j * y_points
    p_of_w = (np.abs(w_points) ** 2
              + 2.0 * spec.gamma * np.real(w_points ** 2))
    Z[:, 1] = p_of_w
    for _ in range(max_iterations):
        res = defining(Z)
        if np.abs(res).max() < 1e-12:
            break
        Z[:, 1] -= res[:, 0] + 1j * res[:, 1]
        for j in range(3, spec.n + 1):
            Z[:, j - 1] -= res[:, j - 1]
    return Z


def foliation_report(family: DiscFamily, epsilon: float = 0.05,
                     coverage_samples: int = 1000, margin: float = 0.1,
                     seed: int = 7, min_pair_distance: float = 0.0) -> dict:
    """Lattice-resolution foliation certificate.

    (i) disjointness: minimum pairwise symmetric Hausdorff distance
    between boundary curves; (ii) filling: fraction of sampled attached-
    manifold points (inside the swept box shrunk by ``margin``) within
    ``epsilon`` of some curve; (iii) the swept point cloud for export.
    """
    curves = family.boundary_curves()
    keys = sorted(curves)
    min_dist = np.inf
    worst_pair = None
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            d = _hausdorff(curves[keys[a]], curves[keys[b]])
            if d < min_dist:
                min_dist, worst_pair = d, (keys[a], keys[b])
    rng = np.random.default_rng(seed)
    spec = family.spec
    r_lo = min(family.r_values) + margin * np.ptp(family.r_values)
    r_hi = max(family.r_values) - margin * np.ptp(family.r_values)
    r_star = rng.uniform(r_lo, r_hi, coverage_samples)
    theta_star = rng.uniform(0.0, 2.0 * np.pi, coverage_samples)
    from .model import build_ellipse_map

    emap = build_ellipse_map(spec.gamma, tol=1e-9)
    w_pts = np.sqrt(r_star) * emap(np.exp(1j * theta_star))
    if spec.n > 2:
        c_arr = np.array([c for c in family.c_values])
        c_lo = c_arr.min(axis=0) + margin * np.ptp(c_arr, axis=0)
        c_hi = c_arr.max(axis=0) - margin * np.ptp(c_arr, axis=0)
        y_pts = rng.uniform(c_lo, c_hi, (coverage_samples, spec.n - 2))
    else:
        y_pts = None
    samples = sample_attached_points(spec, family.delta, w_pts, y_pts)
    emb = np.concatenate([samples.real, samples.imag], axis=-1)
    stack = np.concatenate([curves[k] for k in keys], axis=0)
    dmin = np.empty(len(emb))
    chunk = 200
    for start in range(0, len(emb), chunk):
        block = emb[start:start + chunk]
        dmin[start:start + chunk] = np.linalg.norm(
            block[:, None, :] - stack[None, :, :], axis=-1
        ).min(axis=1)
    covered = float(np.mean(dmin <= epsilon))
    return {
        "min_pairwise_hausdorff": float(min_dist),
        "worst_pair": [list(k) for k in worst_pair] if worst_pair else None,
        "disjoint": bool(min_dist > min_pair_distance),
        "epsilon": epsilon,
        "coverage_fraction": covered,
        "coverage_samples": int(coverage_samples),
        "max_sample_distance": float(dmin.max()),
    }


def boundary_point_cloud(family: DiscFamily) -> list:
    """Rows (r, c..., theta, X_1..X_2n) for CSV export of the swept set."""
    rows = []
    for key in family.solved_keys():
        disc = family.discs[key]
        r, c = family.node_parameters(key)
        curve = disc.boundary_curve()
        theta = disc.Z.grid.theta
        for t in range(curve.shape[0]):
            coords = []
            for comp in range(curve.shape[1]):
                coords += [curve[t, comp].real, curve[t, comp].imag]
            rows.append([r, *c, theta[t], *coords])
    return rows


def atomic_write_json(path: str, payload: dict):
    """Write-then-rename so readers never observe a torn file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
