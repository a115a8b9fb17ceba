"""Nonlinear Bishop-disc solvers.

Two regimes:

* generic point -- the coupled singular-integral system for a disc
  attached to a graph E = {x = h(y, w)}, solved by Picard iteration
  (``solve_generic``);
* elliptic point -- the operator equation  r_delta(Phi^{-1}(W)) = 0 on bD
  for a holomorphic unknown W, solved by Gauss-Newton on Taylor
  coefficients with continuation in the dilation parameter delta
  (``newton_solve`` / ``continuation_solve``).

The correction operator Phi(Z) = Z - T[A(Z) conj(dz Z)] turns
J_delta-holomorphy into plain holomorphy; its inverse is a Picard fixed
point whose contraction factor is measured, never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circle import BoundaryFunction, hilbert
from .disc import DiscFunction, DiscGrid, cauchy_extension, cauchy_green, \
    cauchy_green_at, dz
from .errors import ConvergenceError
from .manifolds import DefiningFunction, GenericGraphSpec, SubmanifoldSpec
from .model import model_disc
from .structures import AlmostComplexStructure, Dilation, beltrami_matrix, \
    holomorphy_residual, transport_structure

__all__ = [
    "SolverConfig",
    "CorrectionOperator",
    "BishopDisc",
    "newton_solve",
    "continuation_solve",
    "undilate",
    "GenericSolveConfig",
    "GenericDiscSolution",
    "solve_generic",
]


@dataclass
class SolverConfig:
    """Grids, truncation and tolerances for the elliptic-point solver."""

    n_coef: int = 32          # Taylor degree of each W component
    n_radial: int = 36
    n_theta: int = 128
    tol_residual: float = 1e-8
    max_newton: int = 25
    fd_step: float = 1e-6
    picard_tol: float = 1e-11
    picard_max_iterations: int = 80
    ladder_steps: int = 8
    ladder_ratio: float = 0.5
    max_halvings: int = 4

    def grid(self) -> DiscGrid:
        return DiscGrid(self.n_radial, self.n_theta)


class CorrectionOperator:
    """Phi_{J,delta}: Z -> W = Z - T[A(Z) conj(dz Z)] and its Picard inverse.

    ``structure`` must already be the transported J_delta; pass the plain
    standard structure for delta = 0, where Phi is the identity.
    """

    def __init__(self, structure: AlmostComplexStructure, grid: DiscGrid,
                 tol: float = 1e-11, max_iterations: int = 80):
        self.structure = structure
        self.grid = grid
        self.tol = float(tol)
        self.max_iterations = int(max_iterations)
        self.last_contraction = 0.0

    def _trivial(self):
        return len(self.structure.coeffs) == 0

    def correction(self, Z: DiscFunction) -> DiscFunction:
        """T[A(Z) conj(dz Z)] on the grid."""
        A = beltrami_matrix(self.structure, Z.values)
        g = (A @ np.conj(dz(Z).values)[..., None])[..., 0]
        return cauchy_green(DiscFunction(self.grid, g))

    def forward(self, Z: DiscFunction) -> DiscFunction:
        if self._trivial():
            return Z
        return Z - self.correction(Z)

    def inverse(self, W: DiscFunction, initial: DiscFunction = None) -> DiscFunction:
        """Picard iteration Z <- W + T[A(Z) conj(dz Z)] from Z = W.

        Divergence over two successive steps raises ConvergenceError with
        the measured Lipschitz estimate.
        """
        if self._trivial():
            return W
        Z = initial if initial is not None else W
        diffs = []
        for _ in range(self.max_iterations):
            Z_next = W + self.correction(Z)
            diff = float(np.abs(Z_next.values - Z.values).max())
            diffs.append(diff)
            Z = Z_next
            if diff <= self.tol:
                if len(diffs) >= 2 and diffs[-2] > 0:
                    self.last_contraction = diffs[-1] / diffs[-2]
                return Z
            if len(diffs) >= 3 and diffs[-1] > diffs[-2] >= diffs[-3]:
                raise ConvergenceError(
                    "Picard inversion of the correction operator is not "
                    f"contracting (growth factor {diffs[-1] / diffs[-2]:.3f})",
                    {"difference_trace": diffs,
                     "contraction_factor": diffs[-1] / diffs[-2]},
                )
        raise ConvergenceError(
            f"Picard inversion exhausted {self.max_iterations} iterations "
            f"(last change {diffs[-1]:.3e})",
            {"difference_trace": diffs},
        )


class _SeriesEvaluator:
    """Cached Vandermonde table: Taylor coefficients -> grid samples."""

    def __init__(self, grid: DiscGrid, n_coef: int):
        pts = grid.points.ravel()
        with np.errstate(under="ignore"):
            self.table = pts[:, None] ** np.arange(n_coef + 1)[None, :]
        self.shape = grid.points.shape
        self.grid = grid

    def __call__(self, coeffs) -> DiscFunction:
        """coeffs (n, n_coef+1) -> DiscFunction with n components."""
        vals = self.table @ coeffs.T
        return DiscFunction(
            self.grid, vals.reshape(self.shape + (coeffs.shape[0],))
        )


class _Pins:
    """Packing of W coefficients into free real unknowns.

    The normalisation pins are eliminated, not penalised, so they hold
    exactly: W_1(0) = 0, Im W_1'(0) = 0, Re W_2(0) = r, Im W_j(0) = c_j.
    """

    def __init__(self, n: int, n_coef: int, r: float, c):
        self.n = n
        self.n_coef = n_coef
        free = np.ones((n, n_coef + 1, 2), dtype=bool)  # (comp, coef, re/im)
        fixed = np.zeros((n, n_coef + 1, 2))
        free[0, 0, :] = False
        free[0, 1, 1] = False
        free[1, 0, 0] = False
        fixed[1, 0, 0] = r
        for idx in range(2, n):
            free[idx, 0, 1] = False
            fixed[idx, 0, 1] = c[idx - 2]
        self.free = free
        self.fixed = fixed
        self.n_unknowns = int(free.sum())

    def pack(self, coeffs) -> np.ndarray:
        parts = np.stack([coeffs.real, coeffs.imag], axis=-1)
        return parts[self.free]

    def unpack(self, x) -> np.ndarray:
        parts = self.fixed.copy()
        parts[self.free] = x
        return parts[..., 0] + 1j * parts[..., 1]


class BishopDisc:
    """A solved Bishop disc in the dilated chart.

    ``coefficients`` are the holomorphic representative W (one Taylor row
    per component); ``Z`` is the corrected disc Phi^{-1}(W) on the solver
    grid.  Diagnostics carry both defining residuals and the solver trace.
    """

    def __init__(self, spec: SubmanifoldSpec, structure_delta, coefficients,
                 Z: DiscFunction, r: float, c, delta: float, diagnostics):
        self.spec = spec
        self.structure_delta = structure_delta
        self.coefficients = np.asarray(coefficients, dtype=complex)
        self.Z = Z
        self.r = float(r)
        self.c = np.atleast_1d(np.asarray(c, dtype=float)) if spec.n > 2 \
            else np.zeros(0)
        self.delta = float(delta)
        self.diagnostics = dict(diagnostics)

    @property
    def n(self):
        return self.spec.n

    def boundary_curve(self) -> np.ndarray:
        """Boundary samples of the corrected disc, shape (n_theta, n)."""
        return self.Z.values[-1]

    def evaluate(self, zeta) -> np.ndarray:
        """Z(zeta) = W(zeta) + T[A(Z) conj(dz Z)](zeta) at one point."""
        zeta = complex(zeta)
        w_val = np.array(
            [np.polyval(row[::-1], zeta) for row in self.coefficients]
        )
        if len(self.structure_delta.coeffs) == 0:
            return w_val
        A = beltrami_matrix(self.structure_delta, self.Z.values)
        g = (A @ np.conj(dz(self.Z).values)[..., None])[..., 0]
        corr = cauchy_green_at(DiscFunction(self.Z.grid, g), zeta)
        return w_val + corr

    def to_payload(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "c": [float(v) for v in self.c],
            "delta": self.delta,
            "n_coef": self.coefficients.shape[1] - 1,
            "grid": {
                "n_radial": self.Z.grid.n_radial,
                "n_theta": self.Z.grid.n_theta,
            },
            "coefficients": [
                [[float(v.real), float(v.imag)] for v in row]
                for row in self.coefficients
            ],
            "diagnostics": self.diagnostics,
        }

    def __repr__(self):
        return (
            f"BishopDisc(n={self.n}, r={self.r}, c={list(self.c)}, "
            f"delta={self.delta})"
        )


def _structure_at(structure: AlmostComplexStructure, delta: float):
    """Transported structure J_delta; plain J_st at delta = 0."""
    if delta == 0.0:
        return AlmostComplexStructure(
            structure.n, validity_radius=structure.validity_radius
        )
    return transport_structure(structure, Dilation(delta, structure.n))


def _defining_at(spec: SubmanifoldSpec, delta: float) -> DefiningFunction:
    if delta == 0.0:
        return spec.model_quadric()
    return spec.defining_function("dilated", delta)


class _EllipticProblem:
    """Residual assembly for one (spec, structure, delta) triple."""

    def __init__(self, spec, structure, delta, cfg: SolverConfig,
                 grid=None, evaluator=None):
        self.spec = spec
        self.cfg = cfg
        self.delta = float(delta)
        self.grid = grid if grid is not None else cfg.grid()
        self.structure_delta = _structure_at(structure, self.delta)
        self.defining = _defining_at(spec, self.delta)
        self.phi = CorrectionOperator(
            self.structure_delta, self.grid,
            tol=cfg.picard_tol, max_iterations=cfg.picard_max_iterations,
        )
        self.evaluator = evaluator if evaluator is not None else \
            _SeriesEvaluator(self.grid, cfg.n_coef)
        self._warm_Z = None

    def residual(self, coeffs) -> tuple[np.ndarray, DiscFunction]:
        W = self.evaluator(coeffs)
        Z = self.phi.inverse(W, initial=self._warm_Z)
        self._warm_Z = Z
        bd = self.defining(Z.values[-1])  # (n_theta, n) real
        return bd.T.ravel(), Z

    def boundary_residual(self, Z: DiscFunction) -> float:
        return float(np.abs(self.defining(Z.values[-1])).max())

    def boundary_jacobian(self, pins: "_Pins", Z: DiscFunction) -> np.ndarray:
        """Jacobian of the boundary residual treating Phi^{-1} as identity.

        Exact at delta = 0 and O(delta)-accurate otherwise, which is all a
        Gauss-Newton direction needs in the contraction regime; the exact
        finite-difference Jacobian stays available as a fallback.
        """
        n, n_coef = pins.n, pins.n_coef
        theta = self.grid.theta
        dr = self.defining.jacobian(Z.values[-1])  # (n_theta, n, 2n)
        n_theta = len(theta)
        ktheta = np.outer(np.arange(n_coef + 1), theta)  # (coef, theta)
        cos_k, sin_k = np.cos(ktheta), np.sin(ktheta)
        jac = np.empty((n * n_theta, pins.n_unknowns))
        col = 0
        for j in range(n):
            dre = dr[:, :, 2 * j]   # (theta, rows)
            dim = dr[:, :, 2 * j + 1]
            for k in range(n_coef + 1):
                for part in range(2):  # 0: Re coeff, 1: Im coeff
                    if not pins.free[j, k, part]:
                        continue
                    if part == 0:
                        dx, dy = cos_k[k], sin_k[k]
                    else:
                        dx, dy = -sin_k[k], cos_k[k]
                    jac[:, col] = (
                        dre * dx[:, None] + dim * dy[:, None]
                    ).T.ravel()
                    col += 1
        return jac


def newton_solve(spec: SubmanifoldSpec, structure: AlmostComplexStructure,
                 delta: float, r: float, c=(),
                 initial_coefficients=None, cfg: SolverConfig = None,
                 problem: _EllipticProblem = None) -> BishopDisc:
    """Gauss-Newton least squares for the boundary equation at fixed delta.

    Unknowns are the Taylor coefficients of W with the normalisation pins
    eliminated; the Jacobian is forward finite differences, reused across
    iterations while the step quality stays good (chord variant).
    """
    cfg = cfg or SolverConfig()
    c = np.atleast_1d(np.asarray(c, dtype=float)) if spec.n > 2 else np.zeros(0)
    prob = problem if problem is not None else _EllipticProblem(
        spec, structure, delta, cfg
    )
    pins = _Pins(spec.n, cfg.n_coef, float(r), c)
    if initial_coefficients is None:
        initial_coefficients = model_disc(spec, r, c).taylor_coefficients(
            cfg.n_coef
        )
    coeffs = pins.unpack(pins.pack(np.asarray(initial_coefficients,
                                              dtype=complex)))
    x = pins.pack(coeffs)
    res, Z = prob.residual(pins.unpack(x))
    history = [float(np.abs(res).max())]
    # the cheap delta = 0 Jacobian drives the iteration; finite differences
    # (exact but ~100x the cost) take over only if progress stalls
    use_fd, jac, jac_fresh = False, None, False
    slow_steps = 0
    iterations = 0
    while history[-1] > cfg.tol_residual and iterations < cfg.max_newton:
        if jac is None:
            if use_fd:
                jac = _fd_jacobian(prob, pins, x, res, cfg.fd_step)
            else:
                jac = prob.boundary_jacobian(pins, Z)
            jac_fresh = True
        step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        scale, accepted = 1.0, False
        for _ in range(6):
            trial_x = x + scale * step
            trial_res, trial_Z = prob.residual(pins.unpack(trial_x))
            if np.abs(trial_res).max() < history[-1]:
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            if not use_fd:
                use_fd, jac = True, None  # escalate to the exact Jacobian
                continue
            if not jac_fresh:
                jac = None  # chord Jacobian went stale: rebuild and retry
                continue
            raise ConvergenceError(
                "Gauss-Newton step rejected after backtracking",
                {"residual_history": history, "delta": prob.delta},
            )
        iterations += 1
        x, res, Z = trial_x, trial_res, trial_Z
        history.append(float(np.abs(res).max()))
        jac_fresh = False
        reduction = history[-1] / max(history[-2], 1e-300)
        if not use_fd:
            jac = None  # the approximate Jacobian is refreshed every step
            slow_steps = slow_steps + 1 if reduction > 0.5 else 0
            if slow_steps >= 2 or scale < 0.25:
                use_fd = True
        elif scale < 1.0 or reduction > 0.25:
            jac = None  # slow progress: rebuild next round
    if history[-1] > cfg.tol_residual:
        raise ConvergenceError(
            f"Gauss-Newton stalled at residual {history[-1]:.3e} "
            f"(tol {cfg.tol_residual:.1e}) at delta {prob.delta}",
            {"residual_history": history, "delta": prob.delta},
        )
    coeffs = pins.unpack(x)
    diagnostics = {
        "newton_iterations": iterations,
        "residual_history": history,
        "boundary_residual": prob.boundary_residual(Z),
        "holomorphy_residual": holomorphy_residual(prob.structure_delta, Z),
        "picard_contraction": prob.phi.last_contraction,
        "delta": prob.delta,
    }
    return BishopDisc(
        spec, prob.structure_delta, coeffs, Z, r, c, prob.delta, diagnostics
    )


def _fd_jacobian(prob, pins, x, base_res, h):
    jac = np.empty((len(base_res), len(x)))
    for i in range(len(x)):
        xp = x.copy()
        xp[i] += h
        res_i, _ = prob.residual(pins.unpack(xp))
        jac[:, i] = (res_i - base_res) / h
    return jac


def continuation_solve(spec: SubmanifoldSpec,
                       structure: AlmostComplexStructure,
                       delta_target: float, r: float, c=(),
                       cfg: SolverConfig = None,
                       initial_coefficients=None) -> BishopDisc:
    """Solve at delta_target by warm-started continuation from the model.

    The default ladder is geometric with ``cfg.ladder_steps`` rungs; a
    failing rung is bisected up to ``cfg.max_halvings`` times.  When
    ``initial_coefficients`` are supplied (a solved neighbour), a direct
    solve at the target is attempted first.
    """
    cfg = cfg or SolverConfig()
    delta_target = float(delta_target)
    if delta_target < 0:
        raise ValueError("delta_target must be >= 0")
    path = []
    grid = cfg.grid()
    evaluator = _SeriesEvaluator(grid, cfg.n_coef)

    def attempt(delta, coeffs0):
        prob = _EllipticProblem(
            spec, structure, delta, cfg, grid=grid, evaluator=evaluator
        )
        disc = newton_solve(
            spec, structure, delta, r, c,
            initial_coefficients=coeffs0, cfg=cfg, problem=prob,
        )
        path.append(
            {"delta": delta,
             "newton_iterations": disc.diagnostics["newton_iterations"],
             "boundary_residual": disc.diagnostics["boundary_residual"]}
        )
        return disc

    if initial_coefficients is not None and delta_target > 0:
        try:
            disc = attempt(delta_target, initial_coefficients)
            disc.diagnostics["continuation_path"] = path
            return disc
        except ConvergenceError:
            path.append({"delta": delta_target, "restarted": True})

    disc = attempt(0.0, initial_coefficients)
    if delta_target == 0.0:
        disc.diagnostics["continuation_path"] = path
        return disc
    rungs = [
        delta_target * cfg.ladder_ratio ** (cfg.ladder_steps - 1 - k)
        for k in range(cfg.ladder_steps)
    ]
    halvings_left = cfg.max_halvings
    current = 0.0
    queue = list(rungs)
    while queue:
        target = queue[0]
        try:
            disc = attempt(target, disc.coefficients)
            current = target
            queue.pop(0)
        except ConvergenceError as exc:
            if halvings_left == 0:
                raise ConvergenceError(
                    f"continuation ladder exhausted at delta {current}",
                    {"last_good_delta": current,
                     "continuation_path": path,
                     "failure": str(exc)},
                ) from exc
            halvings_left -= 1
            queue.insert(0, 0.5 * (current + target))
    disc.diagnostics["continuation_path"] = path
    return disc


def undilate(disc: BishopDisc, structure: AlmostComplexStructure) -> dict:
    """Map a solved disc back to the original chart: Z_E = Lambda^{-1} Z.

    Returns the undilated samples with the boundary residual against the
    original defining function and the holomorphy residual for the
    original structure.
    """
    if disc.delta == 0.0:
        Z_E = disc.Z
    else:
        scales = Dilation(disc.delta, disc.n).scales
        Z_E = DiscFunction(disc.Z.grid, disc.Z.values / scales)
    original = disc.spec.defining_function()
    return {
        "Z": Z_E,
        "boundary_residual": float(np.abs(original(Z_E.values[-1])).max()),
        "holomorphy_residual": holomorphy_residual(structure, Z_E),
        "delta": disc.delta,
    }


# -- generic-point solver ----------------------------------------------------


@dataclass
class GenericSolveConfig:
    n_radial: int = 24
    n_theta: int = 128
    tol: float = 1e-10
    max_iterations: int = 300
    check_tol: float = 1e-8


class GenericDiscSolution:
    """Converged state of the generic-point system."""

    def __init__(self, z, w, y_star, v_star, u_star, y0, v0, diagnostics):
        self.z = z
        self.w = w
        self.y_star = y_star
        self.v_star = v_star
        self.u_star = u_star
        self.y0 = y0
        self.v0 = v0
        self.diagnostics = dict(diagnostics)

    def disc(self) -> DiscFunction:
        """The full map Z = (z, w) as one vector-valued DiscFunction."""
        vals = np.concatenate([self.z.values, self.w.values], axis=-1)
        return DiscFunction(self.z.grid, vals)


def solve_generic(graph: GenericGraphSpec,
                  structure: AlmostComplexStructure,
                  u_star: BoundaryFunction,
                  y0, v0,
                  cfg: GenericSolveConfig = None) -> GenericDiscSolution:
    """Picard iteration for the coupled boundary system at a generic point.

    Unknowns: interior blocks z (graphed, C^k-valued) and w (free,
    C^{n-k}-valued), boundary functions y* = Im z|_bD and v* = Im w|_bD.
    Update order per sweep: w from its interior representation, v* and y*
    from the conjugate-function equations, then x* = h(y*, w*) and z.
    The structure's coordinates must be ordered (z-block, w-block).

    The converged state is verified a posteriori: the boundary of (z, w)
    must land on E and the disc must be J-holomorphic; a violation raises
    an inconsistency error instead of returning a bad state.
    """
    cfg = cfg or GenericSolveConfig()
    n, k = graph.n, graph.k
    m = n - k
    grid = DiscGrid(cfg.n_radial, cfg.n_theta)
    if u_star.grid.n != grid.n_theta:
        raise ValueError(
            f"u* lives on {u_star.grid.n} nodes, solver uses {grid.n_theta}"
        )
    u_vals = np.atleast_2d(u_star.values.real.T).T  # (n_theta, m)
    if u_vals.shape != (grid.n_theta, m):
        raise ValueError(f"u* must have {m} real components")
    y0 = np.broadcast_to(np.asarray(y0, dtype=float), (k,)).copy()
    v0 = np.broadcast_to(np.asarray(v0, dtype=float), (m,)).copy()

    bgrid = grid.boundary
    hu = np.stack(
        [hilbert(bgrid.function(u_vals[:, j])).values.real for j in range(m)],
        axis=-1,
    )
    v_star = hu + v0
    y_star = np.tile(y0, (grid.n_theta, 1))
    w_star = u_vals + 1j * v_star
    w = cauchy_extension(BoundaryFunction(bgrid, w_star), grid)
    x_star = graph.h(y_star, w_star)
    z = cauchy_extension(BoundaryFunction(bgrid, x_star + 1j * y_star), grid)

    changes = []
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        Z = DiscFunction(grid, np.concatenate([z.values, w.values], axis=-1))
        A = beltrami_matrix(structure, Z.values)
        g = (A @ np.conj(dz(Z).values)[..., None])[..., 0]
        tg = cauchy_green(DiscFunction(grid, g))
        tg_z, tg_w = tg.values[..., :k], tg.values[..., k:]

        w_star_new = u_vals + 1j * (hu + v0 + 2.0 * tg_w[-1].imag)
        w_new = cauchy_extension(
            BoundaryFunction(bgrid, w_star_new), grid
        ) + DiscFunction(grid, tg_w)
        hx = graph.h(y_star, w_star_new)
        hx_conj = np.stack(
            [
                hilbert(bgrid.function(hx[:, j])).values.real
                for j in range(k)
            ],
            axis=-1,
        )
        y_star_new = hx_conj + y0 + 2.0 * tg_z[-1].imag
        x_star_new = graph.h(y_star_new, w_star_new)
        z_new = cauchy_extension(
            BoundaryFunction(bgrid, x_star_new + 1j * y_star_new), grid
        ) + DiscFunction(grid, tg_z)

        change = max(
            float(np.abs(w_new.values - w.values).max()),
            float(np.abs(z_new.values - z.values).max()),
            float(np.abs(y_star_new - y_star).max()),
            float(np.abs(w_star_new - w_star).max()),
        )
        changes.append(change)
        z, w = z_new, w_new
        y_star, w_star, x_star = y_star_new, w_star_new, x_star_new
        v_star = w_star.imag
        if change <= cfg.tol:
            break
        if len(changes) >= 4 and changes[-1] > changes[-2] > changes[-3]:
            raise ConvergenceError(
                "generic-point iteration diverging",
                {"change_trace": changes},
            )
    else:
        raise ConvergenceError(
            f"generic-point iteration did not reach {cfg.tol:.1e} in "
            f"{cfg.max_iterations} sweeps",
            {"change_trace": changes},
        )

    Z = DiscFunction(grid, np.concatenate([z.values, w.values], axis=-1))
    attach = max(
        float(np.abs(z.values[-1] - (x_star + 1j * y_star)).max()),
        float(np.abs(w.values[-1] - w_star).max()),
    )
    holo = holomorphy_residual(structure, Z)
    if attach > cfg.check_tol or holo > cfg.check_tol:
        raise ConvergenceError(
            "converged state fails the independent attachment/holomorphy "
            f"check (attachment {attach:.3e}, holomorphy {holo:.3e}): "
            "convention violation",
            {"attachment_residual": attach, "holomorphy_residual": holo},
        )
    diagnostics = {
        "iterations": iterations,
        "final_change": changes[-1] if changes else 0.0,
        "attachment_residual": attach,
        "holomorphy_residual": holo,
    }
    return GenericDiscSolution(
        z, w,
        BoundaryFunction(bgrid, y_star.astype(complex)),
        BoundaryFunction(bgrid, v_star.astype(complex)),
        u_star, y0, v0, diagnostics,
    )
