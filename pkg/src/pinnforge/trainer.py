"""Desk-scale PINN trainer for builtin-target bundles.

A small fully-connected network is trained against the mean squared PDE
residual over interior collocation points plus a weighted boundary/initial
penalty.  Spatial and temporal derivatives of the network come from central
finite differences at stencil points; parameter gradients come from manual
backprop through the stencil evaluations.  Runs are deterministic per seed.

Supported families: 1D Poisson, 1D heat, 1D viscous Burgers, 2D Poisson on a
rectangle.  Everything else raises UnsupportedPde (the feedback agent
escalates on that message).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .errors import UnsupportedPde
from .expr import ExprTree
from .pde import CanonicalPde

ACTIVATIONS = ("tanh", "sine")

_FORCING_SYMBOLS = {"x", "y", "t", "pi", "e"}


@dataclass(frozen=True)
class NetSpec:
    depth: int = 3          # hidden layers
    width: int = 32
    activation: str = "tanh"
    input_dim: int = 1

    def __post_init__(self):
        if self.depth < 1 or self.width < 1 or self.input_dim < 1:
            raise ValueError("depth, width and input_dim must be positive")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")

    def layer_shapes(self) -> list[tuple[int, int]]:
        dims = [self.input_dim] + [self.width] * self.depth + [1]
        return [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]

    @property
    def param_count(self) -> int:
        return sum((fan_in + 1) * fan_out for fan_in, fan_out in self.layer_shapes())

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "width": self.width,
            "activation": self.activation,
            "input_dim": self.input_dim,
        }


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 2000
    learning_rate: float = 2e-3
    interior_points: int = 128
    boundary_points: int = 64
    fd_step: float = 1e-3
    boundary_weight: float = 100.0
    seed: int = 0
    eval_points: int = 256
    # loss above this flags divergence: Adam's normalized steps plus bounded
    # activations never reach literal inf, so runaway counts as diverged too
    divergence_threshold: float = 1e7

    def __post_init__(self):
        if self.steps < 1 or self.learning_rate <= 0:
            raise ValueError("steps and learning rate must be positive")
        if self.fd_step <= 0:
            raise ValueError("finite-difference step must be positive")

    def validate_against(self, extents) -> None:
        smallest = min(hi - lo for lo, hi in extents)
        if self.fd_step >= smallest / 10:
            raise ValueError("fd_step must be below a tenth of the smallest axis extent")

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "learning_rate": self.learning_rate,
            "interior_points": self.interior_points,
            "boundary_points": self.boundary_points,
            "fd_step": self.fd_step,
            "boundary_weight": self.boundary_weight,
            "seed": self.seed,
            "eval_points": self.eval_points,
            "divergence_threshold": self.divergence_threshold,
        }

    @staticmethod
    def from_dict(d: dict) -> "TrainConfig":
        return TrainConfig(**{k: d[k] for k in TrainConfig().to_dict() if k in d})


@dataclass
class TraceRecord:
    t: int
    loss: float
    grad_norm: float

    def to_json(self) -> str:
        return json.dumps({"t": self.t, "loss": self.loss, "grad_norm": self.grad_norm})


@dataclass
class LossTrace:
    records: list[TraceRecord] = field(default_factory=list)
    diverged: bool = False
    diverged_at: int | None = None
    final_mse: float | None = None

    def to_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    def losses(self) -> list[float]:
        return [r.loss for r in self.records]

    @staticmethod
    def from_jsonl(text: str) -> "LossTrace":
        trace = LossTrace()
        for line in text.splitlines():
            if line.strip():
                d = json.loads(line)
                trace.records.append(TraceRecord(int(d["t"]), float(d["loss"]), float(d["grad_norm"])))
        return trace


def validate_trace_text(text: str) -> list[str]:
    """Wire-format validation; returns problems (empty = valid)."""
    problems = []
    expected_t = 1
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
        except json.JSONDecodeError as err:
            problems.append(f"line {lineno}: not JSON ({err})")
            continue
        if set(d) != {"t", "loss", "grad_norm"}:
            problems.append(f"line {lineno}: keys {sorted(d)} != ['grad_norm', 'loss', 't']")
            continue
        if d["t"] != expected_t:
            problems.append(f"line {lineno}: step {d['t']} breaks the 1..n sequence")
        expected_t = d["t"] + 1
        for key in ("loss", "grad_norm"):
            v = d[key]
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                problems.append(f"line {lineno}: {key}={v!r} not a finite nonnegative number")
    if expected_t == 1:
        problems.append("trace is empty")
    return problems


# ---------------------------------------------------------------------------
# network
# ---------------------------------------------------------------------------


def init_params(net: NetSpec, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    params = []
    for fan_in, fan_out in net.layer_shapes():
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        params.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))
    return params


def zero_output_params(net: NetSpec, seed: int) -> list[np.ndarray]:
    """Normal init but with a zeroed final layer, so the network outputs 0."""
    params = init_params(net, seed)
    params[-2] = np.zeros_like(params[-2])
    params[-1] = np.zeros_like(params[-1])
    return params


def _act(z: np.ndarray, kind: str) -> np.ndarray:
    return np.tanh(z) if kind == "tanh" else np.sin(z)


def _act_grad(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    return np.cos(z)


def forward(params: list[np.ndarray], X: np.ndarray, net: NetSpec, want_cache: bool = False):
    h = X
    zs = []
    hs = [X]
    n_layers = len(params) // 2
    for i in range(n_layers):
        W, b = params[2 * i], params[2 * i + 1]
        z = h @ W + b
        if i < n_layers - 1:
            zs.append(z)
            h = _act(z, net.activation)
            hs.append(h)
        else:
            h = z
    y = h[:, 0]
    if want_cache:
        return y, (zs, hs)
    return y


def backward(params, cache, dy: np.ndarray, net: NetSpec) -> list[np.ndarray]:
    zs, hs = cache
    n_layers = len(params) // 2
    grads: list[np.ndarray | None] = [None] * len(params)
    delta = dy[:, None]  # (N,1) gradient wrt final linear output
    for i in range(n_layers - 1, -1, -1):
        W = params[2 * i]
        h_prev = hs[i]
        grads[2 * i] = h_prev.T @ delta
        grads[2 * i + 1] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ W.T) * _act_grad(zs[i - 1], net.activation)
    return grads  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# family classification
# ---------------------------------------------------------------------------


@dataclass
class FamilyPlan:
    name: str                     # poisson1d | heat1d | burgers1d | poisson2d
    input_dim: int
    coef_time: float
    coef_xx: dict[str, float]
    coef_advection: float
    forcing: ExprTree | None
    field_name: str
    time_dependent: bool


def _check_forcing_symbols(tree: ExprTree):
    if tree.kind in (ex.KIND_CONST, ex.KIND_VAR):
        if tree.name not in _FORCING_SYMBOLS:
            raise UnsupportedPde(
                f"unsupported PDE family: forcing references unknown symbol {tree.name!r}"
            )
    for c in tree.children:
        _check_forcing_symbols(c)


def classify_family(pde: CanonicalPde) -> FamilyPlan:
    residual = pde.residual
    terms = residual.children if residual.kind == ex.KIND_SUM else (residual,)
    coef_time = 0.0
    coef_xx: dict[str, float] = {}
    coef_advection = 0.0
    forcing_terms: list[ExprTree] = []
    field_names: set[str] = set()

    from .expr import _split_coefficient  # canonical (coef, factor) splitter

    for term in terms:
        coef, factor = _split_coefficient(term)
        if factor is None or not ex.depends_on_field(factor):
            forcing_terms.append(term)
            continue
        if factor.kind == ex.KIND_TIME and factor.order == 1 and factor.children[0].kind == ex.KIND_VAR:
            coef_time += coef
            field_names.add(factor.children[0].name)
            continue
        if factor.kind == ex.KIND_SPACE and factor.order == 2 and factor.children[0].kind == ex.KIND_VAR:
            coef_xx[factor.name] = coef_xx.get(factor.name, 0.0) + coef
            field_names.add(factor.children[0].name)
            continue
        if (
            factor.kind == ex.KIND_PROD
            and len(factor.children) == 2
            and factor.children[0].kind == ex.KIND_VAR
            and factor.children[1].kind == ex.KIND_SPACE
            and factor.children[1].order == 1
            and factor.children[1].name == "x"
            and factor.children[1].children[0].kind == ex.KIND_VAR
            and factor.children[1].children[0].name == factor.children[0].name
        ):
            coef_advection += coef
            field_names.add(factor.children[0].name)
            continue
        raise UnsupportedPde(f"unsupported PDE family: term {ex.to_prefix(term)} not desk-trainable")

    if len(field_names) != 1:
        raise UnsupportedPde(
            f"unsupported PDE family: expected one unknown field, found {sorted(field_names)}"
        )
    axes = set(coef_xx)
    forcing = None
    if forcing_terms:
        combined = forcing_terms[0] if len(forcing_terms) == 1 else ex.sum_(*forcing_terms)
        forcing = ex.canonicalize(combined)
        _check_forcing_symbols(forcing)

    time_dependent = coef_time != 0.0
    if not time_dependent and coef_advection == 0.0 and axes == {"x"}:
        name, dim = "poisson1d", 1
    elif not time_dependent and coef_advection == 0.0 and axes == {"x", "y"}:
        name, dim = "poisson2d", 2
    elif time_dependent and coef_advection == 0.0 and axes == {"x"}:
        name, dim = "heat1d", 2
    elif time_dependent and coef_advection != 0.0 and axes == {"x"}:
        name, dim = "burgers1d", 2
    else:
        raise UnsupportedPde(
            f"unsupported PDE family: axes {sorted(axes)}, "
            f"time={'yes' if time_dependent else 'no'}, advection={coef_advection}"
        )
    if name in ("heat1d", "burgers1d") and pde.domain.dims != 1:
        raise UnsupportedPde("unsupported PDE family: time-dependent desk families are 1D")
    return FamilyPlan(
        name=name,
        input_dim=dim,
        coef_time=coef_time,
        coef_xx=coef_xx,
        coef_advection=coef_advection,
        forcing=forcing,
        field_name=next(iter(field_names)),
        time_dependent=time_dependent,
    )


# ---------------------------------------------------------------------------
# collocation sampling and the loss
# ---------------------------------------------------------------------------


def _eval_forcing(forcing: ExprTree | None, env: dict) -> np.ndarray | float:
    if forcing is None:
        return 0.0
    return ex.evaluate(forcing, env)


def _bc_value(bc, env: dict) -> np.ndarray | float:
    if bc.value is None:
        return 0.0
    return ex.evaluate(bc.value, env)


@dataclass
class ProblemData:
    plan: FamilyPlan
    interior: np.ndarray           # (N, input_dim)
    penalty_points: np.ndarray     # (B, input_dim)
    penalty_targets: np.ndarray    # (B,)
    h: float
    extents: tuple
    time_extent: tuple | None


def _sample_problem(pde: CanonicalPde, plan: FamilyPlan, cfg: TrainConfig) -> ProblemData:
    rng = np.random.default_rng(cfg.seed)
    h = cfg.fd_step
    extents = pde.domain.extents
    cfg.validate_against(extents)
    time_extent = pde.domain.time_extent or (0.0, 1.0)

    for bc in pde.boundary_conditions:
        if bc.kind != "dirichlet":
            raise UnsupportedPde(
                f"unsupported PDE family: {bc.kind} boundary conditions at desk scale"
            )

    def uniform(lo, hi, n):
        return rng.uniform(lo + h, hi - h, size=n)

    if plan.name == "poisson1d":
        (lo, hi) = extents[0]
        interior = uniform(lo, hi, cfg.interior_points)[:, None]
        pts, targets = [], []
        for bc in pde.boundary_conditions:
            coord = _segment_coordinate(bc.segment, lo, hi)
            pts.append([coord])
            targets.append(float(_bc_value(bc, {"x": coord})))
        if not pts:
            pts = [[lo], [hi]]
            targets = [0.0, 0.0]
        return ProblemData(plan, interior, np.array(pts), np.array(targets), h, extents, None)

    if plan.name == "poisson2d":
        (xlo, xhi), (ylo, yhi) = extents
        interior = np.column_stack(
            [uniform(xlo, xhi, cfg.interior_points), uniform(ylo, yhi, cfg.interior_points)]
        )
        per_edge = max(2, cfg.boundary_points // 4)
        edges = []
        xs = np.linspace(xlo, xhi, per_edge)
        ys = np.linspace(ylo, yhi, per_edge)
        edges.append(np.column_stack([xs, np.full(per_edge, ylo)]))
        edges.append(np.column_stack([xs, np.full(per_edge, yhi)]))
        edges.append(np.column_stack([np.full(per_edge, xlo), ys]))
        edges.append(np.column_stack([np.full(per_edge, xhi), ys]))
        pts = np.vstack(edges)
        env = {"x": pts[:, 0], "y": pts[:, 1]}
        targets = np.zeros(len(pts))
        for bc in pde.boundary_conditions:
            targets = np.asarray(_bc_value(bc, env)) * np.ones(len(pts))
            break  # identical value expression on the whole boundary at desk scale
        return ProblemData(plan, interior, pts, targets, h, extents, None)

    # time-dependent 1D families: coordinates are (x, t)
    (lo, hi) = extents[0]
    t0, t1 = time_extent
    xs = uniform(lo, hi, cfg.interior_points)
    ts = rng.uniform(t0 + h, t1 - h, size=cfg.interior_points)
    interior = np.column_stack([xs, ts])

    pts_list, target_list = [], []
    n_side = max(2, cfg.boundary_points // 2)
    t_line = np.linspace(t0, t1, n_side)
    for bc in pde.boundary_conditions:
        coord = _segment_coordinate(bc.segment, lo, hi)
        side = np.column_stack([np.full(n_side, coord), t_line])
        pts_list.append(side)
        values = _bc_value(bc, {"x": side[:, 0], "t": side[:, 1]})
        target_list.append(np.asarray(values) * np.ones(n_side))
    if pde.initial_condition is not None:
        x_line = np.linspace(lo, hi, cfg.boundary_points)
        ic_pts = np.column_stack([x_line, np.full(cfg.boundary_points, t0)])
        pts_list.append(ic_pts)
        ic_vals = ex.evaluate(pde.initial_condition, {"x": x_line})
        target_list.append(np.asarray(ic_vals) * np.ones(cfg.boundary_points))
    pts = np.vstack(pts_list) if pts_list else np.zeros((0, 2))
    targets = np.concatenate(target_list) if target_list else np.zeros(0)
    return ProblemData(plan, interior, pts, targets, h, extents, time_extent)


def _segment_coordinate(segment: str, lo: float, hi: float) -> float:
    if "=" in segment:
        try:
            return float(segment.split("=", 1)[1])
        except ValueError:
            pass
    return lo if segment.endswith("0") or "lo" in segment else hi


def loss_and_grad(params, data: ProblemData, net: NetSpec, cfg: TrainConfig):
    """Total loss and parameter gradients for one evaluation of the objective."""
    plan = data.plan
    h = data.h
    X = data.interior
    n = len(X)
    b = len(data.penalty_points)

    if plan.name == "poisson1d":
        groups = [X + h, X - h, X]
    elif plan.name == "poisson2d":
        ex_off = np.array([h, 0.0])
        ey_off = np.array([0.0, h])
        groups = [X + ex_off, X - ex_off, X + ey_off, X - ey_off, X]
    else:  # heat1d / burgers1d on (x, t)
        ex_off = np.array([h, 0.0])
        et_off = np.array([0.0, h])
        groups = [X + ex_off, X - ex_off, X + et_off, X - et_off, X]

    batch = np.vstack(groups + [data.penalty_points]) if b else np.vstack(groups)
    y, cache = forward(params, batch, net, want_cache=True)
    slices = []
    start = 0
    for g in groups:
        slices.append(slice(start, start + len(g)))
        start += len(g)
    pen_slice = slice(start, start + b)

    dy = np.zeros(len(batch))
    inv_h2 = 1.0 / (h * h)
    inv_2h = 1.0 / (2.0 * h)

    if plan.name == "poisson1d":
        yp, ym, yc = (y[s] for s in slices)
        a = plan.coef_xx["x"]
        env = {"x": X[:, 0]}
        r = a * (yp - 2 * yc + ym) * inv_h2 + _eval_forcing(plan.forcing, env)
        scale = 2.0 / n
        dy[slices[0]] += scale * r * a * inv_h2
        dy[slices[1]] += scale * r * a * inv_h2
        dy[slices[2]] += scale * r * (-2 * a * inv_h2)
    elif plan.name == "poisson2d":
        yxp, yxm, yyp, yym, yc = (y[s] for s in slices)
        a = plan.coef_xx["x"]
        c = plan.coef_xx["y"]
        env = {"x": X[:, 0], "y": X[:, 1]}
        r = (
            a * (yxp - 2 * yc + yxm) * inv_h2
            + c * (yyp - 2 * yc + yym) * inv_h2
            + _eval_forcing(plan.forcing, env)
        )
        scale = 2.0 / n
        dy[slices[0]] += scale * r * a * inv_h2
        dy[slices[1]] += scale * r * a * inv_h2
        dy[slices[2]] += scale * r * c * inv_h2
        dy[slices[3]] += scale * r * c * inv_h2
        dy[slices[4]] += scale * r * (-2 * (a + c) * inv_h2)
    else:
        yxp, yxm, ytp, ytm, yc = (y[s] for s in slices)
        a = plan.coef_xx.get("x", 0.0)
        bt = plan.coef_time
        env = {"x": X[:, 0], "t": X[:, 1]}
        ux = (yxp - yxm) * inv_2h
        r = bt * (ytp - ytm) * inv_2h + a * (yxp - 2 * yc + yxm) * inv_h2
        r = r + _eval_forcing(plan.forcing, env)
        dc_extra = 0.0
        if plan.coef_advection != 0.0:
            c_adv = plan.coef_advection
            r = r + c_adv * yc * ux
            dc_extra = c_adv * ux
        scale = 2.0 / n
        adv_target = plan.coef_advection * yc * inv_2h
        dy[slices[0]] += scale * r * (a * inv_h2 + adv_target)
        dy[slices[1]] += scale * r * (a * inv_h2 - adv_target)
        dy[slices[2]] += scale * r * (bt * inv_2h)
        dy[slices[3]] += scale * r * (-bt * inv_2h)
        dy[slices[4]] += scale * r * (-2 * a * inv_h2 + dc_extra)

    loss = float(np.mean(r * r))
    if b:
        v = y[pen_slice] - data.penalty_targets
        loss += cfg.boundary_weight * float(np.mean(v * v))
        dy[pen_slice] += (2.0 * cfg.boundary_weight / b) * v

    grads = backward(params, cache, dy, net)
    return loss, grads


def grad_norm(grads) -> float:
    total = 0.0
    for g in grads:
        total += float(np.sum(g * g))
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


@dataclass
class TrainResult:
    trace: LossTrace
    params: list
    family: str
    net: NetSpec


def train(bundle, net: NetSpec | None = None, cfg: TrainConfig | None = None, params0=None) -> TrainResult:
    """Adam training of a builtin bundle; same seed gives a byte-identical trace."""
    pde = bundle.pde
    cfg = cfg or TrainConfig.from_dict(bundle.train_cfg)
    plan = classify_family(pde)
    if net is None:
        net_dict = dict(bundle.net)
        net_dict["input_dim"] = plan.input_dim
        net = NetSpec(**net_dict)
    elif net.input_dim != plan.input_dim:
        net = NetSpec(net.depth, net.width, net.activation, plan.input_dim)

    data = _sample_problem(pde, plan, cfg)
    params = [p.copy() for p in (params0 if params0 is not None else init_params(net, cfg.seed))]

    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]

    trace = LossTrace()
    for step in range(1, cfg.steps + 1):
        loss, grads = loss_and_grad(params, data, net, cfg)
        if not math.isfinite(loss) or loss > cfg.divergence_threshold:
            trace.diverged = True
            trace.diverged_at = step
            break
        trace.records.append(TraceRecord(step, loss, grad_norm(grads)))
        for i, g in enumerate(grads):
            m[i] = beta1 * m[i] + (1 - beta1) * g
            v[i] = beta2 * v[i] + (1 - beta2) * (g * g)
            m_hat = m[i] / (1 - beta1**step)
            v_hat = v[i] / (1 - beta2**step)
            params[i] = params[i] - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + eps)

    if bundle.reference_solution and not trace.diverged:
        try:
            reference = ex.canonicalize(ex.from_prefix(bundle.reference_solution))
        except Exception:  # noqa: BLE001 - fall back to infix
            reference = ex.canonicalize(ex.parse(bundle.reference_solution))
        trace.final_mse = evaluate_mse(
            lambda pts: forward(params, pts, net),
            reference,
            data,
            cfg.eval_points,
        )
    return TrainResult(trace, params, plan.name, net)


def evaluate_mse(predict, reference, data: ProblemData, points_per_axis: int = 256) -> float:
    """Mean squared difference on the fixed evaluation grid.

    ``reference`` is an expression tree over the coordinate symbols or a
    callable taking the grid array.
    """
    plan = data.plan
    if plan.input_dim == 1:
        (lo, hi) = data.extents[0]
        grid = np.linspace(lo, hi, points_per_axis)[:, None]
        env = {"x": grid[:, 0]}
    elif plan.name == "poisson2d":
        (xlo, xhi), (ylo, yhi) = data.extents
        gx, gy = np.meshgrid(
            np.linspace(xlo, xhi, points_per_axis), np.linspace(ylo, yhi, points_per_axis)
        )
        grid = np.column_stack([gx.ravel(), gy.ravel()])
        env = {"x": grid[:, 0], "y": grid[:, 1]}
    else:
        (lo, hi) = data.extents[0]
        t0, t1 = data.time_extent or (0.0, 1.0)
        gx, gt = np.meshgrid(
            np.linspace(lo, hi, points_per_axis), np.linspace(t0, t1, points_per_axis)
        )
        grid = np.column_stack([gx.ravel(), gt.ravel()])
        env = {"x": grid[:, 0], "t": grid[:, 1]}
    predicted = predict(grid)
    if callable(reference):
        target = reference(grid)
    else:
        target = np.asarray(ex.evaluate(reference, env)) * np.ones(len(grid))
    diff = predicted - target
    return float(np.mean(diff * diff))


def residual_mse(params, data: ProblemData, net: NetSpec, cfg: TrainConfig) -> float:
    """Mean squared PDE residual over the interior collocation set."""
    saved_weight = cfg.boundary_weight
    loss, _ = loss_and_grad(params, data, net, cfg)
    if len(data.penalty_points) == 0:
        return loss
    # subtract the penalty part by recomputing it directly
    y = forward(params, data.penalty_points, net)
    v = y - data.penalty_targets
    return loss - saved_weight * float(np.mean(v * v))
