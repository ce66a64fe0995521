import math

import numpy as np
import pytest

from pinnforge import expr as ex
from pinnforge import trainer as tr
from pinnforge.codegen import MODULE_KINDS, assemble, generate_module
from pinnforge.errors import UnsupportedPde
from pinnforge.pde import Domain, make_pde

SIN_REFERENCE = "(sin (* (const pi) (const x)))"


def poisson_pde(forcing="pi^2*sin(pi*x)"):
    return make_pde(
        f"u_xx + {forcing}" if forcing else "u_xx",
        boundary_conditions=[
            {"kind": "dirichlet", "axis": 1, "segment": "x=0", "value": "0"},
            {"kind": "dirichlet", "axis": 1, "segment": "x=1", "value": "0"},
        ],
    )


def make_bundle(pde, net, cfg, reference=None):
    context = {
        "residual": ex.to_prefix(pde.residual),
        "architecture": "MLP",
        "net": net.to_dict(),
        "train_cfg": cfg.to_dict(),
        "domain": pde.domain.to_dict(),
        "reference_solution": reference,
    }
    modules = [generate_module(k, context) for k in MODULE_KINDS]
    return assemble(
        modules, pde, "MLP", net.to_dict(), cfg.to_dict(), reference_solution=reference
    )


def quick_cfg(**kw):
    base = dict(
        steps=50,
        learning_rate=2e-3,
        interior_points=32,
        boundary_points=16,
        fd_step=1e-3,
        boundary_weight=10.0,
        seed=0,
    )
    base.update(kw)
    return tr.TrainConfig(**base)


class TestNetSpec:
    @pytest.mark.parametrize(
        "depth,width,input_dim",
        [(1, 1, 1), (1, 4, 1), (2, 3, 2), (3, 8, 1), (3, 8, 2), (2, 2, 2)],
    )
    def test_param_count_matches_hand_formula(self, depth, width, input_dim):
        net = tr.NetSpec(depth, width, "tanh", input_dim)
        dims = [input_dim] + [width] * depth + [1]
        expected = sum((dims[i] + 1) * dims[i + 1] for i in range(len(dims) - 1))
        assert net.param_count == expected

    def test_invalid_activation(self):
        with pytest.raises(ValueError):
            tr.NetSpec(activation="relu")

    def test_fd_step_invariant(self):
        cfg = tr.TrainConfig(fd_step=0.2)
        with pytest.raises(ValueError, match="fd_step"):
            cfg.validate_against(((0.0, 1.0),))


class TestClassify:
    def test_poisson1d(self):
        assert tr.classify_family(poisson_pde()).name == "poisson1d"

    def test_heat1d(self):
        pde = make_pde("u_t - 0.4*u_xx", initial_condition="sin(pi*x)")
        plan = tr.classify_family(pde)
        assert plan.name == "heat1d" and plan.coef_xx["x"] == -0.4

    def test_burgers1d(self):
        pde = make_pde("u_t + u*u_x - 0.01*u_xx", initial_condition="-sin(pi*x)")
        plan = tr.classify_family(pde)
        assert plan.name == "burgers1d" and plan.coef_advection == 1.0

    def test_poisson2d(self):
        pde = make_pde(
            "u_xx + u_yy + 2*pi^2*sin(pi*x)*sin(pi*y)",
            domain=Domain(dims=2, extents=((0.0, 1.0), (0.0, 1.0))),
        )
        assert tr.classify_family(pde).name == "poisson2d"

    def test_wave_unsupported(self):
        pde = make_pde("u_tt - 4*u_xx", initial_condition="sin(pi*x)")
        with pytest.raises(UnsupportedPde, match="unsupported PDE family"):
            tr.classify_family(pde)

    def test_fourth_order_unsupported(self):
        pde = make_pde("u_t + u_xxxx", initial_condition="cos(x)")
        with pytest.raises(UnsupportedPde):
            tr.classify_family(pde)

    def test_two_fields_unsupported(self):
        pde = make_pde("u_t + v*u_x - 0.1*u_xx", initial_condition="sin(pi*x)")
        with pytest.raises(UnsupportedPde):
            tr.classify_family(pde)


class TestGradients:
    def test_backprop_matches_finite_differences(self):
        pde = poisson_pde()
        plan = tr.classify_family(pde)
        # wider stencil keeps the 1/h^2 cancellation noise out of the FD probe
        cfg = quick_cfg(fd_step=0.02)
        net = tr.NetSpec(depth=1, width=4, input_dim=1)
        data = tr._sample_problem(pde, plan, cfg)
        params = tr.init_params(net, seed=3)
        _, grads = tr.loss_and_grad(params, data, net, cfg)
        rng = np.random.default_rng(11)
        for _ in range(20):
            li = int(rng.integers(0, len(params)))
            idx = tuple(int(rng.integers(0, s)) for s in params[li].shape)
            delta = 1e-6
            plus = [p.copy() for p in params]
            plus[li][idx] += delta
            minus = [p.copy() for p in params]
            minus[li][idx] -= delta
            lp, _ = tr.loss_and_grad(plus, data, net, cfg)
            lm, _ = tr.loss_and_grad(minus, data, net, cfg)
            fd = (lp - lm) / (2 * delta)
            analytic = grads[li][idx]
            rel = abs(fd - analytic) / max(1e-12, abs(fd), abs(analytic))
            assert rel < 1e-4

    @pytest.mark.parametrize(
        "residual,ic",
        [
            ("u_t - 0.4*u_xx", "sin(pi*x)"),
            ("u_t + u*u_x - 0.05*u_xx", "-sin(pi*x)"),
        ],
    )
    def test_gradcheck_time_dependent_families(self, residual, ic):
        pde = make_pde(residual, initial_condition=ic)
        plan = tr.classify_family(pde)
        cfg = quick_cfg(fd_step=0.02)
        net = tr.NetSpec(depth=1, width=4, input_dim=2)
        data = tr._sample_problem(pde, plan, cfg)
        params = tr.init_params(net, seed=5)
        _, grads = tr.loss_and_grad(params, data, net, cfg)
        rng = np.random.default_rng(4)
        for _ in range(10):
            li = int(rng.integers(0, len(params)))
            idx = tuple(int(rng.integers(0, s)) for s in params[li].shape)
            delta = 1e-6
            plus = [p.copy() for p in params]
            plus[li][idx] += delta
            minus = [p.copy() for p in params]
            minus[li][idx] -= delta
            lp, _ = tr.loss_and_grad(plus, data, net, cfg)
            lm, _ = tr.loss_and_grad(minus, data, net, cfg)
            fd = (lp - lm) / (2 * delta)
            analytic = grads[li][idx]
            assert abs(fd - analytic) / max(1e-12, abs(fd), abs(analytic)) < 1e-4


class TestTrain:
    def test_zero_network_on_homogeneous_poisson_starts_at_zero(self):
        pde = poisson_pde(forcing=None)
        net = tr.NetSpec(depth=2, width=8, input_dim=1)
        cfg = quick_cfg(steps=3)
        bundle = make_bundle(pde, net, cfg)
        result = tr.train(bundle, params0=tr.zero_output_params(net, seed=0))
        assert result.trace.records[0].loss == 0.0

    def test_deterministic_traces(self):
        pde = poisson_pde()
        net = tr.NetSpec(depth=2, width=8, input_dim=1)
        cfg = quick_cfg(steps=30)
        bundle = make_bundle(pde, net, cfg)
        t1 = tr.train(bundle).trace.to_jsonl()
        t2 = tr.train(bundle).trace.to_jsonl()
        assert t1 == t2

    def test_divergence_flagged(self):
        pde = make_pde("u_t + u*u_x - 0.01*u_xx", initial_condition="-sin(pi*x)")
        net = tr.NetSpec(depth=2, width=8, input_dim=2)
        cfg = quick_cfg(steps=200, learning_rate=1e3)
        bundle = make_bundle(pde, net, cfg)
        result = tr.train(bundle)
        assert result.trace.diverged
        assert result.trace.diverged_at is not None
        # truncated: every recorded step is finite
        assert all(math.isfinite(r.loss) for r in result.trace.records)

    def test_trace_wellformed(self):
        pde = poisson_pde()
        net = tr.NetSpec(depth=2, width=8, input_dim=1)
        cfg = quick_cfg(steps=40)
        result = tr.train(make_bundle(pde, net, cfg))
        steps = [r.t for r in result.trace.records]
        assert steps == list(range(1, 41))
        assert all(r.loss >= 0 and r.grad_norm >= 0 for r in result.trace.records)
        assert tr.validate_trace_text(result.trace.to_jsonl()) == []

    def test_poisson2d_trains(self):
        pde = make_pde(
            "u_xx + u_yy + 2*pi^2*sin(pi*x)*sin(pi*y)",
            boundary_conditions=[
                {"kind": "dirichlet", "axis": 1, "segment": "x", "value": "0"},
                {"kind": "dirichlet", "axis": 2, "segment": "y", "value": "0"},
            ],
            domain=Domain(dims=2, extents=((0.0, 1.0), (0.0, 1.0))),
        )
        net = tr.NetSpec(depth=2, width=16, input_dim=2)
        cfg = quick_cfg(steps=200, interior_points=64, boundary_points=32)
        result = tr.train(make_bundle(pde, net, cfg))
        assert result.family == "poisson2d"
        assert not result.trace.diverged
        assert result.trace.records[-1].loss < result.trace.records[0].loss

    def test_heat_reaches_low_loss(self):
        pde = make_pde(
            "u_t - 0.4*u_xx",
            boundary_conditions=[
                {"kind": "dirichlet", "axis": 1, "segment": "x=0", "value": "0"},
                {"kind": "dirichlet", "axis": 1, "segment": "x=1", "value": "0"},
            ],
            initial_condition="sin(pi*x)",
        )
        net = tr.NetSpec(depth=2, width=16, input_dim=2)
        cfg = quick_cfg(steps=300, interior_points=64, boundary_points=32)
        result = tr.train(make_bundle(pde, net, cfg))
        assert result.trace.records[-1].loss < result.trace.records[0].loss

    def test_poisson_reference_mse(self):
        pde = poisson_pde()
        net = tr.NetSpec(depth=3, width=32, input_dim=1)
        cfg = quick_cfg(
            steps=2000, interior_points=128, boundary_points=64, boundary_weight=100.0
        )
        result = tr.train(make_bundle(pde, net, cfg, reference=SIN_REFERENCE))
        assert result.trace.final_mse is not None
        assert result.trace.final_mse <= 1e-2


class TestEvaluateMse:
    def test_zero_error_against_self(self):
        pde = poisson_pde()
        plan = tr.classify_family(pde)
        cfg = quick_cfg()
        data = tr._sample_problem(pde, plan, cfg)
        mse = tr.evaluate_mse(lambda pts: np.sin(np.pi * pts[:, 0]),
                              lambda pts: np.sin(np.pi * pts[:, 0]), data)
        assert mse == 0.0

    def test_zero_network_vs_sine_quadrature(self):
        pde = poisson_pde()
        plan = tr.classify_family(pde)
        cfg = quick_cfg()
        data = tr._sample_problem(pde, plan, cfg)
        grid = np.linspace(0.0, 1.0, 256)
        expected = float(np.mean(np.sin(np.pi * grid) ** 2))  # direct quadrature oracle
        got = tr.evaluate_mse(
            lambda pts: np.zeros(len(pts)),
            ex.canonicalize(ex.parse("sin(pi*x)")),
            data,
            points_per_axis=256,
        )
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(0.5, abs=5e-3)

    def test_fresh_network_has_positive_residual_mse(self):
        pde = make_pde("u_t - 0.4*u_xx", initial_condition="sin(pi*x)")
        plan = tr.classify_family(pde)
        cfg = quick_cfg()
        net = tr.NetSpec(depth=2, width=8, input_dim=2)
        data = tr._sample_problem(pde, plan, cfg)
        params = tr.init_params(net, seed=1)
        assert tr.residual_mse(params, data, net, cfg) > 0.0
