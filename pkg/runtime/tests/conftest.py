import pytest

from pinnforge import expr as ex
from pinnforge.codegen import MODULE_KINDS, assemble, generate_module
from pinnforge.pde import from_dict

HEAT_BLOCK = {
    "residual": "u_t - 0.4*u_xx",
    "bc": [
        {"kind": "dirichlet", "axis": 1, "segment": "x=0", "value": "0"},
        {"kind": "dirichlet", "axis": 1, "segment": "x=1", "value": "0"},
    ],
    "ic": "sin(pi*x)",
    "domain": {"dims": 1, "extents": [[0.0, 1.0]], "time_extent": [0.0, 1.0]},
}

POISSON_BLOCK = {
    "residual": "u_xx + pi^2*sin(pi*x)",
    "bc": [
        {"kind": "dirichlet", "axis": 1, "segment": "x=0", "value": "0"},
        {"kind": "dirichlet", "axis": 1, "segment": "x=1", "value": "0"},
    ],
    "ic": None,
    "domain": {"dims": 1, "extents": [[0.0, 1.0]]},
}

SIN_REFERENCE = "(sin (* (const pi) (const x)))"

FAST_CFG = {
    "steps": 50,
    "learning_rate": 2e-3,
    "interior_points": 64,
    "boundary_points": 32,
    "boundary_weight": 10.0,
    "seed": 0,
    "eval_points": 64,
    "divergence_threshold": 1e7,
}


def build_bundle(block, tmp_path, cfg=None, net=None, reference=None, name="bundle"):
    pde = from_dict(block)
    cfg = dict(cfg or FAST_CFG)
    net = dict(net or {"depth": 2, "width": 16, "activation": "tanh"})
    context = {
        "residual": ex.to_prefix(pde.residual),
        "architecture": "MLP",
        "net": net,
        "train_cfg": cfg,
        "domain": pde.domain.to_dict(),
        "reference_solution": reference,
    }
    modules = [generate_module(k, context, target="external-runtime") for k in MODULE_KINDS]
    bundle = assemble(
        modules, pde, "MLP", net, cfg, target="external-runtime", reference_solution=reference
    )
    return bundle.write(tmp_path / name)


@pytest.fixture()
def heat_bundle(tmp_path):
    return build_bundle(HEAT_BLOCK, tmp_path)


@pytest.fixture()
def poisson_bundle(tmp_path):
    cfg = dict(FAST_CFG, steps=2000, interior_points=128, boundary_points=64,
               boundary_weight=100.0, eval_points=256)
    return build_bundle(
        POISSON_BLOCK, tmp_path, cfg=cfg,
        net={"depth": 3, "width": 32, "activation": "tanh"},
        reference=SIN_REFERENCE, name="poisson_bundle",
    )
