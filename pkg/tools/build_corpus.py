#!/usr/bin/env python3
"""Regenerates the bundled task corpus (8 families x 4 levels x 2 descriptions).

Level 1 is clean physics prose; level 2 adds irrelevant asides; level 3 adds
redundant rephrasings; level 4 breaks the text into disordered fragments.
Ground truths are fixed in the interchange serialization.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from pinnforge.candidates import validate_template  # noqa: E402
from pinnforge.pde import from_dict  # noqa: E402


def dirichlet(axes, value="0"):
    return [
        {"kind": "dirichlet", "axis": a, "segment": f"axis{a}", "value": value}
        for a in axes
    ]


FAMILIES = {
    "burgers": {
        "ground_truth": {
            "residual": "u_t + u*u_x - 0.01*u_xx",
            "bc": dirichlet([1]),
            "ic": "-sin(pi*x)",
            "domain": {"dims": 1, "extents": [[-1.0, 1.0]], "time_extent": [0.0, 1.0]},
        },
        "facts": [
            "A viscous fluid pulse travels along a one-dimensional channel.",
            "The pulse steepens as faster regions catch up with slower ones while a small viscosity of 0.01 smooths the front.",
            "The initial velocity profile is a downward sine wave across the channel, and the velocity is held at zero at both walls.",
        ],
        "asides": [
            "(the lab thermostat clicked twice during setup)",
            "(someone had labelled the rig 'old faithful')",
        ],
        "rephrase": [
            "In other words, the convection term is nonlinear, with the field advecting itself.",
            "Put differently, sharp gradients form but the diffusion keeps them finite.",
        ],
    },
    "wave_c": {
        "ground_truth": {
            "residual": "u_tt - 4*u_xx",
            "bc": dirichlet([1]),
            "ic": "sin(pi*x)",
            "domain": {"dims": 1, "extents": [[0.0, 1.0]], "time_extent": [0.0, 1.0]},
        },
        "facts": [
            "A taut string of unit length is pinned at both ends.",
            "It is released from a half-sine displacement and vibrates freely, with disturbances travelling at speed 2.",
            "The transverse displacement oscillates without damping.",
        ],
        "asides": [
            "(the tuning fork on the bench was unrelated)",
            "(a student hummed the same pitch, coincidentally)",
        ],
        "rephrase": [
            "That is, acceleration balances curvature scaled by the squared wave speed.",
            "Equivalently, the restoring force is proportional to the local bending of the string.",
        ],
    },
    "ks": {
        "ground_truth": {
            "residual": "u_t + u*u_x + u_xx + u_xxxx",
            "bc": [{"kind": "periodic", "axis": 1, "segment": "all", "value": None}],
            "ic": "cos(x/16)",
            "domain": {
                "dims": 1,
                "extents": [[0.0, 32.0]],
                "periodic_axes": [1],
                "time_extent": [0.0, 1.0],
            },
        },
        "facts": [
            "A thin flame front flickers inside a circular burner, so the profile wraps around periodically.",
            "The front is destabilized by second-order antidiffusion, restabilized by fourth-order smoothing, and transported by its own slope.",
            "It starts from a gentle cosine ripple across the ring.",
        ],
        "asides": [
            "(the camera battery died halfway through)",
            "(a draft from the door flickered the flame, ignore it)",
        ],
        "rephrase": [
            "Said another way, energy is injected at long wavelengths and dissipated at short ones.",
            "To restate: the dynamics are chaotic, with cellular structures merging and splitting.",
        ],
    },
    "heat_ms": {
        "ground_truth": {
            "residual": "u_t - 0.05*u_xx - 0.0005*u_yy",
            "bc": dirichlet([1, 2]),
            "ic": "sin(20*pi*x)*sin(pi*y)",
            "domain": {
                "dims": 2,
                "extents": [[0.0, 1.0], [0.0, 1.0]],
                "time_extent": [0.0, 5.0],
            },
        },
        "facts": [
            "Heat spreads across a unit square plate whose conductivity differs sharply between the two directions.",
            "Diffusion along the horizontal axis is one hundred times stronger than along the vertical axis, at 0.05 versus 0.0005.",
            "The initial temperature oscillates rapidly across the strong axis and gently across the weak one; all four edges are held at zero.",
        ],
        "asides": [
            "(the plate was borrowed from another experiment)",
            "(the infrared camera needed recalibration, twice)",
        ],
        "rephrase": [
            "In short, the solution develops two very different length scales at once.",
            "Restated: fine structure decays quickly one way and slowly the other.",
        ],
    },
    "poisson_ma": {
        "ground_truth": {
            "residual": "u_xx + u_yy + 2*pi^2*sin(pi*x)*sin(pi*y)",
            "bc": dirichlet([1, 2]),
            "ic": None,
            "domain": {"dims": 2, "extents": [[0.0, 1.0], [0.0, 1.0]]},
        },
        "facts": [
            "A stretched elastic membrane over a unit square is pressed by a smooth bump of load.",
            "The load is a product of sines peaking at the centre with amplitude two pi squared.",
            "The membrane is clamped to zero along the entire boundary and settles into a steady deflection.",
        ],
        "asides": [
            "(the square frame had a small paint chip)",
            "(morning coffee was decaf, for the record)",
        ],
        "rephrase": [
            "Equivalently, the steady state balances curvature against the applied forcing.",
            "That is, no time dependence remains once the membrane is at rest.",
        ],
    },
    "ns_c": {
        "ground_truth": {
            "residual": "u_t + u*u_x + v*u_y + p_x - 0.01*u_xx - 0.01*u_yy",
            "bc": dirichlet([1, 2]),
            "ic": "0",
            "domain": {
                "dims": 2,
                "extents": [[0.0, 1.0], [0.0, 1.0]],
                "time_extent": [0.0, 5.0],
            },
        },
        "facts": [
            "An incompressible fluid stirs inside a unit square cavity; this is the horizontal momentum balance.",
            "The horizontal velocity is carried by both velocity components, pushed by the pressure gradient, and diffused by a viscosity of 0.01.",
            "The fluid starts at rest with no-slip walls.",
        ],
        "asides": [
            "(the pump hummed at an annoying frequency)",
            "(safety goggles were mandatory that day)",
        ],
        "rephrase": [
            "In other words, inertia, pressure, and viscous stresses compete in one equation.",
            "Restated: the convective terms couple the two velocity components.",
        ],
    },
    "poisson_cg": {
        "ground_truth": {
            "residual": "u_xx + u_yy + u_zz + 3*pi^2*sin(pi*x)*sin(pi*y)*sin(pi*z)",
            "bc": dirichlet([1, 2, 3]),
            "ic": None,
            "domain": {
                "dims": 3,
                "extents": [[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]],
            },
        },
        "facts": [
            "A steady potential field fills a unit cube under a smooth interior source.",
            "The source is a triple product of sines with amplitude three pi squared, vanishing on every face.",
            "The potential is fixed at zero on the whole surface of the cube.",
        ],
        "asides": [
            "(the cube model was 3D printed last spring)",
            "(a fire drill interrupted the afternoon session)",
        ],
        "rephrase": [
            "Equivalently, the Laplacian of the field balances the imposed source everywhere inside.",
            "That is, the problem is fully three-dimensional but stationary.",
        ],
    },
    "heat_nd": {
        "ground_truth": {
            "residual": "u_t - u_xx - u_yy - u_zz - u_ww",
            "bc": dirichlet([1, 2, 3, 4]),
            "ic": "sin(pi*x)*sin(pi*y)*sin(pi*z)*sin(pi*w)",
            "domain": {
                "dims": 4,
                "extents": [[0.0, 1.0], [0.0, 1.0], [0.0, 1.0], [0.0, 1.0]],
                "time_extent": [0.0, 1.0],
            },
        },
        "facts": [
            "Temperature diffuses through a four-dimensional unit hypercube with unit conductivity in every direction.",
            "The initial state is a product of sines over all four coordinates, and every face of the hypercube is held at zero.",
            "The profile decays smoothly toward equilibrium.",
        ],
        "asides": [
            "(nobody has actually seen a 4D plate, admittedly)",
            "(the whiteboard sketch used two axes and much imagination)",
        ],
        "rephrase": [
            "In other words, the same diffusion acts independently along each coordinate.",
            "Restated: the solution factorizes across dimensions as it decays.",
        ],
    },
}


def level_text(family: dict, level: int, variant: int) -> str:
    facts = list(family["facts"])
    aside = family["asides"][variant % 2]
    rephrase = family["rephrase"]
    if variant == 1:
        facts = [facts[0]] + facts[:0:-1]  # second variant reorders the middle
    if level == 1:
        return " ".join(facts)
    if level == 2:
        return f"{facts[0]} {aside} {' '.join(facts[1:])} {family['asides'][(variant + 1) % 2]}"
    if level == 3:
        woven = [facts[0], aside, facts[1], rephrase[0], facts[2], rephrase[1]]
        return " ".join(woven)
    fragments = [
        facts[2].rstrip("."),
        rephrase[1].rstrip("."),
        facts[0].rstrip("."),
        aside,
        rephrase[0].rstrip("."),
        facts[1].rstrip("."),
    ]
    if variant == 1:
        fragments = fragments[::-1]
    return "; ".join(fragments) + "."


def main():
    out = Path(__file__).resolve().parents[1] / "src" / "pinnforge" / "data" / "task2pde_sample.jsonl"
    lines = []
    for family_name, family in FAMILIES.items():
        pde = from_dict(family["ground_truth"])
        problem = validate_template(pde)
        if problem:
            raise SystemExit(f"{family_name}: ground truth fails validation: {problem}")
        for level in (1, 2, 3, 4):
            for variant in (0, 1):
                sample = {
                    "id": f"{family_name}-L{level}-{variant}",
                    "pde_family": family_name,
                    "level": level,
                    "description": level_text(family, level, variant),
                    "ground_truth": family["ground_truth"],
                }
                lines.append(json.dumps(sample, sort_keys=True))
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} samples to {out}")


if __name__ == "__main__":
    main()
