"""Builders for mock-provider fixture sets used by pipeline and CLI tests."""

import json

from pinnforge import expr as ex
from pinnforge.candidates import build_formulate_prompt
from pinnforge.codegen import build_module_prompt
from pinnforge.providers import DEFAULT_PARAMS, MockProvider, fixture_key

HEAT_DESCRIPTION = (
    "A thin rod of unit length is held at zero temperature at both ends. "
    "Its initial temperature follows a half sine bump. Heat diffuses along "
    "the rod with diffusivity 0.4 until the profile decays."
)

HEAT_BLOCK = {
    "residual": "u_t - 0.4*u_xx",
    "bc": [
        {"kind": "dirichlet", "axis": 1, "segment": "x=0", "value": "0"},
        {"kind": "dirichlet", "axis": 1, "segment": "x=1", "value": "0"},
    ],
    "ic": "sin(pi*x)",
    "domain": {"dims": 1, "extents": [[0.0, 1.0]], "time_extent": [0.0, 1.0]},
}


def heat_completion(block=None, note="one-dimensional heat conduction in a rod"):
    block = block or HEAT_BLOCK
    return (
        "The description is a diffusion process with fixed-temperature ends.\n"
        f"Normalized: {note}\n"
        "```json\n" + json.dumps(block) + "\n```\n"
    )


def formulate_fixtures(description, k, completion_text):
    """Fixture table answering every formulate sample with the same completion."""
    table = {}
    for i in range(k):
        prompt = build_formulate_prompt(description, i, k)
        table[fixture_key(prompt, {**DEFAULT_PARAMS, "temperature": 0.7})] = completion_text
    return table


def loss_module_source(residual_prefix):
    return (
        "# provides: loss/2\n"
        "# requires: forward/2\n"
        "# residual-begin\n"
        f"# {residual_prefix}\n"
        "# residual-end\n"
    )


def loss_fixtures(context, broken_prefix, fixed_prefix=None, directive_reason=None):
    """Initial generation returns the broken loss; regeneration the fixed one.

    With fixed_prefix=None the regeneration stays broken (persistent failure).
    """
    table = {}
    first_prompt = build_module_prompt("pde_loss", context)
    table[fixture_key(first_prompt, {**DEFAULT_PARAMS, "temperature": 0.2})] = (
        loss_module_source(broken_prefix)
    )
    regen_text = loss_module_source(fixed_prefix if fixed_prefix else broken_prefix)
    regen_prompt = build_module_prompt("pde_loss", context, directive_reason)
    table[fixture_key(regen_prompt, {**DEFAULT_PARAMS, "temperature": 0.2})] = regen_text
    return table


def mock_with(*tables):
    merged = {}
    for t in tables:
        merged.update(t)
    return MockProvider(table=merged)
