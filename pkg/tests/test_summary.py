import pytest

from pinnforge.pde import Domain, make_pde
from pinnforge.summary import (
    BaselineSimilarityProvider,
    TAG_VOCABULARY,
    sem_score,
    summarize,
)


def heat_1d():
    return make_pde(
        "u_t - 0.4*u_xx",
        boundary_conditions=[
            {"kind": "dirichlet", "axis": 1, "segment": "x=0", "value": "0"},
            {"kind": "dirichlet", "axis": 1, "segment": "x=1", "value": "0"},
        ],
        initial_condition="sin(pi*x)",
    )


def heat_2d():
    return make_pde(
        "u_t - 0.4*u_xx - 0.4*u_yy",
        domain=Domain(dims=2, extents=((0.0, 1.0), (0.0, 1.0))),
        initial_condition="sin(pi*x)*sin(pi*y)",
    )


def burgers():
    return make_pde("u_t + u*u_x - 0.01*u_xx", initial_condition="-sin(pi*x)")


class TestSummarize:
    def test_heat_tags(self):
        s = summarize(heat_1d())
        assert s.tags == frozenset({"diffusion"})
        assert s.linearity is True
        assert s.order == 2

    def test_burgers_tags(self):
        s = summarize(burgers())
        assert s.tags == frozenset({"diffusion", "advection-nonlinear"})
        assert s.linearity is False

    def test_wave_not_tagged_diffusion(self):
        s = summarize(make_pde("u_tt - 4*u_xx", initial_condition="sin(pi*x)"))
        assert "wave" in s.tags and "diffusion" not in s.tags

    def test_poisson_steady_forcing(self):
        s = summarize(make_pde("u_xx + u_yy + sin(pi*x)*sin(pi*y)"))
        assert {"diffusion", "steady", "forcing"} <= s.tags

    def test_deterministic(self):
        assert summarize(heat_1d()) == summarize(heat_1d())

    def test_vocabulary_closed(self):
        for pde in (heat_1d(), heat_2d(), burgers()):
            assert summarize(pde).tags <= set(TAG_VOCABULARY)

    def test_render_pure_function_of_fields(self):
        a, b = summarize(heat_1d()), summarize(heat_1d())
        assert a.render() == b.render()

    def test_renaming_robustness(self):
        a = summarize(make_pde("u_t - 0.4*u_xx", initial_condition="sin(pi*x)"))
        b = summarize(make_pde("v_t - 0.4*v_xx", initial_condition="sin(pi*x)"))
        assert a == b
        assert sem_score(a, b) == 1.0


class TestSemScore:
    def test_identical_summaries(self):
        s = summarize(heat_1d())
        assert sem_score(s, s) == 1.0

    def test_fully_disjoint(self):
        linear_steady = summarize(make_pde("u_xx + 1"))  # order 2, linear, 1D
        nonlinear_advect = summarize(
            make_pde(
                "u_t + u*u_x + u*u_y",  # order 1, nonlinear, 2D
                domain=Domain(dims=2, extents=((0.0, 1.0), (0.0, 1.0))),
                initial_condition="sin(pi*x)",
            )
        )
        assert sem_score(linear_steady, nonlinear_advect) == 0.0

    def test_heat_1d_vs_2d_hand_value(self):
        s = sem_score(summarize(heat_1d()), summarize(heat_2d()))
        assert s == pytest.approx(0.9)  # 0.5*1 + 0.2 + 0.2 + 0

    def test_symmetric(self):
        s1, s2 = summarize(heat_1d()), summarize(burgers())
        assert sem_score(s1, s2) == sem_score(s2, s1)

    def test_range(self):
        s1, s2 = summarize(heat_1d()), summarize(burgers())
        assert 0.0 <= sem_score(s1, s2) <= 1.0

    def test_custom_weights(self):
        provider = BaselineSimilarityProvider({"tags": 1.0, "linearity": 0, "order": 0, "dims": 0})
        assert provider.score(summarize(heat_1d()), summarize(heat_2d())) == 1.0
