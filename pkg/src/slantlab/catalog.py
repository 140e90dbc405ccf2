"""Built-in charts.

Each entry builds an :class:`ImmersionChart` (or a warped chart) from a few
keyword parameters. ``tags`` record what the chart is used for in the check
battery, e.g. ``curved`` charts carry non-zero second fundamental form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict

from .ambient import ambient_variables, rotated_basis, standard_basis
from .exprmap import parse
from .geometry import ImmersionChart

DEFAULT_RESOLUTION = {1: 27, 2: 6, 3: 3, 4: 3, 5: 2, 6: 2}


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    builder: Callable
    description: str
    tags: tuple = ()
    defaults: Dict = field(default_factory=dict)

    def build(self, **params):
        kw = dict(self.defaults)
        kw.update(params)
        return self.builder(**kw)


def _xs(n):
    return [f"x{i + 1}" for i in range(n)]


def qmul(a, b):
    """Quaternion product of two 4-tuples of expression strings."""
    a0, a1, a2, a3 = (f"({s})" for s in a)
    b0, b1, b2, b3 = (f"({s})" for s in b)
    return (
        f"{a0}*{b0} - {a1}*{b1} - {a2}*{b2} - {a3}*{b3}",
        f"{a0}*{b1} + {a1}*{b0} + {a2}*{b3} - {a3}*{b2}",
        f"{a0}*{b2} - {a1}*{b3} + {a2}*{b0} + {a3}*{b1}",
        f"{a0}*{b3} + {a1}*{b2} - {a2}*{b1} + {a3}*{b0}",
    )


def _num(v):
    return repr(float(v))


def example_7_5():
    comps = ["0", "0", "x3", "x1", "0", "x4", "x2", "0"]
    return ImmersionChart.from_strings(_xs(4), comps, [(0.0, 1.0)] * 4, standard_basis(2),
                                       name="example_7_5")


def example_7_6(f="y3"):
    """Linear 6-fold in R^8 with the rotated basis driven by ``f`` (over y1..y8)."""
    rot = parse(str(f), ambient_variables(8))
    basis = rotated_basis(standard_basis(2), rot)
    comps = ["0", "0", "x4", "x1", "x5", "x2", "x6", "x3"]
    return ImmersionChart.from_strings(_xs(6), comps, [(0.2, 1.2)] * 6, basis, name="example_7_6")


def slant_plane(alpha=math.pi / 3):
    ca, sa = _num(math.cos(alpha)), _num(math.sin(alpha))
    comps = ["x1", f"x2*{ca}", f"x2*{sa}", "0"]
    return ImmersionChart.from_strings(_xs(2), comps, [(0.0, 1.0)] * 2, standard_basis(1),
                                       name="slant_plane")


def circle(r=1.0):
    r = _num(r)
    comps = [f"{r}*cos(x1)", f"{r}*sin(x1)", "0", "0"]
    return ImmersionChart.from_strings(_xs(1), comps, [(0.0, 1.0)], standard_basis(1), name="circle")


def sphere_patch():
    comps = ["cos(x1)*cos(x2)", "cos(x1)*sin(x2)", "sin(x1)", "0"]
    return ImmersionChart.from_strings(_xs(2), comps, [(0.2, 1.2)] * 2, standard_basis(1),
                                       name="sphere_patch")


def cylinder():
    comps = ["cos(x1)", "sin(x1)", "x2", "0"]
    return ImmersionChart.from_strings(_xs(2), comps, [(0.0, 1.0)] * 2, standard_basis(1),
                                       name="cylinder")


def sphere3():
    """Round 3-sphere patch in R^4 in Hopf coordinates."""
    comps = ["cos(x1)*cos(x2)", "cos(x1)*sin(x2)", "sin(x1)*cos(x3)", "sin(x1)*sin(x3)"]
    return ImmersionChart.from_strings(_xs(3), comps, [(0.3, 1.2), (0.0, 1.0), (0.0, 1.0)],
                                       standard_basis(1), name="sphere3")


def mobius_graph():
    """Graph of the conformal map x -> conj(x)/|x|^2 on a quaternion box."""
    q = "(x1^2 + x2^2 + x3^2 + x4^2)"
    comps = ["x1", "x2", "x3", "x4", f"x1/{q}", f"-x2/{q}", f"-x3/{q}", f"-x4/{q}"]
    dom = [(0.5, 1.5), (0.2, 1.0), (0.1, 0.9), (-0.5, 0.5)]
    return ImmersionChart.from_strings(_xs(4), comps, dom, standard_basis(2), name="mobius_graph")


def semi_slant_product():
    """Quaternionic 4-plane times a round 2-sphere patch."""
    comps = ["x1", "x2", "x3", "x4", "cos(x5)*cos(x6)", "cos(x5)*sin(x6)", "sin(x5)", "0"]
    dom = [(0.0, 1.0)] * 4 + [(0.2, 1.2)] * 2
    return ImmersionChart.from_strings(_xs(6), comps, dom, standard_basis(2),
                                       name="semi_slant_product")


def coupled_semi_slant():
    """(q, s) -> (q, q * sigma(s)) with sigma a round 2-sphere patch in H."""
    q = ("x1", "x2", "x3", "x4")
    sigma = ("cos(x5)*cos(x6)", "cos(x5)*sin(x6)", "sin(x5)", "0")
    comps = list(q) + list(qmul(q, sigma))
    dom = [(0.5, 1.5), (0.2, 1.0), (0.1, 0.9), (-0.5, 0.5), (0.2, 1.2), (0.2, 1.2)]
    return ImmersionChart.from_strings(_xs(6), comps, dom, standard_basis(2),
                                       name="coupled_semi_slant")


def _warped(name):
    def build(**kw):
        from . import warped

        return getattr(warped, name)(**kw)

    return build


CATALOG: Dict[str, CatalogEntry] = {}


def _register(name, builder, description, tags=(), **defaults):
    CATALOG[name] = CatalogEntry(name, builder, description, tuple(tags), defaults)


_register("example_7_5", example_7_5, "linear 4-fold in R^8, per-structure splits, all angles pi/2",
          ["linear", "semi-invariant"])
_register("example_7_6", example_7_6, "linear 6-fold in R^8 under a rotated basis",
          ["linear", "semi-slant"], f="y3")
_register("slant_plane", slant_plane, "2-plane in R^4 at angle alpha", ["linear", "slant"],
          alpha=math.pi / 3)
_register("circle", circle, "circle of radius r in R^4", ["curved", "curve"], r=1.0)
_register("sphere_patch", sphere_patch, "round 2-sphere patch in R^4",
          ["curved", "slant", "umbilic", "proper"])
_register("cylinder", cylinder, "circle times line in R^4", ["curved", "slant"])
_register("sphere3", sphere3, "round 3-sphere patch in R^4", ["curved", "umbilic", "semi-invariant"])
_register("mobius_graph", mobius_graph, "graph of an inversion in R^8",
          ["curved", "slant", "proper"])
_register("semi_slant_product", semi_slant_product, "quaternionic plane times sphere patch",
          ["curved", "semi-slant"])
_register("coupled_semi_slant", coupled_semi_slant, "quaternion-twisted sphere family",
          ["curved", "semi-slant"])
_register("warped_exp", _warped("warped_exp"), "surface of revolution with radius exp(b)",
          ["warped"])
_register("warped_revolution", _warped("warped_revolution"),
          "rotation of a curved 2-dimensional base", ["warped"])
_register("warped_trivial", _warped("warped_trivial"),
          "invariant 4-plane times an equal-angle plane, constant warp", ["warped", "semi-slant"])
_register("candidate_trivial", _warped("candidate_trivial"),
          "slant base times invariant fiber with constant warp", ["candidate"])
_register("candidate_scaled", _warped("candidate_scaled"),
          "slant base times a scaled invariant 4-plane", ["candidate"])
_register("candidate_spherical", _warped("candidate_spherical"),
          "slant base times a warped 3-sphere", ["candidate"])


def names():
    return sorted(CATALOG)


def build(name, **params):
    if name not in CATALOG:
        raise KeyError(f"unknown catalog chart {name!r}")
    return CATALOG[name].build(**params)


def underlying_chart(obj):
    """The immersion chart of a catalog object (warped charts carry one)."""
    return getattr(obj, "chart", obj)


def default_resolution(chart):
    return DEFAULT_RESOLUTION.get(chart.n, 2)
