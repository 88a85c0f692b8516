"""Named end-to-end runs that reproduce the headline numbers with default parameters.

Each recipe returns a JSON-ready dict. They compose library calls only; the
acceptance suite checks the same quantities through the library directly.
"""

from __future__ import annotations

import math
import random
import time
from fractions import Fraction
from typing import Callable

from cantorlab.covering import LambdaSpec, lambda_classes, lambda_oracle, lambda_sandwich
from cantorlab.dimensions import (
    block_interior_scales,
    compute_D,
    local_dimension,
    lebesgue_measure,
    mcmullen_dimensions,
    star_dimensions,
    symmetric_dimensions,
)
from cantorlab.errors import ConfigError
from cantorlab.geometry import CantorTree, bilip_check, check_dynamics, diff_quotients
from cantorlab.loglength import LogLength
from cantorlab.models import (
    BaseSequence,
    ConstantC,
    McMullenModel,
    StarModel,
    SymmetricModel,
    box_nonexist_sequence,
    fat_cantor_model,
)
from cantorlab.symbolic import Word, all_words


def default_star() -> StarModel:
    return StarModel(Fraction(1, 2), BaseSequence(128))


def random_dyadic_rhos(count: int = 20, seed: int = 0, bits: int = 24) -> list[Fraction]:
    """Dyadic rationals ``m / 2**bits`` drawn uniformly from ``(2**-bits, 1/2)``."""
    rng = random.Random(seed)
    return [Fraction(rng.randrange(2, 2 ** (bits - 1)), 2**bits) for _ in range(count)]


def bilip_certificate(threads: int = 1) -> dict:
    m = McMullenModel()
    return {"model": m.to_config(), "report": bilip_check(m, 12).to_json()}


def mcmullen_separation(threads: int = 1) -> dict:
    m = McMullenModel()
    rep = mcmullen_dimensions(m)
    fine = compute_D(math.log(m.M), m.beta, grid=1024)
    return {
        "report": rep.to_json(),
        "hdim_exact": f"1/{round(math.log2(m.M))}" if m.M & (m.M - 1) == 0 else None,
        "box_minus_hdim": repr(rep.ubdim.value - rep.hdim.value),
        "grid_1024": repr(fine.D),
        "grid_disagreement": repr(abs(fine.D - rep.ubdim.value)),
    }


def box_slope_trend(threads: int = 1) -> dict:
    m = McMullenModel()
    D = compute_D(math.log(m.M), m.beta).D
    rows = []
    for K in (500, 1000, 2000):
        r = lambda_classes(LambdaSpec(m, LogLength.pow2(-K)), workers=threads)
        rows.append({"K": K, "slope": repr(r.slope), "distance": repr(abs(r.slope - D)), "count_bits": r.count.bit_length()})
    return {"D": repr(D), "slopes": rows}


def cover_completeness(threads: int = 1) -> dict:
    m = McMullenModel()
    rows = []
    for rho in random_dyadic_rhos():
        spec = LambdaSpec(m, LogLength.of_rational(rho))
        o = lambda_oracle(spec)
        c = lambda_classes(spec, workers=threads)
        rows.append({"rho": str(rho), "oracle": str(o.count), "classes": str(c.count), "kraft_sum": str(o.completeness)})
    return {"rows": rows}


def five_dimensions(threads: int = 1) -> dict:
    star = default_star()
    rep = star_dimensions(star)
    sandwich = []
    for K, block in block_interior_scales(star):
        lo, mid, hi = lambda_sandwich(star, LogLength.pow2(-K), workers=threads)
        sandwich.append({"K": K, "block": block, "const_M_plus_1": str(lo), "star": str(mid), "const_M": str(hi)})
    return {
        "report": rep.to_json(),
        "gaps": [[a, b, repr(g)] for a, b, g in rep.gaps()],
        "sandwich": sandwich,
    }


def box_nonexistence(threads: int = 1) -> dict:
    m = box_nonexist_sequence()
    s = symmetric_dimensions(m, 100_000)
    return {
        "block_end_quotients": [[n, repr(s.q[n])] for n in s.tail],
        "report": s.report.to_json(),
        "bilip": bilip_check(m, 12).to_json(),
    }


def non_exact_measure(threads: int = 1) -> dict:
    m = box_nonexist_sequence()
    loc = local_dimension(m, "0", 100_000)
    return {
        "scales": loc.scales,
        "ratios": [repr(r) for r in loc.ratios],
        "liminf_est": repr(loc.liminf_est),
        "limsup_est": repr(loc.limsup_est),
    }


def fat_cantor(threads: int = 1) -> dict:
    m = fat_cantor_model()
    enc = lebesgue_measure(m, 64)
    tree = CantorTree(m)
    smallest_gap = min(
        (tree.node(w).gap_length.enclosure().lo for d in (1, 5, 10, 20) for w in _probe_words(d)),
    )
    return {
        "lebesgue": {"lower": str(enc.lower), "upper": str(enc.upper), "lower_float": repr(float(enc.lower)), "upper_float": repr(float(enc.upper)), "width": repr(float(enc.width))},
        "bilip": bilip_check(m, 12).to_json(),
        "smallest_probed_gap_lower_bound": repr(float(smallest_gap)),
    }


def _probe_words(depth: int, count: int = 64, seed: int = 0):
    if depth <= 6:
        yield from all_words(depth)
        return
    rng = random.Random(seed + depth)
    for _ in range(count):
        yield Word(tuple(rng.getrandbits(1) for _ in range(depth)))


def expanding_map(threads: int = 1) -> dict:
    return check_dynamics(McMullenModel()).to_json()


def non_differentiable(threads: int = 1) -> dict:
    osc = diff_quotients(box_nonexist_sequence(), Word.parse("0"), 10_000)
    const = diff_quotients(SymmetricModel(ConstantC(Fraction(1, 3))), Word.parse("0"), 10_000)
    windows = [(N, float(max(osc[N - 1 :]) - min(osc[N - 1 :]))) for N in (1000, 2000, 3000, 4000, 5000)]
    return {
        "tail_oscillation": [[N, repr(w)] for N, w in windows],
        "constant_model_values": sorted({str(q) for q in const}),
    }


RECIPES: dict[str, tuple[Callable[..., dict], str]] = {
    "bilip-certificate": (bilip_certificate, "ratio bounds of the base McMullen model at depth 12"),
    "mcmullen-separation": (mcmullen_separation, "Hausdorff versus box dimension, M = 128"),
    "box-slope-trend": (box_slope_trend, "covering slopes at K = 500, 1000, 2000"),
    "cover-completeness": (cover_completeness, "Kraft sums and oracle/class agreement at 20 dyadic scales"),
    "five-dimensions": (five_dimensions, "all five dimensions of the oscillating-base model plus the count sandwich"),
    "box-nonexistence": (box_nonexistence, "quotients at block ends for the 1/3, 1/4 block model"),
    "non-exact-measure": (non_exact_measure, "local dimension ratios at the 0-coding"),
    "fat-cantor": (fat_cantor, "Lebesgue enclosure and gap witnesses for c_n = 1/2 - 2^-(n+1)"),
    "expanding-map": (expanding_map, "coding identity, continuity and expansion of the expanding map"),
    "non-differentiable": (non_differentiable, "difference-quotient oscillation versus the constant model"),
}


def run_recipe(name: str, threads: int = 1) -> dict:
    if name not in RECIPES:
        raise ConfigError(f"unknown recipe {name!r}; choose from {sorted(RECIPES)}")
    t0 = time.perf_counter()
    out = RECIPES[name][0](threads=threads)
    out["recipe"] = name
    out["elapsed_seconds"] = round(time.perf_counter() - t0, 1)
    return out
