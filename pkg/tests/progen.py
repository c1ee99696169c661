"""Random small probabilistic integer programs for property tests."""

from __future__ import annotations

import random
from fractions import Fraction

from pipbound.parser import parse_program
from pipbound.pip import PIP

PROBS = ([Fraction(1)], [Fraction(1, 2)] * 2, [Fraction(1, 4), Fraction(3, 4)], [Fraction(1, 3)] * 3)
DISTS = ("BERN(1/2)", "UNIF(-1, 2)", "GEO(1/2)", "UNIF(0, 3)")


def _linear(rng: random.Random, names, coef: int) -> str:
    parts = []
    for v in names:
        c = rng.randint(-coef, coef)
        if c:
            parts.append(f"{c}*{v}")
    parts.append(str(rng.randint(-coef, coef)))
    return " + ".join(parts).replace("+ -", "- ")


def random_text(rng: random.Random, max_locs: int = 4, max_gts: int = 5, coef: int = 3,
                dists: bool = True, temps: bool = True, prunable: bool = False) -> str:
    """Program text; ``prunable`` adds infeasible guards, unreachable sources and constant updates."""
    pv = ("x", "y")
    nloc = rng.randint(2, max_locs)
    locs = [f"l{i}" for i in range(nloc)]
    lines = ["vars x y", "start l0"]
    for gi in range(rng.randint(1, max_gts)):
        src = "l0" if gi == 0 else rng.choice(locs)
        use_temp = temps and rng.random() < 0.15
        names = pv + ("u",) if use_temp else pv
        guard = [f"{_linear(rng, pv, coef)} >= 0" for _ in range(rng.randint(0, 2))]
        if prunable and rng.random() < 0.25:
            guard += ["x - y >= 1", "y - x >= 0"]
        if use_temp:
            guard += ["u >= 1", f"u <= {rng.randint(1, coef)}"]
        members = []
        for prob in rng.choice(PROBS):
            target = rng.choice(locs[1:])
            ups = []
            for x in pv:
                r = rng.random()
                if prunable and r < 0.2:
                    ups.append(f"{x} = {rng.randint(-coef, coef)}")
                elif dists and r < 0.12:
                    ups.append(f"{x} = {rng.choice(DISTS)}")
                elif r < 0.6:
                    ups.append(f"{x} = {_linear(rng, names, coef)}")
            body = f"{target}({', '.join(ups)})" if ups else target
            members.append(f"{prob}: {body}")
        line = f"g{gi}: {src} -> " + " (+) ".join(members)
        if guard:
            line += " :|: " + " && ".join(guard)
        lines.append(line)
    if prunable and rng.random() < 0.5:
        lines.append(f"g{len(lines) - 2}: l9 -> {rng.choice(locs[1:])}(x = x - 1)")
    return "\n".join(lines) + "\n"


def random_pip(seed: int, **kw) -> PIP:
    return parse_program(random_text(random.Random(seed), **kw))
