"""Mamdani fuzzy inference with trapezoidal membership functions.

The engine is generic and config-driven: linguistic variables on the
fixed universe [0, 100], AND-joined rules evaluated with max-min
inference (AND = min, consequent clipping, max aggregation), and
center-of-gravity defuzzification by midpoint-rule integration.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "FisConfigError",
    "Trapezoid",
    "LinguisticVariable",
    "FuzzyRule",
    "FuzzySystem",
    "load_fis_config",
    "default_system",
    "UNIVERSE_LOW",
    "UNIVERSE_HIGH",
]

UNIVERSE_LOW = 0.0
UNIVERSE_HIGH = 100.0


class FisConfigError(ValueError):
    """Raised when a fuzzy-system config is malformed or inconsistent."""


@dataclass(frozen=True)
class Trapezoid:
    """Trapezoidal membership function with feet a, d and shoulders b, c.

    Degenerate shapes are allowed: b = c gives a triangle, a = b or
    c = d a crisp vertical edge (membership 1 at the shoulder itself).
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        if not (self.a <= self.b <= self.c <= self.d):
            raise ValueError(
                f"trapezoid not monotone: need a <= b <= c <= d, got "
                f"({self.a}, {self.b}, {self.c}, {self.d})"
            )
        if self.a < UNIVERSE_LOW or self.d > UNIVERSE_HIGH:
            raise ValueError(
                f"trapezoid ({self.a}, {self.b}, {self.c}, {self.d}) leaves the "
                f"universe [{UNIVERSE_LOW:g}, {UNIVERSE_HIGH:g}]"
            )

    def membership(self, x: float) -> float:
        """Degree of membership of ``x``, clamped to the universe first."""
        x = min(max(x, UNIVERSE_LOW), UNIVERSE_HIGH)
        if x < self.a or x > self.d:
            return 0.0
        if self.b <= x <= self.c:
            return 1.0
        if x < self.b:
            return (x - self.a) / (self.b - self.a)
        return (self.d - x) / (self.d - self.c)

    def membership_grid(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`membership` over a grid already inside the universe."""
        out = np.zeros_like(xs)
        inside = (xs >= self.a) & (xs <= self.d)
        out[inside & (xs >= self.b) & (xs <= self.c)] = 1.0
        if self.b > self.a:
            rising = inside & (xs < self.b)
            out[rising] = (xs[rising] - self.a) / (self.b - self.a)
        if self.d > self.c:
            falling = inside & (xs > self.c)
            out[falling] = (self.d - xs[falling]) / (self.d - self.c)
        return out


@dataclass(frozen=True)
class LinguisticVariable:
    """Named variable with one trapezoidal term per linguistic value."""

    name: str
    terms: dict[str, Trapezoid]

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("variable name must be non-empty")
        if not self.terms:
            raise ValueError(f"variable {self.name!r} declares no terms")


@dataclass(frozen=True)
class FuzzyRule:
    """AND-joined antecedents and a single consequent, all (variable, term) pairs."""

    antecedents: tuple[tuple[str, str], ...]
    consequent: tuple[str, str]

    def __post_init__(self) -> None:
        if not self.antecedents:
            raise ValueError("rule needs at least one antecedent")

    def describe(self) -> str:
        clauses = " AND ".join(f"{var} IS {term}" for var, term in self.antecedents)
        return f"IF {clauses} THEN {self.consequent[0]} IS {self.consequent[1]}"


class FuzzySystem:
    """Immutable Mamdani system: input variables, one output variable, a rule base.

    ``cog_step`` is the target integration step for the centroid; the
    effective step is 100 / round(100 / cog_step) so the midpoint grid
    tiles the universe exactly.
    """

    def __init__(
        self,
        inputs: Sequence[LinguisticVariable],
        output: LinguisticVariable,
        rules: Sequence[FuzzyRule],
        cog_step: float = 0.1,
    ):
        if cog_step <= 0:
            raise ValueError("cog_step must be > 0")
        if not rules:
            raise ValueError("rule base is empty")
        self.inputs = tuple(inputs)
        self.output = output
        self.rules = tuple(rules)
        self.cog_step = float(cog_step)
        self._inputs_by_name = {var.name: var for var in self.inputs}
        if len(self._inputs_by_name) != len(self.inputs):
            raise ValueError("input variable names must be unique")
        if output.name in self._inputs_by_name:
            raise ValueError(f"output variable {output.name!r} also declared as input")
        for rule in self.rules:
            for var_name, term_name in rule.antecedents:
                var = self._inputs_by_name.get(var_name)
                if var is None:
                    raise ValueError(
                        f"rule [{rule.describe()}] references unknown input {var_name!r}"
                    )
                if term_name not in var.terms:
                    raise ValueError(
                        f"rule [{rule.describe()}] references unknown term "
                        f"{var_name}.{term_name}"
                    )
            out_name, out_term = rule.consequent
            if out_name != output.name:
                raise ValueError(
                    f"rule [{rule.describe()}] concludes on {out_name!r}, "
                    f"expected output {output.name!r}"
                )
            if out_term not in output.terms:
                raise ValueError(
                    f"rule [{rule.describe()}] references unknown term "
                    f"{out_name}.{out_term}"
                )

        span = UNIVERSE_HIGH - UNIVERSE_LOW
        n_cells = max(1, int(round(span / self.cog_step)))
        step = span / n_cells
        self._grid = UNIVERSE_LOW + (np.arange(n_cells) + 0.5) * step
        # Rules sharing a consequent shape aggregate as one clipped row:
        # max(min(a1, T), min(a2, T)) == min(max(a1, a2), T).
        shapes: list[Trapezoid] = []
        self._rule_group: list[int] = []
        for rule in self.rules:
            shape = output.terms[rule.consequent[1]]
            if shape not in shapes:
                shapes.append(shape)
            self._rule_group.append(shapes.index(shape))
        self._group_grids = [shape.membership_grid(self._grid) for shape in shapes]
        # Antecedents resolved to (input position, trapezoid) for the 3-input adapter.
        input_position = {var.name: k for k, var in enumerate(self.inputs)}
        self._rule_clauses = [
            tuple(
                (input_position[var_name], self._inputs_by_name[var_name].terms[term_name])
                for var_name, term_name in rule.antecedents
            )
            for rule in self.rules
        ]

    def rule_activation(self, rule: FuzzyRule, values: Mapping[str, float]) -> float:
        """Min over the rule's antecedent memberships at the given crisp inputs."""
        activation = 1.0
        for var_name, term_name in rule.antecedents:
            if var_name not in values:
                raise ValueError(f"no crisp value supplied for input {var_name!r}")
            degree = self._inputs_by_name[var_name].terms[term_name].membership(values[var_name])
            if degree < activation:
                activation = degree
        return activation

    def defuzzify(self, activations: Sequence[float]) -> float | None:
        """Center of gravity of the clipped-and-aggregated output function.

        Returns None ("undefined") when every activation is zero, i.e.
        the aggregate has no area.
        """
        if len(activations) != len(self.rules):
            raise ValueError(f"expected {len(self.rules)} activations, got {len(activations)}")
        group_acts = [0.0] * len(self._group_grids)
        for rule_index, activation in enumerate(activations):
            group = self._rule_group[rule_index]
            if activation > group_acts[group]:
                group_acts[group] = activation
        aggregate: np.ndarray | None = None
        for group, activation in enumerate(group_acts):
            if activation <= 0.0:
                continue
            clipped = np.minimum(activation, self._group_grids[group])
            if aggregate is None:
                aggregate = clipped
            else:
                np.maximum(aggregate, clipped, out=aggregate)
        if aggregate is None:
            return None
        area = aggregate.sum()
        if area == 0.0:
            return None
        return float(np.dot(self._grid, aggregate) / area)

    def evaluate(self, values: Mapping[str, float]) -> float | None:
        """Fuzzify, fire all rules, aggregate, defuzzify.  None when nothing fires."""
        return self.defuzzify([self.rule_activation(rule, values) for rule in self.rules])

    def infer(
        self, quality: float, intensification: float, diversification: float
    ) -> float | None:
        """Three-input adapter: crisp measures are fed to the declared inputs in order."""
        if len(self.inputs) != 3:
            raise ValueError(
                f"infer() needs a system with exactly 3 inputs, this one has {len(self.inputs)}"
            )
        values = (quality, intensification, diversification)
        activations = [
            min(shape.membership(values[position]) for position, shape in clauses)
            for clauses in self._rule_clauses
        ]
        return self.defuzzify(activations)


def _parse_trapezoid(rhs: str, lineno: int) -> Trapezoid:
    parts = rhs.split()
    if len(parts) != 4:
        raise FisConfigError(
            f"line {lineno}: a term needs exactly 4 numbers (a b c d), got {len(parts)}"
        )
    try:
        numbers = [float(p) for p in parts]
    except ValueError:
        raise FisConfigError(f"line {lineno}: non-numeric trapezoid value in {rhs!r}") from None
    try:
        return Trapezoid(*numbers)
    except ValueError as exc:
        raise FisConfigError(f"line {lineno}: {exc}") from None


def _parse_rule(line: str, lineno: int) -> FuzzyRule:
    tokens = line.split()
    upper = [t.upper() for t in tokens]
    if upper[0] != "IF" or "THEN" not in upper:
        raise FisConfigError(f"line {lineno}: rule must look like 'IF var IS term ... THEN ...'")
    then_at = upper.index("THEN")

    def read_clauses(parts: list[str], what: str) -> list[tuple[str, str]]:
        clauses = []
        i = 0
        while i < len(parts):
            if i + 2 >= len(parts) or parts[i + 1].upper() != "IS":
                raise FisConfigError(f"line {lineno}: malformed {what} clause in rule")
            clauses.append((parts[i], parts[i + 2]))
            i += 3
            if i < len(parts):
                if parts[i].upper() != "AND":
                    raise FisConfigError(f"line {lineno}: expected AND between {what} clauses")
                i += 1
        return clauses

    antecedents = read_clauses(tokens[1:then_at], "antecedent")
    consequents = read_clauses(tokens[then_at + 1 :], "consequent")
    if not antecedents:
        raise FisConfigError(f"line {lineno}: rule has no antecedents")
    if len(consequents) != 1:
        raise FisConfigError(f"line {lineno}: rule needs exactly one consequent")
    return FuzzyRule(antecedents=tuple(antecedents), consequent=consequents[0])


def load_fis_config(text: str) -> FuzzySystem:
    """Build a :class:`FuzzySystem` from its declarative text config.

    Sections: ``[input NAME]`` / ``[output NAME]`` hold ``term = a b c d``
    lines; ``[rules]`` holds ``IF var IS term AND ... THEN out IS term``
    lines; an optional ``[options]`` section accepts ``cog_step = X``.
    Full-line ``#`` comments and blank lines are ignored.
    """
    # (kind, name, terms) in declaration order; variables built once all terms are read.
    variables: list[tuple[str, str, dict[str, Trapezoid]]] = []
    rules: list[FuzzyRule] = []
    cog_step = 0.1
    section: str | None = None  # "variable" | "rules" | "options"

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            header = line[1:-1].split()
            if header == ["rules"]:
                section = "rules"
                continue
            if header == ["options"]:
                section = "options"
                continue
            if len(header) == 2 and header[0] in ("input", "output"):
                kind, name = header
                if any(existing == name for _, existing, _ in variables):
                    raise FisConfigError(f"line {lineno}: variable {name!r} declared twice")
                if kind == "output" and any(k == "output" for k, _, _ in variables):
                    raise FisConfigError(f"line {lineno}: second [output] section")
                variables.append((kind, name, {}))
                section = "variable"
                continue
            raise FisConfigError(f"line {lineno}: unknown section header {line!r}")
        if section == "rules":
            rules.append(_parse_rule(line, lineno))
        elif section == "options":
            key, _, value = (p.strip() for p in line.partition("="))
            if key != "cog_step" or not value:
                raise FisConfigError(f"line {lineno}: unknown option {line!r}")
            try:
                cog_step = float(value)
            except ValueError:
                raise FisConfigError(f"line {lineno}: non-numeric cog_step {value!r}") from None
        elif section == "variable":
            name, eq, rhs = (p.strip() for p in line.partition("="))
            if not eq or not name:
                raise FisConfigError(f"line {lineno}: expected 'term = a b c d'")
            terms = variables[-1][2]
            if name in terms:
                raise FisConfigError(f"line {lineno}: term {name!r} declared twice")
            terms[name] = _parse_trapezoid(rhs, lineno)
        else:
            raise FisConfigError(f"line {lineno}: content before any section header")

    for kind, name, terms in variables:
        if not terms:
            raise FisConfigError(f"{kind} variable {name!r} declares no terms")
    inputs = [LinguisticVariable(name, terms) for kind, name, terms in variables if kind == "input"]
    outputs = [LinguisticVariable(name, terms) for kind, name, terms in variables if kind == "output"]
    if not outputs:
        raise FisConfigError("config declares no output variable")
    if not rules:
        raise FisConfigError("config declares an empty rule base")
    try:
        return FuzzySystem(inputs=inputs, output=outputs[0], rules=rules, cog_step=cog_step)
    except ValueError as exc:
        raise FisConfigError(str(exc)) from None


def default_system() -> FuzzySystem:
    """The shipped default controller config, loaded from package data."""
    text = resources.files("mdgcluster").joinpath("data/default.fis").read_text("utf-8")
    return load_fis_config(text)
