"""Caliper families: constant width, separable piecewise-linear, separable steps.

A caliper maps a (treated score, control score) pair to the largest distance
at which the pair may still be matched: the pair (x, y) is feasible when
|x - y| <= c(x, y). The maximal matchers only guarantee a maximum pair count
for calipers whose shape they can verify, so CLI-facing calipers are limited
to three certifiable families:

* ``ConstantCaliper`` - fixed width c(x, y) = value.
* ``SeparableLipschitzCaliper`` - c(x, y) = g(x) + h(y) with g and h piecewise
  linear and every piece's slope magnitude at most 1, so moving either score
  by t changes the caliper by at most |t|.
* ``StepSumCaliper`` - c(x, y) = f(x) + s(y) with f and s nondecreasing,
  nonnegative, right-open step functions. Such calipers may jump upward but
  never shrink faster than the scores move, and are constant between
  consecutive thresholds, which is what the interval-cursor matcher needs.

Arbitrary callables can be wrapped in ``FunctionCaliper``; they are evaluated
as-is and never certified, so any optimality claim is the caller's
responsibility.

Piecewise tables use the right-open convention [threshold, next threshold);
evaluation outside the tabulated range clamps to the nearest piece (constant
extension on both sides), which preserves the Lipschitz and monotonicity
properties.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Real
from typing import Callable, ClassVar, Sequence

import numpy as np

from .core import CaliperError, ScoreSet

__all__ = [
    "Caliper",
    "ConstantCaliper",
    "SeparableLipschitzCaliper",
    "StepSumCaliper",
    "FunctionCaliper",
    "CaliperReport",
    "validate_caliper",
    "as_caliper",
    "parse_caliper_spec",
    "load_caliper_file",
]

_KnotTable = Sequence[tuple[float, float]]


def _knot_arrays(table: _KnotTable, name: str, allow_inf_abscissa: bool):
    """Normalize a (abscissa, value) table to two float arrays with checks."""
    try:
        pairs = [(float(a), float(v)) for a, v in table]
    except (TypeError, ValueError) as exc:
        raise CaliperError(f"{name} table must be (abscissa, value) pairs: {exc}")
    if not pairs:
        raise CaliperError(f"{name} table must contain at least one entry")
    xs = np.array([a for a, _ in pairs], dtype=float)
    vs = np.array([v for _, v in pairs], dtype=float)
    if np.isnan(xs).any() or (not allow_inf_abscissa and not np.isfinite(xs).all()):
        raise CaliperError(f"{name} table has a non-finite abscissa")
    if not np.isfinite(vs).all():
        raise CaliperError(f"{name} table has a non-finite value")
    if xs.size > 1 and not (np.diff(xs) > 0).all():
        raise CaliperError(f"{name} table abscissas must be strictly increasing")
    xs.flags.writeable = False
    vs.flags.writeable = False
    return xs, vs


def _step_values(thresholds: np.ndarray, values: np.ndarray, x) -> np.ndarray:
    """Right-open step lookup, clamped to the first piece below the table."""
    idx = np.searchsorted(thresholds, x, side="right") - 1
    idx = np.clip(idx, 0, values.size - 1)
    return values[idx]


class Caliper:
    """Base class; subclasses are callables evaluating c(x, y)."""

    kind: ClassVar[str] = "abstract"
    checked: ClassVar[bool] = False

    def __call__(self, x: float, y: float) -> float:  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantCaliper(Caliper):
    """Fixed-width caliper: c(x, y) = value for every pair."""

    value: float

    kind: ClassVar[str] = "constant"
    checked: ClassVar[bool] = True

    def __call__(self, x: float, y: float) -> float:
        return self.value


@dataclass(frozen=True)
class SeparableLipschitzCaliper(Caliper):
    """c(x, y) = g(x) + h(y) with piecewise-linear g, h of slope magnitude <= 1.

    ``treated_knots`` tabulates g on the treated score, ``control_knots``
    tabulates h on the control score, each as (abscissa, value) knots with
    linear interpolation in between and constant extension outside.
    """

    treated_knots: _KnotTable
    control_knots: _KnotTable

    kind: ClassVar[str] = "separable"
    checked: ClassVar[bool] = True

    def __post_init__(self):
        gx, gv = _knot_arrays(self.treated_knots, "treated_knots", False)
        hx, hv = _knot_arrays(self.control_knots, "control_knots", False)
        object.__setattr__(self, "treated_knots", tuple(zip(gx.tolist(), gv.tolist())))
        object.__setattr__(self, "control_knots", tuple(zip(hx.tolist(), hv.tolist())))
        object.__setattr__(self, "_gx", gx)
        object.__setattr__(self, "_gv", gv)
        object.__setattr__(self, "_hx", hx)
        object.__setattr__(self, "_hv", hv)

    def treated_component(self, x) -> np.ndarray:
        return np.interp(x, self._gx, self._gv)

    def control_component(self, y) -> np.ndarray:
        return np.interp(y, self._hx, self._hv)

    def __call__(self, x: float, y: float) -> float:
        return float(self.treated_component(x) + self.control_component(y))


@dataclass(frozen=True)
class StepSumCaliper(Caliper):
    """c(x, y) = f(x) + s(y) with nondecreasing nonnegative step functions.

    ``treated_steps`` / ``control_steps`` are (threshold, value) tables; each
    value applies on [threshold, next threshold). Thresholds may start at
    -inf. ``treated_cuts`` / ``control_cuts`` are the interval breakpoints the
    piecewise matcher partitions the data with; by default they are derived
    from the step thresholds padded with -inf/+inf sentinels so the whole real
    line is covered. Pass explicit cuts only to restrict the covered range.
    """

    treated_steps: _KnotTable
    control_steps: _KnotTable
    treated_cuts: Sequence[float] | None = None
    control_cuts: Sequence[float] | None = None

    kind: ClassVar[str] = "stepsum"
    checked: ClassVar[bool] = True

    def __post_init__(self):
        ft, fv = _knot_arrays(self.treated_steps, "treated_steps", True)
        st, sv = _knot_arrays(self.control_steps, "control_steps", True)
        object.__setattr__(self, "treated_steps", tuple(zip(ft.tolist(), fv.tolist())))
        object.__setattr__(self, "control_steps", tuple(zip(st.tolist(), sv.tolist())))
        object.__setattr__(self, "_ft", ft)
        object.__setattr__(self, "_fv", fv)
        object.__setattr__(self, "_st", st)
        object.__setattr__(self, "_sv", sv)
        object.__setattr__(
            self, "treated_cuts", self._cuts(self.treated_cuts, ft, "treated_cuts")
        )
        object.__setattr__(
            self, "control_cuts", self._cuts(self.control_cuts, st, "control_cuts")
        )

    @staticmethod
    def _cuts(explicit, thresholds: np.ndarray, name: str) -> np.ndarray:
        if explicit is None:
            cuts = np.unique(np.concatenate(([-np.inf], thresholds, [np.inf])))
        else:
            cuts = np.asarray(explicit, dtype=float)
            if cuts.size < 2 or not (np.diff(cuts) > 0).all():
                raise CaliperError(
                    f"{name} must be at least two strictly increasing breakpoints"
                )
        cuts.flags.writeable = False
        return cuts

    def treated_component(self, x) -> np.ndarray:
        return _step_values(self._ft, self._fv, x)

    def control_component(self, y) -> np.ndarray:
        return _step_values(self._st, self._sv, y)

    def __call__(self, x: float, y: float) -> float:
        return float(self.treated_component(x) + self.control_component(y))


@dataclass(frozen=True)
class FunctionCaliper(Caliper):
    """Arbitrary caliper function; never certified ("unchecked")."""

    func: Callable[[float, float], float]

    kind: ClassVar[str] = "function"
    checked: ClassVar[bool] = False

    def __call__(self, x: float, y: float) -> float:
        return float(self.func(x, y))


@dataclass(frozen=True)
class CaliperReport:
    """Outcome of validate_caliper.

    ``certified_lipschitz`` - safe for the sorted two-pointer matchers;
    ``certified_piecewise`` - safe for the interval-cursor matcher;
    ``min_on_data`` - exact minimum of c over all treated x control score
    pairs of the supplied data (None when no data was supplied or either
    group is empty).
    """

    kind: str
    certified_lipschitz: bool
    certified_piecewise: bool
    min_on_data: float | None = None


def _check_separable(caliper: SeparableLipschitzCaliper) -> None:
    for name, xs, vs in (
        ("treated", caliper._gx, caliper._gv),
        ("control", caliper._hx, caliper._hv),
    ):
        for k in range(xs.size - 1):
            run = xs[k + 1] - xs[k]
            rise = vs[k + 1] - vs[k]
            if abs(rise) > abs(run):
                raise CaliperError(
                    f"{name}-side piece {k} over [{xs[k]:g}, {xs[k + 1]:g}] has "
                    f"slope {rise / run:g}; slope magnitude must be <= 1"
                )


def _check_stepsum(caliper: StepSumCaliper) -> None:
    for name, vs in (("treated", caliper._fv), ("control", caliper._sv)):
        if vs[0] < 0:
            raise CaliperError(
                f"{name}-side step table starts negative ({vs[0]:g}); "
                "step values must be nonnegative"
            )
        drops = np.flatnonzero(np.diff(vs) < 0)
        if drops.size:
            k = int(drops[0])
            raise CaliperError(
                f"{name}-side step table decreases at step {k + 1} "
                f"({vs[k]:g} -> {vs[k + 1]:g}); steps must be nondecreasing"
            )


def _min_on_data(caliper: Caliper, scores: ScoreSet) -> float | None:
    """Exact min of c over all data pairs, using separability; None if empty."""
    X, Y = scores.treated_scores, scores.control_scores
    if X.size == 0 or Y.size == 0:
        return None
    if isinstance(caliper, ConstantCaliper):
        return float(caliper.value)
    tmin = float(np.min(caliper.treated_component(X)))
    cmin = float(np.min(caliper.control_component(Y)))
    total = tmin + cmin
    if total < 0:
        xi = int(np.argmin(caliper.treated_component(X)))
        yj = int(np.argmin(caliper.control_component(Y)))
        raise CaliperError(
            f"caliper is negative ({total:g}) at the data pair "
            f"(treated[{xi}]={X[xi]:g}, control[{yj}]={Y[yj]:g})"
        )
    return total


def validate_caliper(caliper: Caliper, scores: ScoreSet | None = None) -> CaliperReport:
    """Certify a caliper's structure, optionally checking nonnegativity on data.

    Raises CaliperError naming the offending piece/step/pair on violation.
    FunctionCaliper instances are never certified and are reported as such
    without being evaluated.
    """
    if isinstance(caliper, ConstantCaliper):
        if not np.isfinite(caliper.value):
            raise CaliperError(f"constant caliper must be finite, got {caliper.value!r}")
        if caliper.value < 0:
            raise CaliperError(
                f"constant caliper must be nonnegative, got {caliper.value:g}"
            )
        return CaliperReport(
            kind=caliper.kind,
            certified_lipschitz=True,
            certified_piecewise=False,
            min_on_data=float(caliper.value) if scores is not None else None,
        )
    if isinstance(caliper, SeparableLipschitzCaliper):
        _check_separable(caliper)
        return CaliperReport(
            kind=caliper.kind,
            certified_lipschitz=True,
            certified_piecewise=False,
            min_on_data=_min_on_data(caliper, scores) if scores is not None else None,
        )
    if isinstance(caliper, StepSumCaliper):
        _check_stepsum(caliper)
        return CaliperReport(
            kind=caliper.kind,
            certified_lipschitz=False,
            certified_piecewise=True,
            min_on_data=_min_on_data(caliper, scores) if scores is not None else None,
        )
    if isinstance(caliper, FunctionCaliper) or callable(caliper):
        return CaliperReport(
            kind=getattr(caliper, "kind", "function"),
            certified_lipschitz=False,
            certified_piecewise=False,
        )
    raise CaliperError(f"not a caliper: {caliper!r}")


def as_caliper(value) -> Caliper:
    """Coerce a number to a ConstantCaliper or wrap a bare callable unchecked."""
    if isinstance(value, Caliper):
        return value
    if isinstance(value, Real) and not isinstance(value, bool):
        return ConstantCaliper(float(value))
    if callable(value):
        return FunctionCaliper(value)
    raise CaliperError(
        f"cannot interpret {value!r} as a caliper; pass a number, a Caliper, "
        "or a callable"
    )


def _parse_table(text: str, key: str) -> list[tuple[float, float]]:
    entries = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 2:
            raise CaliperError(
                f"{key}: expected comma-separated abscissa:value entries, got {item!r}"
            )
        try:
            entries.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise CaliperError(f"{key}: non-numeric entry {item!r}")
    if not entries:
        raise CaliperError(f"{key}: empty table")
    return entries


def parse_caliper_spec(text: str) -> Caliper:
    """Parse the key-value caliper file format (see the CLI docs for grammar).

    Lines are ``key = value``; ``#`` starts a comment. ``kind`` selects the
    family; ``value`` configures a constant; ``g``/``h`` give separable
    piecewise-linear knots and ``f``/``s`` give step tables as comma-separated
    ``abscissa:value`` entries (``-inf`` allowed for step thresholds).
    """
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CaliperError(f"caliper spec line {lineno}: expected key = value")
        key, _, val = line.partition("=")
        key = key.strip().lower()
        if key in fields:
            raise CaliperError(f"caliper spec line {lineno}: duplicate key {key!r}")
        fields[key] = val.strip()

    kind = fields.pop("kind", None)
    if kind is None:
        raise CaliperError("caliper spec is missing the 'kind' key")
    kind = kind.lower()

    def take(key: str) -> str:
        try:
            return fields.pop(key)
        except KeyError:
            raise CaliperError(f"caliper spec of kind {kind!r} requires key {key!r}")

    if kind == "constant":
        raw = take("value")
        try:
            caliper: Caliper = ConstantCaliper(float(raw))
        except ValueError:
            raise CaliperError(f"constant caliper value is not a number: {raw!r}")
    elif kind == "separable":
        caliper = SeparableLipschitzCaliper(
            treated_knots=_parse_table(take("g"), "g"),
            control_knots=_parse_table(take("h"), "h"),
        )
    elif kind == "stepsum":
        caliper = StepSumCaliper(
            treated_steps=_parse_table(take("f"), "f"),
            control_steps=_parse_table(take("s"), "s"),
        )
    else:
        raise CaliperError(
            f"unknown caliper kind {kind!r}; expected constant, separable, or stepsum"
        )
    if fields:
        raise CaliperError(f"caliper spec has unexpected keys: {sorted(fields)}")
    validate_caliper(caliper)
    return caliper


def load_caliper_file(path) -> Caliper:
    """Read and parse a caliper spec file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_caliper_spec(fh.read())
