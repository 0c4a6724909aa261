import json
import logging
from typing import Any, Dict, Union

from siegel.interval import UNIT, IntervalFunction

logger = logging.getLogger(__name__)


class FunctionSpecError(ValueError):
    """A function description could not be turned into an IntervalFunction."""


def _complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise FunctionSpecError(f"complex values are [re, im], got {value}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


class FunctionSpecParser:
    """Typed JSON expressions for test functions on [-1, 1].

    Supported types: exponential (s, alpha), polynomial (coeffs),
    constant (value), sampled (x, y) and sum (terms, optional weights).
    """

    def __init__(self, alpha: float):
        self.alpha = alpha

    def parse(self, spec: Union[str, Dict]) -> IntervalFunction:
        if isinstance(spec, str):
            try:
                spec = json.loads(spec)
            except json.JSONDecodeError as e:
                raise FunctionSpecError(f"invalid JSON: {e}")
        if not isinstance(spec, dict) or "type" not in spec:
            raise FunctionSpecError("a function spec is an object with a 'type' key")
        kind = spec["type"]
        handler = getattr(self, f"_parse_{kind}", None)
        if handler is None:
            raise FunctionSpecError(f"unknown function type {kind!r}")
        try:
            return handler(spec)
        except KeyError as e:
            raise FunctionSpecError(f"{kind} spec is missing {e}")

    def parse_file(self, path: str) -> IntervalFunction:
        try:
            with open(path, "r", encoding="utf-8") as f:
                return self.parse(f.read())
        except FileNotFoundError:
            raise FunctionSpecError(f"function spec not found at {path}")

    def _parse_exponential(self, spec: Dict) -> IntervalFunction:
        return IntervalFunction.exponential(_complex(spec["s"]), float(spec.get("alpha", self.alpha)))

    def _parse_polynomial(self, spec: Dict) -> IntervalFunction:
        return IntervalFunction.polynomial([_complex(c) for c in spec["coeffs"]], UNIT)

    def _parse_constant(self, spec: Dict) -> IntervalFunction:
        return IntervalFunction.constant(_complex(spec.get("value", 1.0)))

    def _parse_sampled(self, spec: Dict) -> IntervalFunction:
        return IntervalFunction.sampled(spec["x"], spec["y"], spec.get("name", "sampled"))

    def _parse_sum(self, spec: Dict) -> IntervalFunction:
        terms = [self.parse(t) for t in spec["terms"]]
        if not terms:
            raise FunctionSpecError("sum needs at least one term")
        weights = [_complex(w) for w in spec.get("weights", [1.0] * len(terms))]
        if len(weights) != len(terms):
            raise FunctionSpecError("one weight per term")
        total = terms[0].scale(weights[0])
        for term, w in zip(terms[1:], weights[1:]):
            total = total + term.scale(w)
        logger.debug(f"parsed sum of {len(terms)} terms")
        return total
