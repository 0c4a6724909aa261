import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np
from sympy import factorint, primitive_root
from sympy.ntheory import jacobi_symbol

logger = logging.getLogger(__name__)


class CharacterError(ValueError):
    """Raised for invalid moduli or characters outside the family rules."""


class NotFundamentalError(CharacterError):
    """No real primitive character exists for the given discriminant."""


class EmptyModulusRangeError(CharacterError):
    """The interval Q < q < 2Q holds no admissible modulus."""


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorint(abs(n)).values())


def is_fundamental_discriminant(d: int) -> bool:
    """Check whether d is the discriminant of a quadratic field."""
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def fundamental_discriminant(D: int) -> int:
    """Resolve a modulus or signed value to a fundamental discriminant.

    A signed fundamental discriminant is returned unchanged. An unsigned
    modulus resolves to +D when that is fundamental, otherwise to -D.

    Raises:
        NotFundamentalError: if neither sign gives a fundamental discriminant
    """
    if is_fundamental_discriminant(D):
        return D
    if D > 0 and is_fundamental_discriminant(-D):
        return -D
    raise NotFundamentalError(f"{D} is not a fundamental discriminant magnitude")


def kronecker_symbol(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for a fundamental discriminant d (or d = ±1)."""
    if d not in (1, -1) and not is_fundamental_discriminant(d):
        raise NotFundamentalError(f"kronecker_symbol needs a fundamental discriminant, got {d}")
    if n == 0:
        return 1 if abs(d) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if d < 0:
            result = -1
    twos = 0
    while n % 2 == 0:
        n //= 2
        twos += 1
    if twos:
        if d % 2 == 0:
            return 0
        if d % 8 in (3, 5) and twos % 2 == 1:
            result = -result
    if n == 1:
        return result
    return result * int(jacobi_symbol(d % n, n))


@lru_cache(maxsize=None)
def _local_structure(p: int, e: int) -> Tuple[Tuple[int, ...], np.ndarray, Tuple[int, ...]]:
    """Group structure of (Z/p^e)^*.

    Returns the cyclic factor orders, a table mapping residues to their
    exponent vectors (rows of -1 for non-units) and the generators.
    """
    pe = p ** e
    if p == 2 and e == 1:
        table = np.full((2, 0), 0, dtype=np.int64)
        return (), table, ()
    if p == 2 and e == 2:
        table = np.full((4, 1), -1, dtype=np.int64)
        table[1, 0], table[3, 0] = 0, 1
        return (2,), table, (3,)
    if p == 2:
        half = 2 ** (e - 2)
        table = np.full((pe, 2), -1, dtype=np.int64)
        for a in range(2):
            x = 1 if a == 0 else pe - 1
            for b in range(half):
                table[x, 0], table[x, 1] = a, b
                x = x * 5 % pe
        return (2, half), table, (pe - 1, 5)
    phi = pe - pe // p
    g = int(primitive_root(pe))
    table = np.full((pe, 1), -1, dtype=np.int64)
    x = 1
    for k in range(phi):
        table[x, 0] = k
        x = x * g % pe
    return (phi,), table, (g,)


def _crt_lift(residue: int, pe: int, modulus: int) -> int:
    """Integer congruent to residue mod pe and to 1 mod modulus/pe."""
    rest = modulus // pe
    if rest == 1:
        return residue % modulus
    return (residue * rest * pow(rest, -1, pe) + pe * pow(pe, -1, rest)) % modulus


def _unit_root(numerator: np.ndarray, denominator: int) -> np.ndarray:
    """exp(2πi·num/den), exact at quarter turns."""
    numerator = np.mod(numerator, denominator)
    values = np.exp(2j * np.pi * numerator / denominator)
    quarter = (4 * numerator) % denominator == 0
    exact = np.array([1, 1j, -1, -1j], dtype=complex)
    values[quarter] = exact[(4 * numerator[quarter]) // denominator]
    return values


@dataclass(frozen=True)
class Character:
    """A Dirichlet character stored by its exponents on each CRT factor."""
    modulus: int
    prime_factorization: Tuple[Tuple[int, int], ...]
    local_indices: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.prime_factorization) != len(self.local_indices):
            raise CharacterError("one index vector per prime power is required")
        for (p, e), idx in zip(self.prime_factorization, self.local_indices):
            orders = _local_structure(p, e)[0]
            if len(idx) != len(orders) or any(not 0 <= k < o for k, o in zip(idx, orders)):
                raise CharacterError(f"index {idx} out of range for {p}^{e}")

    @classmethod
    def principal(cls, modulus: int) -> "Character":
        factors = tuple(sorted(factorint(modulus).items()))
        indices = tuple(tuple(0 for _ in _local_structure(p, e)[0]) for p, e in factors)
        return cls(modulus, factors, indices)

    @classmethod
    def from_values(cls, modulus: int, func: Callable[[int], complex]) -> "Character":
        """Recover local exponents from a completely multiplicative function.

        The function is sampled at CRT lifts of the local generators only.
        """
        factors = tuple(sorted(factorint(modulus).items()))
        indices = []
        for p, e in factors:
            orders, _, gens = _local_structure(p, e)
            local = []
            for order, g in zip(orders, gens):
                value = complex(func(_crt_lift(g, p ** e, modulus)))
                if abs(abs(value) - 1.0) > 1e-8:
                    raise CharacterError(f"function is not a character mod {modulus}")
                turn = math.atan2(value.imag, value.real) / (2 * math.pi)
                local.append(int(round(turn * order)) % order)
            indices.append(tuple(local))
        return cls(modulus, factors, tuple(indices))

    @property
    def local_orders(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(_local_structure(p, e)[0] for p, e in self.prime_factorization)

    @cached_property
    def values(self) -> np.ndarray:
        """ψ(n) for n = 0..modulus-1."""
        m = self.modulus
        residues = np.arange(m)
        orders = [o for local in self.local_orders for o in local]
        denominator = math.lcm(*orders) if orders else 1
        numerator = np.zeros(m, dtype=np.int64)
        unit = np.ones(m, dtype=bool)
        for (p, e), idx in zip(self.prime_factorization, self.local_indices):
            pe = p ** e
            local_orders, table, _ = _local_structure(p, e)
            logs = table[residues % pe]
            if local_orders:
                unit &= logs[:, 0] >= 0
            else:
                unit &= residues % 2 == 1
            for j, (k, order) in enumerate(zip(idx, local_orders)):
                numerator += k * np.where(logs[:, j] >= 0, logs[:, j], 0) * (denominator // order)
        out = _unit_root(numerator, denominator)
        out[~unit] = 0
        return out

    def __call__(self, n):
        return self.values[np.mod(n, self.modulus)]

    @cached_property
    def parity(self) -> int:
        return 0 if self.values[(self.modulus - 1) % self.modulus].real > 0 else 1

    @cached_property
    def conductor(self) -> int:
        cond = 1
        for (p, e), idx in zip(self.prime_factorization, self.local_indices):
            orders = _local_structure(p, e)[0]
            if p == 2:
                if len(idx) == 2 and idx[1] != 0:
                    part = orders[1] // math.gcd(idx[1], orders[1])
                    cond *= 2 ** (int(math.log2(part)) + 2)
                elif idx and idx[0] != 0:
                    cond *= 4
            elif idx[0] != 0:
                order = orders[0] // math.gcd(idx[0], orders[0])
                v = 0
                while order % p == 0:
                    order //= p
                    v += 1
                cond *= p ** (v + 1)
        return cond

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    @property
    def is_principal(self) -> bool:
        return all(k == 0 for idx in self.local_indices for k in idx)

    @property
    def is_real(self) -> bool:
        return all(2 * k % o == 0 for idx, os_ in zip(self.local_indices, self.local_orders)
                   for k, o in zip(idx, os_))

    def conj(self) -> "Character":
        indices = tuple(tuple((-k) % o for k, o in zip(idx, os_))
                        for idx, os_ in zip(self.local_indices, self.local_orders))
        return Character(self.modulus, self.prime_factorization, indices)

    def mul(self, other: "Character") -> "Character":
        """Pointwise product, a character mod lcm of the two moduli."""
        modulus = math.lcm(self.modulus, other.modulus)
        return Character.from_values(modulus, lambda n: self(n) * other(n))

    def index_vector(self) -> List[int]:
        return [k for idx in self.local_indices for k in idx]

    def label(self) -> str:
        return f"{self.modulus}:" + ".".join(str(k) for k in self.index_vector())


def character_value(psi: Character, n: int) -> complex:
    """ψ(n) via the CRT product of local values."""
    return complex(psi(n))


@lru_cache(maxsize=256)
def kronecker_character(d: int) -> Character:
    """The real primitive character (d/·) of modulus |d|."""
    d = fundamental_discriminant(d)
    return Character.from_values(abs(d), lambda n: kronecker_symbol(d, n))


def gauss_sum(psi: Character) -> complex:
    """τ(ψ) = Σ ψ(r) e(r/q) for primitive ψ."""
    if not psi.is_primitive:
        raise CharacterError(f"gauss sum requested for imprimitive character {psi.label()}")
    q = psi.modulus
    r = np.arange(q)
    return complex(np.sum(psi.values * np.exp(2j * np.pi * r / q)))


def psi_count(q: int, D: int) -> int:
    """|Ψ_q| from the local counts (p-2) and (p-3)."""
    d = abs(fundamental_discriminant(D))
    count = 1
    for p in factorint(q):
        count *= (p - 3) if d % p == 0 else (p - 2)
    return count


def enumerate_psi_q(q: int, D: int, family_only: bool = True) -> List[Character]:
    """All ψ primitive mod q with ψχ primitive mod [q, |D|].

    Args:
        q: squarefree odd modulus
        D: discriminant or modulus of χ (resolved by fundamental_discriminant)
        family_only: when set, moduli divisible by 3 are rejected as well

    Returns:
        Characters in lexicographic order of their local indices
    """
    if q < 2 or not is_squarefree(q):
        raise CharacterError(f"q={q} must be squarefree and > 1")
    if q % 2 == 0 or (family_only and q % 3 == 0):
        raise CharacterError(f"q={q} is not coprime to 6")
    d = abs(fundamental_discriminant(D))
    factors = tuple(sorted(factorint(q).items()))
    choices = []
    for p, _ in factors:
        allowed = [k for k in range(1, p - 1) if not (d % p == 0 and k == (p - 1) // 2)]
        choices.append(allowed)
    return [Character(q, factors, tuple((k,) for k in combo)) for combo in product(*choices)]


def verify_family_member(psi: Character, chi: Character) -> bool:
    """Independent check: ψ primitive and ψχ primitive on the lcm modulus."""
    if not psi.is_primitive:
        return False
    twisted = psi.mul(chi)
    return twisted.modulus == math.lcm(psi.modulus, chi.modulus) and twisted.is_primitive


@dataclass(frozen=True)
class FamilySpec:
    D: int
    Q: float
    q_list: Tuple[int, ...]

    @classmethod
    def from_scale(cls, D: int, Q: float) -> "FamilySpec":
        d = fundamental_discriminant(D)
        lo, hi = math.floor(Q) + 1, math.ceil(2 * Q)
        q_list = tuple(q for q in range(lo, hi)
                       if Q < q < 2 * Q and math.gcd(q, 6) == 1 and is_squarefree(q))
        return cls(d, Q, q_list)


class Family:
    """Ψ = union of Ψ_q over the modulus range, yielded lazily."""

    def __init__(self, spec: FamilySpec):
        self.spec = spec
        self.chi = kronecker_character(spec.D)

    def __iter__(self) -> Iterator[Character]:
        for q in self.spec.q_list:
            yield from enumerate_psi_q(q, self.spec.D)

    def members(self, limit: Optional[int] = None) -> List[Character]:
        out = []
        for psi in self:
            if limit is not None and len(out) >= limit:
                break
            out.append(psi)
        return out

    def count(self) -> int:
        return sum(psi_count(q, self.spec.D) for q in self.spec.q_list)

    def summary(self) -> Dict:
        n = self.count()
        return {
            "D": self.spec.D,
            "Q": self.spec.Q,
            "q_list": list(self.spec.q_list),
            "N": n,
            "ratio": n / self.spec.Q ** 2,
            "empty_family": n == 0,
        }


def build_family(spec: FamilySpec) -> Family:
    """Ψ for the given family scale.

    Raises:
        EmptyModulusRangeError: no q in (Q, 2Q) is squarefree and coprime to 6
    """
    if spec.Q < 5:
        logger.warning(f"family scale Q={spec.Q} is below the supported minimum 5")
    if not spec.q_list:
        raise EmptyModulusRangeError(f"no admissible q in ({spec.Q}, {2 * spec.Q})")
    family = Family(spec)
    if family.count() == 0:
        logger.warning(f"modulus range {spec.q_list} is non-empty but Ψ is empty for D={spec.D}")
    return family
