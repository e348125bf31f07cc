"""Global truncation parameters and scalar arithmetic mod p^k.

Every value in the engine is computed relative to a TruncParams triple
(p, k, D): coefficients live in Z/p^k, series are cut at total degree D,
and D < p guarantees that 1/n! exists for all n <= D, which makes log,
exp and the binomial exponentiation exact at truncation.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class TruncParams:
    p: int
    k: int
    D: int

    def __post_init__(self):
        if not _is_prime(self.p) or self.p < 5:
            raise ValueError(f"p must be an odd prime >= 5, got {self.p}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 1 <= self.D < self.p:
            raise ValueError(f"need 1 <= D < p, got D={self.D}, p={self.p}")

    @property
    def modulus(self) -> int:
        return self.p ** self.k

    def reduce(self, a: int) -> int:
        return a % self.modulus

    def is_unit(self, a: int) -> bool:
        return a % self.p != 0

    def inv(self, a: int) -> int:
        """Inverse of a unit mod p^k."""
        if not self.is_unit(a):
            raise ZeroDivisionError(f"{a} is not a unit mod {self.p}^{self.k}")
        return pow(a, -1, self.modulus)

    def unit_pow(self, a: int, e: int) -> int:
        """a^e mod p^k for a unit a and any integer e."""
        if e >= 0:
            return pow(a, e, self.modulus)
        return pow(self.inv(a), -e, self.modulus)

    def binomial(self, e: int, j: int) -> int:
        """C(e, j) mod p^k for an exponent e given mod p^k.

        Well defined because j <= D < p keeps j! a unit, so C(e, j) is a
        polynomial in e with coefficients in Z_p.
        """
        if j == 0:
            return 1 % self.modulus
        if j > self.D:
            raise ValueError(f"binomial index {j} exceeds truncation {self.D}")
        num = 1
        for i in range(j):
            num = num * (e - i) % self.modulus
        return num * self.inv(factorial(j) % self.modulus) % self.modulus

    def teichmuller(self, a: int) -> int:
        """The unique (p-1)-th root of unity mod p^k congruent to a mod p."""
        if not self.is_unit(a):
            raise ValueError("Teichmuller lift needs a unit")
        t = a % self.modulus
        for _ in range(self.k - 1):
            t = pow(t, self.p, self.modulus)
        return t

    def valuation(self, a: int) -> int:
        """p-adic valuation of a mod p^k (k for zero)."""
        a %= self.modulus
        if a == 0:
            return self.k
        v = 0
        while a % self.p == 0:
            a //= self.p
            v += 1
        return v

    def __repr__(self):
        return f"TruncParams(p={self.p}, k={self.k}, D={self.D})"
