"""
Input layout of the generalized inner product generator
"""

from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.errors import ParameterError


class GipLayout(BaseModel):
    """
    [n] split into three consecutive thirds of sizes n1 >= n2 >= n3 (the
    first n mod 3 thirds get one extra bit). Third i holds m blocks of ell
    bits, x_ij at positions offsets[i] + (j - 1) * ell + 1 .. + ell; the
    trailing bits of each third are unused.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=3)
    m: int = Field(..., ge=1)
    sizes: Tuple[int, int, int]
    ell: int = Field(..., ge=1)

    @classmethod
    def build(cls, n: int, m: int) -> "GipLayout":
        if m < 1:
            raise ParameterError(f"Need at least one output bit, got m={m}")
        if n < 3 or 3 * m > n:
            raise ParameterError(f"m={m} output bits need n >= 3m input bits, got n={n}")
        third, extra = divmod(n, 3)
        sizes = tuple(third + (1 if i < extra else 0) for i in range(3))
        return cls(n=n, m=m, sizes=sizes, ell=third // m)

    @property
    def offsets(self) -> Tuple[int, int, int]:
        """Position before the first bit of each third."""
        n1, n2, _ = self.sizes
        return (0, n1, n1 + n2)

    def block(self, third: int, j: int) -> Tuple[int, ...]:
        """1-indexed positions of x_{third, j}."""
        if not 1 <= third <= 3 or not 1 <= j <= self.m:
            raise ParameterError(f"No block x_({third},{j}) in a layout with m={self.m}")
        start = self.offsets[third - 1] + (j - 1) * self.ell
        return tuple(range(start + 1, start + self.ell + 1))

    def unused(self) -> Tuple[int, ...]:
        used = self.m * self.ell
        return tuple(
            p
            for third in range(3)
            for p in range(self.offsets[third] + used + 1, self.offsets[third] + self.sizes[third] + 1)
        )

    def third_of(self, position: int) -> int:
        n1, n2, _ = self.sizes
        if position <= n1:
            return 1
        if position <= n1 + n2:
            return 2
        return 3
