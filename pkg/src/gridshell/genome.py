"""Chromosome describing a net: seed point plus the angles of the four guideline branches."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Genome:
    """Seed point A and guideline angles, all angles in radians.

    ``alpha1``/``alpha2`` are the start azimuths of guideline D1 to the right
    and to the left of A, ``beta1``/``beta2`` those of D2 above and below.
    ``gamma1``, ``gamma2``, ``eps1``, ``eps2`` hold the per-step turn angles of
    the same four branches.
    """

    x_a: float
    y_a: float
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    gamma1: tuple = ()
    gamma2: tuple = ()
    eps1: tuple = ()
    eps2: tuple = ()

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "eps1", "eps2"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        for name in ("x_a", "y_a", "alpha1", "alpha2", "beta1", "beta2"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def layout(self):
        return (len(self.gamma1), len(self.gamma2), len(self.eps1), len(self.eps2))

    @property
    def n_genes(self):
        return 6 + sum(self.layout)

    @property
    def start_azimuths(self):
        """Start azimuths in branch order: D1 right, D1 left, D2 top, D2 bottom."""
        return (self.alpha1, self.alpha2, self.beta1, self.beta2)

    @property
    def turns(self):
        return (self.gamma1, self.gamma2, self.eps1, self.eps2)

    def to_dict(self):
        d = asdict(self)
        for k in ("gamma1", "gamma2", "eps1", "eps2"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha1(blob).hexdigest()[:12]

    @classmethod
    def straight(cls, x_a, y_a, alpha1, beta1, n_turns=(11, 11, 11, 11)):
        """Straight guidelines through A; each direction continues through A to its antipode."""
        return cls(
            x_a,
            y_a,
            alpha1,
            (alpha1 + math.pi) % (2 * math.pi),
            beta1,
            (beta1 + math.pi) % (2 * math.pi),
            (0.0,) * n_turns[0],
            (0.0,) * n_turns[1],
            (0.0,) * n_turns[2],
            (0.0,) * n_turns[3],
        )
