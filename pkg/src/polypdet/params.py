"""All pipeline tunables in one validated record, with serialization helpers."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, replace

from .errors import ParameterError

# Parameters eligible for the +10% robustness study (geometric stage only).
ROBUSTNESS_PARAMS = ("sigma1", "sigma2", "m_lower", "m_upper",
                     "s_lower", "s_upper", "e_max")

# Integer-valued parameters are rounded up after perturbation.
INTEGER_PARAMS = frozenset({"sigma1", "sigma2", "s_lower", "s_upper"})


@dataclass(frozen=True)
class PipelineParams:
    """Pipeline configuration; defaults follow the reference operating point
    at 256x256 frames.

    Size- and scale-dependent fields (r_mask, sigma, s_lower, s_upper) default
    to None and are derived from the frame width on construction.
    """

    nx: int = 256
    ny: int = 256
    r_mask: float | None = None       # default 0.45 * nx
    n_iter: int = 5                   # cartoon/texture split iterations
    sigma_t: float = 5.0              # cartoon/texture split smoothing
    sigma: float | None = None        # texture transform smoothing, ceil(nx/25)
    p: float = 0.8                    # texture transform exponent
    t_lower: float = 3.0              # pre-selection band
    t_upper: float = 8.0
    sigma1: float = 7.0               # mid-pass narrow smoothing
    sigma2: float = 30.0              # mid-pass wide smoothing
    m_lower: float = 0.11             # segmentation threshold clamp
    m_upper: float = 0.16
    s_lower: int | None = None        # feature size band, ceil((nx/15)^2)
    s_upper: int | None = None        # ceil((nx/4.5)^2)
    e_max: float = 6.5                # max feature elongation
    r_p: int = 37                     # discrimination threshold

    def __post_init__(self):
        if self.r_mask is None:
            object.__setattr__(self, "r_mask", 0.45 * self.nx)
        if self.sigma is None:
            object.__setattr__(self, "sigma", float(math.ceil(self.nx / 25)))
        if self.s_lower is None:
            object.__setattr__(self, "s_lower", math.ceil((self.nx / 15) ** 2))
        if self.s_upper is None:
            object.__setattr__(self, "s_upper", math.ceil((self.nx / 4.5) ** 2))
        self.validate()

    def validate(self):
        checks = [
            (self.nx >= 8 and self.ny >= 8, "frame dimensions must be >= 8"),
            (0 < self.r_mask <= min(self.nx, self.ny) / 2, "r_mask out of range"),
            (self.n_iter >= 1, "n_iter must be >= 1"),
            (self.sigma_t >= 1, "sigma_t must be >= 1"),
            (self.sigma >= 1, "sigma must be >= 1"),
            (0 < self.p <= 1, "p must be in (0, 1]"),
            (0 <= self.t_lower < self.t_upper, "need 0 <= t_lower < t_upper"),
            (1 <= self.sigma1 < self.sigma2, "need 1 <= sigma1 < sigma2"),
            (0 < self.m_lower < self.m_upper, "need 0 < m_lower < m_upper"),
            (0 < self.s_lower < self.s_upper, "need 0 < s_lower < s_upper"),
            (self.e_max >= 1, "e_max must be >= 1"),
            (self.r_p > 0, "r_p must be > 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ParameterError(msg)

    @property
    def r_search_max(self) -> int:
        """Upper bound of the integer radius search."""
        return self.nx // 3

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineParams":
        return cls(**d)

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def adapted_to_shape(self, ny: int, nx: int) -> "PipelineParams":
        """Copy fitted to another frame size.

        Fields still at their size-derived defaults are re-derived for the new
        width; explicitly overridden values are kept.
        """
        if (ny, nx) == (self.ny, self.nx):
            return self
        derived = {
            "r_mask": 0.45 * self.nx,
            "sigma": float(math.ceil(self.nx / 25)),
            "s_lower": math.ceil((self.nx / 15) ** 2),
            "s_upper": math.ceil((self.nx / 4.5) ** 2),
        }
        updates = {"ny": ny, "nx": nx}
        for name, default in derived.items():
            if getattr(self, name) == default:
                updates[name] = None
        return replace(self, **updates)

    def perturbed(self, name: str, factor: float = 1.1) -> "PipelineParams":
        """Copy with one parameter scaled (ceil'd for integer-valued ones)."""
        if name not in ROBUSTNESS_PARAMS:
            raise ParameterError(f"unknown robustness parameter: {name}")
        value = getattr(self, name) * factor
        if name in INTEGER_PARAMS:
            value = math.ceil(value)
        return replace(self, **{name: value})
