import os
from pathlib import Path
from typing import Optional
from dataclasses import dataclass


__all__ = ["RunConfig", "COMMANDS", "VARIANTS", "FORMATS", "CEILINGS", "resolve_threads"]


COMMANDS = ("invariants", "groebner", "solve", "verify", "orbit", "lattice", "hilbert", "figures")
VARIANTS = ("full", "specialized", "extended")
FORMATS = ("json", "csv", "text")

# largest period each command accepts, per variant
CEILINGS = {
    ("solve", "full"): 7,
    ("solve", "specialized"): 11,
    ("figures", "full"): 7,
    ("figures", "specialized"): 11,
    ("invariants", "full"): 12,
    ("invariants", "specialized"): 12,
    ("invariants", "extended"): 12,
    ("groebner", "full"): 8,
    ("groebner", "specialized"): 12,
    ("groebner", "extended"): 8,
    ("hilbert", "full"): 8,
    ("hilbert", "specialized"): 12,
    ("hilbert", "extended"): 8,
}


def resolve_threads(requested: Optional[int] = None) -> int:
    """
    Worker count for the thread pools: ``requested`` if given, else ``FLOQ_THREADS``, else the CPU count.

    :raises ValueError: if ``FLOQ_THREADS`` is not a positive integer.
    """
    if requested:
        return requested
    raw = os.environ.get("FLOQ_THREADS")
    if raw:
        try:
            value = int(raw)
        except ValueError as e:
            raise ValueError(f"FLOQ_THREADS must be a positive integer, got {raw!r}") from e
        if value < 1:
            raise ValueError(f"FLOQ_THREADS must be a positive integer, got {raw!r}")
        return value
    return os.cpu_count() or 1


@dataclass(frozen=True)
class RunConfig:
    """
    Settings of one command-line invocation.

    Validation happens on construction, so an existing instance always
    describes a runnable command.

    :ivar command: Subcommand name.
    :type command: str
    :ivar n: Period (``None`` for commands that do not take one).
    :type n: Optional[int]
    :ivar variant: ``full``, ``specialized`` or ``extended``.
    :type variant: str
    :ivar seed: Seed of every random choice.
    :type seed: int
    :ivar cluster_tol: Identification radius of regular points.
    :type cluster_tol: float
    :ivar residual_tol: Residual accepted for a regular point.
    :type residual_tol: float
    :ivar merge_tol: Grouping radius of the scattered eigenvalues of a singular point.
    :type merge_tol: float
    :ivar output: Artifact path; stdout when ``None``.
    :type output: Optional[Path]
    :ivar format: ``json``, ``csv`` or ``text``.
    :type format: str
    :ivar s: Degree bound for the Hilbert function.
    :type s: Optional[int]
    :ivar potential: Potential file for ``verify`` and ``orbit``; V' of the extended variant (default 1..n).
    :type potential: Optional[Path]
    :ivar exact: Exact Gaussian-rational verification.
    :type exact: bool
    :ivar tol: Tolerance of numeric verification and lattice filtering.
    :type tol: float
    :ivar group: ``dihedral`` or ``full`` for orbit dumps.
    :type group: str
    :ivar gens: Lattice generators as ``"a b; c d"``.
    :type gens: Optional[str]
    :ivar samples: Extra torus samples of the rigidity check.
    :type samples: int
    :ivar check_stability: Rerun the solve with the next seed and compare.
    :type check_stability: bool
    :ivar basis_ceiling: Largest quotient basis the solver accepts.
    :type basis_ceiling: int
    :ivar threads: Worker cap; ``None`` defers to ``FLOQ_THREADS``.
    :type threads: Optional[int]
    :ivar lattice_action: ``rigidity`` or ``sweep``.
    :type lattice_action: str
    :ivar max_index: Largest index of a lattice sweep.
    :type max_index: int
    :ivar gcd_bound: Bound on ``gcd(a, b)`` and ``c`` of a lattice sweep.
    :type gcd_bound: int
    :ivar debug: Verbose logging.
    :type debug: bool
    :ivar log_file: Optional log file.
    :type log_file: Optional[Path]
    """

    command: str
    n: Optional[int] = None
    variant: str = "full"
    seed: int = 0
    cluster_tol: float = 1e-6
    residual_tol: float = 1e-8
    merge_tol: float = 1e-2
    output: Optional[Path] = None
    format: str = "json"
    s: Optional[int] = None
    potential: Optional[Path] = None
    exact: bool = False
    tol: float = 1e-6
    group: str = "full"
    gens: Optional[str] = None
    samples: int = 3
    check_stability: bool = False
    basis_ceiling: int = 6000
    threads: Optional[int] = None
    lattice_action: str = "rigidity"
    max_index: int = 6
    gcd_bound: int = 3
    debug: bool = False
    log_file: Optional[Path] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}")
        for name in ("cluster_tol", "residual_tol", "merge_tol", "tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.basis_ceiling < 1 or self.samples < 1 or (self.threads is not None and self.threads < 1):
            raise ValueError("basis_ceiling, samples and threads must be positive")
        if self.command == "lattice":
            if self.lattice_action not in ("rigidity", "sweep"):
                raise ValueError(f"unknown lattice action {self.lattice_action!r}")
            if self.lattice_action == "rigidity" and not self.gens:
                raise ValueError("lattice rigidity needs generators")
            return
        if self.command in ("verify", "orbit") and self.potential is None:
            raise ValueError(f"{self.command} needs a potential file")
        if self.command == "hilbert" and (self.s is None or self.s < 0):
            raise ValueError(f"hilbert needs a non-negative s, got {self.s}")
        if self.n is None:
            if self.command in ("verify", "orbit"):
                return
            raise ValueError(f"{self.command} needs a period n")
        if self.n < 3:
            raise ValueError(f"period n={self.n} is not supported (n >= 3 required)")
        if self.variant == "specialized" and self.n < 4:
            raise ValueError(f"the specialized variant needs n >= 4, got n={self.n}")
        if self.command in ("solve", "figures") and self.variant == "extended":
            raise ValueError("the extended system is not zero-dimensional and cannot be solved")
        ceiling = CEILINGS.get((self.command, self.variant))
        if ceiling is not None and self.n > ceiling:
            raise ValueError(f"{self.command} --variant {self.variant} supports n <= {ceiling}, got n={self.n}")
