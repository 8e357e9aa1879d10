"""Run configuration: one YAML document, validated in full before anything runs."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .evolve import SimulationConfig
from .grid import Grid
from .operator import EllipticOperator, assemble, coefficient_family, potential_family

COEFF_FAMILIES = ("constant", "sinusoidal", "lipschitz")
POTENTIAL_FAMILIES = ("zero", "constant", "well", "singular", "noise")


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass
class GridSection:
    n: int = 128
    length: float = 32.0


@dataclass
class CoeffSection:
    family: str = "sinusoidal"
    params: dict = field(default_factory=lambda: {"mean": 1.0, "amplitude": 0.5, "mode": 1})
    seed: int = 0


@dataclass
class PotentialSection:
    family: str = "zero"
    params: dict = field(default_factory=dict)
    bounded: dict | None = None
    q: float = 4.0
    theta: float = 0.5
    seed: int = 0


@dataclass
class FracSection:
    s: float = 1.0
    quad_nodes: int = 400
    lo_mult: float = 1e-3
    hi_mult: float = 1e3


@dataclass
class SimSection:
    p: float = 2.0
    dt: float = 1e-2
    t_max: float = 5.0
    blowup_threshold: float = 1e8
    weight_a: float = 0.75
    amplitude: float = 1.0
    width: float = 1.0
    cadence: int = 1
    seed: int = 0


@dataclass
class ScanSection:
    amplitude_factors: list = field(default_factory=lambda: [0.5, 0.9, 1.1, 1.2, 1.5, 2.0])
    R_list: list = field(default_factory=lambda: [1, 2, 4, 8])
    powers: list = field(default_factory=lambda: [1.5, 2.0, 2.5, 3.0])
    a_list: list = field(default_factory=lambda: [0.7, 1.0])
    L_list: list = field(default_factory=lambda: [64.0, 128.0, 256.0, 512.0])


@dataclass
class OutputSection:
    dir: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "json"])


@dataclass
class RunConfig:
    grid: GridSection = field(default_factory=GridSection)
    coeff: CoeffSection = field(default_factory=CoeffSection)
    potential: PotentialSection = field(default_factory=PotentialSection)
    frac: FracSection = field(default_factory=FracSection)
    sim: SimSection = field(default_factory=SimSection)
    scan: ScanSection = field(default_factory=ScanSection)
    output: OutputSection = field(default_factory=OutputSection)
    seed: int = 0

    SECTIONS = {"grid": GridSection, "coeff": CoeffSection, "potential": PotentialSection,
                "frac": FracSection, "sim": SimSection, "scan": ScanSection, "output": OutputSection}

    @classmethod
    def from_dict(cls, raw: dict | None) -> "RunConfig":
        raw = dict(raw or {})
        problems = []
        kwargs = {}
        for name in raw:
            if name not in cls.SECTIONS and name != "seed":
                problems.append(f"unknown section {name!r}")
        for name, kind in cls.SECTIONS.items():
            body = raw.get(name) or {}
            if not isinstance(body, dict):
                problems.append(f"section {name!r} must be a mapping")
                continue
            known = kind.__dataclass_fields__
            extra = sorted(set(body) - set(known))
            if extra:
                problems.append(f"{name}: unknown keys {extra}")
            kwargs[name] = kind(**{k: v for k, v in body.items() if k in known})
        if problems:
            raise ConfigError(problems)
        cfg = cls(**kwargs, seed=int(raw.get("seed", 0)))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError([f"cannot read config: {exc}"]) from exc
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError([f"unparsable config: {exc}"]) from exc
        if raw is not None and not isinstance(raw, dict):
            raise ConfigError(["config must be a mapping of sections"])
        return cls.from_dict(raw)

    def validate(self) -> None:
        bad = []

        def num(label, value, test, msg):
            # strings are rejected even when float() would accept them
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                bad.append(f"{label}: must be a number (got {value!r})")
            elif not test(float(value)):
                bad.append(f"{label}: {msg} (got {value!r})")

        n = self.grid.n
        if not (isinstance(n, int) and n >= 4 and n & (n - 1) == 0):
            bad.append(f"grid.n: power of two >= 4 required (got {n!r})")
        num("grid.length", self.grid.length, lambda v: v > 0, "must be positive")
        if self.coeff.family not in COEFF_FAMILIES:
            bad.append(f"coeff.family: one of {list(COEFF_FAMILIES)} (got {self.coeff.family!r})")
        if self.potential.family not in POTENTIAL_FAMILIES:
            bad.append(f"potential.family: one of {list(POTENTIAL_FAMILIES)} (got {self.potential.family!r})")
        num("potential.q", self.potential.q, lambda v: v > 2, "q > 2 required")
        num("potential.theta", self.potential.theta, lambda v: 0 < v < 1, "theta in (0, 1) required")
        num("frac.s", self.frac.s, lambda v: 0 < v < 2, "s in (0, 2) required")
        num("frac.quad_nodes", self.frac.quad_nodes, lambda v: v >= 16 and v == int(v), "integer >= 16 required")
        num("frac.lo_mult", self.frac.lo_mult, lambda v: 0 < v <= 1, "must lie in (0, 1]")
        num("frac.hi_mult", self.frac.hi_mult, lambda v: v >= 1, "must be >= 1")
        num("sim.p", self.sim.p, lambda v: v > 1, "p > 1 required")
        num("sim.dt", self.sim.dt, lambda v: v > 0, "dt > 0 required")
        num("sim.t_max", self.sim.t_max, lambda v: v > 0, "t_max > 0 required")
        num("sim.blowup_threshold", self.sim.blowup_threshold, lambda v: v > 0, "must be positive")
        num("sim.weight_a", self.sim.weight_a, lambda v: 0.5 < v < 1, "weight_a in (1/2, 1) required")
        num("sim.width", self.sim.width, lambda v: v > 0, "must be positive")
        num("sim.cadence", self.sim.cadence, lambda v: v >= 1 and v == int(v), "integer >= 1 required")
        if len(self.scan.R_list) < 3:
            bad.append("scan.R_list: at least three values required")
        for p in self.scan.powers:
            num("scan.powers", p, lambda v: 1 < v <= 3, "each power in (1, 3] required")
        for fmt in self.output.formats:
            if fmt not in ("csv", "json"):
                bad.append(f"output.formats: unknown format {fmt!r}")
        if bad:
            raise ConfigError(bad)

    # ------------------------------------------------------------ builders

    def to_dict(self) -> dict:
        return {name: asdict(getattr(self, name)) for name in self.SECTIONS} | {"seed": self.seed}

    def digest(self) -> str:
        """sha256 of the canonical JSON form; output.dir is excluded (it names a place, not an input)."""
        body = self.to_dict()
        body["output"] = {k: v for k, v in body["output"].items() if k != "dir"}
        blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def coeff_spec(self) -> dict:
        spec = {"family": self.coeff.family, **self.coeff.params}
        if self.coeff.family == "lipschitz":
            spec.setdefault("seed", self.coeff.seed)
        return spec

    def potential_spec(self) -> dict:
        weak = {"family": self.potential.family, **self.potential.params}
        if self.potential.family == "noise":
            weak.setdefault("seed", self.potential.seed)
        return {"weak": weak, "bounded": self.potential.bounded, "q": self.potential.q,
                "theta": self.potential.theta}

    @property
    def grid_obj(self) -> Grid:
        return Grid(self.grid.n, float(self.grid.length))

    def operator(self) -> EllipticOperator:
        grid = self.grid_obj
        return assemble(coefficient_family(grid, **self.coeff_spec()),
                        potential_family(grid, **self.potential_spec()), grid)

    def simulation(self) -> SimulationConfig:
        s = self.sim
        return SimulationConfig(p=float(s.p), dt=float(s.dt), t_max=float(s.t_max),
                                blowup_threshold=float(s.blowup_threshold), weight_a=float(s.weight_a),
                                n=self.grid.n, length=float(self.grid.length), coeff=self.coeff_spec(),
                                potential=self.potential_spec(), amplitude=float(s.amplitude),
                                width=float(s.width), seed=int(s.seed), cadence=int(s.cadence))


def canonical(value):
    """Plain, JSON-safe values with floats rounded to 12 significant digits."""
    if isinstance(value, dict):
        return {str(k): canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [canonical(v) for v in value]
    if isinstance(value, np.ndarray):
        return [canonical(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not np.isfinite(v):
            return str(v)
        return float(f"{v:.12g}")
    if isinstance(value, complex):
        return {"re": canonical(value.real), "im": canonical(value.imag)}
    return value
