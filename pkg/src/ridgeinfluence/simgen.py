"""Synthetic outcomes with planted expanders and shrinkers.

Outcomes follow ``y = X beta + eps`` with ``beta`` a small perturbation of the
first principal-component loadings, so the signal is easy to see against the
first PC. Influential points are planted by shifting single residuals.

Random numbers come from NumPy's PCG64 generator seeded with the scenario
seed, which gives the same stream on every platform.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import IndexOutOfRange, InputError
from .spectral import RawDataset, decompose, pc_scores, standardize

ROLES = ("expander", "shrinker")


@dataclass(frozen=True)
class Injection:
    """A residual shift on one row, with the role it is expected to produce.

    ``expected`` may be set with a zero shift for rows that become influential
    only through their neighbours.
    """

    index: int
    residual_shift: float = 0.0
    expected: str = None

    def __post_init__(self):
        if self.expected is not None and self.expected not in ROLES:
            raise InputError(f"unknown role {self.expected!r}")


@dataclass(frozen=True)
class ScenarioSpec:
    name: str = "custom"
    seed: int = 0
    coefficient_rule: str = "perturbed-PC1"
    signal_ratio: float = 10.0
    beta_perturbation: float = None
    noise_sd: float = 1.0
    injections: tuple = ()
    exclusions: tuple = ()

    def __post_init__(self):
        if self.coefficient_rule != "perturbed-PC1":
            raise InputError(f"unsupported coefficient rule {self.coefficient_rule!r}")
        idx = [inj.index for inj in self.injections]
        if len(set(idx)) != len(idx):
            raise InputError("injection indices must be distinct")
        if set(idx) & set(self.exclusions):
            raise InputError("a row cannot be both injected and excluded")
        if self.noise_sd < 0:
            raise InputError("noise_sd must be non-negative")

    def validate(self, n):
        for k in [inj.index for inj in self.injections] + list(self.exclusions):
            if not 0 <= k < n:
                raise IndexOutOfRange(f"row {k} outside 0..{n - 1}")


@dataclass(frozen=True)
class SimulatedData:
    """Result of :func:`generate`.

    ``raw`` holds the kept rows with the synthetic outcome; ``truth`` maps
    0-based positions in ``raw`` to expected roles; ``kept`` maps those
    positions back to rows of the input covariates.
    """

    raw: RawDataset
    y: np.ndarray
    truth: dict
    kept: np.ndarray
    beta: np.ndarray = field(repr=False)


def pc1_coefficients(data, spec, rng):
    """Scaled first loading vector plus Gaussian jitter."""
    sp = decompose(data.X)
    n, p = data.X.shape
    v1 = sp.V[:, 0]
    scale = np.sqrt(spec.signal_ratio * spec.noise_sd**2 * (n - 1)) / sp.d[0]
    if spec.noise_sd == 0:
        scale = np.sqrt(spec.signal_ratio * (n - 1)) / sp.d[0]
    base = v1 * scale
    sd = spec.beta_perturbation
    if sd is None:
        sd = 0.01 * np.linalg.norm(base) / np.sqrt(p)
    return base + rng.normal(0.0, sd, size=p)


def generate(data, spec):
    """Simulate outcomes on standardized covariates ``data``.

    ``data`` is a :class:`~ridgeinfluence.spectral.StandardizedDataset`; only
    its covariates are used. Excluded rows are dropped after the outcome is
    drawn.
    """
    n = data.n
    spec.validate(n)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    beta = pc1_coefficients(data, spec, rng)
    eps = rng.normal(0.0, 1.0, size=n) * spec.noise_sd
    y = data.X @ beta + eps
    for inj in spec.injections:
        y[inj.index] += inj.residual_shift
    kept = np.setdiff1d(np.arange(n), np.asarray(spec.exclusions, dtype=int))
    position = {row: k for k, row in enumerate(kept)}
    truth = {position[inj.index]: inj.expected for inj in spec.injections if inj.expected}
    raw = RawDataset(
        data.X[kept],
        y[kept],
        tuple(data.row_labels[k] for k in kept) if data.row_labels else None,
        data.column_labels,
    )
    return SimulatedData(raw, y[kept], truth, kept, beta)


def synthetic_covariates(n=40, p=500, rank=3, seed=20240601, noise=1.2, twin_noise=0.35, extreme=3.6):
    """Low-rank-plus-noise stand-in for a gene-expression covariate matrix.

    Row 0 sits far out on the first factor and row 2 about one standard
    deviation out on the same side. Rows 1 and 3 are noisy copies of them
    (idiosyncratic noise scaled by ``twin_noise``), so each has a clear
    nearest neighbour.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    scores = rng.normal(size=(n, rank))
    scores[:, 0] = np.clip(scores[:, 0], -2.2, 2.2)
    scores[0, 0], scores[2, 0] = extreme, 1.5
    strengths = np.array([1.6, 1.0, 0.8])[:rank] if rank <= 3 else np.linspace(1.6, 0.6, rank)
    loadings = rng.normal(size=(rank, p)) * strengths[:, None]
    X = scores @ loadings + rng.normal(size=(n, p)) * noise
    X[1] = X[0] + rng.normal(size=p) * noise * twin_noise
    X[3] = X[2] + rng.normal(size=p) * noise * twin_noise
    return RawDataset(X, np.zeros(n), None, tuple(f"g{j + 1}" for j in range(p)))


def _nearest(X, i, exclude=()):
    dist = np.sum((X - X[i]) ** 2, axis=1)
    dist[i] = np.inf
    for k in exclude:
        dist[k] = np.inf
    return int(np.argmin(dist))


@dataclass(frozen=True)
class ScenarioTemplate:
    """Named recipe resolved against a concrete covariate matrix.

    ``shift`` is the planted residual size in units of ``noise_sd``.
    """

    name: str
    description: str
    kind: int
    shift: float = 5.0
    second_shift: float = 5.0
    noise_sd: float = 1.0
    signal_ratio: float = 10.0

    def anchors(self, data):
        """Rows used by the recipe.

        Returns ``(extreme, neighbour, moderate, partner, side)``: the row with
        the largest absolute PC1 score and its nearest neighbour, then a row on
        the same side between 0.5 and 1.5 PC1 standard deviations out that has
        the closest neighbour of its own, and that neighbour.
        """
        sp = decompose(data.X)
        scores, _ = pc_scores(sp, 1)
        extreme = int(np.argmax(np.abs(scores)))
        neighbour = _nearest(data.X, extreme)
        side = float(np.sign(scores[extreme]))
        spread = scores.std(ddof=1)
        taken = (extreme, neighbour)
        band = [
            k for k in range(data.n)
            if k not in taken and np.sign(scores[k]) == side and 0.5 <= abs(scores[k]) / spread <= 1.5
        ]
        if not band:
            band = [k for k in range(data.n) if k not in taken]

        def gap(k):
            j = _nearest(data.X, k, exclude=taken)
            return float(np.sum((data.X[k] - data.X[j]) ** 2)), k

        moderate = min(band, key=gap)
        partner = _nearest(data.X, moderate, exclude=taken)
        return extreme, neighbour, moderate, partner, side

    def build(self, data, seed=0):
        e, nb, m, mp, side = self.anchors(data)
        big = self.shift * self.noise_sd
        common = dict(name=self.name, seed=seed, noise_sd=self.noise_sd, signal_ratio=self.signal_ratio)
        if self.kind == 1:
            return ScenarioSpec(**common)
        if self.kind == 2:
            inj = (Injection(e, side * big, "expander"),)
            return ScenarioSpec(injections=inj, exclusions=(nb,), **common)
        if self.kind == 3:
            inj = (Injection(e, -side * big, "shrinker"),)
            return ScenarioSpec(injections=inj, exclusions=(nb,), **common)
        if self.kind == 4:
            inj = (Injection(e, side * big, "expander"), Injection(nb, 0.0, "shrinker"))
            return ScenarioSpec(injections=inj, **common)
        if self.kind == 5:
            inj = (
                Injection(e, side * big, "expander"),
                Injection(m, side * self.second_shift * self.noise_sd, "expander"),
                Injection(mp, 0.0, "shrinker"),
            )
            return ScenarioSpec(injections=inj, exclusions=(nb,), **common)
        raise InputError(f"unknown scenario kind {self.kind}")


def builtin_scenarios():
    return [
        ScenarioTemplate("no-influence", "no influential points", 1),
        ScenarioTemplate("expander", "one expander on the extreme PC1 row, its neighbour removed", 2),
        ScenarioTemplate("shrinker", "same row shifted the other way: one shrinker", 3),
        ScenarioTemplate("expander-shrinker", "the expander with its neighbour kept, which turns shrinker", 4),
        ScenarioTemplate("two-expanders", "a second, milder expander closer to the mean; its neighbour turns shrinker", 5),
    ]


def scenario_by_name(name):
    for t in builtin_scenarios():
        if name in (t.name, f"scenario{t.kind}", str(t.kind)):
            return t
    raise InputError(f"unknown scenario {name!r}")


def write_spec(spec, path):
    """Store a scenario as a small INI file."""
    cfg = configparser.ConfigParser()
    cfg["scenario"] = {
        "name": spec.name,
        "seed": str(spec.seed),
        "coefficient_rule": spec.coefficient_rule,
        "signal_ratio": repr(float(spec.signal_ratio)),
        "noise_sd": repr(float(spec.noise_sd)),
        "beta_perturbation": "" if spec.beta_perturbation is None else repr(float(spec.beta_perturbation)),
        # row:shift:role, rows 0-based
        "injections": ", ".join(
            f"{inj.index}:{float(inj.residual_shift)!r}:{inj.expected or ''}" for inj in spec.injections
        ),
        "exclusions": ", ".join(str(k) for k in spec.exclusions),
    }
    with open(path, "w") as fh:
        cfg.write(fh)


def read_spec(path):
    cfg = configparser.ConfigParser()
    if not cfg.read(path):
        raise InputError(f"cannot read scenario file {path}")
    if "scenario" not in cfg:
        raise InputError(f"{path}: missing [scenario] section")
    s = cfg["scenario"]
    try:
        injections = []
        for item in filter(None, (t.strip() for t in s.get("injections", "").split(","))):
            parts = item.split(":")
            role = parts[2].strip() if len(parts) > 2 and parts[2].strip() else None
            injections.append(Injection(int(parts[0]), float(parts[1]), role))
        exclusions = tuple(int(t) for t in s.get("exclusions", "").split(",") if t.strip())
        bp = s.get("beta_perturbation", "").strip()
        return ScenarioSpec(
            name=s.get("name", "custom"),
            seed=s.getint("seed", 0),
            coefficient_rule=s.get("coefficient_rule", "perturbed-PC1"),
            signal_ratio=s.getfloat("signal_ratio", 10.0),
            beta_perturbation=float(bp) if bp else None,
            noise_sd=s.getfloat("noise_sd", 1.0),
            injections=tuple(injections),
            exclusions=exclusions,
        )
    except (ValueError, IndexError) as exc:
        raise InputError(f"{path}: malformed scenario entry ({exc})") from None


def with_seed(spec, seed):
    return replace(spec, seed=seed)


def stand_in_dataset():
    """Standardized synthetic covariates used when no covariate file is given."""
    return standardize(synthetic_covariates())
