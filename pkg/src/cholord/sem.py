"""Linear structural equation models: types, population covariances, sampling.

A model is ``X = B X + eps`` with independent mean-zero noise, acyclic weights
``B`` and a known topological ordering. The population covariance follows as
``(I - B)^{-1} diag(noise_vars) (I - B)^{-T}``. All randomized constructors
take explicit seeds and use numpy's PCG64 generator, so every dataset is
bit-reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, InvalidRange

NOISE_KINDS = ("gaussian_equal", "gaussian_hetero", "gaussian_mixture")


@dataclass(frozen=True)
class Ordering:
    """A permutation of ``{0..p-1}`` read as 'position k holds variable perm[k]'."""

    perm: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "perm", tuple(int(i) for i in self.perm))
        if sorted(self.perm) != list(range(len(self.perm))):
            raise InvalidRange(f"{self.perm} is not a permutation of 0..{len(self.perm) - 1}")

    @property
    def p(self) -> int:
        return len(self.perm)

    @cached_property
    def positions(self) -> tuple[int, ...]:
        """Inverse permutation: ``positions[i]`` is the slot of variable ``i``."""
        inv = [0] * self.p
        for k, i in enumerate(self.perm):
            inv[i] = k
        return tuple(inv)

    def permute_matrix(self, S: np.ndarray) -> np.ndarray:
        """Row-and-column permuted view ``S[perm, perm]`` as a new array."""
        idx = np.asarray(self.perm)
        return np.asarray(S)[np.ix_(idx, idx)]

    @classmethod
    def identity(cls, p: int) -> "Ordering":
        return cls(tuple(range(p)))


@dataclass(frozen=True)
class WeightedDag:
    """Weighted acyclic graph plus noise variances.

    ``edges`` are ``(parent, child, weight)`` triples; every edge must respect
    ``order`` (parent in an earlier slot), which guarantees acyclicity.
    """

    p: int
    edges: tuple[tuple[int, int, float], ...]
    noise_vars: np.ndarray
    order: Ordering

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "edges", tuple((int(u), int(v), float(w)) for u, v, w in self.edges)
        )
        nv = np.asarray(self.noise_vars, dtype=float)
        object.__setattr__(self, "noise_vars", nv)
        if self.order.p != self.p or nv.shape != (self.p,):
            raise DimensionMismatch("order / noise_vars do not match node count")
        if np.any(nv <= 0.0):
            raise InvalidRange("noise variances must be strictly positive")
        pos = self.order.positions
        seen = set()
        for u, v, w in self.edges:
            if not (0 <= u < self.p and 0 <= v < self.p) or u == v:
                raise InvalidRange(f"edge ({u}, {v}) is out of range")
            if pos[u] >= pos[v]:
                raise InvalidRange(f"edge ({u}, {v}) violates the embedded ordering")
            if (u, v) in seen:
                raise InvalidRange(f"duplicate edge ({u}, {v})")
            seen.add((u, v))

    def adjacency(self) -> np.ndarray:
        """Weight matrix ``B`` with ``B[child, parent] = weight``."""
        B = np.zeros((self.p, self.p))
        for u, v, w in self.edges:
            B[v, u] = w
        return B

    def parents(self, node: int) -> list[tuple[int, float]]:
        return [(u, w) for u, v, w in self.edges if v == node]

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "order": list(self.order.perm),
            "edges": [[u, v, w] for u, v, w in self.edges],
            "noise_vars": [float(x) for x in self.noise_vars],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "WeightedDag":
        return cls(
            p=int(d["p"]),
            edges=tuple((e[0], e[1], e[2]) for e in d["edges"]),
            noise_vars=np.asarray(d["noise_vars"], dtype=float),
            order=Ordering(tuple(d["order"])),
        )


@dataclass(frozen=True)
class Dataset:
    """An n x p sample matrix with optional column names. No NaN/Inf allowed."""

    values: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        X = np.asarray(self.values, dtype=float)
        if X.ndim != 2:
            raise DimensionMismatch(f"expected a 2-d sample matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise InvalidRange("sample matrix contains NaN or Inf")
        object.__setattr__(self, "values", X)
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != X.shape[1]:
                raise DimensionMismatch("column names do not match column count")
            object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class NoiseSpec:
    """Noise family for SEM sampling.

    ``gaussian_equal`` uses one shared ``variance``; ``gaussian_hetero`` draws
    per-node variances uniformly from ``var_range``; ``gaussian_mixture``
    draws variances from ``var_range`` and samples a symmetric two-component
    Gaussian mixture with component means ``+-mean_scale * sd`` and component
    variance chosen so the total variance hits the target.
    """

    kind: str
    variance: float | None = None
    var_range: tuple[float, float] | None = None
    mean_scale: float = 0.8

    def __post_init__(self) -> None:
        if self.kind not in NOISE_KINDS:
            raise InvalidRange(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if self.kind == "gaussian_equal":
            if self.variance is None or self.variance <= 0:
                raise InvalidRange("gaussian_equal requires a positive `variance`")
        else:
            if self.var_range is None:
                raise InvalidRange(f"{self.kind} requires `var_range`")
            lo, hi = self.var_range
            if not (0 < lo <= hi):
                raise InvalidRange(f"invalid variance range ({lo}, {hi})")
        if not (0.0 <= self.mean_scale < 1.0):
            raise InvalidRange("mean_scale must lie in [0, 1)")

    def draw_variances(self, p: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "gaussian_equal":
            return np.full(p, float(self.variance))
        lo, hi = self.var_range
        return rng.uniform(lo, hi, size=p)

    def sample_noise(self, variances: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw an n x p noise matrix with the given per-column variances."""
        variances = np.asarray(variances, dtype=float)
        sd = np.sqrt(variances)
        if self.kind == "gaussian_mixture":
            mu = self.mean_scale * sd
            comp_sd = np.sqrt(variances - mu**2)
            signs = rng.choice([-1.0, 1.0], size=(n, variances.size))
            return signs * mu + rng.standard_normal((n, variances.size)) * comp_sd
        return rng.standard_normal((n, variances.size)) * sd


def population_covariance(dag: WeightedDag) -> np.ndarray:
    """Exact population covariance ``(I - B)^{-1} Lambda (I - B)^{-T}``.

    Computed with a triangular solve in the topological frame (where ``I - B``
    is unit lower triangular), then permuted back to natural variable order.
    """
    p = dag.p
    perm = np.asarray(dag.order.perm)
    pos = np.asarray(dag.order.positions)
    B = dag.adjacency()
    A = np.eye(p) - B[np.ix_(perm, perm)]
    Lfac = solve_triangular(
        A, np.diag(np.sqrt(dag.noise_vars[perm])), lower=True, check_finite=False
    )
    Sigma_ord = Lfac @ Lfac.T
    Sigma = Sigma_ord[np.ix_(pos, pos)]
    return 0.5 * (Sigma + Sigma.T)


def sample_sem(dag: WeightedDag, noise: NoiseSpec, n: int, seed) -> Dataset:
    """Draw ``n`` i.i.d. rows from the SEM, generating in topological order."""
    if n < 1:
        raise InvalidRange("need n >= 1")
    rng = np.random.default_rng(seed)
    X = noise.sample_noise(dag.noise_vars, n, rng)
    incoming: dict[int, list[tuple[int, float]]] = {}
    for u, v, w in dag.edges:
        incoming.setdefault(v, []).append((u, w))
    for node in dag.order.perm:
        for u, w in incoming.get(node, ()):
            X[:, node] += w * X[:, u]
    return Dataset(values=X)


def random_dag(
    p: int,
    expected_degree: float,
    weight_range: tuple[float, float] = (0.3, 1.0),
    seed=0,
    noise_vars: np.ndarray | None = None,
) -> WeightedDag:
    """Random DAG with a uniformly random ordering and Bernoulli edges.

    Each of the ``p(p-1)/2`` order-respecting pairs becomes an edge with
    probability ``min(1, expected_degree / (p - 1))``, so the expected edge
    count is ``p * expected_degree / 2``. Weight magnitudes are uniform in
    ``weight_range`` with random sign.
    """
    if p < 1:
        raise InvalidRange("need p >= 1")
    lo, hi = weight_range
    if not (0 < lo < hi):
        raise InvalidRange(f"weight range must satisfy 0 < lo < hi, got ({lo}, {hi})")
    rng = np.random.default_rng(seed)
    perm = tuple(int(i) for i in rng.permutation(p))
    prob = 0.0 if p == 1 else min(1.0, expected_degree / (p - 1))
    edges = []
    for a in range(p):
        for b in range(a + 1, p):
            if rng.random() < prob:
                w = rng.uniform(lo, hi) * (1.0 if rng.random() < 0.5 else -1.0)
                edges.append((perm[a], perm[b], w))
    nv = np.ones(p) if noise_vars is None else np.asarray(noise_vars, dtype=float)
    return WeightedDag(p=p, edges=tuple(edges), noise_vars=nv, order=Ordering(perm))


def make_bivariate(
    kind: str,
    model: str = "linear",
    noise: NoiseSpec | None = None,
    n: int = 500,
    seed=0,
    weight: float | None = None,
    weight_range: tuple[float, float] = (0.9, 1.3),
    degree: int = 5,
) -> tuple[Dataset, str]:
    """Two-column additive-noise sample plus its ground-truth label.

    ``kind`` is one of ``forward`` (column 0 causes column 1), ``backward``,
    or ``none``. The linear model uses ``weight`` if given, else a random-sign
    magnitude from ``weight_range``. The polynomial model maps the parent
    through a random degree-``degree`` polynomial whose output is rescaled to
    unit sample variance before noise is added, so the noise-to-signal ratio
    stays comparable across draws. A backward pair is the forward construction
    with the two columns swapped, which keeps the swap symmetry exact.
    """
    if kind not in ("forward", "backward", "none"):
        raise InvalidRange(f"unknown kind {kind!r}")
    if model not in ("linear", "polynomial"):
        raise InvalidRange(f"unknown model {model!r}")
    if noise is None:
        noise = NoiseSpec("gaussian_equal", variance=1.0)
    rng = np.random.default_rng(seed)
    variances = noise.draw_variances(2, rng)
    eps = noise.sample_noise(variances, n, rng)
    if kind == "none":
        return Dataset(values=eps), kind

    parent = eps[:, 0]
    if model == "linear":
        if weight is None:
            lo, hi = weight_range
            weight = rng.uniform(lo, hi) * (1.0 if rng.random() < 0.5 else -1.0)
        contrib = weight * parent
    else:
        coeffs = rng.uniform(-1.0, 1.0, size=degree)
        contrib = np.zeros_like(parent)
        for d, c in enumerate(coeffs, start=1):
            contrib += c * parent**d
        sd = contrib.std()
        if sd > 0:
            contrib = contrib / sd
    child = contrib + eps[:, 1]
    cols = (parent, child) if kind == "forward" else (child, parent)
    return Dataset(values=np.column_stack(cols)), kind


def scenario_noise(case: int) -> NoiseSpec:
    """Noise family for the three simulation scenarios.

    Case 1: equal Gaussian variances 0.7. Case 2: Gaussian with per-node
    variances uniform in [0.7, 1.7]. Case 3: two-component Gaussian mixture
    with target variances uniform in [0.7, 1.7].
    """
    if case == 1:
        return NoiseSpec("gaussian_equal", variance=0.7)
    if case == 2:
        return NoiseSpec("gaussian_hetero", var_range=(0.7, 1.7))
    if case == 3:
        return NoiseSpec("gaussian_mixture", var_range=(0.7, 1.7))
    raise InvalidRange(f"case must be 1, 2 or 3, got {case}")


def make_scenario(
    case: int,
    p: int,
    n: int,
    expected_degree: float = 2.0,
    weight_range: tuple[float, float] = (0.3, 1.0),
    seed=0,
) -> tuple[Dataset, WeightedDag]:
    """Generate one scenario replicate: a random DAG and a sample from it."""
    import dataclasses

    spec = scenario_noise(case)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    s_graph, s_vars, s_sample = ss.spawn(3)
    dag = random_dag(p, expected_degree, weight_range, seed=s_graph)
    variances = spec.draw_variances(p, np.random.default_rng(s_vars))
    dag = dataclasses.replace(dag, noise_vars=variances)
    data = sample_sem(dag, spec, n, seed=s_sample)
    return data, dag
