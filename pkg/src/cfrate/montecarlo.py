"""Monte Carlo reference estimates for the rate statistics.

Two fidelities are offered. In "large_scale_only" mode just the access
point deployment is random and the conditional capacity and dispersion
given the aggregate gain X are evaluated in closed form, which is the
ensemble the Laplace-domain expressions describe. In "full" mode the
per-antenna fading and channel estimation error are drawn as well and the
conditional quantities come from the eigenvalues of the estimated
channel's Gram matrix; capacity and dispersion are first averaged over the
small-scale draws per deployment and the reported variances are then taken
across deployments, so both modes estimate spatial variability.

Streams are counter-based (Philox) and seeded per batch from a
(seed, purpose, batch) tuple, so results are reproducible regardless of
execution order and the two modes see identical deployments for identical
seeds.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import DerivedParams, SystemConfig, derive_params
from .errors import InternalConsistencyError, NonHermitianError

_TAG_TOPOLOGY = 0
_TAG_FADING = 1
_TAG_MGF = 2

_CHUNK_ENTRIES = 4_000_000  # complex entries drawn per fading chunk


def _stream(seed: int, tag: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, tag, batch))))


def _as_params(cfg) -> DerivedParams:
    if isinstance(cfg, DerivedParams):
        return cfg
    if isinstance(cfg, SystemConfig):
        return derive_params(cfg)
    raise TypeError(f"expected SystemConfig or DerivedParams, got {type(cfg)}")


def sample_ppp_disk(lam: float, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Distances from the centre for one Poisson deployment on the disk."""
    n = rng.poisson(lam * math.pi * radius ** 2)
    return radius * np.sqrt(rng.random(n))


def path_loss(distances, alpha: float) -> np.ndarray:
    """Bounded power path loss min(1, d^-alpha)."""
    d = np.asarray(distances, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(d <= 1.0, 1.0, d ** (-alpha))


def aggregate_fading(distances, alpha: float) -> float:
    """Total gain X = sum of path losses over one deployment."""
    return float(path_loss(distances, alpha).sum())


def _batch_topologies(rng, lam, radius, alpha, count):
    """Counts and concatenated per-point gains for `count` deployments."""
    counts = rng.poisson(lam * math.pi * radius ** 2, size=count)
    total = int(counts.sum())
    d = radius * np.sqrt(rng.random(total))
    return counts, path_loss(d, alpha)


def draw_aggregate_fading(lam: float, radius: float, alpha: float,
                          trials: int, seed: int = 0) -> np.ndarray:
    """Vector of aggregate gains X across independent deployments."""
    rng = _stream(seed, _TAG_MGF, 0)
    counts, gains = _batch_topologies(rng, lam, radius, alpha, trials)
    owner = np.repeat(np.arange(trials), counts)
    return np.bincount(owner, weights=gains, minlength=trials)


def conditional_statistics(x, p: DerivedParams):
    """Capacity and dispersion conditioned on the aggregate gain.

    Given X the link behaves as M parallel streams of SNR X / beta, so
    C = M log2(1 + X/beta) and V = M (1 - beta^2 / (beta + X)^2).
    """
    x = np.asarray(x, dtype=float)
    ratio = p.beta / (p.beta + x)
    c = p.m * np.log2(1.0 + x / p.beta)
    v = p.m * (1.0 - ratio * ratio)
    return c, v


def hermitian_eigenvalues(h: np.ndarray, tol: float = 1e-13,
                          max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each pivot is first made real by a phase factor and then annihilated by
    a real rotation. Sweeps continue until the off-diagonal Frobenius mass
    is negligible against the matrix scale. Returns eigenvalues ascending.
    """
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    if a.ndim != 2 or a.shape != (n, n):
        raise NonHermitianError(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.abs(a).max()) or 1.0
    if float(np.abs(a - a.conj().T).max()) > 1e-10 * scale:
        raise NonHermitianError("matrix is not Hermitian within tolerance")
    a = 0.5 * (a + a.conj().T)
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, float(np.sum(np.abs(a) ** 2)
                                       - np.sum(np.abs(np.diag(a)) ** 2))))
        if off <= tol * scale * n:
            break
        for piv_p in range(n - 1):
            for piv_q in range(piv_p + 1, n):
                z = a[piv_p, piv_q]
                m = abs(z)
                if m <= tol * scale:
                    continue
                phase = z / m
                d_pp = a[piv_p, piv_p].real
                d_qq = a[piv_q, piv_q].real
                tau = (d_qq - d_pp) / (2.0 * m)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                u = np.eye(n, dtype=complex)
                u[piv_p, piv_p] = c
                u[piv_p, piv_q] = s
                u[piv_q, piv_p] = -s * np.conj(phase)
                u[piv_q, piv_q] = c * np.conj(phase)
                a = u.conj().T @ a @ u
    return np.sort(np.real(np.diag(a)))


def _snr_factor(p: DerivedParams) -> float:
    """Per-eigenvalue SNR weight rho / (M (1 + rho sigma_e2 theta))."""
    return p.rho / (p.m * (1.0 + p.rho * p.sigma_e2 * p.theta))


def capacity_from_spectrum(spectrum, p: DerivedParams) -> float:
    """Conditional capacity in bits given the Gram spectrum."""
    mu = np.maximum(np.asarray(spectrum, dtype=float), 0.0)
    return float(np.log2(1.0 + _snr_factor(p) * mu).sum())


def dispersion_from_spectrum(spectrum, p: DerivedParams) -> float:
    """Conditional dispersion in [0, M) given the Gram spectrum."""
    mu = np.maximum(np.asarray(spectrum, dtype=float), 0.0)
    return float(p.m - np.sum(1.0 / (1.0 + _snr_factor(p) * mu) ** 2))


def sample_gram_spectrum(distances, cfg, rng: np.random.Generator) -> np.ndarray:
    """Eigenvalues of the estimated channel Gram matrix for one deployment.

    Accumulates one access point at a time into an M x M workspace, so the
    stacked channel is never materialised. This is the readable reference
    route; mc_moments uses an equivalent batched evaluation for throughput.
    """
    p = _as_params(cfg)
    gram = np.zeros((p.m, p.m), dtype=complex)
    scale2 = (1.0 - p.sigma_e2) * path_loss(distances, p.alpha)
    for s2 in scale2:
        z = rng.standard_normal((p.l, p.m)) + 1j * rng.standard_normal((p.l, p.m))
        h_n = math.sqrt(s2 / 2.0) * z
        gram += h_n.conj().T @ h_n
    return hermitian_eigenvalues(gram)


def _spectrum_statistics(mu, g_snr, m):
    """Capacity and dispersion from Gram eigenvalues, batched over axis 0."""
    mu = np.maximum(mu, 0.0)
    snr = g_snr * mu
    c = np.log2(1.0 + snr).sum(axis=-1)
    v = m - np.sum(1.0 / (1.0 + snr) ** 2, axis=-1)
    if np.any(c < -1e-12) or np.any(v < -1e-9) or np.any(v > m * (1 + 1e-12)):
        raise InternalConsistencyError(
            "conditional statistics left their feasible range")
    return c, np.clip(v, 0.0, m)


def _full_mode_batch(counts, gains, p: DerivedParams, inner, rng):
    """Per-deployment small-scale averages of capacity and dispersion."""
    g_snr = _snr_factor(p)
    n_trials = len(counts)
    c_out = np.zeros(n_trials)
    v_out = np.zeros(n_trials)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    for t in range(n_trials):
        n_ap = int(counts[t])
        if n_ap == 0:
            continue  # no access points: zero gain, zero rate
        scale = np.sqrt((1.0 - p.sigma_e2) * gains[offsets[t]:offsets[t + 1]] / 2.0)
        chunk = max(1, _CHUNK_ENTRIES // (n_ap * p.l * p.m))
        done = 0
        c_sum = 0.0
        v_sum = 0.0
        while done < inner:
            k = min(chunk, inner - done)
            shape = (k, n_ap, p.l, p.m)
            z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            h = scale[None, :, None, None] * z
            gram = np.einsum("knlm,knlp->kmp", h.conj(), h)
            mu = np.linalg.eigvalsh(gram)
            trace = np.trace(gram, axis1=1, axis2=2).real
            if np.any(np.abs(mu.sum(axis=1) - trace) >
                      1e-8 * np.maximum(1.0, np.abs(trace))):
                raise InternalConsistencyError(
                    "Gram eigenvalue sum disagrees with its trace")
            c_k, v_k = _spectrum_statistics(mu, g_snr, p.m)
            c_sum += float(c_k.sum())
            v_sum += float(v_k.sum())
            done += k
        c_out[t] = c_sum / inner
        v_out[t] = v_sum / inner
    return c_out, v_out


@dataclass(frozen=True)
class MomentEstimates:
    """Sampled moments of conditional capacity C and dispersion V.

    Variances are across deployments in both modes; in full mode the
    conditional values are first averaged over the small-scale draws, so
    the variance measures spatial variability there too. Standard errors
    come from batch means over independent seed streams.
    """

    mean_capacity: float
    var_capacity: float
    mean_dispersion: float
    var_dispersion: float
    se_mean_capacity: float
    se_var_capacity: float
    se_mean_dispersion: float
    se_var_dispersion: float
    trials: int
    inner: int
    mode: str


def _batch_stats(values, batch_sizes):
    """Global mean/var plus batch-means standard errors."""
    mean = float(values.mean())
    var = float(values.var(ddof=1))
    means = []
    vars_ = []
    start = 0
    for size in batch_sizes:
        chunk = values[start:start + size]
        start += size
        means.append(chunk.mean())
        vars_.append(chunk.var(ddof=1) if size > 1 else math.nan)
    means = np.asarray(means)
    vars_ = np.asarray(vars_)
    nb = len(batch_sizes)
    if nb > 1:
        se_mean = float(means.std(ddof=1) / math.sqrt(nb))
        se_var = (math.inf if np.isnan(vars_).any()
                  else float(vars_.std(ddof=1) / math.sqrt(nb)))
    else:
        se_mean = math.inf
        se_var = math.inf
    return mean, var, se_mean, se_var


def mc_moments(cfg, trials: int = 100000, inner_small_scale: int = 50,
               mode: str = "large_scale_only", seed: int = 0) -> MomentEstimates:
    """Monte Carlo estimates of E[C], Var[C], E[V], Var[V].

    cfg may be a SystemConfig or a DerivedParams. mode selects how much
    randomness is simulated: "large_scale_only" draws deployments and uses
    the conditional closed forms, "full" also draws per-antenna fading and
    evaluates the estimated channel's Gram spectrum, averaging
    inner_small_scale fading realisations per deployment.
    """
    if mode not in ("large_scale_only", "full"):
        raise ValueError(f"mode must be 'large_scale_only' or 'full', got {mode!r}")
    if trials < 2:
        raise ValueError(f"need at least 2 trials for variances, got {trials}")
    if mode == "full" and inner_small_scale < 1:
        raise ValueError(f"inner_small_scale must be >= 1, got {inner_small_scale}")
    p = _as_params(cfg)

    n_batches = min(32, trials)
    batch_sizes = [len(ix) for ix in np.array_split(np.arange(trials), n_batches)]
    inner = inner_small_scale if mode == "full" else 1

    c_parts = []
    v_parts = []
    for b, nb in enumerate(batch_sizes):
        topo_rng = _stream(seed, _TAG_TOPOLOGY, b)
        counts, gains = _batch_topologies(topo_rng, p.lam, p.radius, p.alpha, nb)
        if mode == "large_scale_only":
            owner = np.repeat(np.arange(nb), counts)
            x = np.bincount(owner, weights=gains, minlength=nb)
            c_b, v_b = conditional_statistics(x, p)
        else:
            fading_rng = _stream(seed, _TAG_FADING, b)
            c_b, v_b = _full_mode_batch(counts, gains, p, inner, fading_rng)
        c_parts.append(np.asarray(c_b, dtype=float))
        v_parts.append(np.asarray(v_b, dtype=float))

    c_all = np.concatenate(c_parts)
    v_all = np.concatenate(v_parts)
    mean_c, var_c, se_mc, se_vc = _batch_stats(c_all, batch_sizes)
    mean_v, var_v, se_mv, se_vv = _batch_stats(v_all, batch_sizes)
    return MomentEstimates(
        mean_capacity=mean_c, var_capacity=var_c,
        mean_dispersion=mean_v, var_dispersion=var_v,
        se_mean_capacity=se_mc, se_var_capacity=se_vc,
        se_mean_dispersion=se_mv, se_var_dispersion=se_vv,
        trials=trials, inner=inner, mode=mode,
    )
