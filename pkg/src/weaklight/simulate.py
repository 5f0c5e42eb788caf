"""
Monte Carlo measurement records, maximum-likelihood estimation of ``g``,
ensemble comparison against the Cramer-Rao bound, and semiclassical
samplers for strong light.

Discrete schemes (direct, gjc) are sampled from the weak-light Born
distribution. Local continuous schemes (heterodyne, homodyne) are sampled
from their exact Gaussian outcome law on the full thermal state, and
estimated with that Gaussian likelihood.
"""

from dataclasses import dataclass, field
import io

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .fisher import (
    SCHEMES,
    cramer_rao,
    fisher_analytic,
    fisher_gaussian,
    gaussian_outcome_covariance,
    scheme_povm,
)
from .povm_catalog import DIRECT_LABELS, beam_splitter_fields, born_distribution
from .thermal_model import (
    CoherenceParams,
    build_coherence_matrix,
    heterodyne_output_covariance,
    sample_fields,
    stream,
    weak_density_matrix,
    weak_density_operator,
)

DISCRETE = ("direct", "gjc")
RECORD_VERSION = "weaklight-record v1"
COLUMNS = {
    "direct": ("delta", "n", "m"),
    "gjc": ("delta", "y"),
    "heterodyne": ("delta", "mu_re", "mu_im", "nu_re", "nu_im"),
    "homodyne": ("delta", "x", "y"),
}


def alternating_schedule(m, delta1=0.0):
    """Phases ``delta1, delta1 + pi/2, delta1, ...`` for ``m`` shots."""
    d = np.full(m, float(delta1))
    d[1::2] += np.pi / 2
    return d


def _schedule(schedule, m):
    if schedule is None:
        return alternating_schedule(m)
    arr = np.asarray(schedule, dtype=float)
    if arr.ndim == 0:
        return np.full(m, float(arr))
    if len(arr) != m:
        raise ValueError(f"schedule has {len(arr)} phases for {m} shots")
    return arr


@dataclass
class MeasurementRecord:
    """Per-shot settings and outcomes of one simulated run.

    ``outcomes`` holds label indices for discrete schemes (into the POVM
    labels), complex ``(mu, nu)`` rows for heterodyne and real ``(x, y)``
    rows for homodyne.
    """

    scheme: str
    epsilon: float
    deltas: np.ndarray
    outcomes: np.ndarray
    g_true: complex = None
    seed: int = None
    stream: int = 0

    def __len__(self):
        return len(self.deltas)


def sample_record(params, scheme, schedule=None, m=1, seed=None, stream_index=0, rng=None):
    """Draw ``m`` independent shots of ``scheme`` on the thermal state.

    Either ``rng`` or ``seed`` must be given; with ``seed`` the generator is
    split stream ``stream_index`` of that master seed.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if m < 0:
        raise ValueError("m must be >= 0")
    if rng is None:
        if seed is None:
            raise ValueError("a seed or a generator is required")
        rng = stream(seed, stream_index)
    deltas = _schedule(schedule, m)
    eps, g = params.epsilon, params.g
    if scheme in DISCRETE:
        rho = weak_density_operator(params)
        out = np.empty(m, dtype=np.int64)
        for d in np.unique(deltas):
            idx = np.flatnonzero(deltas == d)
            p = born_distribution(rho, scheme_povm(scheme, d)).probabilities
            cdf = np.cumsum(np.clip(p, 0.0, None))
            cdf /= cdf[-1]
            out[idx] = np.searchsorted(cdf, rng.random(len(idx)), side="right")
    elif scheme == "heterodyne":
        cov = heterodyne_output_covariance(build_coherence_matrix(params))
        mu, nu = sample_fields(cov, rng, m)
        out = np.stack([mu, nu], axis=-1).reshape(m, 2)
    else:
        out = np.empty((m, 2))
        for d in np.unique(deltas):
            idx = np.flatnonzero(deltas == d)
            chol = np.linalg.cholesky(gaussian_outcome_covariance("homodyne", eps, g, d))
            out[idx] = rng.standard_normal((len(idx), 2)) @ chol.T
    return MeasurementRecord(scheme, float(eps), deltas, out, g, seed, stream_index)


# -- likelihood models --------------------------------------------------------


class _LinearLikelihood:
    """Mean log-likelihood of a discrete record whose probabilities are
    affine in ``(g1, g2)``: ``P_y = a_y + b_y g1 + c_y g2``."""

    def __init__(self, record):
        rows, m = [], len(record)
        for d in np.unique(record.deltas):
            povm = scheme_povm(record.scheme, d)
            p0 = born_distribution(weak_density_matrix(record.epsilon, 0.0), povm).probabilities
            p1 = born_distribution(weak_density_matrix(record.epsilon, 1.0), povm, check=False).probabilities
            p2 = born_distribution(weak_density_matrix(record.epsilon, 1j), povm, check=False).probabilities
            counts = np.bincount(record.outcomes[record.deltas == d], minlength=len(p0))
            rows.append(np.stack([p0, p1 - p0, p2 - p0, counts / m], axis=1))
        tab = np.concatenate(rows) if rows else np.zeros((0, 4))
        tab = tab[tab[:, 3] > 0]
        self.a, self.b, self.c, self.w = tab.T
        self.degenerate = m == 0 or bool(np.all((self.b == 0) & (self.c == 0)))

    def value(self, g1, g2):
        g1, g2 = np.asarray(g1, float), np.asarray(g2, float)
        p = self.a + self.b * g1[..., None] + self.c * g2[..., None]
        with np.errstate(divide="ignore", invalid="ignore"):
            ll = np.where(p > 0, self.w * np.log(np.where(p > 0, p, 1.0)), -np.inf)
        return ll.sum(axis=-1)

    def grad(self, g1, g2):
        p = self.a + self.b * g1 + self.c * g2
        return np.array([np.sum(self.w * self.b / p), np.sum(self.w * self.c / p)])

    def hess(self, g1, g2):
        p = self.a + self.b * g1 + self.c * g2
        q = self.w / p ** 2
        return -np.array([
            [np.sum(q * self.b * self.b), np.sum(q * self.b * self.c)],
            [np.sum(q * self.b * self.c), np.sum(q * self.c * self.c)],
        ])


class _HeterodyneLikelihood:
    """Mean complex-Gaussian log-likelihood with covariance ``Gamma + I``
    (constant terms dropped)."""

    def __init__(self, record):
        mu, nu = record.outcomes[:, 0], record.outcomes[:, 1]
        m = len(record)
        self.eps = record.epsilon
        self.c = 1.0 + 0.5 * self.eps
        self.k = 0.25 * self.eps ** 2
        self.s = float(np.mean(np.abs(mu) ** 2 + np.abs(nu) ** 2)) if m else 0.0
        cross = complex(np.mean(mu * np.conj(nu))) if m else 0j
        self.x, self.y = cross.real, cross.imag
        self.degenerate = m == 0 or self.eps == 0

    def value(self, g1, g2):
        g1, g2 = np.asarray(g1, float), np.asarray(g2, float)
        det = self.c ** 2 - self.k * (g1 ** 2 + g2 ** 2)
        t = self.c * self.s - self.eps * (g1 * self.x + g2 * self.y)
        return -np.log(det) - t / det

    def grad(self, g1, g2):
        det = self.c ** 2 - self.k * (g1 ** 2 + g2 ** 2)
        t = self.c * self.s - self.eps * (g1 * self.x + g2 * self.y)
        out = []
        for gi, si in ((g1, self.x), (g2, self.y)):
            dd = -2.0 * self.k * gi
            dt = -self.eps * si
            out.append(-dd / det - (dt * det - t * dd) / det ** 2)
        return np.array(out)

    hess = None


class _HomodyneLikelihood:
    """Mean bivariate-normal log-likelihood, one covariance per LO phase."""

    def __init__(self, record):
        m = len(record)
        self.eps = record.epsilon
        self.v = 0.5 * (1.0 + self.eps)
        groups = []
        for d in np.unique(record.deltas):
            o = record.outcomes[record.deltas == d]
            q = float(np.mean(o[:, 0] ** 2 + o[:, 1] ** 2))
            r = float(np.mean(o[:, 0] * o[:, 1]))
            groups.append((np.cos(d), np.sin(d), q, r, len(o) / m))
        self.groups = groups
        self.degenerate = m == 0 or self.eps == 0

    def _terms(self, g1, g2):
        for cd, sd, q, r, w in self.groups:
            rho = 0.5 * self.eps * (cd * g1 + sd * g2)
            yield cd, sd, q, r, w, rho, self.v ** 2 - rho ** 2

    def value(self, g1, g2):
        g1, g2 = np.asarray(g1, float), np.asarray(g2, float)
        total = np.zeros(np.broadcast(g1, g2).shape)
        for _, _, q, r, w, rho, a in self._terms(g1, g2):
            total = total + w * (-0.5 * np.log(a) - (self.v * q - 2.0 * rho * r) / (2.0 * a))
        return total

    def grad(self, g1, g2):
        out = np.zeros(2)
        for cd, sd, q, r, w, rho, a in self._terms(g1, g2):
            dl = rho / a + r / a - rho * (self.v * q - 2.0 * rho * r) / a ** 2
            out += w * dl * 0.5 * self.eps * np.array([cd, sd])
        return out

    hess = None


def _likelihood(record):
    if record.scheme in DISCRETE:
        return _LinearLikelihood(record)
    if record.scheme == "heterodyne":
        return _HeterodyneLikelihood(record)
    return _HomodyneLikelihood(record)


@dataclass(frozen=True)
class EstimationResult:
    """MLE of ``g`` from one record; ``loglik`` is the mean per shot."""

    g_hat: complex
    loglik: float
    converged: bool
    degenerate: bool = False
    on_boundary: bool = False
    iterations: int = 0


RADIUS = 1.0 - 1e-9
GRAD_TOL = 1e-9


def _project(g):
    r = np.hypot(*g)
    return g * (RADIUS / r) if r > RADIUS else g


def _num_hess(lik, g, h=1e-6):
    cols = []
    for e in np.eye(2):
        cols.append((lik.grad(*(g + h * e)) - lik.grad(*(g - h * e))) / (2 * h))
    hs = np.array(cols).T
    return 0.5 * (hs + hs.T)


def _rim_search(lik, g, f):
    phi = np.arctan2(g[1], g[0])

    def neg(a):
        return -float(lik.value(RADIUS * np.cos(a), RADIUS * np.sin(a)))

    def tangential(a):
        c, s = np.cos(a), np.sin(a)
        return float(lik.grad(RADIUS * c, RADIUS * s) @ np.array([-s, c]))

    res = minimize_scalar(neg, bounds=(phi - 0.5, phi + 0.5), method="bounded",
                          options={"xatol": 1e-12})
    a = res.x
    # value-based search resolves the angle only to ~sqrt(machine eps);
    # polish with a root of the analytic tangential derivative
    for width in (1e-7, 1e-5, 1e-3):
        lo, hi = a - width, a + width
        if tangential(lo) * tangential(hi) < 0:
            a = brentq(tangential, lo, hi, xtol=1e-15)
            break
    fa = -neg(a)
    if fa >= f:
        return RADIUS * np.array([np.cos(a), np.sin(a)]), fa
    return g, f


def mle_estimate(record, max_iter=200):
    """Maximum-likelihood ``g`` over the closed unit disk.

    A 41x41 grid seeds a damped Newton ascent with backtracking; iterates
    are projected onto ``|g| <= 1 - 1e-9``. Convergence means the (projected)
    gradient of the mean log-likelihood is below 1e-9. Records without
    information (no shots, or only vacuum outcomes) return ``g_hat = 0``
    with ``degenerate=True``.
    """
    lik = _likelihood(record)
    if lik.degenerate:
        return EstimationResult(0j, float("nan"), False, degenerate=True)
    ax = np.linspace(-1.0, 1.0, 41)
    g1, g2 = np.meshgrid(ax, ax, indexing="ij")
    inside = np.hypot(g1, g2) <= RADIUS
    vals = np.where(inside, lik.value(np.where(inside, g1, 0), np.where(inside, g2, 0)), -np.inf)
    i = int(np.argmax(vals))
    g = np.array([g1.ravel()[i], g2.ravel()[i]])
    f = float(lik.value(*g))
    converged, it = False, 0
    for it in range(1, max_iter + 1):
        grad = lik.grad(*g)
        r = np.hypot(*g)
        pgrad = grad
        if r >= RADIUS * (1 - 1e-12) and grad @ g > 0:
            pgrad = grad - (grad @ g) / (r * r) * g
        if np.linalg.norm(pgrad) < GRAD_TOL:
            converged = True
            break
        if pgrad is not grad:
            # outward gradient on the rim: the constrained optimum lies on
            # the circle, so search the angle instead of stepping radially
            g, f = _rim_search(lik, g, f)
            continue
        hs = lik.hess(*g) if lik.hess is not None else _num_hess(lik, g)
        w, v = np.linalg.eigh(hs)
        if w.max() < 0:
            step = -np.linalg.solve(hs, grad)
        else:
            step = grad / max(abs(w).max(), 1.0)
        t, moved = 1.0, False
        for _ in range(60):
            cand = _project(g + t * step)
            fc = float(lik.value(*cand))
            if fc >= f and np.isfinite(fc):
                moved = not np.allclose(cand, g, rtol=0, atol=1e-16)
                g, f = cand, fc
                break
            t *= 0.5
        if not moved:
            converged = np.linalg.norm(pgrad) < 1e-6
            break
    on_boundary = bool(np.hypot(*g) >= RADIUS * (1 - 1e-12))
    return EstimationResult(complex(g[0], g[1]), f, bool(converged), False, on_boundary, it)


# -- ensembles -----------------------------------------------------------------


def total_fisher(scheme, epsilon, g, deltas):
    """Fisher information of a whole record with the given per-shot phases."""
    phases, counts = np.unique(np.asarray(deltas, float), return_counts=True)
    f = np.zeros((2, 2))
    for d, n in zip(phases, counts):
        if scheme in DISCRETE:
            f += n * fisher_analytic(scheme, epsilon, g, d)
        else:
            f += n * fisher_gaussian(scheme, epsilon, g, d)
    return f


@dataclass
class EnsembleSummary:
    scheme: str
    params: CoherenceParams
    m: int
    trials: int
    seed: int
    estimates: np.ndarray
    mean: np.ndarray
    empirical_cov: np.ndarray
    crb: np.ndarray
    crb_variances: np.ndarray
    variance_ratio: np.ndarray
    degenerate: int
    converged: int
    streams: list = field(default_factory=list)

    @property
    def is_degenerate(self):
        return self.degenerate > 0 or self.trials < 2


def run_ensemble(params, scheme, m, trials, seed, schedule=None):
    """Repeat sample-then-estimate ``trials`` times on split streams ``0..trials-1``."""
    deltas = _schedule(schedule, m)
    est = np.zeros((trials, 2))
    n_deg = n_conv = 0
    for t in range(trials):
        rec = sample_record(params, scheme, deltas, m, seed=seed, stream_index=t)
        res = mle_estimate(rec)
        est[t] = res.g_hat.real, res.g_hat.imag
        n_deg += res.degenerate
        n_conv += res.converged
    cov = np.cov(est.T, ddof=1) if trials > 1 else np.full((2, 2), np.nan)
    if m > 0:
        bound = cramer_rao(total_fisher(scheme, params.epsilon, params.g, deltas))
        crb, crb_var = bound.covariance, bound.variances
    else:
        crb, crb_var = np.full((2, 2), np.inf), np.full(2, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.diag(cov) / crb_var
    return EnsembleSummary(
        scheme, params, m, trials, seed, est, est.mean(axis=0), cov, crb, crb_var,
        ratio, n_deg, n_conv, list(range(trials)),
    )


# -- semiclassical samplers ---------------------------------------------------


def semiclassical_direct_sampler(gamma, delta, rng, size):
    """Photon counts ``(n, m)`` at the combiner outputs for classical
    thermal fields: fields from the P function, then Poisson counts with
    means ``|u|^2`` and ``|v|^2``. Valid at any epsilon."""
    alpha, beta = sample_fields(gamma, rng, size)
    u, v = beam_splitter_fields(alpha, beta, delta)
    return rng.poisson(np.abs(u) ** 2), rng.poisson(np.abs(v) ** 2)


def semiclassical_heterodyne_sampler(gamma, rng, size):
    """Heterodyne outcomes as classical fields plus unit complex vacuum noise."""
    alpha, beta = sample_fields(gamma, rng, size)
    noise = (rng.standard_normal((size, 2)) + 1j * rng.standard_normal((size, 2))) / np.sqrt(2)
    return alpha + noise[:, 0], beta + noise[:, 1]


def heterodyne_sampler(gamma, rng, size):
    """Heterodyne outcomes drawn directly from covariance ``Gamma + I``."""
    return sample_fields(heterodyne_output_covariance(gamma), rng, size)


@dataclass(frozen=True)
class EmpiricalSnr:
    scheme: str
    signal: float
    noise: float
    ratio: float
    signal_se: float
    noise_se: float
    ratio_se: float
    shots: int
    protocol: str = "single"


def _jackknife(fn, batches):
    full = fn(batches, np.ones(len(batches), dtype=bool))
    loo = []
    for i in range(len(batches)):
        keep = np.ones(len(batches), dtype=bool)
        keep[i] = False
        loo.append(fn(batches, keep))
    loo = np.array(loo)
    b = len(batches)
    se = np.sqrt((b - 1) / b * np.sum((loo - loo.mean(axis=0)) ** 2, axis=0))
    return np.asarray(full), se


def empirical_snr(scheme, epsilon, g, shots, rng, delta1=0.0, n_batches=100):
    """Sample moments of the SNR statistic with jackknife standard errors.

    Heterodyne uses ``mu nu*`` from the semiclassical sampler. Direct
    detection uses ``n - m`` split evenly between phases ``delta1`` and
    ``delta1 + pi/2`` and averages signal and noise over the two.
    """
    gamma = build_coherence_matrix(CoherenceParams.from_complex(epsilon, g))
    if scheme == "heterodyne":
        mu, nu = semiclassical_heterodyne_sampler(gamma, rng, shots)
        z = mu * np.conj(nu)
        zb = np.array_split(np.stack([z, np.abs(z) ** 2], axis=1), n_batches)
        sums = np.array([[b[:, 0].sum(), b[:, 1].real.sum(), len(b)] for b in zb])

        def fn(s, keep):
            tot = s[keep].sum(axis=0)
            mean, second = tot[0] / tot[2].real, tot[1].real / tot[2].real
            sig = abs(mean) ** 2
            return [sig, second - sig, sig / (second - sig)]

        protocol = "single"
    elif scheme == "direct":
        half = shots // 2
        parts = []
        for d in (delta1, delta1 + np.pi / 2):
            n, m = semiclassical_direct_sampler(gamma, d, rng, half)
            x = (n - m).astype(float)
            parts.append(np.array([[b.sum(), (b * b).sum(), len(b)] for b in np.array_split(x, n_batches)]))
        sums = np.concatenate(parts, axis=1)

        def fn(s, keep):
            tot = s[keep].sum(axis=0)
            sig = noi = 0.0
            for k in (0, 3):
                mean = tot[k] / tot[k + 2]
                sig += 0.5 * mean ** 2
                noi += 0.5 * (tot[k + 1] / tot[k + 2] - mean ** 2)
            return [sig, noi, sig / noi]

        protocol = "two-phase average"
    else:
        raise ValueError(f"SNR statistic defined for heterodyne and direct only, not {scheme!r}")
    (sig, noi, ratio), (sse, nse, rse) = _jackknife(fn, sums)
    return EmpiricalSnr(scheme, float(sig), float(noi), float(ratio), float(sse), float(nse),
                        float(rse), int(shots), protocol)


# -- record serialization -----------------------------------------------------


def write_record(record, target):
    """Write ``record`` in the line-oriented text format.

    Header lines start with ``#`` and hold ``key=value`` pairs in the order
    version, scheme, epsilon, g1, g2, seed, stream, M, columns. Each
    following line is one shot, whitespace-separated, in column order.
    Floats are written with ``repr`` so a round trip is bit-exact.
    """
    g = record.g_true
    head = [
        RECORD_VERSION,
        f"scheme={record.scheme}",
        f"epsilon={record.epsilon!r}",
        f"g1={'' if g is None else repr(complex(g).real)}",
        f"g2={'' if g is None else repr(complex(g).imag)}",
        f"seed={'' if record.seed is None else record.seed}",
        f"stream={record.stream}",
        f"M={len(record)}",
        "columns=" + " ".join(COLUMNS[record.scheme]),
    ]
    buf = io.StringIO()
    for line in head:
        buf.write(f"# {line}\n")
    o = record.outcomes
    for i, d in enumerate(record.deltas):
        if record.scheme == "direct":
            vals = DIRECT_LABELS[o[i]]
        elif record.scheme == "gjc":
            vals = (int(o[i]),)
        elif record.scheme == "heterodyne":
            vals = tuple(repr(float(x)) for x in (o[i, 0].real, o[i, 0].imag, o[i, 1].real, o[i, 1].imag))
        else:
            vals = (repr(float(o[i, 0])), repr(float(o[i, 1])))
        buf.write(" ".join([repr(float(d))] + [str(v) for v in vals]) + "\n")
    text = buf.getvalue()
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)


def read_record(source):
    """Inverse of :func:`write_record`."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    meta, rows = {}, []
    for line in lines:
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k] = v
            elif body != RECORD_VERSION:
                raise ValueError(f"unsupported record header {body!r}")
        elif line.strip():
            rows.append(line.split())
    scheme = meta["scheme"]
    m = int(meta["M"])
    if len(rows) != m:
        raise ValueError(f"record declares M={m} but has {len(rows)} shots")
    deltas = np.array([float(r[0]) for r in rows])
    if scheme == "direct":
        out = np.array([DIRECT_LABELS.index((int(r[1]), int(r[2]))) for r in rows], dtype=np.int64)
    elif scheme == "gjc":
        out = np.array([int(r[1]) for r in rows], dtype=np.int64)
    elif scheme == "heterodyne":
        f = np.array([[float(x) for x in r[1:5]] for r in rows]).reshape(m, 4)
        out = np.stack([f[:, 0] + 1j * f[:, 1], f[:, 2] + 1j * f[:, 3]], axis=1)
    else:
        out = np.array([[float(x) for x in r[1:3]] for r in rows]).reshape(m, 2)
    g = None if meta.get("g1", "") == "" else complex(float(meta["g1"]), float(meta["g2"]))
    seed = None if meta.get("seed", "") == "" else int(meta["seed"])
    return MeasurementRecord(scheme, float(meta["epsilon"]), deltas, out, g, seed, int(meta["stream"]))
