"""Averages of twisted L-values over primitive characters modulo p^a.

For P = p^a, x = P^(2d(1-gamma)) and y = P^(2d gamma), each completed value
L-hat(E, rho (x) chi, beta) is expanded with the approximate functional
equation at the parameter y / N(E, rho (x) chi).  Summing over primitive chi
splits the result into the n = 1 term A(1), the remaining first-sum terms
Sigma_1 (weighted by sum_chi chi(n)) and the whole second sum Sigma_2
(weighted by sum_chi w_chi conj(chi(n))).

Character sums over all chi mod P are computed at once: bucket the summand
by residue, reorder the buckets by discrete logarithm, and take one FFT.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .afe import AFEWeights, afe_weights, default_y_pair, gamma_factor, solve_root_number_from_parts
from .artin import ArtinRep, lemma2_threshold
from .characters import (
    DirichletCharacter,
    _check_odd_prime,
    discrete_log_table,
    find_generator,
    phi_prime_power,
    primitive_indices,
)
from .errors import DomainError, RootNumberError, UnsupportedConfigurationError
from .lfunction import CoefficientTable, EllipticCurve, dirichlet_coefficients, pair_conductor
from .numerics import compensated_sum

# ---------------------------------------------------------------- parameter algebra


def sigma_threshold(d: int) -> float:
    """(6d - 1) / (4d + 2): the least sigma admitting a valid gamma for d >= 2."""
    if d < 1:
        raise DomainError("d must be >= 1")
    return (6 * d - 1) / (4 * d + 2)


@dataclass(frozen=True)
class GammaWindow:
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return not self.lo < self.hi

    def __contains__(self, g) -> bool:
        return self.lo < g < self.hi


def gamma_window(d: int, sigma: float) -> GammaWindow:
    """Open interval of gamma for which both error sums are o(P^(2d(1-sigma)))-small."""
    if d < 1:
        raise DomainError("d must be >= 1")
    if not 1.0 < sigma < 1.5:
        raise DomainError("gamma_window needs 1 < sigma < 3/2")
    s = Fraction(sigma)
    lo = max(1 - 1 / (2 * d * (Fraction(3, 2) - s)), Fraction(1, 2 * d))
    hi = (1 + 4 * d * (s - 1)) / (4 * d * (s - Fraction(1, 2)))
    if d >= 2 and not sigma > sigma_threshold(d):
        # within rounding of the threshold the exact width is below float resolution
        hi = lo
    return GammaWindow(float(lo), float(hi))


# ---------------------------------------------------------------- Poisson checks

_BERNOULLI = [1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510]


def _im_recip_tail(z: complex, k0: int) -> float:
    """sum_{k >= k0} Im(1 / (k + z)) by Euler-Maclaurin (Im z != 0)."""
    w = k0 + z
    total = -math.atan2(w.imag, w.real)  # integral from k0 to infinity
    total += 0.5 * (1.0 / w).imag
    for j, b in enumerate(_BERNOULLI, start=1):
        order = 2 * j - 1
        # f^(order)(k0) = (-1)^order order! / w^(order+1)
        deriv = ((-1) ** order * math.factorial(order) / w ** (order + 1)).imag
        total -= b / math.factorial(2 * j) * deriv
    return total


def _H(u):
    return 1.0 / (math.pi * (1.0 + np.asarray(u, dtype=float) ** 2))


@dataclass(frozen=True)
class PoissonResult:
    lhs: complex
    rhs: complex

    @property
    def residual(self) -> float:
        return float(abs(self.lhs - self.rhs))


def poisson_sides(y: float, n_terms: int | None = None) -> PoissonResult:
    """sum_n H(n/y) against y sum_h T(y h), H(u) = 1/(pi(1+u^2)), T(u) = e^(-2 pi |u|)."""
    if not y > 0:
        raise DomainError("y must be positive")
    m = int(n_terms) if n_terms else int(20 * y + 40)
    n = np.arange(1, m)
    head = _H(0.0) + 2.0 * compensated_sum(_H(n / y))
    # tail n >= m: h(n) = (y/pi) Im(1/(n - i y))
    tail = (y / math.pi) * _im_recip_tail(complex(0.0, -y), m)
    lhs = head + 2.0 * tail
    h_max = int(40.0 / (2 * math.pi * y)) + 2
    h = np.arange(1, h_max + 1)
    rhs = y * (1.0 + 2.0 * compensated_sum(np.exp(-2 * math.pi * y * h)))
    # geometric tail beyond h_max is below e^(-40) relative
    return PoissonResult(complex(lhs), complex(rhs))


def poisson_check(y: float, n_terms: int | None = None) -> float:
    return poisson_sides(y, n_terms).residual


def _as_local_pieces(chi: DirichletCharacter):
    if len(chi.locals) != 1:
        raise DomainError("twisted Poisson check needs a character of prime-power modulus")
    return chi.locals[0]


def twisted_poisson_sides(chi: DirichletCharacter, y: float, include_zero: bool = True) -> PoissonResult:
    """sum_n chi(n) H(n/y) against (y/m) sum_h tau_h(chi) T(y h / m).

    The right side is summed in closed form over each residue class of h;
    the left side is a finite sum plus Euler-Maclaurin tails per residue.
    """
    from .characters import all_gauss_sums

    lc = _as_local_pieces(chi)
    if chi.is_principal:
        raise DomainError("twisted Poisson check needs a non-principal character")
    if not y > 0:
        raise DomainError("y must be positive")
    m = lc.modulus
    vals = chi.values(np.arange(m))
    k0 = int((20 * y + 40) / m) + 2  # terms n = r + k m with k < k0 summed directly
    n = np.arange(1, k0 * m)
    head = compensated_sum(chi.values(n) * _H(n / y))
    tail = 0.0 + 0.0j
    for r in range(m):
        if vals[r] == 0:
            continue
        z = complex(r, -y) / m
        tail += vals[r] * (y / (math.pi * m)) * _im_recip_tail(z, k0)
    positive = head + tail
    lhs = positive * (1.0 + chi(m - 1))  # chi(-n) = chi(-1) chi(n); n = 0 contributes chi(0) = 0
    tau = all_gauss_sums(chi)
    weights = _residue_class_weights(y, m)
    if not include_zero:
        weights[0] = 0.0
    rhs = (y / m) * compensated_sum(tau * weights)
    return PoissonResult(complex(lhs), complex(rhs))


def _residue_class_weights(y: float, m: int) -> np.ndarray:
    """sum over h = j mod m of exp(-2 pi y |h| / m), for j = 0 .. m-1."""
    j = np.arange(m)
    q = math.exp(-2 * math.pi * y)
    wts = np.exp(-2 * math.pi * y * j / m) + np.where(j > 0, np.exp(-2 * math.pi * y * (m - j) / m), 0.0)
    wts[0] = 1.0 + q
    return wts / (1.0 - q)


def twisted_poisson_check(chi: DirichletCharacter, y: float) -> float:
    return twisted_poisson_sides(chi, y).residual


# ---------------------------------------------------------------- batched character sums


@dataclass(frozen=True)
class CharacterBatch:
    """All characters mod p^a in discrete-log order, restricted to primitive ones."""

    p: int
    a: int

    @property
    def modulus(self) -> int:
        return self.p ** self.a

    @property
    def phi(self) -> int:
        return phi_prime_power(self.p, self.a)

    @property
    def indices(self) -> np.ndarray:
        return primitive_indices(self.p, self.a)

    @property
    def count(self) -> int:
        return int(self.indices.size)

    def _powers(self) -> np.ndarray:
        g = find_generator(self.p, self.a)
        out = np.empty(self.phi, dtype=np.int64)
        x = 1
        for k in range(self.phi):
            out[k] = x
            x = x * g % self.modulus
        return out

    def _buckets(self, n: np.ndarray, vals: np.ndarray) -> np.ndarray:
        r = n % self.modulus
        re = np.bincount(r, weights=vals.real, minlength=self.modulus)
        im = np.bincount(r, weights=vals.imag, minlength=self.modulus)
        return (re + 1j * im)[self._powers()]

    def sums(self, n: np.ndarray, vals: np.ndarray) -> np.ndarray:
        """sum_n chi_j(n) vals[n] for each primitive index j."""
        b = self._buckets(n, vals)
        return (self.phi * np.fft.ifft(b))[self.indices]

    def conj_sums(self, n: np.ndarray, vals: np.ndarray) -> np.ndarray:
        """sum_n conj(chi_j(n)) vals[n] for each primitive index j."""
        return np.fft.fft(self._buckets(n, vals))[self.indices]

    def character(self, j: int) -> DirichletCharacter:
        return DirichletCharacter.from_local(self.p, self.a, int(j))


def primitive_char_sums(n: np.ndarray, p: int, a: int) -> np.ndarray:
    """Vectorised sum over primitive chi mod p^a of chi(n) (0 when p | n)."""
    P = p ** a
    n = np.asarray(n, dtype=np.int64)
    out = np.zeros(n.shape, dtype=np.int64)
    unit = n % p != 0
    low = p ** (a - 1)
    out[unit & ((n - 1) % low == 0)] = -phi_prime_power(p, a - 1)
    out[unit & ((n - 1) % P == 0)] = phi_prime_power(p, a) - phi_prime_power(p, a - 1)
    return out


# ---------------------------------------------------------------- the experiment


@dataclass(frozen=True)
class ExperimentConfig:
    curve: EllipticCurve
    rep: ArtinRep
    p: int
    a_min: int | None = None
    a_max: int = 4
    beta: complex = 1.4
    gamma: float = 0.65
    epsilon: float = 0.05
    tol: float = 1e-12
    nonvanishing_threshold: float = 1e-6
    seed: int = 20240101
    threads: int = 1

    def __post_init__(self):
        _check_odd_prime(self.p)
        object.__setattr__(self, "beta", complex(self.beta))
        d = self.rep.dim
        sigma = self.beta.real
        if self.curve.conductor % self.p == 0 or not self.curve.is_good(self.p):
            raise UnsupportedConfigurationError(f"E must have good reduction at p = {self.p}")
        if not 1.0 < sigma < 1.5:
            raise DomainError("need 1 < Re(beta) < 3/2")
        if d >= 2 and not sigma > sigma_threshold(d):
            raise DomainError(f"Re(beta) = {sigma} is not above the threshold {sigma_threshold(d):.6f} for d = {d}")
        window = gamma_window(d, sigma)
        if self.gamma not in window:
            raise DomainError(f"gamma = {self.gamma} lies outside the admissible window ({window.lo:.6f}, {window.hi:.6f})")
        threshold = lemma2_threshold(self.rep, self.p).threshold
        if self.a_min is None:
            object.__setattr__(self, "a_min", threshold + 1)
        if self.a_min < threshold:
            raise DomainError(f"a_min = {self.a_min} is below the twisting threshold {threshold}")
        if self.a_max < self.a_min:
            raise DomainError("a_max must be >= a_min")
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if not 0 < self.tol < 1e-4:
            raise DomainError("tol must lie in (0, 1e-4)")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")

    @property
    def d(self) -> int:
        return self.rep.dim

    @property
    def a_values(self) -> list[int]:
        return list(range(self.a_min, self.a_max + 1))


@dataclass
class ARecord:
    a: int
    primitive_count: int
    A1: complex
    Sigma1: complex
    Sigma2: complex
    total: complex
    independent_total: complex
    ratio1: float
    ratio2: float
    nonvanishing_count: int
    max_error_estimate: float
    wall_time: float
    conductor: int
    x: float
    y: float
    truncation_first: int
    truncation_second: int
    sigma1_beyond_x_cut: complex
    sigma2_beyond_y_cut: complex
    A1_per_character: complex
    root_numbers: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    sigma1_support_ok: bool = True

    @property
    def decomposition_residual(self) -> float:
        return float(abs(self.total - self.independent_total) / max(abs(self.independent_total), 1e-300))


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    records: list

    def by_a(self, a: int) -> ARecord:
        for r in self.records:
            if r.a == a:
                return r
        raise KeyError(a)


def _coefficients(cfg: ExperimentConfig, cutoff: int, cache: dict) -> CoefficientTable:
    table = cache.get("table")
    if table is None or table.cutoff < cutoff:
        table = dirichlet_coefficients(cfg.curve, cfg.rep, cutoff, seed=cfg.seed)
        cache["table"] = table
    return table


def _weights_for(cfg, a):
    P = cfg.p ** a
    d = cfg.d
    N = pair_conductor(cfg.curve, cfg.rep, cfg.p, a)
    y = float(P) ** (2 * d * cfg.gamma)
    x = float(P) ** (2 * d * (1 - cfg.gamma))
    w_exp = afe_weights(d, cfg.beta, N, y / N, cfg.tol)
    y1, y2 = default_y_pair(N)
    w_s1 = afe_weights(d, cfg.beta, N, y1, cfg.tol)
    w_s2 = afe_weights(d, cfg.beta, N, y2, cfg.tol)
    w_ind = afe_weights(d, cfg.beta, N, 1.1 / math.sqrt(N), cfg.tol)
    return N, x, y, w_exp, (w_s1, w_s2), w_ind


def _batch_parts(batch: CharacterBatch, c: np.ndarray, wts: AFEWeights):
    n1 = np.arange(1, wts.m1 + 1)
    n2 = np.arange(1, wts.m2 + 1)
    s1 = batch.sums(n1, c[1: wts.m1 + 1] * wts.w1[1:])
    s2 = batch.conj_sums(n2, np.conj(c[1: wts.m2 + 1]) * wts.w2[1:])
    e1 = wts.tail1 + 1e-15 * float(np.abs(c[1: wts.m1 + 1] * wts.w1[1:]).sum())
    e2 = wts.tail2 + 1e-15 * float(np.abs(c[1: wts.m2 + 1] * wts.w2[1:]).sum())
    return s1, s2, e1, e2


def solve_root_numbers(batch: CharacterBatch, c: np.ndarray, solve_weights) -> np.ndarray:
    wa, wb = solve_weights
    s1a, s2a, e1a, e2a = _batch_parts(batch, c, wa)
    s1b, s2b, e1b, e2b = _batch_parts(batch, c, wb)
    out = np.empty(batch.count, dtype=complex)
    for i in range(batch.count):
        try:
            out[i] = solve_root_number_from_parts((s1a[i], s2a[i], e1a, e2a), (s1b[i], s2b[i], e1b, e2b))
        except RootNumberError as exc:
            j = int(batch.indices[i])
            raise RootNumberError(f"character {batch.p}:{batch.a}:{j}: {exc}") from None
    return out


def _independent_values(batch, c, wts: AFEWeights, ws: np.ndarray):
    """Per-character L-hat from explicitly twisted coefficients (no FFT batching)."""
    m = max(wts.m1, wts.m2)
    n = np.arange(m + 1)
    vals = np.empty(batch.count, dtype=complex)
    for i, j in enumerate(batch.indices):
        chi = batch.character(int(j))
        tw = c[: m + 1] * chi.values(n)
        s1 = compensated_sum(tw[1: wts.m1 + 1] * wts.w1[1:])
        s2 = compensated_sum(np.conj(tw[1: wts.m2 + 1]) * wts.w2[1:])
        vals[i] = s1 + ws[i] * s2
    err = wts.tail1 + wts.tail2
    return vals, err


def _run_one(cfg: ExperimentConfig, a: int, plan, table: CoefficientTable) -> ARecord:
    t0 = time.perf_counter()
    N, x, y, w_exp, solve_w, w_ind = plan
    batch = CharacterBatch(cfg.p, a)
    c = table.values
    ws = solve_root_numbers(batch, c, solve_w)

    count = batch.count
    A1 = count * w_exp.w1[1]
    n1 = np.arange(2, w_exp.m1 + 1)
    pcs = primitive_char_sums(n1, cfg.p, a)
    terms1 = pcs * c[2: w_exp.m1 + 1] * w_exp.w1[2:]
    sigma1 = compensated_sum(terms1)
    # support of the character sum: n = 1 mod p^(a-1)
    support_ok = bool(np.all((pcs == 0) | ((n1 - 1) % cfg.p ** (a - 1) == 0)))
    # cross-check the divisor formula against the FFT character sums
    s1_batch, s2_batch, e1, e2 = _batch_parts(batch, c, w_exp)
    sigma1_fft = compensated_sum(s1_batch) - A1
    if abs(sigma1_fft - sigma1) > 1e-9 * (abs(A1) + abs(sigma1)):
        support_ok = False
    sigma2 = compensated_sum(ws * s2_batch)
    total = A1 + sigma1 + sigma2

    ind_vals, ind_err = _independent_values(batch, c, w_ind, ws)
    independent_total = compensated_sum(ind_vals)
    linf = complex(gamma_factor(cfg.beta, cfg.d))
    nonvanishing = int(np.sum(np.abs(ind_vals / linf) > cfg.nonvanishing_threshold))

    x_cut = x ** (1 + cfg.epsilon)
    y_cut = y ** (1 + cfg.epsilon)
    beyond1 = compensated_sum(np.where(n1 > x_cut, terms1, 0))
    n2 = np.arange(1, w_exp.m2 + 1)
    # per-n weights of Sigma_2 via B(n) = sum_chi w_chi conj(chi(n))
    b_n = _weighted_conj_char_sums(batch, ws, n2)
    terms2 = b_n * np.conj(c[1: w_exp.m2 + 1]) * w_exp.w2[1:]
    beyond2 = compensated_sum(np.where(n2 > y_cut, terms2, 0))

    max_err = float(count * (e1 + e2) + count * ind_err)
    return ARecord(
        a=a, primitive_count=count, A1=complex(A1), Sigma1=complex(sigma1), Sigma2=complex(sigma2),
        total=complex(total), independent_total=complex(independent_total),
        ratio1=float(abs(sigma1) / abs(A1)), ratio2=float(abs(sigma2) / abs(A1)),
        nonvanishing_count=nonvanishing, max_error_estimate=max_err,
        wall_time=time.perf_counter() - t0, conductor=int(N), x=float(x), y=float(y),
        truncation_first=int(w_exp.m1), truncation_second=int(w_exp.m2),
        sigma1_beyond_x_cut=complex(beyond1), sigma2_beyond_y_cut=complex(beyond2),
        A1_per_character=complex(A1 / count), root_numbers=ws, values=ind_vals,
        sigma1_support_ok=support_ok,
    )


def _weighted_conj_char_sums(batch: CharacterBatch, ws: np.ndarray, n: np.ndarray) -> np.ndarray:
    """B'(n) = sum_j w_j conj(chi_j(n)) for each n, through one FFT over indices."""
    full = np.zeros(batch.phi, dtype=complex)
    full[batch.indices] = ws
    # sum_j full[j] e^(-2 pi i j k / phi) = fft(full)[k]
    per_log = np.fft.fft(full)
    dlog = discrete_log_table(batch.p, batch.a)[n % batch.modulus]
    return np.where(dlog >= 0, per_log[np.maximum(dlog, 0)], 0)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    plans = {a: _weights_for(cfg, a) for a in cfg.a_values}
    need = max(max(pl[3].m1, pl[3].m2, pl[4][0].m1, pl[4][0].m2, pl[4][1].m1, pl[4][1].m2,
                   pl[5].m1, pl[5].m2) for pl in plans.values())
    table = _coefficients(cfg, need, {})
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            records = list(pool.map(lambda a: _run_one(cfg, a, plans[a], table), cfg.a_values))
    else:
        records = [_run_one(cfg, a, plans[a], table) for a in cfg.a_values]
    return ExperimentReport(cfg, records)


# ---------------------------------------------------------------- diagonal / off-diagonal


@dataclass(frozen=True)
class DiagonalSplit:
    diag: float
    offdiag: float
    max_gauss_abs: float
    pairs: int


def coprime_theta(y: float, p: int) -> float:
    """sum over n in Z with p not dividing n of H(n/y), via Poisson."""
    return float(y / math.tanh(math.pi * y) - (y / p) / math.tanh(math.pi * y / p))


def diagonal_offdiagonal_split(cfg: ExperimentConfig, a: int, root_numbers: np.ndarray | None = None) -> DiagonalSplit:
    """Diagonal and off-diagonal parts of sum_{chi, psi} P^(4d(1-sigma)) |w_chi conj(w_psi) sum_n conj(chi) psi(n) H(n/y)|.

    Pairs are grouped by the index difference of psi / chi, so every pair is
    counted exactly without sampling.
    """
    batch = CharacterBatch(cfg.p, a)
    P = batch.modulus
    d = cfg.d
    sigma = cfg.beta.real
    y = float(P) ** (2 * d * cfg.gamma)
    if root_numbers is None:
        plan = _weights_for(cfg, a)
        need = max(plan[4][0].m1, plan[4][0].m2, plan[4][1].m1, plan[4][1].m2)
        table = dirichlet_coefficients(cfg.curve, cfg.rep, need, seed=cfg.seed)
        root_numbers = solve_root_numbers(batch, table.values, plan[4])
    mags = np.abs(root_numbers)
    scale = float(P) ** (4 * d * (1 - sigma))
    diag = scale * float(np.sum(mags ** 2)) * coprime_theta(y, cfg.p)

    # Gauss sums tau_h of the character with index delta, for all h and delta
    phi = batch.phi
    powers = batch._powers()
    h = np.arange(P)
    phase = np.exp(2j * np.pi * ((h[:, None] * powers[None, :]) % P) / P)  # [h, k]
    tau = phi * np.fft.ifft(phase, axis=1)  # tau[h, delta]
    wts = _residue_class_weights(y, P)
    s_delta = (y / P) * (wts[:, None] * tau).sum(axis=0)  # sum_n xi_delta(n) H(n/y)

    idx = batch.indices
    full = np.zeros(phi)
    full[idx] = mags
    # correlation: corr[delta] = sum_j full[j] full[j + delta]
    corr = np.real(np.fft.ifft(np.conj(np.fft.fft(full)) * np.fft.fft(full)))
    corr[0] = 0.0
    offdiag = scale * float(np.sum(np.abs(corr) * np.abs(s_delta)))
    pairs = batch.count * (batch.count - 1)
    return DiagonalSplit(diag, offdiag, float(np.abs(tau[1:]).max()), pairs)


def report_rows(report: ExperimentReport, timing: bool = True) -> list[dict]:
    rows = []
    for r in report.records:
        rows.append({
            "a": r.a, "primitive_count": r.primitive_count,
            "A1_re": r.A1.real, "A1_im": r.A1.imag,
            "S1_re": r.Sigma1.real, "S1_im": r.Sigma1.imag,
            "S2_re": r.Sigma2.real, "S2_im": r.Sigma2.imag,
            "ratio1": r.ratio1, "ratio2": r.ratio2,
            "nonvanishing_count": r.nonvanishing_count,
            "max_error_estimate": r.max_error_estimate,
            "wall_time_s": r.wall_time if timing else 0.0,
        })
    return rows


__all__ = [
    "sigma_threshold", "gamma_window", "GammaWindow", "poisson_check", "poisson_sides",
    "twisted_poisson_check", "twisted_poisson_sides", "CharacterBatch", "primitive_char_sums",
    "ExperimentConfig", "ExperimentReport", "ARecord", "run_experiment", "solve_root_numbers",
    "diagonal_offdiagonal_split", "DiagonalSplit", "coprime_theta", "report_rows",
]
