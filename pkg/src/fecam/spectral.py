"""Spectral kernels: DCT-II/III, DFT, symmetric extension, Fourier partial
sums, Gibbs overshoot probes and truncated-reconstruction analysis.

All transforms are plain O(L^2) applications of cached basis matrices.
Sequence lengths in this project stay small (L <= 720), so the matrices are
built once per (length, normalization) and reused; there is deliberately no
fast-transform path. Every function is pure and safe to call concurrently.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

#: Scale tags for the cosine transform. ``UNNORMALIZED`` is the bare cosine
#: sum f_l = sum_i x_i cos(pi*l/L*(i+1/2)); ``ORTHO`` applies sqrt(1/L) to
#: index 0 and sqrt(2/L) elsewhere so the transform matrix is orthogonal.
UNNORMALIZED = "unnormalized"
ORTHO = "ortho"

#: Limiting overshoot of a truncated Fourier sum next to a unit jump,
#: as a fraction of the jump size.
GIBBS_CONSTANT = 0.089489872236


def _as_signal(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("signal must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite values")
    return x


def _check_normalization(normalization: str) -> str:
    if normalization not in (UNNORMALIZED, ORTHO):
        raise ValueError(f"unknown normalization {normalization!r}")
    return normalization


@dataclass(frozen=True)
class Spectrum:
    """DCT coefficients of a signal, tagged with the scale they were made under."""

    coefficients: np.ndarray
    normalization: str

    def __post_init__(self):
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=float))
        _check_normalization(self.normalization)


@dataclass(frozen=True)
class FourierSeriesModel:
    """Truncated real Fourier series on one period.

    Evaluates 0.5*a0 + sum_n a_n cos(2 pi n x / period) + b_n sin(2 pi n x / period)
    for n up to ``max_order`` (the common length of ``cos_coeffs``/``sin_coeffs``).
    """

    period: float
    a0: float
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError("period must be positive")
        object.__setattr__(self, "cos_coeffs", np.asarray(self.cos_coeffs, dtype=float))
        object.__setattr__(self, "sin_coeffs", np.asarray(self.sin_coeffs, dtype=float))
        if self.cos_coeffs.shape != self.sin_coeffs.shape or self.cos_coeffs.ndim != 1:
            raise ValueError("cos/sin coefficient arrays must be 1-D with equal length")

    @property
    def max_order(self) -> int:
        return self.cos_coeffs.size


@dataclass(frozen=True)
class JumpProbe:
    """One-sided limits of a periodic function at a jump location."""

    location: float
    left_limit: float
    right_limit: float

    @property
    def jump(self) -> float:
        return self.right_limit - self.left_limit


# ---------------------------------------------------------------------------
# Cosine transform
# ---------------------------------------------------------------------------

def dct_basis(l: int, i: int, length: int) -> float:
    """Cosine basis entry cos(pi*l/length * (i + 1/2))."""
    if not (0 <= l < length and 0 <= i < length):
        raise ValueError(f"basis index out of range: l={l}, i={i}, length={length}")
    return float(np.cos(np.pi * l / length * (i + 0.5)))


@lru_cache(maxsize=64)
def dct_matrix(length: int, normalization: str = ORTHO) -> np.ndarray:
    """Forward transform matrix; row l holds the l-th cosine basis vector."""
    _check_normalization(normalization)
    if length < 1:
        raise ValueError("length must be >= 1")
    i = np.arange(length)
    mat = np.cos(np.pi * np.outer(np.arange(length), i + 0.5) / length)
    if normalization == ORTHO:
        scale = np.full(length, np.sqrt(2.0 / length))
        scale[0] = np.sqrt(1.0 / length)
        mat = mat * scale[:, None]
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=64)
def _idct_matrix(length: int, normalization: str) -> np.ndarray:
    fwd = dct_matrix(length, normalization)
    if normalization == ORTHO:
        inv = fwd.T.copy()
    else:
        # Rows of the bare cosine matrix have squared norm L (l=0) and L/2
        # (l>0), so the inverse is the transpose with those weights undone.
        weights = np.full(length, 2.0 / length)
        weights[0] = 1.0 / length
        inv = fwd.T * weights
    inv.setflags(write=False)
    return inv


def dct_forward(x, normalization: str = ORTHO) -> Spectrum:
    """Type-II cosine transform of a 1-D signal."""
    x = _as_signal(x)
    mat = dct_matrix(x.size, _check_normalization(normalization))
    return Spectrum(mat @ x, normalization)


def dct_inverse(spectrum: Spectrum) -> np.ndarray:
    """Exact inverse of :func:`dct_forward` under the spectrum's own tag."""
    coeffs = np.asarray(spectrum.coefficients, dtype=float)
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise ValueError("spectrum must hold a nonempty 1-D coefficient vector")
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("spectrum contains non-finite coefficients")
    return _idct_matrix(coeffs.size, spectrum.normalization) @ coeffs


# ---------------------------------------------------------------------------
# Fourier transform (unitary convention)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _dft_matrix(length: int, inverse: bool) -> np.ndarray:
    k = np.arange(length)
    sign = 2j if inverse else -2j
    mat = np.exp(sign * np.pi * np.outer(k, k) / length) / np.sqrt(length)
    mat.setflags(write=False)
    return mat


def dft_forward(x) -> np.ndarray:
    """Unitary DFT of a real 1-D signal; returns the complex bin vector."""
    x = _as_signal(x)
    return _dft_matrix(x.size, inverse=False) @ x


def dft_inverse(coefficients) -> np.ndarray:
    """Unitary inverse DFT. Returns the real part; the caller is expected to
    pass conjugate-symmetric bins (anything produced from a real signal)."""
    c = np.asarray(coefficients, dtype=complex)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("coefficients must be a nonempty 1-D sequence")
    return (_dft_matrix(c.size, inverse=True) @ c).real


def symmetric_extension(x) -> np.ndarray:
    """Half-sample even extension [x_0 .. x_{L-1}, x_{L-1} .. x_0].

    The extension is palindromic, so its periodic repetition has no endpoint
    jump regardless of how the original signal's ends differ.
    """
    x = _as_signal(x)
    return np.concatenate([x, x[::-1]])


def dct_via_even_dft(x) -> np.ndarray:
    """Unnormalized DCT coefficients computed through the DFT of the even
    extension: f_l = 0.5*sqrt(2L) * Re[exp(-i pi l / (2L)) * DFT(ext)_l].

    Independent of the cosine-matrix path; used as the cross-check oracle for
    the two transforms agreeing on even-extended input.
    """
    x = _as_signal(x)
    length = x.size
    bins = dft_forward(symmetric_extension(x))[:length]
    phase = np.exp(-1j * np.pi * np.arange(length) / (2 * length))
    return 0.5 * np.sqrt(2 * length) * (phase * bins).real


# ---------------------------------------------------------------------------
# Fourier partial sums and the Gibbs probe
# ---------------------------------------------------------------------------

def fourier_partial_sum(model: FourierSeriesModel, order: int, x):
    """Evaluate the order-N partial sum of the series at x (scalar or array)."""
    if order < 0 or order > model.max_order:
        raise ValueError(f"order {order} outside [0, {model.max_order}]")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    total = np.full(x_arr.shape, 0.5 * model.a0)
    if order > 0:
        n = np.arange(1, order + 1)
        angles = 2 * np.pi * np.outer(x_arr, n) / model.period
        total = total + np.cos(angles) @ model.cos_coeffs[:order]
        total = total + np.sin(angles) @ model.sin_coeffs[:order]
    return total if np.ndim(x) else float(total[0])


def square_wave_series(amplitude: float = 1.0, period: float = 2 * np.pi,
                       max_order: int = 10_000) -> FourierSeriesModel:
    """Series of the +-amplitude square wave sign(sin(2 pi x / period)).

    Coefficients are analytic: b_n = 4A/(pi n) for odd n, zero otherwise.
    """
    n = np.arange(1, max_order + 1)
    sin_c = np.where(n % 2 == 1, 4 * amplitude / (np.pi * n), 0.0)
    return FourierSeriesModel(period=period, a0=0.0,
                              cos_coeffs=np.zeros(max_order), sin_coeffs=sin_c)


def square_wave_probe(amplitude: float = 1.0) -> JumpProbe:
    """Jump of the square wave at x=0: left limit -A, right limit +A."""
    return JumpProbe(location=0.0, left_limit=-amplitude, right_limit=amplitude)


def pulse_wave_series(duty: float = 1.0 / 3.0, period: float = 1.0,
                      max_order: int = 10_000) -> FourierSeriesModel:
    """Series of the 0/1 pulse that is 1 on (0, duty*period).

    a0 = 2*duty, a_n = sin(2 pi n d)/(pi n), b_n = (1 - cos(2 pi n d))/(pi n).
    Unlike the square wave, its partial sums at the jump are not pinned to the
    midpoint by symmetry, which makes it a real convergence probe.
    """
    if not 0 < duty < 1:
        raise ValueError("duty must lie in (0, 1)")
    n = np.arange(1, max_order + 1)
    cos_c = np.sin(2 * np.pi * n * duty) / (np.pi * n)
    sin_c = (1 - np.cos(2 * np.pi * n * duty)) / (np.pi * n)
    return FourierSeriesModel(period=period, a0=2 * duty,
                              cos_coeffs=cos_c, sin_coeffs=sin_c)


def pulse_wave_probe() -> JumpProbe:
    return JumpProbe(location=0.0, left_limit=0.0, right_limit=1.0)


def gibbs_overshoot(model: FourierSeriesModel, probe: JumpProbe, order: int) -> float:
    """Overshoot S_N f(x0 + period/(2N)) - f(x0+) of the order-N partial sum.

    For a jump of size a this converges to a * GIBBS_CONSTANT; the sign of
    the limit follows the sign of the jump.
    """
    if probe.jump == 0:
        raise ValueError("probe has zero jump; overshoot is undefined")
    if order < 1:
        raise ValueError("order must be >= 1")
    at = probe.location + model.period / (2 * order)
    return fourier_partial_sum(model, order, at) - probe.right_limit


def gibbs_sweep(model: FourierSeriesModel, probe: JumpProbe, orders,
                path=None) -> list[tuple[int, float, float]]:
    """Overshoot per order next to the probe's jump; rows (N, overshoot, target)."""
    target = probe.jump * GIBBS_CONSTANT
    rows = [(int(n), gibbs_overshoot(model, probe, int(n)), target) for n in orders]
    if path is not None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["N", "overshoot", "target"])
            for n, overshoot, tgt in rows:
                writer.writerow([n, f"{overshoot:.9g}", f"{tgt:.9g}"])
    return rows


# ---------------------------------------------------------------------------
# Truncated reconstruction and energy compaction
# ---------------------------------------------------------------------------

def reconstruct_truncated(x, n: int, kind: str) -> tuple[np.ndarray, float]:
    """Rebuild x from its n lowest-frequency components.

    kind="dct" keeps orthonormal coefficients 0..n-1. kind="dft" keeps the DC
    bin plus the ceil((n-1)/2) lowest conjugate bin pairs so the
    reconstruction stays real. Returns (reconstruction, euclidean error).
    """
    x = _as_signal(x)
    length = x.size
    if not 1 <= n <= length:
        raise ValueError(f"component count {n} outside [1, {length}]")
    if kind == "dct":
        spec = dct_forward(x, ORTHO)
        kept = spec.coefficients.copy()
        kept[n:] = 0.0
        recon = dct_inverse(Spectrum(kept, ORTHO))
    elif kind == "dft":
        bins = dft_forward(x)
        top = (n - 1 + 1) // 2  # ceil((n-1)/2)
        keep = np.zeros(length, dtype=bool)
        keep[0] = True
        for k in range(1, top + 1):
            keep[k] = True
            keep[length - k] = True
        recon = dft_inverse(np.where(keep, bins, 0.0))
    else:
        raise ValueError(f"unknown transform kind {kind!r}")
    return recon, float(np.linalg.norm(recon - x))


def boundary_overshoot_compare(x, n: int, path=None) -> tuple[float, float]:
    """Max reconstruction error over the outermost two samples at each end,
    for DCT- and DFT-truncation to n components.

    The DFT's implicit periodic extension sees a jump whenever the signal's
    endpoints differ, so ramp-like inputs ring at the boundary; the even
    extension behind the DCT does not.
    """
    x = _as_signal(x)
    dct_rec, _ = reconstruct_truncated(x, n, "dct")
    dft_rec, _ = reconstruct_truncated(x, n, "dft")
    edge = np.r_[0:2, x.size - 2:x.size] if x.size >= 4 else np.arange(x.size)
    dct_err = float(np.max(np.abs(dct_rec[edge] - x[edge])))
    dft_err = float(np.max(np.abs(dft_rec[edge] - x[edge])))
    if path is not None:
        _write_error_rows(path, [(n, dct_err, dft_err)])
    return dct_err, dft_err


def energy_compaction_report(x, ns, path=None) -> list[tuple[int, float, float]]:
    """Reconstruction error of both transforms per component count.

    Rows come back sorted by n as (n, dct_err, dft_err), ready for plotting.
    """
    ns = sorted(int(n) for n in ns)
    if not ns:
        raise ValueError("ns must be nonempty")
    rows = []
    for n in ns:
        _, dct_err = reconstruct_truncated(x, n, "dct")
        _, dft_err = reconstruct_truncated(x, n, "dft")
        rows.append((n, dct_err, dft_err))
    if path is not None:
        _write_error_rows(path, rows)
    return rows


def _write_error_rows(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "dct_err", "dft_err"])
        for n, dct_err, dft_err in rows:
            writer.writerow([n, f"{dct_err:.9g}", f"{dft_err:.9g}"])


def low_frequency_signal(length: int = 16, components: int = 3) -> np.ndarray:
    """Sum of the first few cosine basis vectors; the energy-compaction fixture."""
    i = np.arange(length)
    sig = np.zeros(length)
    for l in range(components):
        sig += np.cos(np.pi * l / length * (i + 0.5))
    return sig
